#ifndef TYPEGRAPH_PREDICTOR_HPP
#define TYPEGRAPH_PREDICTOR_HPP

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "typegraph/gnn/gnn.hpp"

namespace typegraph {

class EmptyCandidateSet : public std::runtime_error {
public:
    EmptyCandidateSet() : std::runtime_error("candidate set is empty") {}
};

/// Prediction space for one project: the fixed library-type list plus the
/// project's own classes/interfaces (pointer-style, resolved to graph nodes).
struct CandidateSet {
    std::vector<std::string> lib_types;
    std::vector<std::pair<std::string, int>> user_types;  // (name, defining node)

    std::size_t size() const { return lib_types.size() + user_types.size(); }

    std::string name_at(std::size_t i) const {
        if (i < lib_types.size()) return lib_types[i];
        return user_types[i - lib_types.size()].first;
    }

    /// Candidates for a project graph: lib list as-is, user types in
    /// declaration order.
    static CandidateSet for_graph(const TypeDependencyGraph& g,
                                  std::vector<std::string> lib_types, bool include_user = true) {
        CandidateSet c;
        c.lib_types = std::move(lib_types);
        if (include_user)
            for (const auto& name : g.class_order)
                c.user_types.emplace_back(name, g.user_type_nodes.at(name));
        return c;
    }

    int index_of(const std::string& type_name) const {
        for (std::size_t i = 0; i < lib_types.size(); ++i)
            if (lib_types[i] == type_name) return int(i);
        for (std::size_t i = 0; i < user_types.size(); ++i)
            if (user_types[i].first == type_name) return int(lib_types.size() + i);
        return -1;
    }
};

struct PredictionRow {
    int node = -1;
    std::vector<std::string> candidates;  // candidate-list order
    std::vector<double> probs;
    std::vector<int> ranking;  // candidate indices by descending probability
};

/// Compatibility score s_{n,c} = MLP(v_n || u_c) with hidden sizes 32/16/8.
template <typename T>
Var<T> score(Tape<T>& tape, const ParamStore<T>& params, Var<T> v_n, Var<T> u_c, T slope = T(0.2)) {
    if (v_n.value().size() != u_c.value().size())
        throw ShapeMismatch("score", u_c.value().shape_str(), v_n.value().shape_str());
    Var<T> x = concat<T>({v_n, u_c});
    std::size_t hs[3] = {32, 16, 8};
    for (int i = 0; i < 3; ++i) {
        std::string p = "pred/l" + std::to_string(i);
        Var<T> W = tape.param(p + "/W", {hs[i], x.value().size()}, params);
        Var<T> b = tape.param(p + "/b", {hs[i]}, params);
        x = leaky_relu(linear(W, x, b), slope);
    }
    Var<T> W = tape.param("pred/out/W", {1, x.value().size()}, params);
    Var<T> b = tape.param("pred/out/b", {1}, params);
    return linear(W, x, b);
}

/// Candidate embedding u_c: trainable row for a library type, the type's own
/// node embedding for a user type.
template <typename T>
Var<T> candidate_embedding(Tape<T>& tape, const ParamStore<T>& params, const CandidateSet& cands,
                           std::size_t idx, const EmbeddingState<T>& s, std::size_t d) {
    if (idx < cands.lib_types.size())
        return tape.param("lib/" + cands.lib_types[idx], {d}, params);
    return s.rows[std::size_t(cands.user_types[idx - cands.lib_types.size()].second)];
}

/// Score vector over the full candidate set for one node.
template <typename T>
Var<T> candidate_logits(Tape<T>& tape, const ParamStore<T>& params, int node,
                        const CandidateSet& cands, const EmbeddingState<T>& s) {
    if (cands.size() == 0) throw EmptyCandidateSet();
    std::size_t d = s.rows.at(std::size_t(node)).value().size();
    std::vector<Var<T>> scores;
    for (std::size_t i = 0; i < cands.size(); ++i)
        scores.push_back(score(tape, params, s.rows[std::size_t(node)],
                               candidate_embedding(tape, params, cands, i, s, d)));
    return concat(scores);
}

template <typename T>
PredictionRow predict_distribution(Tape<T>& tape, const ParamStore<T>& params, int node,
                                   const CandidateSet& cands, const EmbeddingState<T>& s) {
    Var<T> probs = softmax(candidate_logits(tape, params, node, cands, s));
    PredictionRow row;
    row.node = node;
    const auto& pv = probs.value();
    for (std::size_t i = 0; i < cands.size(); ++i) {
        row.candidates.push_back(cands.name_at(i));
        row.probs.push_back(double(pv.data[i]));
    }
    row.ranking.resize(cands.size());
    std::iota(row.ranking.begin(), row.ranking.end(), 0);
    std::stable_sort(row.ranking.begin(), row.ranking.end(), [&](int a, int b) {
        return row.probs[std::size_t(a)] > row.probs[std::size_t(b)];
    });
    return row;
}

}  // namespace typegraph

#endif
