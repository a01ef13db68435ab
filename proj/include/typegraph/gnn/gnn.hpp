#ifndef TYPEGRAPH_GNN_GNN_HPP
#define TYPEGRAPH_GNN_GNN_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "typegraph/graph/extract.hpp"
#include "typegraph/graph/graph.hpp"
#include "typegraph/rng.hpp"
#include "typegraph/tape.hpp"

namespace typegraph {

/// Identifier-token vocabulary: tokens seen more than once across the
/// training corpus get their own embedding row, the rest share the
/// unknown buckets.
struct Vocab {
    std::set<std::string> tokens;

    bool contains(const std::string& t) const { return tokens.count(t) != 0; }

    static void count_graph_tokens(const TypeDependencyGraph& g,
                                   std::map<std::string, int>& counts) {
        for (const auto& n : g.nodes)
            for (const auto& t : n.name_tokens) counts[t] += 1;
        for (const auto& e : g.edges)
            if (e.kind == EdgeKind::Access || e.kind == EdgeKind::Name ||
                e.kind == EdgeKind::Object || e.kind == EdgeKind::Usage)
                for (const auto& l : e.labels)
                    for (const auto& t : tokenize_identifier(l)) counts[t] += 1;
    }

    static Vocab build(const std::vector<const TypeDependencyGraph*>& graphs) {
        std::map<std::string, int> counts;
        for (const auto* g : graphs) count_graph_tokens(*g, counts);
        Vocab v;
        for (const auto& [t, c] : counts)
            if (c > 1) v.tokens.insert(t);
        return v;
    }
};

struct GnnConfig {
    int d = 32;
    int K = 6;
    int hidden = 32;
    int unknown_buckets = 50;
    int position_cap = 16;
    // ablation switches
    bool contextual_edges = true;
    bool logical_edges = true;
    bool npair_attention = true;
    bool attention_aggregation = true;
};

template <typename T>
struct EmbeddingState {
    std::vector<Var<T>> rows;  // one d-vector per node
    int step = 0;
};

class UnknownConstantKind : public std::runtime_error {
public:
    explicit UnknownConstantKind(const std::string& kind)
        : std::runtime_error("unknown constant kind: " + kind) {}
};

class ArityMismatch : public std::runtime_error {
public:
    explicit ArityMismatch(const std::string& what) : std::runtime_error("arity mismatch: " + what) {}
};

class EmptyPairList : public std::runtime_error {
public:
    EmptyPairList() : std::runtime_error("NPairs edge needs at least one pair") {}
};

/// One forward pass of the message-passing network over a type dependency
/// graph. All trainable state lives in the ParamStore; one runner instance
/// is bound to one tape.
template <typename T>
class GnnRunner {
public:
    GnnRunner(const TypeDependencyGraph& g, Tape<T>& tape, const ParamStore<T>& params,
              const Vocab& vocab, const GnnConfig& cfg, std::uint64_t run_seed)
        : g_(g), tape_(tape), params_(params), vocab_(vocab), cfg_(cfg), run_seed_(run_seed) {}

    std::size_t dim() const { return std::size_t(cfg_.d); }

    EmbeddingState<T> init_embeddings() {
        EmbeddingState<T> s;
        s.step = 0;
        Var<T> generic = tape_.param("init/variable", {dim()}, params_);
        s.rows.reserve(g_.nodes.size());
        for (const auto& n : g_.nodes) {
            if (n.kind == TypeNode::Kind::Constant) {
                check_const_kind(n.const_type);
                s.rows.push_back(tape_.param("const/" + n.const_type, {dim()}, params_));
            } else {
                s.rows.push_back(generic);
            }
        }
        return s;
    }

    /// Mean of the per-token embeddings; out-of-vocabulary tokens share the
    /// seeded unknown buckets, an empty list uses the no-name vector.
    Var<T> embed_identifier(const std::vector<std::string>& tokens) {
        std::string key;
        for (const auto& t : tokens) key += t + "\x1f";
        auto it = ident_cache_.find(key);
        if (it != ident_cache_.end()) return it->second;
        Var<T> out;
        if (tokens.empty()) {
            out = tape_.param("ident/noname", {dim()}, params_);
        } else {
            std::vector<Var<T>> rows;
            for (const auto& t : tokens) rows.push_back(token_embedding(t));
            out = rows.size() == 1 ? rows[0] : mean_rows(stack_rows(rows));
        }
        ident_cache_.emplace(std::move(key), out);
        return out;
    }

    int unknown_bucket(const std::string& token) const {
        std::uint64_t h = fnv1a(token) ^ (run_seed_ * 0x9e3779b97f4a7c15ULL);
        splitmix64(h);
        return int(splitmix64(h) % std::uint64_t(cfg_.unknown_buckets));
    }

    using Message = std::pair<int, Var<T>>;  // (destination node, payload)

    std::vector<Message> msg_fixed(const Hyperedge& e, const EmbeddingState<T>& s, int step) {
        if (e.category != EdgeCategory::Fixed) throw ArityMismatch("msg_fixed on non-Fixed edge");
        check_arity(e);
        std::vector<Var<T>> inputs;
        for (int a : e.args) inputs.push_back(s.rows[a]);
        if (!e.labels.empty()) inputs.push_back(embed_identifier(tokenize_identifier(e.labels[0])));
        Var<T> input = inputs.size() == 1 ? inputs[0] : concat(inputs);
        std::vector<Message> out;
        std::string prefix =
            "step" + std::to_string(step) + "/fixed/" + edge_kind_name(e.kind) + "/arg";
        for (std::size_t j = 0; j < e.args.size(); ++j) {
            if (is_constant(e.args[j])) continue;
            out.emplace_back(e.args[j], mlp2(tape_, params_, prefix + std::to_string(j), input,
                                             std::size_t(cfg_.hidden), dim(), T(0.2)));
        }
        return out;
    }

    std::vector<Message> msg_nary(const Hyperedge& e, const EmbeddingState<T>& s, int step) {
        if (e.category != EdgeCategory::NAry) throw ArityMismatch("msg_nary on non-NAry edge");
        int alpha = e.args.at(0);
        std::string base = "step" + std::to_string(step) + "/nary/" + edge_kind_name(e.kind);
        std::vector<Message> out;
        for (std::size_t j = 1; j < e.args.size(); ++j) {
            Var<T> label = slot_label(e, j);
            int beta = e.args[j];
            if (!is_constant(alpha))
                out.emplace_back(alpha, mlp2(tape_, params_, base + "/alpha",
                                             concat<T>({label, s.rows[beta]}),
                                             std::size_t(cfg_.hidden), dim(), T(0.2)));
            if (!is_constant(beta))
                out.emplace_back(beta, mlp2(tape_, params_, base + "/beta",
                                            concat<T>({label, s.rows[alpha]}),
                                            std::size_t(cfg_.hidden), dim(), T(0.2)));
        }
        return out;
    }

    std::vector<Message> msg_npairs(const Hyperedge& e, const EmbeddingState<T>& s) {
        if (e.category != EdgeCategory::NPairs) throw ArityMismatch("msg_npairs on non-NPairs edge");
        if (e.args.size() < 4 || e.args.size() % 2 != 0) throw EmptyPairList();
        int head_a = e.args[0], head_b = e.args[1];
        std::vector<Var<T>> keys_a, vals_b, keys_b, vals_a;
        for (std::size_t i = 2; i + 1 < e.args.size(); i += 2) {
            keys_a.push_back(s.rows[e.args[i]]);
            vals_b.push_back(s.rows[e.args[i + 1]]);
            keys_b.push_back(s.rows[e.args[i + 1]]);
            vals_a.push_back(s.rows[e.args[i]]);
        }
        std::vector<Message> out;
        if (!is_constant(head_b)) out.emplace_back(head_b, attend(s.rows[head_a], keys_a, vals_b));
        if (!is_constant(head_a)) out.emplace_back(head_a, attend(s.rows[head_b], keys_b, vals_a));
        return out;
    }

    Var<T> aggregate(Var<T> v_prev, const std::vector<Var<T>>& msgs, int step) {
        if (msgs.empty()) return v_prev;
        std::string base = "step" + std::to_string(step) + "/aggr/";
        Var<T> M1 = tape_.param(base + "M1", {dim(), dim()}, params_);
        Var<T> M = stack_rows(msgs);
        Var<T> A1 = matmul(M, M1, false, true);  // row_e = M1 m_e
        if (!cfg_.attention_aggregation) return add(v_prev, mean_rows(A1));
        Var<T> M2 = tape_.param(base + "M2", {dim(), dim()}, params_);
        Var<T> A2 = matmul(M, M2, false, true);
        Var<T> logits = leaky_relu(matvec(A2, v_prev), T(0.2));
        Var<T> w = softmax(logits);
        return add(v_prev, vecmat(w, A1));
    }

    EmbeddingState<T> step(const EmbeddingState<T>& s) {
        int t = s.step + 1;
        std::vector<std::vector<Var<T>>> inbox(g_.nodes.size());
        for (const auto& e : g_.edges) {
            if (is_contextual(e.kind) ? !cfg_.contextual_edges : !cfg_.logical_edges) continue;
            std::vector<Message> msgs;
            switch (e.category) {
                case EdgeCategory::Fixed: msgs = msg_fixed(e, s, t); break;
                case EdgeCategory::NAry: msgs = msg_nary(e, s, t); break;
                case EdgeCategory::NPairs: msgs = msg_npairs(e, s); break;
            }
            for (auto& [node, m] : msgs) inbox[node].push_back(m);
        }
        EmbeddingState<T> next;
        next.step = t;
        next.rows.reserve(g_.nodes.size());
        for (std::size_t n = 0; n < g_.nodes.size(); ++n) {
            if (g_.nodes[n].kind == TypeNode::Kind::Constant) {
                next.rows.push_back(s.rows[n]);  // pinned
            } else {
                next.rows.push_back(aggregate(s.rows[n], inbox[n], t));
            }
        }
        return next;
    }

    EmbeddingState<T> run() {
        EmbeddingState<T> s = init_embeddings();
        for (int t = 0; t < cfg_.K; ++t) s = step(s);
        return s;
    }

private:
    bool is_constant(int node) const { return g_.nodes[node].kind == TypeNode::Kind::Constant; }

    static void check_const_kind(const std::string& kind) {
        if (kind == "number" || kind == "string" || kind == "boolean") return;
        if (kind.rfind("op:", 0) == 0) return;
        throw UnknownConstantKind(kind);
    }

    void check_arity(const Hyperedge& e) const {
        std::size_t want;
        switch (e.kind) {
            case EdgeKind::Bool:
            case EdgeKind::Name: want = 1; break;
            case EdgeKind::Subtype:
            case EdgeKind::Assign:
            case EdgeKind::Access:
            case EdgeKind::NameSimilar: want = 2; break;
            default: want = e.args.size(); break;
        }
        if (e.args.size() != want)
            throw ArityMismatch(std::string(edge_kind_name(e.kind)) + " expects " +
                                std::to_string(want) + " args, got " + std::to_string(e.args.size()));
    }

    Var<T> token_embedding(const std::string& token) {
        if (vocab_.contains(token)) return tape_.param("ident/t:" + token, {dim()}, params_);
        return tape_.param("ident/unk:" + std::to_string(unknown_bucket(token)), {dim()}, params_);
    }

    /// Per-slot label embedding: member-name identifiers for Object edges,
    /// position vectors for Function/Call.
    Var<T> slot_label(const Hyperedge& e, std::size_t j) {
        if (e.kind == EdgeKind::Object)
            return embed_identifier(tokenize_identifier(e.labels.at(j - 1)));
        std::string path;
        if (e.kind == EdgeKind::Function) {
            path = j == e.args.size() - 1 ? "pos/ret" : pos_path(int(j) - 1);
        } else {  // Call: args = [result, callee, a1..ak]
            path = j == 1 ? "pos/fn" : pos_path(int(j) - 2);
        }
        return tape_.param(path, {dim()}, params_);
    }

    std::string pos_path(int idx) const {
        if (idx >= cfg_.position_cap) return "pos/overflow";
        return "pos/" + std::to_string(idx);
    }

    Var<T> attend(Var<T> query, const std::vector<Var<T>>& keys, const std::vector<Var<T>>& values) {
        Var<T> V = stack_rows(values);
        if (!cfg_.npair_attention || keys.size() == 1) {
            if (keys.size() == 1) {
                // softmax over one logit is 1 either way; skip the machinery
                return values[0];
            }
            return mean_rows(V);
        }
        std::vector<Var<T>> logits;
        for (const auto& k : keys) logits.push_back(dot(k, query));
        Var<T> w = softmax(concat(logits));
        return vecmat(w, V);
    }

    const TypeDependencyGraph& g_;
    Tape<T>& tape_;
    const ParamStore<T>& params_;
    const Vocab& vocab_;
    GnnConfig cfg_;
    std::uint64_t run_seed_;
    std::map<std::string, Var<T>> ident_cache_;
};

}  // namespace typegraph

#endif
