#include "typegraph/eval/metrics.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "typegraph/graph/extract.hpp"

namespace typegraph {

AccuracySplit accuracy(const std::vector<PredictionRow>& preds, const ProjectTruth& truth,
                       AccuracyLevel level, int top_n) {
    std::map<int, const PredictionRow*> by_node;
    for (const auto& p : preds) by_node[p.node] = &p;
    double hits_user = 0, hits_lib = 0, n_user = 0, n_lib = 0;
    for (const auto& [node, want] : truth.annotations) {
        auto it = by_node.find(node);
        if (it == by_node.end()) throw MissingPrediction(node);
        const PredictionRow& row = *it->second;
        double w = 1.0;
        if (level == AccuracyLevel::Occurrence) {
            auto oc = truth.occurrences.find(node);
            w = oc == truth.occurrences.end() ? 1.0 : double(oc->second);
        }
        bool hit = false;
        int upto = std::min<int>(top_n, int(row.ranking.size()));
        for (int r = 0; r < upto && !hit; ++r)
            hit = row.candidates[std::size_t(row.ranking[std::size_t(r)])] == want;
        bool is_user = truth.truth_is_user.count(node) && truth.truth_is_user.at(node);
        (is_user ? n_user : n_lib) += w;
        if (hit) (is_user ? hits_user : hits_lib) += w;
    }
    AccuracySplit s;
    s.n_user = n_user;
    s.n_lib = n_lib;
    s.user = n_user > 0 ? hits_user / n_user : 0.0;
    s.lib = n_lib > 0 ? hits_lib / n_lib : 0.0;
    double n = n_user + n_lib;
    s.overall = n > 0 ? (hits_user + hits_lib) / n : 0.0;
    return s;
}

AccuracySplit merge_splits(const std::vector<AccuracySplit>& parts) {
    double hu = 0, hl = 0, nu = 0, nl = 0;
    for (const auto& p : parts) {
        hu += p.user * p.n_user;
        hl += p.lib * p.n_lib;
        nu += p.n_user;
        nl += p.n_lib;
    }
    AccuracySplit s;
    s.n_user = nu;
    s.n_lib = nl;
    s.user = nu > 0 ? hu / nu : 0.0;
    s.lib = nl > 0 ? hl / nl : 0.0;
    s.overall = nu + nl > 0 ? (hu + hl) / (nu + nl) : 0.0;
    return s;
}

static nlohmann::ordered_json split_json(const AccuracySplit& s) {
    return {{"user", s.user}, {"lib", s.lib}, {"overall", s.overall},
            {"n_user", s.n_user}, {"n_lib", s.n_lib}};
}

nlohmann::ordered_json EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["top1_decl"] = split_json(top1_decl);
    j["top5_decl"] = split_json(top5_decl);
    j["top1_occ"] = split_json(top1_occ);
    j["top5_occ"] = split_json(top5_occ);
    j["per_project_top1"] = per_project_top1;
    return j;
}

std::string EvalReport::table() const {
    std::ostringstream os;
    auto row = [&](const char* name, const AccuracySplit& s) {
        os << name << "  user " << s.user << "  lib " << s.lib << "  overall " << s.overall << "\n";
    };
    row("top1 decl", top1_decl);
    row("top5 decl", top5_decl);
    row("top1 occ ", top1_occ);
    row("top5 occ ", top5_occ);
    return os.str();
}

std::vector<PredictionRow> similar_name_baseline(const TypeDependencyGraph& g,
                                                 const CandidateSet& cands,
                                                 const std::string& fallback_type) {
    std::vector<std::pair<std::string, std::set<std::string>>> cand_tokens;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        auto toks = tokenize_identifier(cands.name_at(i));
        cand_tokens.emplace_back(cands.name_at(i),
                                 std::set<std::string>(toks.begin(), toks.end()));
    }
    std::vector<PredictionRow> out;
    for (const auto& [node, want] : g.annotations) {
        (void)want;
        const auto& toks = g.nodes[std::size_t(node)].name_tokens;
        std::set<std::string> nt(toks.begin(), toks.end());
        std::vector<int> overlap(cands.size(), 0);
        int best = 0;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            for (const auto& t : nt) overlap[i] += cand_tokens[i].second.count(t) ? 1 : 0;
            best = std::max(best, overlap[i]);
        }
        PredictionRow row;
        row.node = node;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            row.candidates.push_back(cand_tokens[i].first);
            row.probs.push_back(double(overlap[i]));
        }
        row.ranking.resize(cands.size());
        std::iota(row.ranking.begin(), row.ranking.end(), 0);
        std::sort(row.ranking.begin(), row.ranking.end(), [&](int a, int b) {
            if (overlap[std::size_t(a)] != overlap[std::size_t(b)])
                return overlap[std::size_t(a)] > overlap[std::size_t(b)];
            return row.candidates[std::size_t(a)] < row.candidates[std::size_t(b)];
        });
        if (best == 0) {
            // no signal at all: fall back to the most frequent training type
            int fb = cands.index_of(fallback_type);
            if (fb >= 0) {
                auto it = std::find(row.ranking.begin(), row.ranking.end(), fb);
                if (it != row.ranking.end()) {
                    row.ranking.erase(it);
                    row.ranking.insert(row.ranking.begin(), fb);
                }
            }
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace typegraph
