#ifndef TYPEGRAPH_EVAL_METRICS_HPP
#define TYPEGRAPH_EVAL_METRICS_HPP

#include <map>
#include <string>
#include <vector>

#include "typegraph/predictor.hpp"

namespace typegraph {

class MissingPrediction : public std::runtime_error {
public:
    explicit MissingPrediction(int node)
        : std::runtime_error("no prediction for node " + std::to_string(node)) {}
};

enum class AccuracyLevel { Declaration, Occurrence };

struct AccuracySplit {
    double user = 0.0;
    double lib = 0.0;
    double overall = 0.0;
    double n_user = 0.0;  // weight mass per split
    double n_lib = 0.0;
};

struct EvalReport {
    AccuracySplit top1_decl, top5_decl, top1_occ, top5_occ;
    std::map<std::string, double> per_project_top1;  // declaration level

    std::string table() const;
    nlohmann::ordered_json to_json() const;
};

/// One project's ground truth for scoring.
struct ProjectTruth {
    std::string project_id;
    std::map<int, std::string> annotations;        // node -> truth type
    std::map<int, int> occurrences;                // node -> occurrence count
    std::map<int, bool> truth_is_user;             // node -> truth in Y_user
};

/// Top-n accuracy over one project's predictions, at declaration or
/// occurrence level (occurrence weights each variable by its count).
AccuracySplit accuracy(const std::vector<PredictionRow>& preds, const ProjectTruth& truth,
                       AccuracyLevel level, int top_n);

/// Merge weighted splits from several projects.
AccuracySplit merge_splits(const std::vector<AccuracySplit>& parts);

/// Predict the type sharing the most name tokens with the variable; ties
/// break lexicographically, zero overlap everywhere falls back to
/// `fallback_type`.
std::vector<PredictionRow> similar_name_baseline(const TypeDependencyGraph& g,
                                                 const CandidateSet& cands,
                                                 const std::string& fallback_type);

}  // namespace typegraph

#endif
