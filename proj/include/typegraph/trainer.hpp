#ifndef TYPEGRAPH_TRAINER_HPP
#define TYPEGRAPH_TRAINER_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "typegraph/adam.hpp"
#include "typegraph/eval/metrics.hpp"
#include "typegraph/gnn/gnn.hpp"
#include "typegraph/predictor.hpp"

namespace typegraph {

struct TrainConfig {
    GnnConfig gnn;
    double lr_start = 1e-3;
    double lr_end = 1e-4;
    int lr_decay_until = 30;  // epochs of linear decay, constant afterwards
    double weight_decay = 1e-4;
    bool decoupled_decay = false;
    int max_epochs = 100;
    int patience = 5;
    int batch_cap = 0;  // 0: use the median annotated count of the training set
    std::uint64_t seed = 0;
    int lib_type_count = 100;
    bool lib_only = false;  // score against library types only
};

struct Project {
    std::string id;
    TypeDependencyGraph graph;
};

struct Corpus {
    std::vector<Project> train, val, test;
};

/// Everything needed to run inference after training.
struct Model {
    ParamStore<float> params;
    Vocab vocab;
    std::vector<std::string> lib_types;
    TrainConfig config;
};

struct EpochLog {
    int epoch = 0;
    double train_loss = 0, val_loss = 0, val_top1 = 0, lr = 0;
};

struct TrainResult {
    Model model;
    std::vector<EpochLog> log;
    int best_epoch = -1;
    double best_val_loss = 0;
};

/// Linear warm-down: lr_start at epoch 0 shrinking to lr_end at
/// `lr_decay_until`, constant from there on. Epochs count from zero.
inline double lr_at(const TrainConfig& cfg, int epoch) {
    if (cfg.lr_decay_until <= 0) return cfg.lr_end;
    double f = double(std::min(epoch, cfg.lr_decay_until)) / double(cfg.lr_decay_until);
    return cfg.lr_start + (cfg.lr_end - cfg.lr_start) * f;
}

/// Library prediction space: the most frequent annotation types across the
/// training projects, skipping each project's own classes. Ties break
/// lexicographically.
inline std::vector<std::string> build_lib_types(const std::vector<Project>& train, int count) {
    std::map<std::string, int> freq;
    for (const auto& p : train)
        for (const auto& [node, ty] : p.graph.annotations) {
            (void)node;
            if (!p.graph.user_type_nodes.count(ty)) freq[ty] += 1;
        }
    std::vector<std::pair<std::string, int>> order(freq.begin(), freq.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> out;
    for (const auto& [ty, c] : order) {
        (void)c;
        if (int(out.size()) >= count) break;
        out.push_back(ty);
    }
    return out;
}

/// (node, candidate index) for every annotation whose type is in the
/// prediction space; the rest contribute no training signal.
inline std::vector<std::pair<int, int>> project_targets(const TypeDependencyGraph& g,
                                                        const CandidateSet& cands) {
    std::vector<std::pair<int, int>> out;
    for (const auto& [node, ty] : g.annotations) {
        int idx = cands.index_of(ty);
        if (idx >= 0) out.emplace_back(node, idx);
    }
    return out;
}

/// Median annotated-node count over the training projects (lower median,
/// at least 1). Used as the per-project minibatch cap.
inline int median_batch_cap(const std::vector<Project>& train) {
    std::vector<int> counts;
    for (const auto& p : train) counts.push_back(int(p.graph.annotations.size()));
    if (counts.empty()) return 1;
    std::sort(counts.begin(), counts.end());
    return std::max(1, counts[(counts.size() - 1) / 2]);
}

inline std::vector<std::pair<int, int>> downsample_targets(
    std::vector<std::pair<int, int>> targets, int cap, Rng& rng) {
    if (int(targets.size()) <= cap) return targets;
    rng.shuffle(targets);
    targets.resize(std::size_t(cap));
    std::sort(targets.begin(), targets.end());  // order-stable loss sum
    return targets;
}

/// Mean cross-entropy over the given (node, candidate) targets after one
/// message-passing forward pass.
template <typename T>
Var<T> project_loss(Tape<T>& tape, const ParamStore<T>& params, const TypeDependencyGraph& g,
                    const Vocab& vocab, const GnnConfig& gcfg, std::uint64_t run_seed,
                    const CandidateSet& cands, const std::vector<std::pair<int, int>>& targets) {
    if (targets.empty()) throw InputError("no trainable annotations in project");
    GnnRunner<T> runner(g, tape, params, vocab, gcfg, run_seed);
    EmbeddingState<T> s = runner.run();
    std::vector<Var<T>> losses;
    for (const auto& [node, target] : targets) {
        Var<T> logits = candidate_logits(tape, params, node, cands, s);
        losses.push_back(cross_entropy(logits, std::size_t(target)));
    }
    return mean(concat(losses));
}

/// Ground truth bundle used by the scorers.
inline ProjectTruth make_truth(const Project& p) {
    ProjectTruth t;
    t.project_id = p.id;
    t.annotations = p.graph.annotations;
    t.occurrences = p.graph.occurrences;
    for (const auto& [node, ty] : p.graph.annotations)
        t.truth_is_user[node] = p.graph.user_type_nodes.count(ty) != 0;
    return t;
}

/// Forward-only prediction for every annotated node of one project.
template <typename T>
std::vector<PredictionRow> predict_project(const ParamStore<T>& params, const TypeDependencyGraph& g,
                                           const Vocab& vocab, const GnnConfig& gcfg,
                                           std::uint64_t run_seed, const CandidateSet& cands) {
    Tape<T> tape(false);
    GnnRunner<T> runner(g, tape, params, vocab, gcfg, run_seed);
    EmbeddingState<T> s = runner.run();
    std::vector<PredictionRow> out;
    for (const auto& [node, ty] : g.annotations) {
        (void)ty;
        out.push_back(predict_distribution(tape, params, node, cands, s));
    }
    return out;
}

inline CandidateSet model_candidates(const Model& m, const TypeDependencyGraph& g) {
    return CandidateSet::for_graph(g, m.lib_types, !m.config.lib_only);
}

inline EvalReport evaluate(const Model& m, const std::vector<Project>& projects) {
    std::vector<AccuracySplit> t1d, t5d, t1o, t5o;
    EvalReport r;
    for (const auto& p : projects) {
        CandidateSet cands = model_candidates(m, p.graph);
        auto preds =
            predict_project(m.params, p.graph, m.vocab, m.config.gnn, m.config.seed, cands);
        ProjectTruth truth = make_truth(p);
        t1d.push_back(accuracy(preds, truth, AccuracyLevel::Declaration, 1));
        t5d.push_back(accuracy(preds, truth, AccuracyLevel::Declaration, 5));
        t1o.push_back(accuracy(preds, truth, AccuracyLevel::Occurrence, 1));
        t5o.push_back(accuracy(preds, truth, AccuracyLevel::Occurrence, 5));
        r.per_project_top1[p.id] = t1d.back().overall;
    }
    r.top1_decl = merge_splits(t1d);
    r.top5_decl = merge_splits(t5d);
    r.top1_occ = merge_splits(t1o);
    r.top5_occ = merge_splits(t5o);
    return r;
}

inline TrainResult train(const Corpus& corpus, const TrainConfig& cfg,
                         const ParamStore<float>* resume_from = nullptr) {
    if (corpus.train.empty()) throw InputError("training corpus is empty");
    TrainResult res;
    Model& m = res.model;
    m.config = cfg;
    {
        std::vector<const TypeDependencyGraph*> gs;
        for (const auto& p : corpus.train) gs.push_back(&p.graph);
        m.vocab = Vocab::build(gs);
    }
    m.lib_types = build_lib_types(corpus.train, cfg.lib_type_count);
    int cap = cfg.batch_cap > 0 ? cfg.batch_cap : median_batch_cap(corpus.train);

    struct Prepared {
        const Project* p;
        CandidateSet cands;
        std::vector<std::pair<int, int>> targets;
    };
    auto prepare = [&](const std::vector<Project>& ps) {
        std::vector<Prepared> out;
        for (const auto& p : ps) {
            Prepared pr;
            pr.p = &p;
            pr.cands = CandidateSet::for_graph(p.graph, m.lib_types, !cfg.lib_only);
            pr.targets = project_targets(p.graph, pr.cands);
            if (!pr.targets.empty()) out.push_back(std::move(pr));
        }
        return out;
    };
    std::vector<Prepared> train_set = prepare(corpus.train);
    std::vector<Prepared> val_set = prepare(corpus.val);
    if (train_set.empty()) throw InputError("no trainable annotations in training corpus");

    m.params = resume_from ? *resume_from : ParamStore<float>(cfg.seed);
    Adam<float> opt(0.9f, 0.999f, 1e-8f, cfg.decoupled_decay);
    ParamStore<float> best = m.params;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1, bad = 0;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        double lr = lr_at(cfg, epoch);
        // fresh unknown-bucket assignment each pass over the data
        std::uint64_t pass_seed = cfg.seed;
        splitmix64(pass_seed);
        pass_seed += std::uint64_t(epoch);
        std::vector<std::size_t> order(train_set.size());
        std::iota(order.begin(), order.end(), 0);
        Rng(cfg.seed, "epoch/" + std::to_string(epoch)).shuffle(order);

        double train_loss = 0;
        for (std::size_t oi : order) {
            const Prepared& pr = train_set[oi];
            Rng srng(cfg.seed, "sample/" + std::to_string(epoch) + "/" + pr.p->id);
            auto targets = downsample_targets(pr.targets, cap, srng);
            Tape<float> tape(true);
            Var<float> loss = project_loss(tape, m.params, pr.p->graph, m.vocab, cfg.gnn,
                                           pass_seed, pr.cands, targets);
            train_loss += double(loss.value().data[0]);
            tape.backward(loss);
            opt.step(m.params, tape.param_grads(), float(lr), float(cfg.weight_decay));
        }
        train_loss /= double(train_set.size());

        double val_loss = 0, val_top1 = 0;
        if (!val_set.empty()) {
            std::vector<AccuracySplit> splits;
            for (const Prepared& pr : val_set) {
                Tape<float> tape(false);
                Var<float> loss = project_loss(tape, m.params, pr.p->graph, m.vocab, cfg.gnn,
                                               cfg.seed, pr.cands, pr.targets);
                val_loss += double(loss.value().data[0]);
                auto preds = predict_project(m.params, pr.p->graph, m.vocab, cfg.gnn, cfg.seed,
                                             pr.cands);
                splits.push_back(
                    accuracy(preds, make_truth(*pr.p), AccuracyLevel::Declaration, 1));
            }
            val_loss /= double(val_set.size());
            val_top1 = merge_splits(splits).overall;
        } else {
            val_loss = train_loss;
        }

        res.log.push_back({epoch, train_loss, val_loss, val_top1, lr});
        if (val_loss < best_val) {
            best_val = val_loss;
            best = m.params;
            best_epoch = epoch;
            bad = 0;
        } else if (++bad >= cfg.patience) {
            break;
        }
    }
    m.params = std::move(best);
    res.best_epoch = best_epoch;
    res.best_val_loss = best_val;
    return res;
}

/// Named configuration variants; everything is a switch on the full model.
inline TrainConfig apply_ablation(TrainConfig cfg, const std::string& name) {
    if (name == "full" || name.empty()) return cfg;
    if (name == "no-contextual") {
        cfg.gnn.contextual_edges = false;
    } else if (name == "no-logical") {
        cfg.gnn.logical_edges = false;
    } else if (name == "no-npair-attention") {
        cfg.gnn.npair_attention = false;
    } else if (name == "simple-aggregation") {
        cfg.gnn.attention_aggregation = false;
    } else {
        throw InputError("unknown ablation: " + name);
    }
    return cfg;
}

// --- persistence ----------------------------------------------------------

inline nlohmann::ordered_json config_to_json(const TrainConfig& c) {
    nlohmann::ordered_json j;
    j["d"] = c.gnn.d;
    j["k"] = c.gnn.K;
    j["hidden"] = c.gnn.hidden;
    j["unknown_buckets"] = c.gnn.unknown_buckets;
    j["position_cap"] = c.gnn.position_cap;
    j["contextual_edges"] = c.gnn.contextual_edges;
    j["logical_edges"] = c.gnn.logical_edges;
    j["npair_attention"] = c.gnn.npair_attention;
    j["attention_aggregation"] = c.gnn.attention_aggregation;
    j["lr_start"] = c.lr_start;
    j["lr_end"] = c.lr_end;
    j["lr_decay_until"] = c.lr_decay_until;
    j["weight_decay"] = c.weight_decay;
    j["decoupled_decay"] = c.decoupled_decay;
    j["max_epochs"] = c.max_epochs;
    j["patience"] = c.patience;
    j["batch_cap"] = c.batch_cap;
    j["seed"] = c.seed;
    j["lib_type_count"] = c.lib_type_count;
    j["lib_only"] = c.lib_only;
    return j;
}

inline TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.gnn.d = j.at("d").get<int>();
    c.gnn.K = j.at("k").get<int>();
    c.gnn.hidden = j.at("hidden").get<int>();
    c.gnn.unknown_buckets = j.at("unknown_buckets").get<int>();
    c.gnn.position_cap = j.at("position_cap").get<int>();
    c.gnn.contextual_edges = j.at("contextual_edges").get<bool>();
    c.gnn.logical_edges = j.at("logical_edges").get<bool>();
    c.gnn.npair_attention = j.at("npair_attention").get<bool>();
    c.gnn.attention_aggregation = j.at("attention_aggregation").get<bool>();
    c.lr_start = j.at("lr_start").get<double>();
    c.lr_end = j.at("lr_end").get<double>();
    c.lr_decay_until = j.at("lr_decay_until").get<int>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.decoupled_decay = j.at("decoupled_decay").get<bool>();
    c.max_epochs = j.at("max_epochs").get<int>();
    c.patience = j.at("patience").get<int>();
    c.batch_cap = j.at("batch_cap").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.lib_type_count = j.at("lib_type_count").get<int>();
    c.lib_only = j.at("lib_only").get<bool>();
    return c;
}

inline nlohmann::ordered_json model_to_json(const Model& m) {
    nlohmann::ordered_json j = params_to_json(m.params);
    nlohmann::ordered_json meta;
    meta["config"] = config_to_json(m.config);
    meta["vocab"] = std::vector<std::string>(m.vocab.tokens.begin(), m.vocab.tokens.end());
    meta["lib_types"] = m.lib_types;
    j["meta"] = std::move(meta);
    return j;
}

inline Model model_from_json(const nlohmann::json& j) {
    Model m;
    m.params = params_from_json<float>(j);
    const auto& meta = j.at("meta");
    m.config = config_from_json(meta.at("config"));
    for (const auto& t : meta.at("vocab")) m.vocab.tokens.insert(t.get<std::string>());
    m.lib_types = meta.at("lib_types").get<std::vector<std::string>>();
    return m;
}

inline void write_training_log(const std::vector<EpochLog>& log, std::ostream& os) {
    os << "epoch,train_loss,val_loss,val_top1,lr\n";
    for (const auto& row : log) {
        std::ostringstream line;
        line.precision(10);
        line << row.epoch << ',' << row.train_loss << ',' << row.val_loss << ',' << row.val_top1
             << ',' << row.lr << '\n';
        os << line.str();
    }
}

}  // namespace typegraph

#endif
