#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "typegraph/cli.hpp"
#include "typegraph/eval/synth.hpp"
#include "typegraph/graph/extract.hpp"

namespace py = pybind11;
using namespace typegraph;

namespace {

std::string extract_graph_json(const std::string& source, const std::string& project_id) {
    Project p = project_from_source(project_id, source);
    return graph_to_json(p.graph).dump(2);
}

std::string train_json(const std::string& corpus_dir, int k, int dim, std::uint64_t seed,
                       int max_epochs, const std::string& ablation) {
    TrainConfig cfg;
    cfg.gnn.K = k;
    cfg.gnn.d = dim;
    cfg.seed = seed;
    cfg.max_epochs = max_epochs;
    cfg = apply_ablation(cfg, ablation);
    TrainResult res = train(load_corpus(corpus_dir), cfg);
    return model_to_json(res.model).dump(2);
}

std::string evaluate_json(const std::string& checkpoint_json, const std::string& corpus_dir,
                          const std::string& split) {
    Model m = model_from_json(nlohmann::json::parse(checkpoint_json));
    Corpus c = load_corpus(corpus_dir);
    const std::vector<Project>& ps =
        split == "train" ? c.train : split == "val" ? c.val : c.test;
    return evaluate(m, ps).to_json().dump(2);
}

std::string predict_json(const std::string& checkpoint_json, const std::string& source,
                         const std::string& project_id) {
    Model m = model_from_json(nlohmann::json::parse(checkpoint_json));
    Project p = project_from_source(project_id, source);
    CandidateSet cands = model_candidates(m, p.graph);
    Tape<float> tape(false);
    GnnRunner<float> runner(p.graph, tape, m.params, m.vocab, m.config.gnn, m.config.seed);
    EmbeddingState<float> s = runner.run();
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& [id, name] : p.graph.node_names) {
        if (p.graph.nodes[std::size_t(id)].kind != TypeNode::Kind::Variable) continue;
        bool is_class = false;
        for (const auto& [cn, cid] : p.graph.user_type_nodes) is_class |= cid == id;
        if (is_class) continue;
        PredictionRow row = predict_distribution(tape, m.params, id, cands, s);
        nlohmann::ordered_json top = nlohmann::ordered_json::array();
        for (int r = 0; r < 5 && r < int(row.ranking.size()); ++r) {
            int c = row.ranking[std::size_t(r)];
            top.push_back({{"type", row.candidates[std::size_t(c)]},
                           {"prob", row.probs[std::size_t(c)]}});
        }
        rows.push_back({{"node", id}, {"name", name}, {"top", std::move(top)}});
    }
    return rows.dump(2);
}

}  // namespace

PYBIND11_MODULE(_typegraph, m) {
    m.doc() = "type dependency graph extraction and neural type inference";
    m.def("tokenize_identifier", &tokenize_identifier, py::arg("name"),
          "split an identifier into lowercase word tokens");
    m.def("extract_graph", &extract_graph_json, py::arg("source"), py::arg("project_id") = "py",
          "extract the type dependency graph of one source file (JSON string)");
    m.def("train", &train_json, py::arg("corpus_dir"), py::arg("k") = 6, py::arg("dim") = 32,
          py::arg("seed") = 0, py::arg("max_epochs") = 100, py::arg("ablation") = "full",
          "train on a corpus directory, returns the checkpoint as a JSON string");
    m.def("evaluate", &evaluate_json, py::arg("checkpoint_json"), py::arg("corpus_dir"),
          py::arg("split") = "test", "score a checkpoint, returns the report as JSON");
    m.def("predict", &predict_json, py::arg("checkpoint_json"), py::arg("source"),
          py::arg("project_id") = "py", "rank types for every variable of one source file");
    m.def("cli", &cli_run, py::arg("args"), "run the command-line interface in-process");
}
