#include "typegraph/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "typegraph/eval/synth.hpp"
#include "typegraph/frontend/parser.hpp"
#include "typegraph/graph/extract.hpp"

namespace fs = std::filesystem;

namespace typegraph {

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InputError("cannot write " + p.string());
    out << text;
}

ast::SourceProject read_sources(const std::string& dir) {
    if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir);
    ast::SourceProject sp;
    sp.project_id = fs::path(dir).filename().string();
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".ts") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) sp.files.push_back({f.string(), slurp(f)});
    return sp;
}

void add_train_flags(CLI::App* cmd, TrainConfig& cfg, std::string& ablation) {
    cmd->add_option("--k", cfg.gnn.K, "message-passing rounds");
    cmd->add_option("--dim", cfg.gnn.d, "embedding width");
    cmd->add_option("--lr-start", cfg.lr_start, "initial learning rate");
    cmd->add_option("--lr-end", cfg.lr_end, "final learning rate");
    cmd->add_option("--weight-decay", cfg.weight_decay, "L2 weight decay");
    cmd->add_option("--seed", cfg.seed, "random seed");
    cmd->add_option("--max-epochs", cfg.max_epochs, "epoch budget");
    cmd->add_option("--patience", cfg.patience, "early-stopping patience");
    cmd->add_option("--batch-cap", cfg.batch_cap, "per-project minibatch cap (0 = median)");
    cmd->add_flag("--lib-only", cfg.lib_only, "score against library types only");
    cmd->add_option("--ablation", ablation,
                    "full | no-contextual | no-logical | no-npair-attention | simple-aggregation");
}

int run_gen_corpus(const SyntheticSpec& spec, const std::string& out_dir) {
    SyntheticCorpus c = generate_sources(spec);
    auto write_split = [&](const char* split, const std::vector<SyntheticProject>& ps) {
        for (const auto& p : ps)
            spit(fs::path(out_dir) / split / p.id / "main.ts", p.source);
    };
    write_split("train", c.train);
    write_split("val", c.val);
    write_split("test", c.test);
    std::cout << "wrote " << c.train.size() << " train / " << c.val.size() << " val / "
              << c.test.size() << " test projects to " << out_dir << "\n";
    return 0;
}

int run_extract(const std::string& src_dir, const std::string& out_path) {
    Project p = load_project_dir(src_dir);
    std::string text = graph_to_json(p.graph).dump(2) + "\n";
    if (out_path.empty() || out_path == "-")
        std::cout << text;
    else
        spit(out_path, text);
    std::map<std::string, int> per_kind;
    for (const auto& e : p.graph.edges) per_kind[edge_kind_name(e.kind)] += 1;
    std::cerr << p.graph.nodes.size() << " nodes, " << p.graph.edges.size() << " edges";
    for (const auto& [k, n] : per_kind) std::cerr << "  " << k << ":" << n;
    std::cerr << "\n";
    return 0;
}

int run_train(const std::string& corpus_dir, TrainConfig cfg, const std::string& ablation,
              const std::string& out_ck, const std::string& log_path,
              const std::string& resume) {
    cfg = apply_ablation(cfg, ablation);
    std::cerr << "config: " << config_to_json(cfg).dump() << "\n";
    Corpus corpus = load_corpus(corpus_dir);
    ParamStore<float> init;
    TrainResult res;
    if (!resume.empty()) {
        Model prev = model_from_json(nlohmann::json::parse(slurp(resume)));
        res = train(corpus, cfg, &prev.params);
    } else {
        res = train(corpus, cfg);
    }
    spit(out_ck, model_to_json(res.model).dump(2) + "\n");
    if (!log_path.empty()) {
        std::ostringstream os;
        write_training_log(res.log, os);
        spit(log_path, os.str());
    }
    std::cerr << "best epoch " << res.best_epoch << ", val loss " << res.best_val_loss << "\n";
    return 0;
}

int run_predict(const std::string& ck_path, const std::string& src_dir, int top_n,
                const std::string& out_path) {
    Model m = model_from_json(nlohmann::json::parse(slurp(ck_path)));
    Project p = load_project_dir(src_dir);
    CandidateSet cands = model_candidates(m, p.graph);
    Tape<float> tape(false);
    GnnRunner<float> runner(p.graph, tape, m.params, m.vocab, m.config.gnn, m.config.seed);
    EmbeddingState<float> s = runner.run();
    std::set<int> class_nodes;
    for (const auto& [name, id] : p.graph.user_type_nodes) class_nodes.insert(id);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& [id, name] : p.graph.node_names) {
        if (p.graph.nodes[std::size_t(id)].kind != TypeNode::Kind::Variable) continue;
        if (class_nodes.count(id)) continue;  // class definitions are not annotation sites
        PredictionRow row = predict_distribution(tape, m.params, id, cands, s);
        nlohmann::ordered_json top = nlohmann::ordered_json::array();
        for (int r = 0; r < top_n && r < int(row.ranking.size()); ++r) {
            int c = row.ranking[std::size_t(r)];
            top.push_back({{"type", row.candidates[std::size_t(c)]},
                           {"prob", row.probs[std::size_t(c)]}});
        }
        rows.push_back({{"node", id}, {"name", name}, {"top", std::move(top)}});
    }
    nlohmann::ordered_json j{{"project", p.id}, {"predictions", std::move(rows)}};
    std::string text = j.dump(2) + "\n";
    if (out_path.empty() || out_path == "-")
        std::cout << text;
    else
        spit(out_path, text);
    return 0;
}

int run_evaluate(const std::string& ck_path, const std::string& corpus_dir,
                 const std::string& split, const std::string& out_path) {
    Model m = model_from_json(nlohmann::json::parse(slurp(ck_path)));
    Corpus corpus = load_corpus(corpus_dir);
    const std::vector<Project>* ps = &corpus.test;
    if (split == "train") ps = &corpus.train;
    else if (split == "val") ps = &corpus.val;
    else if (split != "test") throw InputError("unknown split: " + split);
    EvalReport r = evaluate(m, *ps);
    std::cout << r.table();
    if (!out_path.empty()) spit(out_path, r.to_json().dump(2) + "\n");
    return 0;
}

}  // namespace

Project load_project_dir(const std::string& dir) {
    ast::SourceProject sp = read_sources(dir);
    ir::Module mod = lower_to_ir(parse_project(sp));
    return {sp.project_id, extract_graph(mod)};
}

Corpus load_corpus(const std::string& corpus_dir) {
    Corpus c;
    auto load_split = [&](const char* split, std::vector<Project>& out) {
        fs::path root = fs::path(corpus_dir) / split;
        if (!fs::is_directory(root)) return;
        std::vector<fs::path> dirs;
        for (const auto& e : fs::directory_iterator(root))
            if (e.is_directory()) dirs.push_back(e.path());
        std::sort(dirs.begin(), dirs.end());
        for (const auto& d : dirs) out.push_back(load_project_dir(d.string()));
    };
    load_split("train", c.train);
    load_split("val", c.val);
    load_split("test", c.test);
    if (c.train.empty() && c.val.empty() && c.test.empty())
        throw InputError("no projects under " + corpus_dir);
    return c;
}

int cli_run(const std::vector<std::string>& args) {
    if (const char* tc = std::getenv("TYPEGRAPH_THREADS")) {
        // execution is single-threaded for bitwise reproducibility; honor the
        // conventional knob by acknowledging it rather than silently ignoring
        if (std::atoi(tc) > 1)
            std::cerr << "note: TYPEGRAPH_THREADS=" << tc
                      << " requested; running single-threaded for reproducibility\n";
    }
    CLI::App app{"probabilistic type inference over type dependency graphs"};
    app.require_subcommand(1);
    bool deterministic = false;  // runs are single-threaded and seeded either way
    app.add_flag("--deterministic", deterministic, "force fully reproducible output");

    SyntheticSpec spec;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic corpus");
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--train", spec.train_projects, "training projects");
    gen->add_option("--val", spec.val_projects, "validation projects");
    gen->add_option("--test", spec.test_projects, "test projects");
    gen->add_option("--classes", spec.classes_per_project, "classes per project");
    gen->add_option("--fields", spec.fields_per_class, "fields per class");
    gen->add_option("--functions", spec.functions_per_project, "functions per project");
    gen->add_option("--name-correlation", spec.name_correlation, "name/type token overlap rate");
    gen->add_option("--seed", spec.seed, "random seed");

    std::string ex_src, ex_out;
    auto* ex = app.add_subcommand("extract-graph", "extract a type dependency graph");
    ex->add_option("--src", ex_src, "project source directory")->required();
    ex->add_option("--out", ex_out, "output JSON path (- for stdout)");

    TrainConfig cfg;
    std::string ablation, tr_corpus, tr_out, tr_log, tr_resume;
    auto* tr = app.add_subcommand("train", "train a model");
    tr->add_option("--corpus", tr_corpus, "corpus directory")->required();
    tr->add_option("--out", tr_out, "checkpoint output path")->required();
    tr->add_option("--log", tr_log, "training log CSV path");
    tr->add_option("--resume", tr_resume, "checkpoint to continue from");
    add_train_flags(tr, cfg, ablation);

    std::string pr_ck, pr_src, pr_out;
    int top_n = 5;
    auto* pr = app.add_subcommand("predict", "predict types for a project");
    pr->add_option("--checkpoint", pr_ck, "trained checkpoint")->required();
    pr->add_option("--src", pr_src, "project source directory")->required();
    pr->add_option("--top-n", top_n, "ranked candidates per variable");
    pr->add_option("--out", pr_out, "output JSON path (- for stdout)");

    std::string ev_ck, ev_corpus, ev_split = "test", ev_out;
    auto* ev = app.add_subcommand("evaluate", "score a model on a corpus split");
    ev->add_option("--checkpoint", ev_ck, "trained checkpoint")->required();
    ev->add_option("--corpus", ev_corpus, "corpus directory")->required();
    ev->add_option("--split", ev_split, "train | val | test");
    ev->add_option("--out", ev_out, "report JSON path");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return run_gen_corpus(spec, gen_out);
        if (ex->parsed()) return run_extract(ex_src, ex_out);
        if (tr->parsed()) return run_train(tr_corpus, cfg, ablation, tr_out, tr_log, tr_resume);
        if (pr->parsed()) return run_predict(pr_ck, pr_src, top_n, pr_out);
        if (ev->parsed()) return run_evaluate(ev_ck, ev_corpus, ev_split, ev_out);
    } catch (const SyntaxError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedConstruct& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: bad input file: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}

}  // namespace typegraph
