#include "typegraph/eval/synth.hpp"

#include <cctype>
#include <set>
#include <sstream>

#include "typegraph/frontend/parser.hpp"
#include "typegraph/graph/extract.hpp"

namespace typegraph {

namespace {

const std::vector<std::string>& words() {
    static const std::vector<std::string> w = {
        "user",   "account", "network", "count",  "name",  "flag",   "item",  "list",
        "score",  "node",    "graph",   "value",  "index", "buffer", "cache", "token",
        "label",  "widget",  "panel",   "layer",  "model", "order",  "price", "total",
        "state",  "config",  "input",   "output", "result", "batch", "record", "entry",
        "queue",  "stack",   "point",   "range",  "limit", "slot",   "group",  "unit"};
    return w;
}

std::string cap(const std::string& w) {
    std::string out = w;
    if (!out.empty()) out[0] = char(std::toupper(out[0]));
    return out;
}

std::string camel_join(const std::vector<std::string>& toks) {
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) out += i == 0 ? toks[i] : cap(toks[i]);
    return out;
}

struct Namer {
    Rng& rng;
    std::set<std::string>* used;

    std::string pick() { return words()[std::size_t(rng.next_below(words().size()))]; }

    std::string fresh(bool capital) {
        for (int attempt = 0;; ++attempt) {
            std::string a = pick(), b = pick();
            std::string n = capital ? cap(a) + cap(b) : a + cap(b);
            if (attempt > 8) n += std::to_string(attempt);
            if (!used || used->insert(n).second) return n;
        }
    }

    /// A name whose tokens overlap the type's with probability p, otherwise
    /// unrelated words.
    std::string for_type(const std::string& type, double p, std::set<std::string>& scope) {
        for (int attempt = 0;; ++attempt) {
            std::string n;
            if (rng.next_double() < p) {
                n = camel_join(tokenize_identifier(type)) + cap(pick());
            } else {
                n = pick() + cap(pick());
            }
            if (attempt > 8) n += std::to_string(attempt);
            if (scope.insert(n).second) return n;
        }
    }
};

struct ClassInfo {
    std::string name;
    std::vector<std::pair<std::string, std::string>> fields;  // (name, type)
};

std::string gen_project(const SyntheticSpec& spec, Rng& rng) {
    std::set<std::string> toplevel;
    Namer nm{rng, &toplevel};
    const char* prims[3] = {"number", "string", "boolean"};

    std::vector<ClassInfo> classes;
    std::ostringstream src;
    for (int c = 0; c < spec.classes_per_project; ++c) {
        ClassInfo ci;
        ci.name = nm.fresh(true);
        std::set<std::string> fields_used;
        for (int f = 0; f < spec.fields_per_class; ++f) {
            std::string ty;
            double roll = rng.next_double();
            if (roll < 0.55 || classes.empty()) {
                ty = prims[rng.next_below(3)];
            } else if (roll < 0.75) {
                ty = rng.next_below(2) == 0 ? "Tensor" : "Date";
            } else {
                ty = classes[std::size_t(rng.next_below(classes.size()))].name;
            }
            ci.fields.emplace_back(nm.for_type(ty, spec.name_correlation, fields_used), ty);
        }
        src << "class " << ci.name << " {\n";
        for (const auto& [fn, ft] : ci.fields) src << "    " << fn << ": " << ft << ";\n";
        // one accessor method so every class participates in a Function edge
        std::string mname = nm.fresh(false);
        src << "    " << mname << "(self: " << ci.name << "): " << ci.fields[0].second << " {\n";
        src << "        return self." << ci.fields[0].first << ";\n";
        src << "    }\n}\n\n";
        classes.push_back(std::move(ci));
    }

    for (int f = 0; f < spec.functions_per_project; ++f) {
        std::string fname = nm.fresh(false);
        std::set<std::string> scope;
        Namer local{rng, &scope};  // params and locals share the function scope
        if (f % 2 == 0) {
            const ClassInfo& ci = classes[std::size_t(f / 2) % classes.size()];
            std::string pa = nm.for_type(ci.name, spec.name_correlation, scope);
            std::string pn = nm.for_type("number", spec.name_correlation, scope);
            std::string pb = nm.for_type("boolean", spec.name_correlation, scope);
            std::string v1 = local.fresh(false), v2 = local.fresh(false);
            std::string v3 = local.fresh(false), v4 = local.fresh(false);
            src << "function " << fname << "(" << pa << ": " << ci.name << ", " << pn
                << ": number, " << pb << ": boolean): number {\n";
            src << "    let " << v1 << " = " << pa << "." << ci.fields[0].first << ";\n";
            src << "    let " << v2 << " = " << pn << " + 1;\n";
            src << "    if (" << pb << ") {\n";
            src << "        " << v2 << " = " << v2 << " + 2;\n";
            src << "    } else {\n";
            src << "        " << v2 << " = 0;\n";
            src << "    }\n";
            src << "    let " << v3 << " = { " << ci.fields[0].first << ": " << v1;
            if (ci.fields.size() > 1) src << ", " << ci.fields[1].first << ": " << v2;
            src << " };\n";
            src << "    let " << v4 << " = !" << pb << ";\n";
            src << "    return " << v2 << ";\n";
            src << "}\n\n";
        } else {
            std::string ps = nm.for_type("string", spec.name_correlation, scope);
            std::string pt = nm.for_type("Tensor", spec.name_correlation, scope);
            std::string pu = nm.for_type("Tensor", spec.name_correlation, scope);
            std::string v1 = local.fresh(false), v2 = local.fresh(false);
            std::string v3 = local.fresh(false);
            src << "function " << fname << "(" << ps << ": string, " << pt << ": Tensor, " << pu
                << ": Tensor): Tensor {\n";
            src << "    let " << v1 << " = " << ps << " + \"sep\";\n";
            src << "    let " << v2 << " = " << pt << ".concat(" << pu << ");\n";
            src << "    let " << v3 << " = false;\n";
            src << "    while (" << v3 << ") {\n";
            src << "        " << v1 << " = \"again\";\n";
            src << "    }\n";
            src << "    return " << v2 << ";\n";
            src << "}\n\n";
        }
    }
    return src.str();
}

std::vector<SyntheticProject> gen_split(const SyntheticSpec& spec, const std::string& split,
                                        int n) {
    std::vector<SyntheticProject> out;
    for (int i = 0; i < n; ++i) {
        std::string id = split + (i < 10 ? "0" : "") + std::to_string(i);
        Rng rng(spec.seed, "project/" + id);
        out.push_back({id, gen_project(spec, rng)});
    }
    return out;
}

}  // namespace

SyntheticCorpus generate_sources(const SyntheticSpec& spec) {
    SyntheticCorpus c;
    c.train = gen_split(spec, "train", spec.train_projects);
    c.val = gen_split(spec, "val", spec.val_projects);
    c.test = gen_split(spec, "test", spec.test_projects);
    return c;
}

Project project_from_source(const std::string& id, const std::string& source) {
    ast::SourceProject sp;
    sp.project_id = id;
    sp.files.push_back({"main.ts", source});
    ir::Module m = lower_to_ir(parse_project(sp));
    return {id, extract_graph(m)};
}

Corpus corpus_from_sources(const SyntheticCorpus& src) {
    Corpus c;
    for (const auto& p : src.train) c.train.push_back(project_from_source(p.id, p.source));
    for (const auto& p : src.val) c.val.push_back(project_from_source(p.id, p.source));
    for (const auto& p : src.test) c.test.push_back(project_from_source(p.id, p.source));
    return c;
}

}  // namespace typegraph
