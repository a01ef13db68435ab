#include "typegraph/errors.hpp"
#include "typegraph/graph/graph.hpp"

namespace typegraph {

const char* edge_kind_name(EdgeKind k) {
    switch (k) {
        case EdgeKind::Bool: return "Bool";
        case EdgeKind::Subtype: return "Subtype";
        case EdgeKind::Assign: return "Assign";
        case EdgeKind::Function: return "Function";
        case EdgeKind::Call: return "Call";
        case EdgeKind::Object: return "Object";
        case EdgeKind::Access: return "Access";
        case EdgeKind::Name: return "Name";
        case EdgeKind::NameSimilar: return "NameSimilar";
        case EdgeKind::Usage: return "Usage";
    }
    return "?";
}

EdgeKind edge_kind_from_name(const std::string& s) {
    static const std::map<std::string, EdgeKind> m = {
        {"Bool", EdgeKind::Bool},       {"Subtype", EdgeKind::Subtype},
        {"Assign", EdgeKind::Assign},   {"Function", EdgeKind::Function},
        {"Call", EdgeKind::Call},       {"Object", EdgeKind::Object},
        {"Access", EdgeKind::Access},   {"Name", EdgeKind::Name},
        {"NameSimilar", EdgeKind::NameSimilar}, {"Usage", EdgeKind::Usage},
    };
    auto it = m.find(s);
    if (it == m.end()) throw InputError("unknown edge kind: " + s);
    return it->second;
}

EdgeCategory edge_category(EdgeKind k) {
    switch (k) {
        case EdgeKind::Function:
        case EdgeKind::Call:
        case EdgeKind::Object: return EdgeCategory::NAry;
        case EdgeKind::Usage: return EdgeCategory::NPairs;
        default: return EdgeCategory::Fixed;
    }
}

bool is_contextual(EdgeKind k) {
    return k == EdgeKind::Name || k == EdgeKind::NameSimilar || k == EdgeKind::Usage;
}

int TypeDependencyGraph::node_by_name(const std::string& qualified) const {
    for (const auto& [id, name] : node_names)
        if (name == qualified) return id;
    return -1;
}

static const char* category_name(EdgeCategory c) {
    switch (c) {
        case EdgeCategory::Fixed: return "Fixed";
        case EdgeCategory::NAry: return "NAry";
        case EdgeCategory::NPairs: return "NPairs";
    }
    return "?";
}

nlohmann::ordered_json graph_to_json(const TypeDependencyGraph& g) {
    nlohmann::ordered_json j;
    j["version"] = kGraphVersion;
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& n : g.nodes) {
        nlohmann::ordered_json nj;
        nj["id"] = n.id;
        nj["kind"] = n.kind == TypeNode::Kind::Variable ? "var" : "const";
        if (n.kind == TypeNode::Kind::Constant) nj["const_type"] = n.const_type;
        nj["tokens"] = n.name_tokens;
        nodes.push_back(std::move(nj));
    }
    j["nodes"] = std::move(nodes);
    auto edges = nlohmann::ordered_json::array();
    for (const auto& e : g.edges) {
        nlohmann::ordered_json ej;
        ej["kind"] = edge_kind_name(e.kind);
        ej["category"] = category_name(e.category);
        ej["args"] = e.args;
        ej["labels"] = e.labels;
        edges.push_back(std::move(ej));
    }
    j["edges"] = std::move(edges);
    auto ut = nlohmann::ordered_json::object();
    for (const auto& [name, id] : g.user_type_nodes) ut[name] = id;
    j["user_types"] = std::move(ut);
    auto ann = nlohmann::ordered_json::object();
    for (const auto& [id, ty] : g.annotations) ann[std::to_string(id)] = ty;
    j["annotations"] = std::move(ann);
    return j;
}

TypeDependencyGraph graph_from_json(const nlohmann::json& j) {
    if (!j.contains("version") || j["version"].get<int>() != kGraphVersion)
        throw InputError("graph schema version mismatch");
    TypeDependencyGraph g;
    for (const auto& nj : j.at("nodes")) {
        TypeNode n;
        n.id = nj.at("id").get<int>();
        n.kind = nj.at("kind").get<std::string>() == "const" ? TypeNode::Kind::Constant
                                                             : TypeNode::Kind::Variable;
        if (nj.contains("const_type")) n.const_type = nj["const_type"].get<std::string>();
        n.name_tokens = nj.at("tokens").get<std::vector<std::string>>();
        g.nodes.push_back(std::move(n));
    }
    for (const auto& ej : j.at("edges")) {
        Hyperedge e;
        e.kind = edge_kind_from_name(ej.at("kind").get<std::string>());
        e.category = edge_category(e.kind);
        e.args = ej.at("args").get<std::vector<int>>();
        e.labels = ej.at("labels").get<std::vector<std::string>>();
        for (int a : e.args)
            if (a < 0 || a >= int(g.nodes.size())) throw InputError("edge argument out of range");
        g.edges.push_back(std::move(e));
    }
    for (const auto& [name, id] : j.at("user_types").items())
        g.user_type_nodes[name] = id.get<int>();
    for (const auto& [id, ty] : j.at("annotations").items())
        g.annotations[std::stoi(id)] = ty.get<std::string>();
    return g;
}

}  // namespace typegraph
