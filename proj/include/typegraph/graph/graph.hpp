#ifndef TYPEGRAPH_GRAPH_GRAPH_HPP
#define TYPEGRAPH_GRAPH_GRAPH_HPP

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace typegraph {

enum class EdgeKind {
    Bool,
    Subtype,
    Assign,
    Function,
    Call,
    Object,
    Access,
    Name,
    NameSimilar,
    Usage,
};

enum class EdgeCategory { Fixed, NAry, NPairs };

const char* edge_kind_name(EdgeKind k);
EdgeKind edge_kind_from_name(const std::string& s);

/// Category is a function of the kind (fixed by the predicate table).
EdgeCategory edge_category(EdgeKind k);

/// True for the identifier/usage-derived hint edges, false for the
/// constraint-derived ones.
bool is_contextual(EdgeKind k);

struct TypeNode {
    enum class Kind { Variable, Constant };
    int id = 0;
    Kind kind = Kind::Variable;
    std::string const_type;                // literal/operator kind, Constant only
    std::vector<std::string> name_tokens;  // empty for unnamed intermediates
};

struct Hyperedge {
    EdgeKind kind;
    EdgeCategory category;
    std::vector<int> args;
    std::vector<std::string> labels;
};

struct TypeDependencyGraph {
    std::vector<TypeNode> nodes;
    std::vector<Hyperedge> edges;
    std::map<std::string, int> user_type_nodes;  // user type name -> node id
    std::map<int, std::string> annotations;      // node id -> ground-truth type name

    /// Auxiliary extraction state (not part of the serialized schema).
    std::map<int, std::string> node_names;  // node id -> qualified symbol name
    std::map<int, int> occurrences;         // node id -> source occurrence count
    std::vector<int> name_similar_pool;     // nodes eligible for NameSimilar
    struct AccessSite {
        int object;
        int result;
        std::string member;
    };
    std::vector<AccessSite> access_sites;
    // class name -> ordered (member name, member node) pairs; user classes only
    std::map<std::string, std::vector<std::pair<std::string, int>>> class_members;
    std::vector<std::string> class_order;  // declaration order of user classes

    int node_by_name(const std::string& qualified) const;
};

inline constexpr int kGraphVersion = 1;

nlohmann::ordered_json graph_to_json(const TypeDependencyGraph& g);
TypeDependencyGraph graph_from_json(const nlohmann::json& j);

}  // namespace typegraph

#endif
