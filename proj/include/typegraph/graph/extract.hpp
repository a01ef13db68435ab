#ifndef TYPEGRAPH_GRAPH_EXTRACT_HPP
#define TYPEGRAPH_GRAPH_EXTRACT_HPP

#include <string>
#include <vector>

#include "typegraph/frontend/ir.hpp"
#include "typegraph/graph/graph.hpp"

namespace typegraph {

/// Split an identifier on underscores and camel-case boundaries; lowercase
/// the tokens, digits stay attached.
std::vector<std::string> tokenize_identifier(const std::string& name);

/// Member tables of well-known library classes, used as Usage candidates.
struct LibraryClass {
    std::string name;
    std::vector<std::string> members;
};
const std::vector<LibraryClass>& library_manifest();

struct ExtractOptions {
    bool name_similar = true;
    bool usage = true;
};

/// Build the type dependency graph of a lowered module: one node per type
/// variable, hyperedges per the predicate table, plus Name/NameSimilar/Usage
/// hint edges. Deterministic: node ids follow declaration order.
TypeDependencyGraph extract_graph(const ir::Module& m, const ExtractOptions& opts = {});

/// NameSimilar edges for every pair of named variable nodes whose token sets
/// intersect (exposed separately for testing; extract_graph already calls it).
void add_name_similar_edges(TypeDependencyGraph& g);

/// Usage edges for every recorded access site `y = x.l`: one edge with head
/// pair (x, y) and one (class, member) pair per class defining `l`.
/// Candidates are the project's classes plus the library manifest; library
/// classes materialize nodes lazily.
void add_usage_edges(TypeDependencyGraph& g);

}  // namespace typegraph

#endif
