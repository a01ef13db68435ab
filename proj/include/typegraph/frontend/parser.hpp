#ifndef TYPEGRAPH_FRONTEND_PARSER_HPP
#define TYPEGRAPH_FRONTEND_PARSER_HPP

#include <string>

#include "typegraph/frontend/ast.hpp"

namespace typegraph {

/// Parse one source file of the TypeScript subset.
/// Throws SyntaxError / UnsupportedConstruct.
ast::FileAst parse_file(const std::string& path, const std::string& text);

/// Parse every file of a project.
ast::SubsetAst parse_project(const ast::SourceProject& src);

}  // namespace typegraph

#endif
