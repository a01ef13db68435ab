#ifndef TYPEGRAPH_FRONTEND_AST_HPP
#define TYPEGRAPH_FRONTEND_AST_HPP

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "typegraph/errors.hpp"

namespace typegraph::ast {

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Ident {
    std::string name;
};
struct NumberLit {
    std::string text;
};
struct StringLit {
    std::string text;
};
struct BoolLit {
    bool value;
};
struct Member {
    ExprPtr object;
    std::string name;
};
struct Call {
    ExprPtr callee;
    std::vector<ExprPtr> args;
};
struct ObjectLit {
    std::vector<std::pair<std::string, ExprPtr>> fields;
};
struct Binary {
    std::string op;
    ExprPtr lhs;
    ExprPtr rhs;
};
struct Unary {
    std::string op;
    ExprPtr operand;
};

struct Expr {
    Span span;
    std::variant<Ident, NumberLit, StringLit, BoolLit, Member, Call, ObjectLit, Binary, Unary> node;
};

// Annotations are bare type names; generics and arrow types are collapsed to
// their base name / "Function" by the parser.
struct TypeAnn {
    Span span;
    std::string name;
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct LetStmt {
    std::string name;
    std::optional<TypeAnn> ann;
    std::optional<ExprPtr> init;
};
struct AssignStmt {
    ExprPtr target;  // Ident or Member
    ExprPtr value;
};
struct ReturnStmt {
    std::optional<ExprPtr> value;
};
struct IfStmt {
    ExprPtr cond;
    std::vector<StmtPtr> then_body;
    std::vector<StmtPtr> else_body;
};
struct WhileStmt {
    ExprPtr cond;
    std::vector<StmtPtr> body;
};
struct ExprStmt {
    ExprPtr expr;
};

struct Stmt {
    Span span;
    std::variant<LetStmt, AssignStmt, ReturnStmt, IfStmt, WhileStmt, ExprStmt> node;
};

struct Param {
    std::string name;
    std::optional<TypeAnn> ann;
    Span span;
};

struct FuncDecl {
    std::string name;
    std::vector<Param> params;
    std::optional<TypeAnn> ret_ann;
    std::vector<StmtPtr> body;
    bool has_body = true;  // false for interface method signatures
    Span span;
};

struct FieldDecl {
    std::string name;
    std::optional<TypeAnn> ann;
    Span span;
};

struct ClassDecl {
    std::string name;
    std::optional<std::string> superclass;
    std::vector<FieldDecl> fields;
    std::vector<FuncDecl> methods;
    bool is_interface = false;
    Span span;
};

struct FileAst {
    std::string path;
    std::vector<ClassDecl> classes;
    std::vector<FuncDecl> functions;
    std::vector<StmtPtr> statements;  // top-level statements
    // declaration order across the three lists
    enum class DeclKind { Class, Function, Statement };
    std::vector<std::pair<DeclKind, std::size_t>> order;
};

struct SubsetAst {
    std::string project_id;
    std::vector<FileAst> files;
};

struct SourceFile {
    std::string path;
    std::string text;
};

struct SourceProject {
    std::string project_id;
    std::vector<SourceFile> files;
};

}  // namespace typegraph::ast

#endif
