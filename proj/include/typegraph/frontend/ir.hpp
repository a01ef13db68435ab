#ifndef TYPEGRAPH_FRONTEND_IR_HPP
#define TYPEGRAPH_FRONTEND_IR_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "typegraph/frontend/ast.hpp"

namespace typegraph::ir {

/// Operand of a flat expression: a variable reference or a literal.
struct Atom {
    enum class Kind { Var, Lit };
    Kind kind = Kind::Var;
    std::string name;      // variable name (Kind::Var)
    std::string lit_kind;  // "number" | "string" | "boolean" (Kind::Lit)
    std::string lit_text;

    static Atom var(std::string n) { return Atom{Kind::Var, std::move(n), "", ""}; }
    static Atom lit(std::string kind, std::string text) {
        return Atom{Kind::Lit, "", std::move(kind), std::move(text)};
    }
    bool is_var() const { return kind == Kind::Var; }
};

struct AccessExpr {
    Atom object;
    std::string member;
};
struct CallExpr {
    Atom callee;
    std::vector<Atom> args;
};
struct ObjectExpr {
    std::vector<std::pair<std::string, Atom>> fields;
};
struct BinaryExpr {
    std::string op;
    Atom lhs;
    Atom rhs;
};
struct UnaryExpr {
    std::string op;
    Atom operand;
};

/// Flat right-hand side: at most one operator deep, all operands atomic.
using FlatExpr = std::variant<Atom, AccessExpr, CallExpr, ObjectExpr, BinaryExpr, UnaryExpr>;

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct LetBind {
    std::string target;
    std::optional<FlatExpr> expr;
    bool synthetic = false;  // true for compiler-introduced intermediates
};
struct AssignVar {
    std::string target;
    FlatExpr expr;
};
struct Return {
    std::optional<Atom> value;
};
struct If {
    Atom cond;
    std::vector<StmtPtr> then_body;
    std::vector<StmtPtr> else_body;
};
struct While {
    Atom cond;
    std::vector<StmtPtr> body;
};

struct Stmt {
    std::variant<LetBind, AssignVar, Return, If, While> node;
};

struct Param {
    std::string name;
    std::optional<std::string> ann;
};

struct Func {
    std::string name;
    std::vector<Param> params;
    std::optional<std::string> ret_ann;
    std::vector<StmtPtr> body;
    bool has_body = true;
};

struct Field {
    std::string name;
    std::optional<std::string> ann;
};

struct Class {
    std::string name;
    std::optional<std::string> superclass;
    bool is_interface = false;
    std::vector<Field> fields;
    std::vector<Func> methods;
};

/// One project lowered to a single flat namespace. Symbols are addressed by
/// qualified names: "f::x" for a local of function f, "C::m::p" for a method
/// parameter, "f::<ret>" for a return slot, plain names at module level.
struct Module {
    std::string project_id;
    std::vector<std::variant<Class, Func, StmtPtr>> decls;
    std::map<std::string, std::string> annotations;  // qualified name -> declared type
    std::map<std::string, int> occurrences;          // qualified name -> occurrence count
};

}  // namespace typegraph::ir

namespace typegraph {

/// Lower a parsed project to the flat intermediate representation. Every
/// compound subexpression gets a fresh "vN" binding; `any` annotations are
/// dropped from the ground-truth map.
ir::Module lower_to_ir(const ast::SubsetAst& ast);

/// Occurrence count per declared source variable (declaration counts once).
std::map<std::string, int> count_occurrences(const ast::SubsetAst& ast);

/// Line-oriented IR dump, one binding per line, deterministic order.
std::string ir_to_text(const ir::Module& m);

}  // namespace typegraph

#endif
