#include <algorithm>
#include <set>
#include <sstream>

#include "typegraph/errors.hpp"
#include "typegraph/frontend/ir.hpp"

namespace typegraph {
namespace {

using namespace ast;

// -- identifier collection (fresh names must never collide with source names)

void collect_expr_names(const Expr& e, std::set<std::string>& names);

void collect_stmt_names(const Stmt& s, std::set<std::string>& names) {
    std::visit(
        [&](const auto& n) {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, LetStmt>) {
                names.insert(n.name);
                if (n.init) collect_expr_names(**n.init, names);
            } else if constexpr (std::is_same_v<N, AssignStmt>) {
                collect_expr_names(*n.target, names);
                collect_expr_names(*n.value, names);
            } else if constexpr (std::is_same_v<N, ReturnStmt>) {
                if (n.value) collect_expr_names(**n.value, names);
            } else if constexpr (std::is_same_v<N, IfStmt>) {
                collect_expr_names(*n.cond, names);
                for (const auto& b : n.then_body) collect_stmt_names(*b, names);
                for (const auto& b : n.else_body) collect_stmt_names(*b, names);
            } else if constexpr (std::is_same_v<N, WhileStmt>) {
                collect_expr_names(*n.cond, names);
                for (const auto& b : n.body) collect_stmt_names(*b, names);
            } else if constexpr (std::is_same_v<N, ExprStmt>) {
                collect_expr_names(*n.expr, names);
            }
        },
        s.node);
}

void collect_expr_names(const Expr& e, std::set<std::string>& names) {
    std::visit(
        [&](const auto& n) {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, Ident>) {
                names.insert(n.name);
            } else if constexpr (std::is_same_v<N, Member>) {
                collect_expr_names(*n.object, names);
            } else if constexpr (std::is_same_v<N, Call>) {
                collect_expr_names(*n.callee, names);
                for (const auto& a : n.args) collect_expr_names(*a, names);
            } else if constexpr (std::is_same_v<N, ObjectLit>) {
                for (const auto& [k, v] : n.fields) collect_expr_names(*v, names);
            } else if constexpr (std::is_same_v<N, Binary>) {
                collect_expr_names(*n.lhs, names);
                collect_expr_names(*n.rhs, names);
            } else if constexpr (std::is_same_v<N, Unary>) {
                collect_expr_names(*n.operand, names);
            }
        },
        e.node);
}

void collect_func_names(const FuncDecl& fn, std::set<std::string>& names) {
    names.insert(fn.name);
    for (const auto& p : fn.params) names.insert(p.name);
    for (const auto& s : fn.body) collect_stmt_names(*s, names);
}

class FreshGen {
public:
    explicit FreshGen(std::set<std::string> taken) : taken_(std::move(taken)) {}

    std::string next() {
        while (true) {
            std::string name = "v" + std::to_string(counter_++);
            if (!taken_.count(name)) return name;
        }
    }

private:
    std::set<std::string> taken_;
    int counter_ = 1;
};

// -- lowering --------------------------------------------------------------

class Lowerer {
public:
    explicit Lowerer(const SubsetAst& ast) : ast_(ast) {
        std::set<std::string> names;
        for (const auto& f : ast.files) {
            for (const auto& c : f.classes) {
                names.insert(c.name);
                for (const auto& fd : c.fields) names.insert(fd.name);
                for (const auto& m : c.methods) collect_func_names(m, names);
            }
            for (const auto& fn : f.functions) collect_func_names(fn, names);
            for (const auto& s : f.statements) collect_stmt_names(*s, names);
        }
        fresh_ = std::make_unique<FreshGen>(std::move(names));
    }

    ir::Module run() {
        ir::Module m;
        m.project_id = ast_.project_id;
        std::set<std::string> toplevel;
        auto declare_top = [&](const std::string& name) {
            if (!toplevel.insert(name).second)
                throw InputError("duplicate top-level name: " + name);
        };
        for (const auto& f : ast_.files) {
            for (const auto& [kind, idx] : f.order) {
                switch (kind) {
                    case FileAst::DeclKind::Class: {
                        const ClassDecl& c = f.classes[idx];
                        declare_top(c.name);
                        m.decls.emplace_back(lower_class(m, c));
                        break;
                    }
                    case FileAst::DeclKind::Function: {
                        const FuncDecl& fn = f.functions[idx];
                        declare_top(fn.name);
                        m.decls.emplace_back(lower_func(m, fn, fn.name));
                        break;
                    }
                    case FileAst::DeclKind::Statement: {
                        std::vector<ir::StmtPtr> sink;
                        lower_stmt(m, *f.statements[idx], "", sink);
                        for (auto& s : sink) m.decls.emplace_back(std::move(s));
                        break;
                    }
                }
            }
        }
        m.occurrences = count_occurrences(ast_);
        return m;
    }

private:
    void note_ann(ir::Module& m, const std::string& qname,
                  const std::optional<TypeAnn>& ann) {
        if (ann && ann->name != "any") m.annotations[qname] = ann->name;
    }

    ir::Class lower_class(ir::Module& m, const ClassDecl& c) {
        ir::Class out;
        out.name = c.name;
        out.superclass = c.superclass;
        out.is_interface = c.is_interface;
        for (const auto& fd : c.fields) {
            note_ann(m, c.name + "::" + fd.name, fd.ann);
            out.fields.push_back(
                {fd.name, fd.ann ? std::optional(fd.ann->name) : std::nullopt});
        }
        for (const auto& me : c.methods) out.methods.push_back(lower_func(m, me, c.name + "::" + me.name));
        return out;
    }

    ir::Func lower_func(ir::Module& m, const FuncDecl& fn, const std::string& qname) {
        ir::Func out;
        out.name = fn.name;
        out.has_body = fn.has_body;
        std::set<std::string> locals;
        for (const auto& p : fn.params) {
            if (!locals.insert(p.name).second)
                throw InputError("duplicate parameter " + p.name + " in " + qname);
            note_ann(m, qname + "::" + p.name, p.ann);
            out.params.push_back({p.name, p.ann ? std::optional(p.ann->name) : std::nullopt});
        }
        if (fn.ret_ann) {
            note_ann(m, qname + "::<ret>", fn.ret_ann);
            out.ret_ann = fn.ret_ann->name;
        }
        for (const auto& s : fn.body) lower_stmt_checked(m, *s, qname, out.body, locals);
        return out;
    }

    void lower_stmt_checked(ir::Module& m, const Stmt& s, const std::string& scope,
                            std::vector<ir::StmtPtr>& sink, std::set<std::string>& locals) {
        if (const auto* ls = std::get_if<LetStmt>(&s.node)) {
            if (!locals.insert(ls->name).second)
                throw InputError("duplicate declaration of " + ls->name + " in " +
                                 (scope.empty() ? std::string("<module>") : scope));
        }
        lower_stmt(m, s, scope, sink, &locals);
    }

    std::string qualify(const std::string& scope, const std::string& name) const {
        return scope.empty() ? name : scope + "::" + name;
    }

    ir::Atom lit_atom(const Expr& e) const {
        if (const auto* n = std::get_if<NumberLit>(&e.node)) return ir::Atom::lit("number", n->text);
        if (const auto* s = std::get_if<StringLit>(&e.node)) return ir::Atom::lit("string", s->text);
        const auto& b = std::get<BoolLit>(e.node);
        return ir::Atom::lit("boolean", b.value ? "true" : "false");
    }

    bool is_atomic(const Expr& e) const {
        return std::holds_alternative<Ident>(e.node) || std::holds_alternative<NumberLit>(e.node) ||
               std::holds_alternative<StringLit>(e.node) || std::holds_alternative<BoolLit>(e.node);
    }

    /// Lower to an atom, emitting fresh bindings for every compound node.
    ir::Atom lower_atom(const Expr& e, std::vector<ir::StmtPtr>& sink) {
        if (const auto* id = std::get_if<Ident>(&e.node)) return ir::Atom::var(id->name);
        if (is_atomic(e)) return lit_atom(e);
        ir::FlatExpr flat = lower_flat(e, sink);
        std::string name = fresh_->next();
        auto st = std::make_unique<ir::Stmt>();
        st->node = ir::LetBind{name, std::move(flat), true};
        sink.push_back(std::move(st));
        return ir::Atom::var(name);
    }

    /// Lower one level: result is a flat expression whose operands are atoms.
    ir::FlatExpr lower_flat(const Expr& e, std::vector<ir::StmtPtr>& sink) {
        return std::visit(
            [&](const auto& n) -> ir::FlatExpr {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, Ident>) {
                    return ir::Atom::var(n.name);
                } else if constexpr (std::is_same_v<N, NumberLit> || std::is_same_v<N, StringLit> ||
                                     std::is_same_v<N, BoolLit>) {
                    return lit_atom(e);
                } else if constexpr (std::is_same_v<N, Member>) {
                    return ir::AccessExpr{lower_atom(*n.object, sink), n.name};
                } else if constexpr (std::is_same_v<N, Call>) {
                    ir::CallExpr c;
                    c.callee = lower_atom(*n.callee, sink);
                    for (const auto& a : n.args) c.args.push_back(lower_atom(*a, sink));
                    return c;
                } else if constexpr (std::is_same_v<N, ObjectLit>) {
                    ir::ObjectExpr o;
                    for (const auto& [k, v] : n.fields) o.fields.emplace_back(k, lower_atom(*v, sink));
                    return o;
                } else if constexpr (std::is_same_v<N, Binary>) {
                    ir::Atom l = lower_atom(*n.lhs, sink);
                    ir::Atom r = lower_atom(*n.rhs, sink);
                    return ir::BinaryExpr{n.op, std::move(l), std::move(r)};
                } else {
                    static_assert(std::is_same_v<N, Unary>);
                    return ir::UnaryExpr{n.op, lower_atom(*n.operand, sink)};
                }
            },
            e.node);
    }

    void lower_stmt(ir::Module& m, const Stmt& s, const std::string& scope,
                    std::vector<ir::StmtPtr>& sink, std::set<std::string>* locals = nullptr) {
        auto push = [&](auto node) {
            auto st = std::make_unique<ir::Stmt>();
            st->node = std::move(node);
            sink.push_back(std::move(st));
        };
        std::visit(
            [&](const auto& n) {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, LetStmt>) {
                    note_ann(m, qualify(scope, n.name), n.ann);
                    if (n.init) {
                        ir::FlatExpr e = lower_flat(**n.init, sink);
                        push(ir::LetBind{n.name, std::move(e), false});
                    } else {
                        push(ir::LetBind{n.name, std::nullopt, false});
                    }
                } else if constexpr (std::is_same_v<N, AssignStmt>) {
                    if (const auto* id = std::get_if<Ident>(&n.target->node)) {
                        ir::FlatExpr e = lower_flat(*n.value, sink);
                        push(ir::AssignVar{id->name, std::move(e)});
                    } else {
                        // x.l = e  ==>  let vK = x.l; vK = e
                        const auto& mem = std::get<Member>(n.target->node);
                        ir::Atom obj = lower_atom(*mem.object, sink);
                        ir::Atom val = lower_atom(*n.value, sink);
                        std::string slot = fresh_->next();
                        push(ir::LetBind{slot, ir::AccessExpr{std::move(obj), mem.name}, true});
                        push(ir::AssignVar{slot, val});
                    }
                } else if constexpr (std::is_same_v<N, ReturnStmt>) {
                    if (n.value) {
                        push(ir::Return{lower_atom(**n.value, sink)});
                    } else {
                        push(ir::Return{std::nullopt});
                    }
                } else if constexpr (std::is_same_v<N, IfStmt>) {
                    ir::Atom cond = lower_atom(*n.cond, sink);
                    ir::If out{std::move(cond), {}, {}};
                    for (const auto& b : n.then_body)
                        lower_nested(m, *b, scope, out.then_body, locals);
                    for (const auto& b : n.else_body)
                        lower_nested(m, *b, scope, out.else_body, locals);
                    push(std::move(out));
                } else if constexpr (std::is_same_v<N, WhileStmt>) {
                    ir::Atom cond = lower_atom(*n.cond, sink);
                    ir::While out{std::move(cond), {}};
                    for (const auto& b : n.body) lower_nested(m, *b, scope, out.body, locals);
                    push(std::move(out));
                } else if constexpr (std::is_same_v<N, ExprStmt>) {
                    if (!is_atomic(*n.expr)) {
                        ir::FlatExpr e = lower_flat(*n.expr, sink);
                        push(ir::LetBind{fresh_->next(), std::move(e), true});
                    }
                }
            },
            s.node);
    }

    void lower_nested(ir::Module& m, const Stmt& s, const std::string& scope,
                      std::vector<ir::StmtPtr>& sink, std::set<std::string>* locals) {
        if (locals) {
            if (const auto* ls = std::get_if<LetStmt>(&s.node)) {
                if (!locals->insert(ls->name).second)
                    throw InputError("duplicate declaration of " + ls->name + " in " + scope);
            }
        }
        lower_stmt(m, s, scope, sink, locals);
    }

    const SubsetAst& ast_;
    std::unique_ptr<FreshGen> fresh_;
};

// -- occurrence counting ---------------------------------------------------

class OccCounter {
public:
    explicit OccCounter(const SubsetAst& ast) : ast_(ast) {}

    std::map<std::string, int> run() {
        // module-level symbols first (functions/classes are visible everywhere)
        for (const auto& f : ast_.files) {
            for (const auto& c : f.classes) module_scope_[c.name] = c.name;
            for (const auto& fn : f.functions) module_scope_[fn.name] = fn.name;
        }
        for (const auto& f : ast_.files) {
            for (const auto& c : f.classes) {
                counts_[c.name] += 1;
                std::map<std::string, std::string> members;
                for (const auto& fd : c.fields) {
                    std::string q = c.name + "::" + fd.name;
                    counts_[q] += 1;
                    members[fd.name] = q;
                }
                for (const auto& me : c.methods) {
                    std::string q = c.name + "::" + me.name;
                    counts_[q] += 1;
                    members[me.name] = q;
                }
                for (const auto& me : c.methods) walk_func(me, c.name + "::" + me.name, &members);
            }
            for (const auto& fn : f.functions) {
                counts_[fn.name] += 1;
                walk_func(fn, fn.name, nullptr);
            }
            for (const auto& s : f.statements) {
                std::map<std::string, std::string> scope;
                walk_stmt(*s, "", scope, nullptr);
                for (const auto& [k, v] : scope) module_scope_[k] = v;
            }
        }
        return counts_;
    }

private:
    void walk_func(const FuncDecl& fn, const std::string& qname,
                   const std::map<std::string, std::string>* members) {
        std::map<std::string, std::string> scope;
        for (const auto& p : fn.params) {
            std::string q = qname + "::" + p.name;
            counts_[q] += 1;
            scope[p.name] = q;
        }
        for (const auto& s : fn.body) walk_stmt(*s, qname, scope, members);
    }

    void walk_stmt(const Stmt& s, const std::string& qname,
                   std::map<std::string, std::string>& scope,
                   const std::map<std::string, std::string>* members) {
        std::visit(
            [&](const auto& n) {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, LetStmt>) {
                    if (n.init) walk_expr(**n.init, scope, members);
                    std::string q = qname.empty() ? n.name : qname + "::" + n.name;
                    counts_[q] += 1;
                    scope[n.name] = q;
                } else if constexpr (std::is_same_v<N, AssignStmt>) {
                    walk_expr(*n.target, scope, members);
                    walk_expr(*n.value, scope, members);
                } else if constexpr (std::is_same_v<N, ReturnStmt>) {
                    if (n.value) walk_expr(**n.value, scope, members);
                } else if constexpr (std::is_same_v<N, IfStmt>) {
                    walk_expr(*n.cond, scope, members);
                    for (const auto& b : n.then_body) walk_stmt(*b, qname, scope, members);
                    for (const auto& b : n.else_body) walk_stmt(*b, qname, scope, members);
                } else if constexpr (std::is_same_v<N, WhileStmt>) {
                    walk_expr(*n.cond, scope, members);
                    for (const auto& b : n.body) walk_stmt(*b, qname, scope, members);
                } else if constexpr (std::is_same_v<N, ExprStmt>) {
                    walk_expr(*n.expr, scope, members);
                }
            },
            s.node);
    }

    void walk_expr(const Expr& e, const std::map<std::string, std::string>& scope,
                   const std::map<std::string, std::string>* members) {
        std::visit(
            [&](const auto& n) {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, Ident>) {
                    auto it = scope.find(n.name);
                    if (it != scope.end()) {
                        counts_[it->second] += 1;
                        return;
                    }
                    if (members) {
                        auto mi = members->find(n.name);
                        if (mi != members->end()) {
                            counts_[mi->second] += 1;
                            return;
                        }
                    }
                    auto gi = module_scope_.find(n.name);
                    counts_[gi != module_scope_.end() ? gi->second : n.name] += 1;
                } else if constexpr (std::is_same_v<N, Member>) {
                    walk_expr(*n.object, scope, members);
                } else if constexpr (std::is_same_v<N, Call>) {
                    walk_expr(*n.callee, scope, members);
                    for (const auto& a : n.args) walk_expr(*a, scope, members);
                } else if constexpr (std::is_same_v<N, ObjectLit>) {
                    for (const auto& [k, v] : n.fields) walk_expr(*v, scope, members);
                } else if constexpr (std::is_same_v<N, Binary>) {
                    walk_expr(*n.lhs, scope, members);
                    walk_expr(*n.rhs, scope, members);
                } else if constexpr (std::is_same_v<N, Unary>) {
                    walk_expr(*n.operand, scope, members);
                }
            },
            e.node);
    }

    const SubsetAst& ast_;
    std::map<std::string, std::string> module_scope_;
    std::map<std::string, int> counts_;
};

// -- text dump -------------------------------------------------------------

std::string atom_str(const ir::Atom& a) {
    if (a.is_var()) return a.name;
    if (a.lit_kind == "string") return "\"" + a.lit_text + "\"";
    return a.lit_text;
}

std::string flat_str(const ir::FlatExpr& e) {
    return std::visit(
        [](const auto& n) -> std::string {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, ir::Atom>) {
                return atom_str(n);
            } else if constexpr (std::is_same_v<N, ir::AccessExpr>) {
                return atom_str(n.object) + "." + n.member;
            } else if constexpr (std::is_same_v<N, ir::CallExpr>) {
                std::string s = atom_str(n.callee) + "(";
                for (std::size_t i = 0; i < n.args.size(); ++i)
                    s += (i ? ", " : "") + atom_str(n.args[i]);
                return s + ")";
            } else if constexpr (std::is_same_v<N, ir::ObjectExpr>) {
                std::string s = "{";
                for (std::size_t i = 0; i < n.fields.size(); ++i)
                    s += (i ? ", " : "") + n.fields[i].first + ": " + atom_str(n.fields[i].second);
                return s + "}";
            } else if constexpr (std::is_same_v<N, ir::BinaryExpr>) {
                return atom_str(n.lhs) + " " + n.op + " " + atom_str(n.rhs);
            } else {
                static_assert(std::is_same_v<N, ir::UnaryExpr>);
                return n.op + atom_str(n.operand);
            }
        },
        e);
}

void dump_stmt(std::ostringstream& os, const ir::Stmt& s, int indent) {
    std::string pad(std::size_t(indent) * 2, ' ');
    std::visit(
        [&](const auto& n) {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, ir::LetBind>) {
                os << pad << "let " << n.target;
                if (n.expr) os << " = " << flat_str(*n.expr);
                os << "\n";
            } else if constexpr (std::is_same_v<N, ir::AssignVar>) {
                os << pad << n.target << " = " << flat_str(n.expr) << "\n";
            } else if constexpr (std::is_same_v<N, ir::Return>) {
                os << pad << "return";
                if (n.value) os << " " << atom_str(*n.value);
                os << "\n";
            } else if constexpr (std::is_same_v<N, ir::If>) {
                os << pad << "if " << atom_str(n.cond) << "\n";
                for (const auto& b : n.then_body) dump_stmt(os, *b, indent + 1);
                if (!n.else_body.empty()) {
                    os << pad << "else\n";
                    for (const auto& b : n.else_body) dump_stmt(os, *b, indent + 1);
                }
            } else if constexpr (std::is_same_v<N, ir::While>) {
                os << pad << "while " << atom_str(n.cond) << "\n";
                for (const auto& b : n.body) dump_stmt(os, *b, indent + 1);
            }
        },
        s.node);
}

void dump_func(std::ostringstream& os, const ir::Func& fn, int indent) {
    std::string pad(std::size_t(indent) * 2, ' ');
    os << pad << "function " << fn.name << "(";
    for (std::size_t i = 0; i < fn.params.size(); ++i) os << (i ? ", " : "") << fn.params[i].name;
    os << ")\n";
    for (const auto& s : fn.body) dump_stmt(os, *s, indent + 1);
}

}  // namespace

ir::Module lower_to_ir(const ast::SubsetAst& ast) { return Lowerer(ast).run(); }

std::map<std::string, int> count_occurrences(const ast::SubsetAst& ast) {
    return OccCounter(ast).run();
}

std::string ir_to_text(const ir::Module& m) {
    std::ostringstream os;
    for (const auto& d : m.decls) {
        std::visit(
            [&](const auto& n) {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, ir::Class>) {
                    os << (n.is_interface ? "interface " : "class ") << n.name;
                    if (n.superclass) os << " extends " << *n.superclass;
                    os << "\n";
                    for (const auto& f : n.fields) os << "  field " << f.name << "\n";
                    for (const auto& me : n.methods) dump_func(os, me, 1);
                } else if constexpr (std::is_same_v<N, ir::Func>) {
                    dump_func(os, n, 0);
                } else {
                    dump_stmt(os, *n, 0);
                }
            },
            d);
    }
    return os.str();
}

}  // namespace typegraph
