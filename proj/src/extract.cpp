#include <set>

#include "typegraph/errors.hpp"
#include "typegraph/graph/extract.hpp"

namespace typegraph {
namespace {

using ir::Atom;

constexpr const char* kRetSlot = "<ret>";

class Extractor {
public:
    Extractor(const ir::Module& m, const ExtractOptions& opts) : m_(m), opts_(opts) {}

    TypeDependencyGraph run() {
        // Phase A: module-level symbols in declaration order (classes with
        // their members, then per-decl function nodes).
        for (const auto& d : m_.decls) {
            if (const auto* c = std::get_if<ir::Class>(&d)) {
                declare_class(*c);
            } else if (const auto* f = std::get_if<ir::Func>(&d)) {
                int id = new_named_node(f->name, f->name);
                module_scope_[f->name] = id;
            }
        }
        // Phase B: function/method internals and top-level statements.
        for (const auto& d : m_.decls) {
            if (const auto* c = std::get_if<ir::Class>(&d)) {
                extract_class(*c);
            } else if (const auto* f = std::get_if<ir::Func>(&d)) {
                extract_func(*f, f->name, nullptr);
            } else {
                const auto& s = std::get<ir::StmtPtr>(d);
                Scope scope{"", &module_scope_, nullptr};
                scope_returns_ = -1;
                extract_stmt(*s, scope);
            }
        }
        annotate();
        if (opts_.usage) add_usage_edges(g_);
        name_edges();
        if (opts_.name_similar) add_name_similar_edges(g_);
        return std::move(g_);
    }

private:
    struct Scope {
        std::string prefix;  // "" at module level
        std::map<std::string, int>* vars;
        const std::map<std::string, int>* members;  // enclosing class, may be null
    };

    int new_node(TypeNode::Kind kind) {
        TypeNode n;
        n.id = int(g_.nodes.size());
        n.kind = kind;
        g_.nodes.push_back(std::move(n));
        return g_.nodes.back().id;
    }

    int new_named_node(const std::string& qualified, const std::string& source_name) {
        int id = new_node(TypeNode::Kind::Variable);
        g_.nodes[id].name_tokens = tokenize_identifier(source_name);
        g_.node_names[id] = qualified;
        raw_names_[id] = source_name;
        g_.name_similar_pool.push_back(id);
        auto oc = m_.occurrences.find(qualified);
        if (oc != m_.occurrences.end()) g_.occurrences[id] = oc->second;
        return id;
    }

    /// Unnamed intermediate: carries no identifier information.
    int new_fresh_node(const std::string& qualified) {
        int id = new_node(TypeNode::Kind::Variable);
        g_.node_names[id] = qualified;
        return id;
    }

    int const_node(const std::string& const_type) {
        int id = new_node(TypeNode::Kind::Constant);
        g_.nodes[id].const_type = const_type;
        return id;
    }

    int implicit_module_node(const std::string& name) {
        auto it = module_scope_.find(name);
        if (it != module_scope_.end()) return it->second;
        int id = new_node(TypeNode::Kind::Variable);
        g_.nodes[id].name_tokens = tokenize_identifier(name);
        g_.node_names[id] = name;
        raw_names_[id] = name;
        auto oc = m_.occurrences.find(name);
        if (oc != m_.occurrences.end()) g_.occurrences[id] = oc->second;
        module_scope_[name] = id;
        return id;
    }

    void edge(EdgeKind kind, std::vector<int> args, std::vector<std::string> labels = {}) {
        g_.edges.push_back(Hyperedge{kind, edge_category(kind), std::move(args), std::move(labels)});
    }

    // -- declarations --

    void declare_class(const ir::Class& c) {
        int cid = new_named_node(c.name, c.name);
        module_scope_[c.name] = cid;
        g_.user_type_nodes[c.name] = cid;
        g_.class_order.push_back(c.name);
        auto& members = g_.class_members[c.name];
        auto& mscope = member_scopes_[c.name];
        for (const auto& f : c.fields) {
            int fid = new_named_node(c.name + "::" + f.name, f.name);
            members.emplace_back(f.name, fid);
            mscope[f.name] = fid;
        }
        for (const auto& me : c.methods) {
            int mid = new_named_node(c.name + "::" + me.name, me.name);
            members.emplace_back(me.name, mid);
            mscope[me.name] = mid;
        }
    }

    void extract_class(const ir::Class& c) {
        int cid = module_scope_.at(c.name);
        const auto& members = g_.class_members.at(c.name);
        std::vector<int> args{cid};
        std::vector<std::string> labels;
        for (const auto& [name, id] : members) {
            args.push_back(id);
            labels.push_back(name);
        }
        edge(EdgeKind::Object, std::move(args), std::move(labels));
        if (c.superclass) edge(EdgeKind::Subtype, {cid, implicit_module_node(*c.superclass)});
        for (const auto& me : c.methods)
            extract_func(me, c.name + "::" + me.name, &member_scopes_.at(c.name));
    }

    void extract_func(const ir::Func& f, const std::string& qname,
                      const std::map<std::string, int>* members) {
        int fid = members ? members->at(f.name) : module_scope_.at(f.name);
        std::map<std::string, int> locals;
        std::vector<int> fargs{fid};
        for (const auto& p : f.params) {
            int pid = new_named_node(qname + "::" + p.name, p.name);
            locals[p.name] = pid;
            fargs.push_back(pid);
        }
        int rid = new_fresh_node(qname + "::" + kRetSlot);
        fargs.push_back(rid);
        edge(EdgeKind::Function, std::move(fargs));
        Scope scope{qname, &locals, members};
        scope_returns_ = rid;
        for (const auto& s : f.body) extract_stmt(*s, scope);
    }

    // -- statements --

    int resolve(const Atom& a, const Scope& sc) {
        if (!a.is_var()) return const_node(a.lit_kind);
        auto it = sc.vars->find(a.name);
        if (it != sc.vars->end()) return it->second;
        if (sc.members) {
            auto mi = sc.members->find(a.name);
            if (mi != sc.members->end()) return mi->second;
        }
        return implicit_module_node(a.name);
    }

    /// Emit the edges of one flat expression bound to (or assigned into)
    /// node `target`.
    void extract_flat(int target, const ir::FlatExpr& e, const Scope& sc) {
        std::visit(
            [&](const auto& n) {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, Atom>) {
                    edge(EdgeKind::Assign, {target, resolve(n, sc)});
                } else if constexpr (std::is_same_v<N, ir::AccessExpr>) {
                    int obj = resolve(n.object, sc);
                    edge(EdgeKind::Access, {target, obj}, {n.member});
                    g_.access_sites.push_back({obj, target, n.member});
                } else if constexpr (std::is_same_v<N, ir::CallExpr>) {
                    std::vector<int> args{target, resolve(n.callee, sc)};
                    for (const auto& a : n.args) args.push_back(resolve(a, sc));
                    edge(EdgeKind::Call, std::move(args));
                } else if constexpr (std::is_same_v<N, ir::ObjectExpr>) {
                    std::vector<int> args{target};
                    std::vector<std::string> labels;
                    for (const auto& [k, v] : n.fields) {
                        args.push_back(resolve(v, sc));
                        labels.push_back(k);
                    }
                    edge(EdgeKind::Object, std::move(args), std::move(labels));
                } else if constexpr (std::is_same_v<N, ir::BinaryExpr>) {
                    int l = resolve(n.lhs, sc);
                    int r = resolve(n.rhs, sc);
                    if (n.op == "&&" || n.op == "||") {
                        edge(EdgeKind::Bool, {l});
                        edge(EdgeKind::Bool, {r});
                    }
                    int op = const_node("op:" + n.op);
                    edge(EdgeKind::Call, {target, op, l, r});
                } else {
                    static_assert(std::is_same_v<N, ir::UnaryExpr>);
                    int x = resolve(n.operand, sc);
                    if (n.op == "!") edge(EdgeKind::Bool, {x});
                    int op = const_node("op:u" + n.op);
                    edge(EdgeKind::Call, {target, op, x});
                }
            },
            e);
    }

    void extract_stmt(const ir::Stmt& s, Scope& sc) {
        std::visit(
            [&](const auto& n) {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, ir::LetBind>) {
                    std::string q = sc.prefix.empty() ? n.target : sc.prefix + "::" + n.target;
                    int id = n.synthetic ? new_fresh_node(q) : new_named_node(q, n.target);
                    (*sc.vars)[n.target] = id;
                    if (n.expr) extract_flat(id, *n.expr, sc);
                } else if constexpr (std::is_same_v<N, ir::AssignVar>) {
                    int id = resolve(Atom::var(n.target), sc);
                    extract_flat(id, n.expr, sc);
                } else if constexpr (std::is_same_v<N, ir::Return>) {
                    if (n.value && scope_returns_ >= 0)
                        edge(EdgeKind::Subtype, {resolve(*n.value, sc), scope_returns_});
                } else if constexpr (std::is_same_v<N, ir::If>) {
                    edge(EdgeKind::Bool, {resolve(n.cond, sc)});
                    for (const auto& b : n.then_body) extract_stmt(*b, sc);
                    for (const auto& b : n.else_body) extract_stmt(*b, sc);
                } else if constexpr (std::is_same_v<N, ir::While>) {
                    edge(EdgeKind::Bool, {resolve(n.cond, sc)});
                    for (const auto& b : n.body) extract_stmt(*b, sc);
                }
            },
            s.node);
    }

    void annotate() {
        // qualified name -> node id lookup for annotation transfer
        std::map<std::string, int> by_name;
        for (const auto& [id, name] : g_.node_names) by_name[name] = id;
        for (const auto& [qname, ty] : m_.annotations) {
            auto it = by_name.find(qname);
            if (it != by_name.end()) g_.annotations[it->second] = ty;
        }
    }

    void name_edges() {
        for (const auto& n : g_.nodes) {
            if (n.kind != TypeNode::Kind::Variable || n.name_tokens.empty()) continue;
            auto it = raw_names_.find(n.id);
            if (it == raw_names_.end()) continue;
            edge(EdgeKind::Name, {n.id}, {it->second});
        }
    }

    const ir::Module& m_;
    ExtractOptions opts_;
    TypeDependencyGraph g_;
    std::map<std::string, int> module_scope_;
    std::map<std::string, std::map<std::string, int>> member_scopes_;
    std::map<int, std::string> raw_names_;
    int scope_returns_ = -1;
};

}  // namespace

const std::vector<LibraryClass>& library_manifest() {
    static const std::vector<LibraryClass> manifest = {
        {"Array", {"length", "concat", "push", "pop", "map", "filter", "slice", "indexOf"}},
        {"String", {"length", "concat", "charAt", "slice", "split", "indexOf", "toString"}},
        {"Date", {"time", "getTime", "toString"}},
        {"Map", {"size", "get", "set", "has", "delete"}},
        {"Tensor", {"concat", "shape", "reshape", "sum"}},
    };
    return manifest;
}

TypeDependencyGraph extract_graph(const ir::Module& m, const ExtractOptions& opts) {
    return Extractor(m, opts).run();
}

void add_name_similar_edges(TypeDependencyGraph& g) {
    std::set<int> pool(g.name_similar_pool.begin(), g.name_similar_pool.end());
    auto named_var = [&](const TypeNode& n) {
        return n.kind == TypeNode::Kind::Variable && !n.name_tokens.empty();
    };
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        if (!named_var(g.nodes[i])) continue;
        std::set<std::string> ti(g.nodes[i].name_tokens.begin(), g.nodes[i].name_tokens.end());
        for (std::size_t j = i + 1; j < g.nodes.size(); ++j) {
            if (!named_var(g.nodes[j])) continue;
            if (!pool.count(int(i)) && !pool.count(int(j))) continue;
            bool hit = false;
            for (const auto& t : g.nodes[j].name_tokens)
                if (ti.count(t)) {
                    hit = true;
                    break;
                }
            if (hit)
                g.edges.push_back(Hyperedge{EdgeKind::NameSimilar, EdgeCategory::Fixed,
                                            {int(i), int(j)}, {}});
        }
    }
}

void add_usage_edges(TypeDependencyGraph& g) {
    auto lib_node = [&](const std::string& qualified, const std::string& name) {
        int id = g.node_by_name(qualified);
        if (id >= 0) return id;
        id = int(g.nodes.size());
        TypeNode n;
        n.id = id;
        n.kind = TypeNode::Kind::Variable;
        n.name_tokens = tokenize_identifier(name);
        g.nodes.push_back(std::move(n));
        g.node_names[id] = qualified;
        return id;
    };
    for (const auto& site : g.access_sites) {
        std::vector<int> args{site.object, site.result};
        for (const auto& cname : g.class_order) {
            for (const auto& [mname, mid] : g.class_members.at(cname)) {
                if (mname == site.member) {
                    args.push_back(g.user_type_nodes.at(cname));
                    args.push_back(mid);
                }
            }
        }
        for (const auto& lc : library_manifest()) {
            for (const auto& mname : lc.members) {
                if (mname == site.member) {
                    int cid = lib_node("lib::" + lc.name, lc.name);
                    int mid = lib_node("lib::" + lc.name + "::" + mname, mname);
                    args.push_back(cid);
                    args.push_back(mid);
                }
            }
        }
        if (args.size() > 2)
            g.edges.push_back(
                Hyperedge{EdgeKind::Usage, EdgeCategory::NPairs, std::move(args), {site.member}});
    }
}

}  // namespace typegraph
