#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "typegraph/gnn/gnn.hpp"

using namespace typegraph;

namespace {

const std::vector<std::string> kTokens = {"user", "count", "name", "node", "value", "flag"};

TypeNode var_node(int id, std::vector<std::string> tokens) {
    TypeNode n;
    n.id = id;
    n.kind = TypeNode::Kind::Variable;
    n.name_tokens = std::move(tokens);
    return n;
}

TypeNode const_node(int id, std::string kind) {
    TypeNode n;
    n.id = id;
    n.kind = TypeNode::Kind::Constant;
    n.const_type = std::move(kind);
    return n;
}

Hyperedge edge(EdgeKind k, std::vector<int> args, std::vector<std::string> labels = {}) {
    return Hyperedge{k, edge_category(k), std::move(args), std::move(labels)};
}

// Random small graph with valid arities/labels for every edge kind.
TypeDependencyGraph random_graph(Rng& rng, int n_nodes, int n_edges) {
    TypeDependencyGraph g;
    for (int i = 0; i < n_nodes; ++i) {
        if (i > 0 && rng.next_below(4) == 0) {
            const char* kinds[3] = {"number", "string", "boolean"};
            g.nodes.push_back(const_node(i, kinds[rng.next_below(3)]));
        } else {
            std::vector<std::string> toks;
            for (std::uint64_t t = rng.next_below(3); t > 0; --t)
                toks.push_back(kTokens[std::size_t(rng.next_below(kTokens.size()))]);
            g.nodes.push_back(var_node(i, toks));
        }
    }
    auto pick = [&] { return int(rng.next_below(std::uint64_t(n_nodes))); };
    auto label = [&] { return kTokens[std::size_t(rng.next_below(kTokens.size()))]; };
    for (int e = 0; e < n_edges; ++e) {
        switch (rng.next_below(10)) {
            case 0: g.edges.push_back(edge(EdgeKind::Bool, {pick()})); break;
            case 1: g.edges.push_back(edge(EdgeKind::Subtype, {pick(), pick()})); break;
            case 2: g.edges.push_back(edge(EdgeKind::Assign, {pick(), pick()})); break;
            case 3: g.edges.push_back(edge(EdgeKind::Access, {pick(), pick()}, {label()})); break;
            case 4: g.edges.push_back(edge(EdgeKind::Name, {pick()}, {label()})); break;
            case 5: g.edges.push_back(edge(EdgeKind::NameSimilar, {pick(), pick()})); break;
            case 6: {
                std::vector<int> args{pick()};
                for (std::uint64_t k = 1 + rng.next_below(3); k > 0; --k) args.push_back(pick());
                args.push_back(pick());
                g.edges.push_back(edge(EdgeKind::Function, args));
                break;
            }
            case 7: {
                std::vector<int> args{pick(), pick()};
                for (std::uint64_t k = rng.next_below(3); k > 0; --k) args.push_back(pick());
                g.edges.push_back(edge(EdgeKind::Call, args));
                break;
            }
            case 8: {
                std::vector<int> args{pick()};
                std::vector<std::string> labels;
                for (std::uint64_t k = 1 + rng.next_below(3); k > 0; --k) {
                    args.push_back(pick());
                    labels.push_back(label());
                }
                g.edges.push_back(edge(EdgeKind::Object, args, labels));
                break;
            }
            default: {
                std::vector<int> args{pick(), pick()};
                for (std::uint64_t k = 1 + rng.next_below(3); k > 0; --k) {
                    args.push_back(pick());
                    args.push_back(pick());
                }
                g.edges.push_back(edge(EdgeKind::Usage, args, {label()}));
                break;
            }
        }
    }
    return g;
}

const Vocab& test_vocab() {
    static const Vocab v = [] {
        Vocab x;
        for (const auto& t : kTokens) x.tokens.insert(t);
        return x;
    }();
    return v;
}

GnnConfig small_cfg(int k = 1) {
    GnnConfig c;
    c.d = 8;
    c.K = k;
    c.hidden = 8;
    return c;
}

}  // namespace

TEST_CASE("init: one shared vector for variables, pinned kinds for constants") {
    Rng rng(1);
    for (int it = 0; it < 100; ++it) {
        TypeDependencyGraph g = random_graph(rng, 6, 4);
        ParamStore<double> params(it);
        Tape<double> tape(false);
        GnnRunner<double> run(g, tape, params, test_vocab(), small_cfg(), 0);
        auto s = run.init_embeddings();
        REQUIRE(s.rows.size() == g.nodes.size());
        const Tensor<double>* generic = nullptr;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            if (g.nodes[i].kind == TypeNode::Kind::Variable) {
                if (!generic) generic = &s.rows[i].value();
                CHECK(s.rows[i].value().data == generic->data);  // bitwise shared
            } else {
                CHECK(s.rows[i].value().data ==
                      params.peek("const/" + g.nodes[i].const_type, {8}).data);
            }
        }
    }
    // unrecognized constant kinds are rejected
    TypeDependencyGraph g;
    g.nodes.push_back(const_node(0, "mystery"));
    ParamStore<double> params(0);
    Tape<double> tape(false);
    GnnRunner<double> run(g, tape, params, test_vocab(), small_cfg(), 0);
    CHECK_THROWS_AS(run.init_embeddings(), UnknownConstantKind);
}

TEST_CASE("unknown buckets: in range, seed-dependent, spread out") {
    TypeDependencyGraph g;
    g.nodes.push_back(var_node(0, {}));
    ParamStore<double> params(0);
    Tape<double> tape(false);
    GnnConfig cfg = small_cfg();

    GnnRunner<double> r1(g, tape, params, test_vocab(), cfg, 7);
    GnnRunner<double> r2(g, tape, params, test_vocab(), cfg, 7);
    std::set<int> buckets;
    for (int i = 0; i < 100; ++i) {
        std::string tok = "rare" + std::to_string(i);
        int b = r1.unknown_bucket(tok);
        CHECK(b >= 0);
        CHECK(b < cfg.unknown_buckets);
        CHECK(b == r2.unknown_bucket(tok));  // same run seed, same assignment
        buckets.insert(b);
    }
    CHECK(buckets.size() > 1);  // 100 tokens cannot all collapse to one slot
    // a different run seed reshuffles at least one token
    GnnRunner<double> r3(g, tape, params, test_vocab(), cfg, 8);
    bool moved = false;
    for (int i = 0; i < 100; ++i) {
        std::string tok = "rare" + std::to_string(i);
        moved |= r1.unknown_bucket(tok) != r3.unknown_bucket(tok);
    }
    CHECK(moved);
}

TEST_CASE("identifier embedding: noname, single token, token mean") {
    TypeDependencyGraph g;
    g.nodes.push_back(var_node(0, {}));
    ParamStore<double> params(3);
    Tape<double> tape(false);
    GnnRunner<double> run(g, tape, params, test_vocab(), small_cfg(), 0);
    auto empty = run.embed_identifier({});
    CHECK(empty.value().data == params.peek("ident/noname", {8}).data);
    auto one = run.embed_identifier({"user"});
    CHECK(one.value().data == params.peek("ident/t:user", {8}).data);
    auto two = run.embed_identifier({"user", "count"});
    auto u = params.peek("ident/t:user", {8});
    auto c = params.peek("ident/t:count", {8});
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(two.value().data[i] == doctest::Approx(0.5 * (u.data[i] + c.data[i])));
}

TEST_CASE("fixed messages: arity checked, constant destinations skipped") {
    TypeDependencyGraph g;
    g.nodes.push_back(var_node(0, {}));
    g.nodes.push_back(const_node(1, "number"));
    g.edges.push_back(edge(EdgeKind::Assign, {0, 1}));
    ParamStore<double> params(0);
    Tape<double> tape(false);
    GnnRunner<double> run(g, tape, params, test_vocab(), small_cfg(), 0);
    auto s = run.init_embeddings();
    auto msgs = run.msg_fixed(g.edges[0], s, 1);
    REQUIRE(msgs.size() == 1);  // no message to the literal
    CHECK(msgs[0].first == 0);
    Hyperedge bad = edge(EdgeKind::Subtype, {0, 1, 0});
    CHECK_THROWS_AS(run.msg_fixed(bad, s, 1), ArityMismatch);
    CHECK_THROWS_AS(run.msg_nary(g.edges[0], s, 1), ArityMismatch);
}

TEST_CASE("nary messages to one argument ignore the other arguments") {
    Rng rng(17);
    for (int it = 0; it < 100; ++it) {
        // Call edge r = f(a, b); perturb b, message to a must be identical
        TypeDependencyGraph g;
        for (int i = 0; i < 4; ++i) g.nodes.push_back(var_node(i, {}));
        g.edges.push_back(edge(EdgeKind::Call, {0, 1, 2, 3}));
        ParamStore<double> params{std::uint64_t(it)};
        Tape<double> tape(false);
        GnnRunner<double> run(g, tape, params, test_vocab(), small_cfg(), 0);
        auto s = run.init_embeddings();
        auto s2 = s;
        Tensor<double> noise = Tensor<double>::zeros({8});
        for (auto& v : noise.data) v = rng.uniform(-1, 1);
        s2.rows[3] = tape.constant(noise);

        auto msgs1 = run.msg_nary(g.edges[0], s, 1);
        auto msgs2 = run.msg_nary(g.edges[0], s2, 1);
        REQUIRE(msgs1.size() == msgs2.size());
        // messages to slot 2 (node index args[2]=2) depend only on alpha
        for (std::size_t m = 0; m < msgs1.size(); ++m) {
            if (msgs1[m].first != 2) continue;
            CHECK(msgs1[m].second.value().data == msgs2[m].second.value().data);  // bitwise
        }
    }
}

TEST_CASE("npairs: single pair passes the partner value through unchanged") {
    Rng rng(23);
    for (int it = 0; it < 100; ++it) {
        TypeDependencyGraph g;
        for (int i = 0; i < 4; ++i) g.nodes.push_back(var_node(i, {}));
        g.edges.push_back(edge(EdgeKind::Usage, {0, 1, 2, 3}, {"m"}));
        ParamStore<double> params{std::uint64_t(it * 3 + 1)};
        Tape<double> tape(false);
        GnnRunner<double> run(g, tape, params, test_vocab(), small_cfg(), 0);
        auto s = run.init_embeddings();
        for (int i = 0; i < 4; ++i) {
            Tensor<double> t = Tensor<double>::zeros({8});
            for (auto& v : t.data) v = rng.uniform(-1, 1);
            s.rows[std::size_t(i)] = tape.constant(t);
        }
        auto msgs = run.msg_npairs(g.edges[0], s);
        REQUIRE(msgs.size() == 2);
        for (auto& [dst, m] : msgs) {
            // to head_b flows the pair's beta value, to head_a the alpha value
            const auto& want = dst == 1 ? s.rows[3].value() : s.rows[2].value();
            CHECK(m.value().data == want.data);  // bitwise identity, k = 1
        }
    }
    // degenerate pair lists are rejected
    TypeDependencyGraph g;
    for (int i = 0; i < 3; ++i) g.nodes.push_back(var_node(i, {}));
    ParamStore<double> params(0);
    Tape<double> tape(false);
    GnnRunner<double> run(g, tape, params, test_vocab(), small_cfg(), 0);
    auto s = run.init_embeddings();
    Hyperedge empty = edge(EdgeKind::Usage, {0, 1}, {"m"});
    CHECK_THROWS_AS(run.msg_npairs(empty, s), EmptyPairList);
    Hyperedge odd = edge(EdgeKind::Usage, {0, 1, 2}, {"m"});
    CHECK_THROWS_AS(run.msg_npairs(odd, s), EmptyPairList);
}

TEST_CASE("npairs attention: weights normalize and identical values collapse") {
    Rng rng(29);
    for (int it = 0; it < 100; ++it) {
        // all pair values equal v -> attended message equals v regardless of keys
        TypeDependencyGraph g;
        std::size_t pairs = 2 + rng.next_below(3);
        int n = int(2 + 2 * pairs);
        for (int i = 0; i < n; ++i) g.nodes.push_back(var_node(i, {}));
        std::vector<int> args{0, 1};
        for (std::size_t p = 0; p < pairs; ++p) {
            args.push_back(int(2 + 2 * p));
            args.push_back(int(3 + 2 * p));
        }
        g.edges.push_back(edge(EdgeKind::Usage, args, {"m"}));
        ParamStore<double> params{std::uint64_t(it)};
        Tape<double> tape(false);
        GnnRunner<double> run(g, tape, params, test_vocab(), small_cfg(), 0);
        auto s = run.init_embeddings();
        Tensor<double> shared = Tensor<double>::zeros({8});
        for (auto& v : shared.data) v = rng.uniform(-1, 1);
        Var<double> shared_var = tape.constant(shared);
        for (std::size_t p = 0; p < pairs; ++p) {
            Tensor<double> key = Tensor<double>::zeros({8});
            for (auto& v : key.data) v = rng.uniform(-1, 1);
            s.rows[2 + 2 * p] = tape.constant(key);  // distinct keys
            s.rows[3 + 2 * p] = shared_var;          // identical values
        }
        auto msgs = run.msg_npairs(g.edges[0], s);
        for (auto& [dst, m] : msgs) {
            if (dst != 1) continue;  // beta-side message carries the values
            for (std::size_t i = 0; i < 8; ++i)
                CHECK(m.value().data[i] == doctest::Approx(shared.data[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("npairs attention concentrates on the aligned key") {
    // one key equals the query scaled up, its value dominates the message
    TypeDependencyGraph g;
    for (int i = 0; i < 6; ++i) g.nodes.push_back(var_node(i, {}));
    g.edges.push_back(edge(EdgeKind::Usage, {0, 1, 2, 3, 4, 5}, {"m"}));
    ParamStore<double> params(0);
    Tape<double> tape(false);
    GnnRunner<double> run(g, tape, params, test_vocab(), small_cfg(), 0);
    auto s = run.init_embeddings();
    Tensor<double> q = Tensor<double>::full({8}, 1.0);
    s.rows[0] = tape.constant(q);                                  // query (head alpha)
    s.rows[2] = tape.constant(Tensor<double>::full({8}, 10.0));    // aligned key
    s.rows[3] = tape.constant(Tensor<double>::full({8}, 5.0));     // its value
    s.rows[4] = tape.constant(Tensor<double>::full({8}, -10.0));   // anti-aligned key
    s.rows[5] = tape.constant(Tensor<double>::full({8}, -5.0));    // its value
    auto msgs = run.msg_npairs(g.edges[0], s);
    for (auto& [dst, m] : msgs)
        if (dst == 1)
            for (double v : m.value().data) CHECK(v == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("aggregation: empty inbox is the identity, bitwise") {
    Rng rng(31);
    for (int it = 0; it < 100; ++it) {
        TypeDependencyGraph g;
        g.nodes.push_back(var_node(0, {}));
        ParamStore<double> params{std::uint64_t(it)};
        Tape<double> tape(false);
        GnnRunner<double> run(g, tape, params, test_vocab(), small_cfg(), 0);
        Tensor<double> v = Tensor<double>::zeros({8});
        for (auto& x : v.data) x = rng.uniform(-1, 1);
        Var<double> vv = tape.constant(v);
        Var<double> out = run.aggregate(vv, {}, 1);
        CHECK(out.value().data == v.data);
        CHECK(out.id == vv.id);
    }
}

TEST_CASE("aggregation: duplicated message equals the single message") {
    Rng rng(37);
    for (int it = 0; it < 100; ++it) {
        TypeDependencyGraph g;
        g.nodes.push_back(var_node(0, {}));
        ParamStore<double> params{std::uint64_t(it)};
        Tape<double> tape(false);
        GnnRunner<double> run(g, tape, params, test_vocab(), small_cfg(), 0);
        Tensor<double> v = Tensor<double>::zeros({8}), m = Tensor<double>::zeros({8});
        for (auto& x : v.data) x = rng.uniform(-1, 1);
        for (auto& x : m.data) x = rng.uniform(-1, 1);
        Var<double> vv = tape.constant(v);
        Var<double> mv = tape.constant(m);
        auto one = run.aggregate(vv, {mv}, 1).value();
        auto two = run.aggregate(vv, {mv, mv}, 1).value();  // softmax gives 1/2 + 1/2
        for (std::size_t i = 0; i < 8; ++i)
            CHECK(two.data[i] == doctest::Approx(one.data[i]).epsilon(1e-9));
    }
}

TEST_CASE("simple aggregation averages transformed messages") {
    TypeDependencyGraph g;
    g.nodes.push_back(var_node(0, {}));
    ParamStore<double> params(5);
    Tape<double> tape(false);
    GnnConfig cfg = small_cfg();
    cfg.attention_aggregation = false;
    GnnRunner<double> run(g, tape, params, test_vocab(), cfg, 0);
    Var<double> v = tape.constant(Tensor<double>::zeros({8}));
    Var<double> m1 = tape.constant(Tensor<double>::full({8}, 1.0));
    Var<double> m2 = tape.constant(Tensor<double>::full({8}, 3.0));
    auto lone = run.aggregate(v, {m1}, 1).value();
    auto lone2 = run.aggregate(v, {m2}, 1).value();
    auto both = run.aggregate(v, {m1, m2}, 1).value();
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(both.data[i] == doctest::Approx(0.5 * (lone.data[i] + lone2.data[i])).epsilon(1e-9));
}

TEST_CASE("constants stay pinned across steps") {
    Rng rng(41);
    for (int it = 0; it < 100; ++it) {
        TypeDependencyGraph g = random_graph(rng, 8, 8);
        bool has_const = false;
        for (const auto& n : g.nodes) has_const |= n.kind == TypeNode::Kind::Constant;
        if (!has_const) g.nodes[0] = const_node(0, "number");
        ParamStore<double> params{std::uint64_t(it)};
        Tape<double> tape(false);
        GnnRunner<double> run(g, tape, params, test_vocab(), small_cfg(2), 0);
        auto s0 = run.init_embeddings();
        auto sK = run.run();
        for (std::size_t i = 0; i < g.nodes.size(); ++i)
            if (g.nodes[i].kind == TypeNode::Kind::Constant)
                CHECK(sK.rows[i].value().data == s0.rows[i].value().data);  // bitwise
    }
}

TEST_CASE("permutation equivariance") {
    Rng rng(43);
    for (int it = 0; it < 100; ++it) {
        TypeDependencyGraph g = random_graph(rng, 7, 6);
        std::vector<int> perm(7);
        std::iota(perm.begin(), perm.end(), 0);
        Rng(std::uint64_t(it), "perm").shuffle(perm);
        TypeDependencyGraph h;
        h.nodes.resize(7);
        for (int i = 0; i < 7; ++i) {
            h.nodes[std::size_t(perm[std::size_t(i)])] = g.nodes[std::size_t(i)];
            h.nodes[std::size_t(perm[std::size_t(i)])].id = perm[std::size_t(i)];
        }
        for (const auto& e : g.edges) {
            Hyperedge pe = e;
            for (auto& a : pe.args) a = perm[std::size_t(a)];
            h.edges.push_back(pe);
        }
        ParamStore<double> params{std::uint64_t(it)};
        Tape<double> tg_tape(false), th_tape(false);
        GnnRunner<double> rg(g, tg_tape, params, test_vocab(), small_cfg(2), 9);
        GnnRunner<double> rh(h, th_tape, params, test_vocab(), small_cfg(2), 9);
        auto sg = rg.run();
        auto sh = rh.run();
        for (int i = 0; i < 7; ++i) {
            const auto& a = sg.rows[std::size_t(i)].value();
            const auto& b = sh.rows[std::size_t(perm[std::size_t(i)])].value();
            for (std::size_t d = 0; d < 8; ++d)
                CHECK(a.data[d] == doctest::Approx(b.data[d]).epsilon(1e-9));
        }
    }
}

TEST_CASE("ablation flags drop edge categories") {
    // a graph with one logical and one contextual edge feeding node 0
    TypeDependencyGraph g;
    g.nodes.push_back(var_node(0, {}));
    g.nodes.push_back(var_node(1, {}));
    g.edges.push_back(edge(EdgeKind::Assign, {0, 1}));
    g.edges.push_back(edge(EdgeKind::Name, {0}, {"user"}));
    ParamStore<double> params(2);
    auto run_with = [&](bool ctx, bool logical) {
        Tape<double> tape(false);
        GnnConfig cfg = small_cfg();
        cfg.contextual_edges = ctx;
        cfg.logical_edges = logical;
        GnnRunner<double> run(g, tape, params, test_vocab(), cfg, 0);
        return run.run().rows[0].value();
    };
    auto full = run_with(true, true);
    auto no_ctx = run_with(false, true);
    auto no_logic = run_with(true, false);
    auto neither = run_with(false, false);
    CHECK(full.data != no_ctx.data);
    CHECK(full.data != no_logic.data);
    // with every edge disabled the initial embedding survives untouched
    ParamStore<double> p2(2);
    CHECK(neither.data == p2.peek("init/variable", {8}).data);
}
