#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fd.hpp"
#include "typegraph/adam.hpp"
#include "typegraph/rng.hpp"
#include "typegraph/tape.hpp"

using namespace typegraph;

static Tensor<double> random_tensor(Rng& rng, std::vector<std::size_t> shape) {
    Tensor<double> t = Tensor<double>::zeros(std::move(shape));
    for (auto& v : t.data) v = rng.uniform(-2.0, 2.0);
    return t;
}

TEST_CASE("tensor basics") {
    auto z = Tensor<float>::zeros({2, 3});
    CHECK(z.size() == 6);
    CHECK(z.rows() == 2);
    CHECK(z.cols() == 3);
    z.at2(1, 2) = 5.0f;
    CHECK(z.data[5] == 5.0f);
    auto s = Tensor<float>::scalar(3.0f);
    CHECK(s.shape == std::vector<std::size_t>{1});
    auto d = s.cast<double>();
    CHECK(d.data[0] == doctest::Approx(3.0));
    CHECK_THROWS_AS(require_shape(false, "op", "(2)", "(3)"), ShapeMismatch);
}

TEST_CASE("rng determinism and shuffle") {
    Rng a(42, "s"), b(42, "s"), c(43, "s");
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_u64() != c.next_u64());
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
    Rng(1).shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("param store init is order independent") {
    ParamStore<double> p1(9), p2(9);
    p1.ensure("a/W", {3, 4});
    p1.ensure("b/W", {2, 2});
    p2.ensure("b/W", {2, 2});
    p2.ensure("a/W", {3, 4});
    CHECK(p1.values().at("a/W").data == p2.values().at("a/W").data);
    CHECK(p1.values().at("b/W").data == p2.values().at("b/W").data);
    // biases start at zero, weights do not
    auto b = p1.init_value("x/b1", {4});
    for (double v : b.data) CHECK(v == 0.0);
    auto w = p1.init_value("x/W1", {4, 4});
    double nz = 0;
    for (double v : w.data) nz += std::fabs(v);
    CHECK(nz > 0);
    // peek never mutates
    ParamStore<double> p3(9);
    p3.peek("ghost", {2});
    CHECK(!p3.has("ghost"));
    CHECK(p3.peek("ghost", {2}).data == p3.init_value("ghost", {2}).data);
}

TEST_CASE("matmul matches triple-loop oracle over random cases") {
    Rng rng(5);
    for (int it = 0; it < 100; ++it) {
        std::size_t m = 1 + rng.next_below(5), k = 1 + rng.next_below(5),
                    n = 1 + rng.next_below(5);
        bool ta = rng.next_below(2), tb = rng.next_below(2);
        Tensor<double> A = random_tensor(rng, ta ? std::vector<std::size_t>{k, m}
                                                 : std::vector<std::size_t>{m, k});
        Tensor<double> B = random_tensor(rng, tb ? std::vector<std::size_t>{n, k}
                                                 : std::vector<std::size_t>{k, n});
        Tensor<double> want = Tensor<double>::zeros({m, n});
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t p = 0; p < k; ++p)
                    want.at2(i, j) += (ta ? A.at2(p, i) : A.at2(i, p)) *
                                      (tb ? B.at2(j, p) : B.at2(p, j));
        Tape<double> tp(false);
        auto got = matmul(tp.constant(A), tp.constant(B), ta, tb).value();
        REQUIRE(got.shape == want.shape);
        for (std::size_t i = 0; i < want.size(); ++i)
            CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("forward op values") {
    Tape<double> tp(false);
    auto x = tp.constant(Tensor<double>::vec({1, 2, 3}));
    auto y = tp.constant(Tensor<double>::vec({4, 5, 6}));
    CHECK(add(x, y).value().data == std::vector<double>{5, 7, 9});
    CHECK(scale(x, 2.0).value().data == std::vector<double>{2, 4, 6});
    CHECK(dot(x, y).value().data[0] == doctest::Approx(32));
    CHECK(concat<double>({x, y}).value().data == std::vector<double>{1, 2, 3, 4, 5, 6});
    CHECK(sum(x).value().data[0] == doctest::Approx(6));
    CHECK(mean(x).value().data[0] == doctest::Approx(2));
    CHECK(pick(x, 2).value().data[0] == doctest::Approx(3));
    auto W = tp.constant(Tensor<double>({2, 3}, {1, 0, 0, 0, 1, 1}));
    auto b = tp.constant(Tensor<double>::vec({10, 20}));
    CHECK(linear(W, x, b).value().data == std::vector<double>{11, 25});
    CHECK(matvec(W, x).value().data == std::vector<double>{1, 5});
    auto v2 = tp.constant(Tensor<double>::vec({1, 2}));
    CHECK(vecmat(v2, W).value().data == std::vector<double>{1, 2, 2});
    auto lr = leaky_relu(tp.constant(Tensor<double>::vec({-1, 2})), 0.2);
    CHECK(lr.value().data[0] == doctest::Approx(-0.2));
    CHECK(lr.value().data[1] == doctest::Approx(2));
    auto M = stack_rows<double>({x, y});
    CHECK(M.value().shape == std::vector<std::size_t>{2, 3});
    CHECK(mean_rows(M).value().data == std::vector<double>{2.5, 3.5, 4.5});
    auto lg = log_guarded(tp.constant(Tensor<double>::vec({std::exp(1.0), 0.0})));
    CHECK(lg.value().data[0] == doctest::Approx(1.0));
    CHECK(lg.value().data[1] == doctest::Approx(std::log(1e-12)));
    auto tbl = tp.constant(Tensor<double>({2, 2}, {1, 2, 3, 4}));
    CHECK(embedding_lookup(tbl, 1).value().data == std::vector<double>{3, 4});
}

TEST_CASE("softmax properties over random cases") {
    Rng rng(11);
    for (int it = 0; it < 100; ++it) {
        std::size_t n = 1 + rng.next_below(8);
        Tensor<double> x = random_tensor(rng, {n});
        Tape<double> tp(false);
        auto y = softmax(tp.constant(x)).value();
        double s = 0;
        std::size_t argmax_x = 0, argmax_y = 0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(y.data[i] > 0);
            s += y.data[i];
            if (x.data[i] > x.data[argmax_x]) argmax_x = i;
            if (y.data[i] > y.data[argmax_y]) argmax_y = i;
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(argmax_x == argmax_y);
        // shift invariance
        Tensor<double> xs = x;
        double c = rng.uniform(-50, 50);
        for (auto& v : xs.data) v += c;
        auto ys = softmax(tp.constant(xs)).value();
        for (std::size_t i = 0; i < n; ++i)
            CHECK(ys.data[i] == doctest::Approx(y.data[i]).epsilon(1e-8));
    }
}

TEST_CASE("cross_entropy equals -log softmax and is positive") {
    Rng rng(13);
    for (int it = 0; it < 100; ++it) {
        std::size_t n = 2 + rng.next_below(6);
        Tensor<double> x = random_tensor(rng, {n});
        std::size_t t = rng.next_below(n);
        Tape<double> tp(false);
        auto logits = tp.constant(x);
        double ce = cross_entropy(logits, t).value().data[0];
        double ref = -std::log(softmax(logits).value().data[t]);
        CHECK(ce == doctest::Approx(ref).epsilon(1e-9));
        CHECK(ce > 0);
    }
    // a peaked distribution drives the loss to ~0
    Tape<double> tp(false);
    auto hot = tp.constant(Tensor<double>::vec({50, 0, 0}));
    CHECK(cross_entropy(hot, 0).value().data[0] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("backward requires scalar loss") {
    Tape<double> tp(true);
    auto x = tp.constant(Tensor<double>::vec({1, 2}));
    CHECK_THROWS_AS(tp.backward(x), NotScalarLoss);
}

TEST_CASE("finite differences: every op") {
    ParamStore<double> store(3);
    store.ensure("x", {4});
    store.ensure("y", {4});
    store.ensure("W", {3, 4});
    store.ensure("bias_w", {3});  // nonzero, not named like a bias
    for (auto& v : store.values().at("bias_w").data) v += 0.3;
    store.ensure("A", {4, 3});
    store.ensure("T", {3, 4});

    auto px = [](Tape<double>& t, ParamStore<double>& s, const char* p,
                 std::vector<std::size_t> shape) { return t.param(p, shape, s); };

    using Build = std::function<Var<double>(Tape<double>&)>;
    std::vector<std::pair<const char*, Build>> cases = {
        {"add", [&](Tape<double>& t) {
             return sum(add(px(t, store, "x", {4}), px(t, store, "y", {4})));
         }},
        {"scale", [&](Tape<double>& t) { return sum(scale(px(t, store, "x", {4}), -1.7)); }},
        {"linear", [&](Tape<double>& t) {
             return sum(linear(px(t, store, "W", {3, 4}), px(t, store, "x", {4}),
                               px(t, store, "bias_w", {3})));
         }},
        {"matvec", [&](Tape<double>& t) {
             return sum(matvec(px(t, store, "W", {3, 4}), px(t, store, "x", {4})));
         }},
        {"vecmat", [&](Tape<double>& t) {
             return sum(vecmat(px(t, store, "x", {4}), px(t, store, "A", {4, 3})));
         }},
        {"matmul", [&](Tape<double>& t) {
             return sum(sum(matmul(px(t, store, "W", {3, 4}), px(t, store, "A", {4, 3}))));
         }},
        {"matmul_t", [&](Tape<double>& t) {
             return sum(sum(matmul(px(t, store, "W", {3, 4}), px(t, store, "T", {3, 4}), true,
                                   false)));
         }},
        {"dot", [&](Tape<double>& t) {
             return dot(px(t, store, "x", {4}), px(t, store, "y", {4}));
         }},
        {"concat", [&](Tape<double>& t) {
             return sum(concat<double>({px(t, store, "x", {4}), px(t, store, "y", {4})}));
         }},
        {"stack_mean", [&](Tape<double>& t) {
             return sum(mean_rows(stack_rows<double>(
                 {px(t, store, "x", {4}), px(t, store, "y", {4})})));
         }},
        {"leaky", [&](Tape<double>& t) {
             return sum(leaky_relu(px(t, store, "x", {4}), 0.2));
         }},
        {"softmax_pick", [&](Tape<double>& t) {
             return pick(softmax(px(t, store, "x", {4})), 1);
         }},
        {"log", [&](Tape<double>& t) {
             return sum(log_guarded(leaky_relu(px(t, store, "x", {4}), 0.0)));
         }},
        {"mean", [&](Tape<double>& t) { return mean(px(t, store, "x", {4})); }},
        {"lookup", [&](Tape<double>& t) {
             return sum(embedding_lookup(px(t, store, "A", {4, 3}), 2));
         }},
        {"xent", [&](Tape<double>& t) { return cross_entropy(px(t, store, "x", {4}), 2); }},
        {"mlp2", [&](Tape<double>& t) {
             return sum(mlp2(t, store, "mlp", px(t, store, "x", {4}), 5, 2, 0.2));
         }},
    };
    for (auto& [name, build] : cases) {
        INFO(name);
        CHECK(tgtest::max_grad_rel_err(store, build) < 1e-6);
    }
}

TEST_CASE("gradient accumulates when a parameter is reused") {
    ParamStore<double> store(1);
    store.ensure("x", {2});
    Tape<double> tp(true);
    auto x = tp.param("x", {2}, store);
    auto x2 = tp.param("x", {2}, store);
    CHECK(x.id == x2.id);  // same leaf
    auto loss = dot(x, x2);  // sum x_i^2
    tp.backward(loss);
    auto g = tp.param_grads().at("x");
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(g.data[i] == doctest::Approx(2 * store.values().at("x").data[i]));
}

TEST_CASE("adam single-step hand oracle") {
    // one parameter w=1, grad=0.5, lr=0.1, no decay
    ParamStore<double> params(0);
    params.values().emplace("w", Tensor<double>::vec({1.0}));
    std::map<std::string, Tensor<double>> grads;
    grads.emplace("w", Tensor<double>::vec({0.5}));
    Adam<double> opt(0.9, 0.999, 1e-8, false);
    opt.step(params, grads, 0.1, 0.0);
    // m=0.05, v=0.00025 -> mhat=0.5, vhat=0.25 -> w -= 0.1*0.5/(0.5+1e-8)
    CHECK(params.values().at("w").data[0] ==
          doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
    // second step, same grad
    opt.step(params, grads, 0.1, 0.0);
    double m = 0.9 * 0.05 + 0.1 * 0.5;
    double v = 0.999 * 0.00025 + 0.001 * 0.25;
    double mh = m / (1 - 0.9 * 0.9), vh = v / (1 - 0.999 * 0.999);
    CHECK(params.values().at("w").data[0] ==
          doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8) - 0.1 * mh / (std::sqrt(vh) + 1e-8))
              .epsilon(1e-9));
}

TEST_CASE("adam weight decay modes") {
    // zero gradient: coupled decay still shrinks via the grad term,
    // decoupled shrinks multiplicatively
    for (bool decoupled : {false, true}) {
        ParamStore<double> params(0);
        params.values().emplace("w", Tensor<double>::vec({2.0}));
        std::map<std::string, Tensor<double>> grads;
        grads.emplace("w", Tensor<double>::vec({0.0}));
        Adam<double> opt(0.9, 0.999, 1e-8, decoupled);
        opt.step(params, grads, 0.1, 0.01);
        double w = params.values().at("w").data[0];
        CHECK(w < 2.0);
        if (decoupled) {
            // pure multiplicative shrink: w = 2 * (1 - lr*wd)
            CHECK(w == doctest::Approx(2.0 * (1 - 0.1 * 0.01)).epsilon(1e-12));
        }
    }
    // parameters absent from the gradient map stay untouched
    ParamStore<double> params(0);
    params.values().emplace("w", Tensor<double>::vec({2.0}));
    Adam<double> opt;
    opt.step(params, {}, 0.1, 0.01);
    CHECK(params.values().at("w").data[0] == 2.0);
}
