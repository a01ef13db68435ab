#ifndef TYPEGRAPH_TAPE_HPP
#define TYPEGRAPH_TAPE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "typegraph/errors.hpp"
#include "typegraph/params.hpp"
#include "typegraph/tensor.hpp"

namespace typegraph {

template <typename T>
class Tape;

/// Handle to a tape node.
template <typename T>
struct Var {
    Tape<T>* tape = nullptr;
    int id = -1;

    bool valid() const { return tape != nullptr; }
    const Tensor<T>& value() const { return tape->value(*this); }
    const Tensor<T>& grad() const { return tape->grad(*this); }
};

/// Reverse-mode tape. Ops append nodes in topological order; backward walks
/// the tape once in reverse, accumulating gradients additively.
template <typename T>
class Tape {
public:
    explicit Tape(bool recording = true) : recording_(recording) {}

    bool recording() const { return recording_; }
    void set_recording(bool r) { recording_ = r; }

    Var<T> constant(Tensor<T> v) { return push(std::move(v)); }
    Var<T> leaf(Tensor<T> v) { return push(std::move(v)); }

    /// Trainable leaf addressed by store path. Repeated requests for the same
    /// path within one tape return the same node, so gradients accumulate.
    Var<T> param(const std::string& path, const std::vector<std::size_t>& shape,
                 const ParamStore<T>& store) {
        auto it = param_cache_.find(path);
        if (it != param_cache_.end()) return Var<T>{this, it->second};
        Var<T> v = push(store.peek(path, shape));
        param_cache_.emplace(path, v.id);
        param_ids_.emplace_back(path, v.id);
        return v;
    }

    const Tensor<T>& value(Var<T> v) const { return nodes_[v.id].value; }
    const Tensor<T>& grad(Var<T> v) const { return nodes_[v.id].grad; }
    Tensor<T>& grad_mut(Var<T> v) { return nodes_[v.id].grad; }

    std::size_t size() const { return nodes_.size(); }

    void backward(Var<T> loss) {
        if (nodes_.empty() || loss.value().size() != 1) throw NotScalarLoss();
        for (auto& n : nodes_) n.grad = Tensor<T>::zeros(n.value.shape);
        nodes_[loss.id].grad.data[0] = T(1);
        for (int i = loss.id; i >= 0; --i)
            if (nodes_[i].back) nodes_[i].back();
    }

    /// Gradients for every parameter leaf touched by this tape, keyed by
    /// path. Parameters unreachable from the loss report zero gradients.
    std::map<std::string, Tensor<T>> param_grads() const {
        std::map<std::string, Tensor<T>> out;
        for (const auto& [path, id] : param_ids_) out.emplace(path, nodes_[id].grad);
        return out;
    }

    // internal: ops push the value first, then install the closure.
    Var<T> push(Tensor<T> v) {
        nodes_.push_back(Node{std::move(v), Tensor<T>(), nullptr});
        return Var<T>{this, int(nodes_.size()) - 1};
    }

    template <typename F>
    void install(Var<T> r, F&& back) {
        if (recording_) nodes_[r.id].back = std::function<void()>(std::forward<F>(back));
    }

private:
    struct Node {
        Tensor<T> value;
        Tensor<T> grad;
        std::function<void()> back;
    };

    bool recording_;
    std::vector<Node> nodes_;
    std::map<std::string, int> param_cache_;
    std::vector<std::pair<std::string, int>> param_ids_;
};

// --------------------------------------------------------------------------
// Forward ops.

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
    Tape<T>& tp = *a.tape;
    const auto& av = a.value();
    const auto& bv = b.value();
    require_shape(av.same_shape(bv), "add", bv.shape_str(), av.shape_str());
    Tensor<T> out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += bv.data[i];
    Var<T> r = tp.push(std::move(out));
    tp.install(r, [&tp, a, b, r] {
        const auto& g = tp.grad(r);
        auto& ga = tp.grad_mut(a);
        auto& gb = tp.grad_mut(b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] += g.data[i];
        }
    });
    return r;
}

template <typename T>
Var<T> scale(Var<T> a, T c) {
    Tape<T>& tp = *a.tape;
    Tensor<T> out = a.value();
    for (auto& v : out.data) v *= c;
    Var<T> r = tp.push(std::move(out));
    tp.install(r, [&tp, a, r, c] {
        const auto& g = tp.grad(r);
        auto& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += c * g.data[i];
    });
    return r;
}

/// y = W x + b, with W (m,k), x (k), b (m). One fused node keeps tapes small.
template <typename T>
Var<T> linear(Var<T> W, Var<T> x, Var<T> b) {
    Tape<T>& tp = *W.tape;
    const auto& Wv = W.value();
    const auto& xv = x.value();
    const auto& bv = b.value();
    require_shape(Wv.rank() == 2 && xv.rank() == 1 && Wv.cols() == xv.size(), "linear",
                  Wv.shape_str() + "*" + xv.shape_str(), "(m,k)*(k)");
    require_shape(bv.size() == Wv.rows(), "linear", bv.shape_str(), "(m)");
    std::size_t m = Wv.rows(), k = Wv.cols();
    Tensor<T> out = Tensor<T>::zeros({m});
    for (std::size_t i = 0; i < m; ++i) {
        T acc = bv.data[i];
        const T* wrow = Wv.data.data() + i * k;
        for (std::size_t j = 0; j < k; ++j) acc += wrow[j] * xv.data[j];
        out.data[i] = acc;
    }
    Var<T> r = tp.push(std::move(out));
    tp.install(r, [&tp, W, x, b, r, m, k] {
        const auto& g = tp.grad(r);
        const auto& Wv = tp.value(W);
        const auto& xv = tp.value(x);
        auto& gW = tp.grad_mut(W);
        auto& gx = tp.grad_mut(x);
        auto& gb = tp.grad_mut(b);
        for (std::size_t i = 0; i < m; ++i) {
            T gi = g.data[i];
            gb.data[i] += gi;
            T* gwrow = gW.data.data() + i * k;
            const T* wrow = Wv.data.data() + i * k;
            for (std::size_t j = 0; j < k; ++j) {
                gwrow[j] += gi * xv.data[j];
                gx.data[j] += gi * wrow[j];
            }
        }
    });
    return r;
}

template <typename T>
Var<T> matvec(Var<T> A, Var<T> x) {
    Tape<T>& tp = *A.tape;
    Var<T> zero = tp.constant(Tensor<T>::zeros({A.value().rows()}));
    return linear(A, x, zero);
}

/// y = x^T A, with x (k), A (k,n) -> (n).
template <typename T>
Var<T> vecmat(Var<T> x, Var<T> A) {
    Tape<T>& tp = *x.tape;
    const auto& xv = x.value();
    const auto& Av = A.value();
    require_shape(Av.rank() == 2 && xv.rank() == 1 && Av.rows() == xv.size(), "vecmat",
                  xv.shape_str() + "*" + Av.shape_str(), "(k)*(k,n)");
    std::size_t k = Av.rows(), n = Av.cols();
    Tensor<T> out = Tensor<T>::zeros({n});
    for (std::size_t i = 0; i < k; ++i) {
        T xi = xv.data[i];
        const T* arow = Av.data.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) out.data[j] += xi * arow[j];
    }
    Var<T> r = tp.push(std::move(out));
    tp.install(r, [&tp, x, A, r, k, n] {
        const auto& g = tp.grad(r);
        const auto& xv = tp.value(x);
        const auto& Av = tp.value(A);
        auto& gx = tp.grad_mut(x);
        auto& gA = tp.grad_mut(A);
        for (std::size_t i = 0; i < k; ++i) {
            const T* arow = Av.data.data() + i * n;
            T* garow = gA.data.data() + i * n;
            T acc = T(0);
            for (std::size_t j = 0; j < n; ++j) {
                acc += g.data[j] * arow[j];
                garow[j] += xv.data[i] * g.data[j];
            }
            gx.data[i] += acc;
        }
    });
    return r;
}

/// C = op(A) op(B) with optional transposes.
template <typename T>
Var<T> matmul(Var<T> A, Var<T> B, bool trans_a = false, bool trans_b = false) {
    Tape<T>& tp = *A.tape;
    const auto& Av = A.value();
    const auto& Bv = B.value();
    require_shape(Av.rank() == 2 && Bv.rank() == 2, "matmul", Av.shape_str() + "*" + Bv.shape_str(),
                  "(m,k)*(k,n)");
    std::size_t m = trans_a ? Av.cols() : Av.rows();
    std::size_t ka = trans_a ? Av.rows() : Av.cols();
    std::size_t kb = trans_b ? Bv.cols() : Bv.rows();
    std::size_t n = trans_b ? Bv.rows() : Bv.cols();
    require_shape(ka == kb, "matmul", Av.shape_str() + "*" + Bv.shape_str(), "(m,k)*(k,n)");
    auto get = [](const Tensor<T>& t, bool tr, std::size_t i, std::size_t j) {
        return tr ? t.at2(j, i) : t.at2(i, j);
    };
    Tensor<T> out = Tensor<T>::zeros({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < ka; ++p) {
            T a = get(Av, trans_a, i, p);
            for (std::size_t j = 0; j < n; ++j) out.at2(i, j) += a * get(Bv, trans_b, p, j);
        }
    Var<T> r = tp.push(std::move(out));
    tp.install(r, [&tp, A, B, r, m, n, ka, trans_a, trans_b, get] {
        const auto& g = tp.grad(r);
        const auto& Av = tp.value(A);
        const auto& Bv = tp.value(B);
        auto& gA = tp.grad_mut(A);
        auto& gB = tp.grad_mut(B);
        auto addA = [&](std::size_t i, std::size_t p, T v) {
            if (trans_a) gA.at2(p, i) += v; else gA.at2(i, p) += v;
        };
        auto addB = [&](std::size_t p, std::size_t j, T v) {
            if (trans_b) gB.at2(j, p) += v; else gB.at2(p, j) += v;
        };
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < ka; ++p) {
                T accA = T(0);
                for (std::size_t j = 0; j < n; ++j) {
                    T gij = g.at2(i, j);
                    accA += gij * get(Bv, trans_b, p, j);
                    addB(p, j, gij * get(Av, trans_a, i, p));
                }
                addA(i, p, accA);
            }
    });
    return r;
}

template <typename T>
Var<T> dot(Var<T> a, Var<T> b) {
    Tape<T>& tp = *a.tape;
    const auto& av = a.value();
    const auto& bv = b.value();
    require_shape(av.same_shape(bv) && av.rank() == 1, "dot", bv.shape_str(), av.shape_str());
    T acc = T(0);
    for (std::size_t i = 0; i < av.size(); ++i) acc += av.data[i] * bv.data[i];
    Var<T> r = tp.push(Tensor<T>::scalar(acc));
    tp.install(r, [&tp, a, b, r] {
        T g = tp.grad(r).data[0];
        const auto& av = tp.value(a);
        const auto& bv = tp.value(b);
        auto& ga = tp.grad_mut(a);
        auto& gb = tp.grad_mut(b);
        for (std::size_t i = 0; i < av.size(); ++i) {
            ga.data[i] += g * bv.data[i];
            gb.data[i] += g * av.data[i];
        }
    });
    return r;
}

template <typename T>
Var<T> concat(const std::vector<Var<T>>& parts) {
    Tape<T>& tp = *parts.at(0).tape;
    std::size_t total = 0;
    for (auto p : parts) {
        require_shape(p.value().rank() == 1, "concat", p.value().shape_str(), "(n)");
        total += p.value().size();
    }
    Tensor<T> out = Tensor<T>::zeros({total});
    std::size_t off = 0;
    for (auto p : parts) {
        const auto& pv = p.value();
        std::copy(pv.data.begin(), pv.data.end(), out.data.begin() + off);
        off += pv.size();
    }
    Var<T> r = tp.push(std::move(out));
    tp.install(r, [&tp, parts, r] {
        const auto& g = tp.grad(r);
        std::size_t off = 0;
        for (auto p : parts) {
            auto& gp = tp.grad_mut(p);
            for (std::size_t i = 0; i < gp.size(); ++i) gp.data[i] += g.data[off + i];
            off += gp.size();
        }
    });
    return r;
}

/// Stack equal-length vectors into a (k,d) matrix.
template <typename T>
Var<T> stack_rows(const std::vector<Var<T>>& rows) {
    Tape<T>& tp = *rows.at(0).tape;
    std::size_t d = rows[0].value().size();
    Tensor<T> out = Tensor<T>::zeros({rows.size(), d});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& rv = rows[i].value();
        require_shape(rv.rank() == 1 && rv.size() == d, "stack_rows", rv.shape_str(),
                      "(" + std::to_string(d) + ")");
        std::copy(rv.data.begin(), rv.data.end(), out.data.begin() + i * d);
    }
    Var<T> r = tp.push(std::move(out));
    tp.install(r, [&tp, rows, r, d] {
        const auto& g = tp.grad(r);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto& gr = tp.grad_mut(rows[i]);
            for (std::size_t j = 0; j < d; ++j) gr.data[j] += g.data[i * d + j];
        }
    });
    return r;
}

/// Column-wise mean of a (k,d) matrix -> (d).
template <typename T>
Var<T> mean_rows(Var<T> A) {
    Tape<T>& tp = *A.tape;
    const auto& Av = A.value();
    require_shape(Av.rank() == 2, "mean_rows", Av.shape_str(), "(k,d)");
    std::size_t k = Av.rows(), d = Av.cols();
    Tensor<T> out = Tensor<T>::zeros({d});
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < d; ++j) out.data[j] += Av.at2(i, j);
    for (auto& v : out.data) v /= T(k);
    Var<T> r = tp.push(std::move(out));
    tp.install(r, [&tp, A, r, k, d] {
        const auto& g = tp.grad(r);
        auto& gA = tp.grad_mut(A);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < d; ++j) gA.at2(i, j) += g.data[j] / T(k);
    });
    return r;
}

template <typename T>
Var<T> leaky_relu(Var<T> a, T slope) {
    Tape<T>& tp = *a.tape;
    Tensor<T> out = a.value();
    for (auto& v : out.data) v = v >= T(0) ? v : slope * v;
    Var<T> r = tp.push(std::move(out));
    tp.install(r, [&tp, a, r, slope] {
        const auto& g = tp.grad(r);
        const auto& av = tp.value(a);
        auto& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i)
            ga.data[i] += g.data[i] * (av.data[i] >= T(0) ? T(1) : slope);
    });
    return r;
}

/// Numerically guarded softmax over a vector.
template <typename T>
Var<T> softmax(Var<T> a) {
    Tape<T>& tp = *a.tape;
    const auto& av = a.value();
    require_shape(av.rank() == 1 && av.size() > 0, "softmax", av.shape_str(), "(n)");
    T mx = *std::max_element(av.data.begin(), av.data.end());
    Tensor<T> out = av;
    T sum = T(0);
    for (auto& v : out.data) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (auto& v : out.data) v /= sum;
    Var<T> r = tp.push(std::move(out));
    tp.install(r, [&tp, a, r] {
        const auto& g = tp.grad(r);
        const auto& y = tp.value(r);
        auto& ga = tp.grad_mut(a);
        T gy = T(0);
        for (std::size_t i = 0; i < g.size(); ++i) gy += g.data[i] * y.data[i];
        for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += y.data[i] * (g.data[i] - gy);
    });
    return r;
}

/// Elementwise log, clamped away from zero.
template <typename T>
Var<T> log_guarded(Var<T> a) {
    Tape<T>& tp = *a.tape;
    const T floor = T(1e-12);
    Tensor<T> out = a.value();
    for (auto& v : out.data) v = std::log(std::max(v, floor));
    Var<T> r = tp.push(std::move(out));
    tp.install(r, [&tp, a, r, floor] {
        const auto& g = tp.grad(r);
        const auto& av = tp.value(a);
        auto& ga = tp.grad_mut(a);
        for (std::size_t i = 0; i < g.size(); ++i)
            ga.data[i] += g.data[i] / std::max(av.data[i], floor);
    });
    return r;
}

template <typename T>
Var<T> sum(Var<T> a) {
    Tape<T>& tp = *a.tape;
    T acc = T(0);
    for (T v : a.value().data) acc += v;
    Var<T> r = tp.push(Tensor<T>::scalar(acc));
    tp.install(r, [&tp, a, r] {
        T g = tp.grad(r).data[0];
        auto& ga = tp.grad_mut(a);
        for (auto& v : ga.data) v += g;
    });
    return r;
}

template <typename T>
Var<T> mean(Var<T> a) {
    return scale(sum(a), T(1) / T(a.value().size()));
}

/// Select one element of a vector as a scalar.
template <typename T>
Var<T> pick(Var<T> a, std::size_t idx) {
    Tape<T>& tp = *a.tape;
    const auto& av = a.value();
    require_shape(av.rank() == 1 && idx < av.size(), "pick", std::to_string(idx),
                  "< " + std::to_string(av.size()));
    Var<T> r = tp.push(Tensor<T>::scalar(av.data[idx]));
    tp.install(r, [&tp, a, r, idx] { tp.grad_mut(a).data[idx] += tp.grad(r).data[0]; });
    return r;
}

/// Select a row of a (n,d) table as a (d) vector.
template <typename T>
Var<T> embedding_lookup(Var<T> table, std::size_t row) {
    Tape<T>& tp = *table.tape;
    const auto& tv = table.value();
    require_shape(tv.rank() == 2 && row < tv.rows(), "embedding_lookup", std::to_string(row),
                  "< " + std::to_string(tv.rank() == 2 ? tv.rows() : 0));
    std::size_t d = tv.cols();
    Tensor<T> out = Tensor<T>::zeros({d});
    std::copy(tv.data.begin() + row * d, tv.data.begin() + (row + 1) * d, out.data.begin());
    Var<T> r = tp.push(std::move(out));
    tp.install(r, [&tp, table, r, row, d] {
        const auto& g = tp.grad(r);
        auto& gt = tp.grad_mut(table);
        for (std::size_t j = 0; j < d; ++j) gt.data[row * d + j] += g.data[j];
    });
    return r;
}

/// -log softmax(logits)[target], computed stably as one node.
template <typename T>
Var<T> cross_entropy(Var<T> logits, std::size_t target) {
    Tape<T>& tp = *logits.tape;
    const auto& lv = logits.value();
    require_shape(lv.rank() == 1 && target < lv.size(), "cross_entropy", std::to_string(target),
                  "< " + std::to_string(lv.size()));
    T mx = *std::max_element(lv.data.begin(), lv.data.end());
    T lse = T(0);
    for (T v : lv.data) lse += std::exp(v - mx);
    lse = mx + std::log(lse);
    Var<T> r = tp.push(Tensor<T>::scalar(lse - lv.data[target]));
    tp.install(r, [&tp, logits, r, target, mx, lse] {
        T g = tp.grad(r).data[0];
        const auto& lv = tp.value(logits);
        auto& gl = tp.grad_mut(logits);
        for (std::size_t i = 0; i < lv.size(); ++i) {
            T p = std::exp(lv.data[i] - lse);
            gl.data[i] += g * (p - (i == target ? T(1) : T(0)));
        }
    });
    return r;
}

/// Two-layer MLP with leaky-relu hidden activation and linear output.
template <typename T>
Var<T> mlp2(Tape<T>& tp, const ParamStore<T>& store, const std::string& prefix, Var<T> x,
            std::size_t hidden, std::size_t out, T slope = T(0.2)) {
    std::size_t in = x.value().size();
    Var<T> W1 = tp.param(prefix + "/W1", {hidden, in}, store);
    Var<T> b1 = tp.param(prefix + "/b1", {hidden}, store);
    Var<T> W2 = tp.param(prefix + "/W2", {out, hidden}, store);
    Var<T> b2 = tp.param(prefix + "/b2", {out}, store);
    Var<T> h = leaky_relu(linear(W1, x, b1), slope);
    return linear(W2, h, b2);
}

}  // namespace typegraph

#endif
