#ifndef TYPEGRAPH_ADAM_HPP
#define TYPEGRAPH_ADAM_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "typegraph/params.hpp"
#include "typegraph/tensor.hpp"

namespace typegraph {

/// Adam with an L2 weight-decay term. Decay can be coupled (classical L2
/// folded into the gradient) or decoupled (applied directly to the weights).
template <typename T>
class Adam {
public:
    struct Moments {
        Tensor<T> m;
        Tensor<T> v;
        std::int64_t step = 0;
    };

    explicit Adam(T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8), bool decoupled = false)
        : beta1_(beta1), beta2_(beta2), eps_(eps), decoupled_(decoupled) {}

    /// One update for every parameter present in `grads`. Parameters without
    /// a gradient this step are untouched (no decay either).
    void step(ParamStore<T>& params, const std::map<std::string, Tensor<T>>& grads, T lr,
              T weight_decay) {
        for (const auto& [path, g] : grads) {
            Tensor<T>& p = params.ensure(path, g.shape);
            if (!p.same_shape(g))
                throw ShapeMismatch("adam_step", g.shape_str(), p.shape_str());
            Moments& mo = state_[path];
            if (mo.step == 0) {
                mo.m = Tensor<T>::zeros(g.shape);
                mo.v = Tensor<T>::zeros(g.shape);
            }
            mo.step += 1;
            T bc1 = T(1) - std::pow(beta1_, T(mo.step));
            T bc2 = T(1) - std::pow(beta2_, T(mo.step));
            for (std::size_t i = 0; i < g.size(); ++i) {
                T gi = g.data[i];
                if (!decoupled_) gi += weight_decay * p.data[i];
                mo.m.data[i] = beta1_ * mo.m.data[i] + (T(1) - beta1_) * gi;
                mo.v.data[i] = beta2_ * mo.v.data[i] + (T(1) - beta2_) * gi * gi;
                T mhat = mo.m.data[i] / bc1;
                T vhat = mo.v.data[i] / bc2;
                p.data[i] -= lr * mhat / (std::sqrt(vhat) + eps_);
                if (decoupled_) p.data[i] -= lr * weight_decay * p.data[i];
            }
        }
    }

    const std::map<std::string, Moments>& state() const { return state_; }

private:
    T beta1_, beta2_, eps_;
    bool decoupled_;
    std::map<std::string, Moments> state_;
};

}  // namespace typegraph

#endif
