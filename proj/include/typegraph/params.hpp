#ifndef TYPEGRAPH_PARAMS_HPP
#define TYPEGRAPH_PARAMS_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "typegraph/rng.hpp"
#include "typegraph/tensor.hpp"

namespace typegraph {

/// Named store of every trainable tensor. Parameters are addressed by stable
/// path strings (e.g. "step1/fixed/Assign/arg0/W1"). Initial values depend
/// only on (init_seed, path, shape), never on creation order, so lazily
/// created parameters are reproducible.
template <typename T>
class ParamStore {
public:
    explicit ParamStore(std::uint64_t init_seed = 0) : init_seed_(init_seed) {}

    std::uint64_t init_seed() const { return init_seed_; }

    bool has(const std::string& path) const { return values_.count(path) != 0; }

    /// Value for `path`, materializing the deterministic init if absent.
    Tensor<T>& ensure(const std::string& path, const std::vector<std::size_t>& shape) {
        auto it = values_.find(path);
        if (it == values_.end()) it = values_.emplace(path, init_value(path, shape)).first;
        return it->second;
    }

    /// Read-only view that does not mutate the store: returns the stored
    /// value, or the init value a fresh parameter would get.
    Tensor<T> peek(const std::string& path, const std::vector<std::size_t>& shape) const {
        auto it = values_.find(path);
        if (it != values_.end()) return it->second;
        return init_value(path, shape);
    }

    Tensor<T> init_value(const std::string& path, const std::vector<std::size_t>& shape) const {
        Tensor<T> t = Tensor<T>::zeros(shape);
        // Biases (".../b*") start at zero; everything else gets a fan-scaled
        // uniform init.
        auto slash = path.rfind('/');
        std::string leaf = slash == std::string::npos ? path : path.substr(slash + 1);
        if (!leaf.empty() && leaf[0] == 'b') return t;
        double fan_in, fan_out;
        if (shape.size() == 2) {
            fan_out = double(shape[0]);
            fan_in = double(shape[1]);
        } else {
            fan_in = fan_out = double(t.size());
        }
        double s = std::sqrt(6.0 / (fan_in + fan_out));
        Rng rng(init_seed_, "init/" + path);
        for (auto& v : t.data) v = static_cast<T>(rng.uniform(-s, s));
        return t;
    }

    std::map<std::string, Tensor<T>>& values() { return values_; }
    const std::map<std::string, Tensor<T>>& values() const { return values_; }

    template <typename U>
    ParamStore<U> cast() const {
        ParamStore<U> out(init_seed_);
        for (const auto& [k, v] : values_) out.values().emplace(k, v.template cast<U>());
        return out;
    }

private:
    std::uint64_t init_seed_;
    std::map<std::string, Tensor<T>> values_;
};

// --- checkpoint container -------------------------------------------------

inline constexpr int kCheckpointVersion = 1;

template <typename T>
nlohmann::ordered_json params_to_json(const ParamStore<T>& store) {
    nlohmann::ordered_json j;
    j["version"] = kCheckpointVersion;
    j["seed"] = store.init_seed();
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [path, t] : store.values()) {
        nlohmann::ordered_json p;
        p["shape"] = t.shape;
        p["data"] = std::vector<double>(t.data.begin(), t.data.end());
        params[path] = std::move(p);
    }
    j["params"] = std::move(params);
    return j;
}

template <typename T>
ParamStore<T> params_from_json(const nlohmann::json& j) {
    if (!j.contains("version") || j["version"].get<int>() != kCheckpointVersion)
        throw InputError("checkpoint format version mismatch");
    ParamStore<T> store(j.value("seed", std::uint64_t(0)));
    for (const auto& [path, p] : j.at("params").items()) {
        Tensor<T> t;
        t.shape = p.at("shape").template get<std::vector<std::size_t>>();
        for (double v : p.at("data")) t.data.push_back(static_cast<T>(v));
        if (t.data.size() != Tensor<T>::count(t.shape))
            throw InputError("checkpoint tensor size mismatch for " + path);
        store.values().emplace(path, std::move(t));
    }
    return store;
}

}  // namespace typegraph

#endif
