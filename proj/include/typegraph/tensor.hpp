#ifndef TYPEGRAPH_TENSOR_HPP
#define TYPEGRAPH_TENSOR_HPP

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "typegraph/errors.hpp"

namespace typegraph {

/// Dense row-major tensor. Rank 1 (vectors) and rank 2 (matrices) cover
/// everything the model needs; scalars are 1-element vectors.
template <typename T>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<T> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {}

    static std::size_t count(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }

    static Tensor zeros(std::vector<std::size_t> shape) {
        std::size_t n = count(shape);
        return Tensor(std::move(shape), std::vector<T>(n, T(0)));
    }

    static Tensor full(std::vector<std::size_t> shape, T v) {
        std::size_t n = count(shape);
        return Tensor(std::move(shape), std::vector<T>(n, v));
    }

    static Tensor vec(std::vector<T> d) {
        std::vector<std::size_t> s{d.size()};
        return Tensor(std::move(s), std::move(d));
    }

    static Tensor scalar(T v) { return Tensor({1}, {v}); }

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }

    std::size_t rows() const { return shape.at(0); }
    std::size_t cols() const { return shape.at(1); }

    T& at(std::size_t i) { return data[i]; }
    T at(std::size_t i) const { return data[i]; }
    T& at2(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    T at2(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    std::string shape_str() const {
        std::ostringstream os;
        os << "(";
        for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
        os << ")";
        return os.str();
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out.shape = shape;
        out.data.reserve(data.size());
        for (T v : data) out.data.push_back(static_cast<U>(v));
        return out;
    }
};

inline void require_shape(bool ok, const std::string& op, const std::string& got,
                          const std::string& expected) {
    if (!ok) throw ShapeMismatch(op, got, expected);
}

}  // namespace typegraph

#endif
