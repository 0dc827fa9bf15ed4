#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "rfmtl/errors.hpp"
#include "rfmtl/rng.hpp"

namespace rfmtl {

// Dense n-dimensional array, row-major. Value semantics throughout: tensors
// are freely copied and moved between threads with no shared state.
template <typename T>
class BasicTensor {
public:
    BasicTensor() = default;

    explicit BasicTensor(std::vector<std::size_t> shape, T fill = T(0))
        : shape_(std::move(shape)), data_(count(shape_), fill) {}

    BasicTensor(std::vector<std::size_t> shape, std::vector<T> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (count(shape_) != data_.size())
            throw DimensionError("tensor data length does not match shape");
    }

    static std::size_t count(const std::vector<std::size_t>& shape) {
        return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                               std::multiplies<std::size_t>());
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& values() { return data_; }
    const std::vector<T>& values() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T& at2(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    const T& at2(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    // Reinterpret with a new shape of identical element count.
    void reshape(std::vector<std::size_t> shape) {
        if (count(shape) != data_.size()) throw DimensionError("reshape changes element count");
        shape_ = std::move(shape);
    }

    bool all_finite() const {
        for (const T& v : data_)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    void fill_uniform(Rng& rng, T lo, T hi) {
        for (T& v : data_) v = static_cast<T>(rng.uniform(lo, hi));
    }

    void fill_gaussian(Rng& rng, T mean, T stddev) {
        for (T& v : data_) v = static_cast<T>(rng.gaussian(mean, stddev));
    }

    template <typename U>
    BasicTensor<U> cast() const {
        BasicTensor<U> out(shape_);
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return out;
    }

    bool same_shape(const BasicTensor& other) const { return shape_ == other.shape_; }

private:
    std::vector<std::size_t> shape_;
    std::vector<T> data_;
};

using Tensor = BasicTensor<float>;    // canonical training/inference precision
using DTensor = BasicTensor<double>;  // used by oracles and gradient checks

inline std::string shape_str(const std::vector<std::size_t>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

}  // namespace rfmtl
