#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "caae/errors.hpp"

namespace caae {

// Dense row-major tensor. Images are stored H x W x C.
template <class T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(count(shape), T(0));
    }
    Tensor(std::vector<int> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<std::size_t>(count(shape)) != data.size())
            throw ShapeMismatch("tensor data does not match shape");
    }

    static std::int64_t count(const std::vector<int>& s) {
        std::int64_t n = 1;
        for (int d : s) n *= d;
        return n;
    }

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }

    // 3-d (H, W, C) access
    T& at(int y, int x, int c) { return data[(static_cast<std::size_t>(y) * shape[1] + x) * shape[2] + c]; }
    const T& at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * shape[1] + x) * shape[2] + c];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

template <class T>
Tensor<T> zeros_like(const Tensor<T>& t) {
    return Tensor<T>(t.shape);
}

}  // namespace caae
