#pragma once

#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

namespace evonet {

/// Dense row-major tensor. Conventions used throughout:
///   image batch   [N, H, W, C]
///   single image  [H, W, C]
///   conv filters  [f, f, C, M]
///   fc weights    [in, out]
template <typename Scalar>
struct Tensor {
    std::vector<int> shape;
    std::vector<Scalar> data;

    Tensor() = default;

    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(numel(shape), Scalar(0));
    }

    Tensor(std::vector<int> s, std::vector<Scalar> d)
        : shape(std::move(s)), data(std::move(d)) {
        assert(data.size() == numel(shape));
    }

    static std::size_t numel(const std::vector<int>& s) {
        if (s.empty()) return 0; // rank-0 means "no storage" here, not scalar
        std::size_t n = 1;
        for (int d : s) n *= static_cast<std::size_t>(d);
        return n;
    }

    std::size_t size() const { return data.size(); }
    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

    Scalar* begin() { return data.data(); }
    Scalar* end() { return data.data() + data.size(); }
    const Scalar* begin() const { return data.data(); }
    const Scalar* end() const { return data.data() + data.size(); }

    Scalar& operator[](std::size_t i) { return data[i]; }
    const Scalar& operator[](std::size_t i) const { return data[i]; }

    // Indexed access for non-hot paths and tests; hot loops compute flat
    // offsets themselves.
    Scalar& at3(int i, int j, int k) {
        return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
    }
    const Scalar& at3(int i, int j, int k) const {
        return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
    }
    Scalar& at4(int i, int j, int k, int l) {
        return data[((static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k) *
                        shape[3] + l];
    }
    const Scalar& at4(int i, int j, int k, int l) const {
        return data[((static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k) *
                        shape[3] + l];
    }

    template <typename Other>
    Tensor<Other> cast() const {
        Tensor<Other> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i)
            out.data[i] = static_cast<Other>(data[i]);
        return out;
    }

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.shape == b.shape && a.data == b.data;
    }
};

} // namespace evonet
