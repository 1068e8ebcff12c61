#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nntf {

using Shape = std::vector<std::size_t>;

/// Multi-index (j_1, ..., j_k), zero-based.
using IndexTuple = std::vector<std::size_t>;

/// Entrywise norms of a tensor viewed as a long vector.
enum class NormKind {
    E, ///< l1: sum of absolute values
    F, ///< l2: Frobenius
    G  ///< l-infinity: largest absolute value
};

namespace details {

inline std::size_t checked_num_entries(const Shape& shape) {
    if (shape.empty()) {
        throw std::invalid_argument("tensor shape must have at least one mode");
    }
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d == 0) {
            throw std::invalid_argument("tensor dimensions must be positive");
        }
        n *= d;
    }
    return n;
}

} // namespace details

/**
 * @brief Dense order-k array of finite doubles stored row-major (last index
 * varies fastest).
 *
 * Values are immutable after construction. Non-finite entries are rejected
 * up front so that downstream norms and divergences never see NaN.
 */
class DenseTensor {
  public:
    DenseTensor(Shape shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        const std::size_t n = details::checked_num_entries(shape_);
        if (data_.size() != n) {
            throw std::invalid_argument(
                "tensor data length " + std::to_string(data_.size()) +
                " does not match shape product " + std::to_string(n));
        }
        for (double v : data_) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("tensor entries must be finite");
            }
        }
        compute_strides();
    }

    static DenseTensor zeros(Shape shape) {
        const std::size_t n = details::checked_num_entries(shape);
        return DenseTensor(std::move(shape), std::vector<double>(n, 0.0));
    }

    static DenseTensor filled(Shape shape, double value) {
        const std::size_t n = details::checked_num_entries(shape);
        return DenseTensor(std::move(shape), std::vector<double>(n, value));
    }

    const Shape& shape() const { return shape_; }
    std::size_t order() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::span<const double> data() const { return data_; }
    const std::vector<std::size_t>& strides() const { return strides_; }

    double operator[](std::size_t flat) const { return data_[flat]; }

    std::size_t offset(std::span<const std::size_t> idx) const {
        if (idx.size() != shape_.size()) {
            throw std::invalid_argument("index length does not match order");
        }
        std::size_t off = 0;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] >= shape_[i]) {
                throw std::out_of_range("tensor index out of range");
            }
            off += idx[i] * strides_[i];
        }
        return off;
    }

    double at(std::span<const std::size_t> idx) const {
        return data_[offset(idx)];
    }
    double at(std::initializer_list<std::size_t> idx) const {
        return at(std::span<const std::size_t>(idx.begin(), idx.size()));
    }

    bool is_nonnegative() const {
        for (double v : data_) {
            if (v < 0.0) return false;
        }
        return true;
    }

    bool operator==(const DenseTensor& other) const = default;

  private:
    void compute_strides() {
        strides_.assign(shape_.size(), 1);
        for (std::size_t i = shape_.size(); i-- > 1;) {
            strides_[i - 1] = strides_[i] * shape_[i];
        }
    }

    Shape shape_;
    std::vector<double> data_;
    std::vector<std::size_t> strides_;
};

/// Converts a flat row-major offset into a multi-index.
inline IndexTuple unravel(std::size_t flat, const Shape& shape) {
    IndexTuple idx(shape.size());
    for (std::size_t i = shape.size(); i-- > 0;) {
        idx[i] = flat % shape[i];
        flat /= shape[i];
    }
    return idx;
}

/// Calls f(flat, idx) for every entry in row-major order.
inline void for_each_index(
    const Shape& shape,
    const std::function<void(std::size_t, const IndexTuple&)>& f) {
    const std::size_t n = details::checked_num_entries(shape);
    IndexTuple idx(shape.size(), 0);
    for (std::size_t flat = 0; flat < n; ++flat) {
        f(flat, idx);
        for (std::size_t i = shape.size(); i-- > 0;) {
            if (++idx[i] < shape[i]) break;
            idx[i] = 0;
        }
    }
}

/// Segre outer product x ⊗ y ⊗ ... ⊗ z.
inline DenseTensor outer_product(const std::vector<std::vector<double>>& vectors) {
    if (vectors.empty()) {
        throw std::invalid_argument("outer_product needs at least one vector");
    }
    Shape shape;
    shape.reserve(vectors.size());
    for (const auto& v : vectors) {
        if (v.empty()) {
            throw std::invalid_argument("outer_product vectors must be nonempty");
        }
        shape.push_back(v.size());
    }
    std::vector<double> data(details::checked_num_entries(shape));
    for_each_index(shape, [&](std::size_t flat, const IndexTuple& idx) {
        double prod = 1.0;
        for (std::size_t m = 0; m < idx.size(); ++m) prod *= vectors[m][idx[m]];
        data[flat] = prod;
    });
    return DenseTensor(std::move(shape), std::move(data));
}

inline void require_same_shape(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument("tensor shapes differ");
    }
}

/// Entrywise lambda * a + mu * b.
inline DenseTensor add_scaled(const DenseTensor& a, const DenseTensor& b,
                              double lambda, double mu) {
    require_same_shape(a, b);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = lambda * a[i] + mu * b[i];
    }
    return DenseTensor(a.shape(), std::move(out));
}

inline DenseTensor scaled(const DenseTensor& a, double lambda) {
    std::vector<double> out(a.data().begin(), a.data().end());
    for (double& v : out) v *= lambda;
    return DenseTensor(a.shape(), std::move(out));
}

inline double norm(const DenseTensor& a, NormKind kind) {
    double acc = 0.0;
    switch (kind) {
    case NormKind::E:
        for (double v : a.data()) acc += std::abs(v);
        return acc;
    case NormKind::F:
        for (double v : a.data()) acc += v * v;
        return std::sqrt(acc);
    case NormKind::G:
        for (double v : a.data()) acc = std::max(acc, std::abs(v));
        return acc;
    }
    throw std::logic_error("unknown norm kind");
}

/// Frobenius inner product sum_j a_j b_j.
inline double inner(const DenseTensor& a, const DenseTensor& b) {
    require_same_shape(a, b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

} // namespace nntf
