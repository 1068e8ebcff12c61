#pragma once

#include "nntf/dense_tensor.hpp"
#include "nntf/kruskal_model.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

namespace nntf {

/**
 * @brief One member A_eps of the BCLR degenerate family.
 *
 * basis holds x_1..x_4 in R^n; when empty the standard basis vectors
 * e_1..e_4 are used, which makes the limit tensor a 0/1 tensor.
 */
struct BclrInstance {
    double epsilon = 1.0;
    std::size_t n = 4;
    std::optional<std::array<std::vector<double>, 4>> basis;

    void validate() const {
        if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
        if (n < 4) throw std::invalid_argument("BCLR instances need n >= 4");
        if (basis) {
            Matrix x(static_cast<Eigen::Index>(n), 4);
            for (Eigen::Index i = 0; i < 4; ++i) {
                const auto& v = (*basis)[static_cast<std::size_t>(i)];
                if (v.size() != n) {
                    throw std::invalid_argument("basis vectors must have length n");
                }
                for (Eigen::Index j = 0; j < x.rows(); ++j) {
                    x(j, i) = v[static_cast<std::size_t>(j)];
                }
            }
            if (Eigen::FullPivLU<Matrix>(x).rank() != 4) {
                throw std::invalid_argument("basis vectors must be linearly independent");
            }
        }
    }

    std::array<std::vector<double>, 4> basis_vectors() const {
        if (basis) return *basis;
        std::array<std::vector<double>, 4> e;
        for (std::size_t i = 0; i < 4; ++i) {
            e[i].assign(n, 0.0);
            e[i][i] = 1.0;
        }
        return e;
    }
};

struct BclrMatrices {
    Matrix u; ///< 4 x 5, fourth row zero
    Matrix v; ///< 4 x 5
    Matrix w; ///< 4 x 5, entries carry 1/eps
};

/// The coefficient matrices U, V, W (0-based rows i, columns j).
inline BclrMatrices bclr_matrices(double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    const double ie = 1.0 / eps;
    BclrMatrices m{Matrix(4, 5), Matrix(4, 5), Matrix(4, 5)};
    m.u << 1, 0, 1, 0, 1,
           0, 0, 0, eps, eps,
           1, 1, 0, 1, 0,
           0, 0, 0, 0, 0;
    m.v << eps, 0, 0, -eps, 0,
           0, -1, 0, 1, 0,
           0, 0, 0, 0, eps,
           1, -1, 1, 0, 1;
    m.w << ie, ie, -ie, ie, 0,
           0, 0, 0, 1, 0,
           0, 0, -ie, 0, ie,
           1, 0, 0, 0, -1;
    return m;
}

namespace details {

inline std::vector<double> combine(const std::array<std::vector<double>, 4>& x,
                                   std::array<double, 4> c) {
    std::vector<double> out(x[0].size(), 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
        if (c[i] == 0.0) continue;
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += c[i] * x[i][j];
    }
    return out;
}

} // namespace details

struct BclrResult {
    /// sum_j (sum_i u_ij x_i) ⊗ (sum_i v_ij x_i) ⊗ (sum_i w_ij x_i)
    DenseTensor tensor;
    /// The five rank-1 terms of the expanded form, weights 1.
    KruskalModel components;
};

/**
 * @brief Builds A_eps twice: the dense tensor from the U, V, W column sums and
 * a 5-component model written out term by term from the expanded form.
 * The two routes are independent and must agree; the model is a witness
 * that rank(A_eps) <= 5.
 */
inline BclrResult bclr_a_eps(const BclrInstance& inst) {
    inst.validate();
    const auto x = inst.basis_vectors();
    const double e = inst.epsilon;
    const double ie = 1.0 / e;

    const BclrMatrices m = bclr_matrices(e);
    DenseTensor sum = DenseTensor::zeros({inst.n, inst.n, inst.n});
    for (Eigen::Index j = 0; j < 5; ++j) {
        auto coeffs = [&](const Matrix& c) {
            return std::array<double, 4>{c(0, j), c(1, j), c(2, j), c(3, j)};
        };
        sum = add_scaled(sum,
                         outer_product({details::combine(x, coeffs(m.u)),
                                        details::combine(x, coeffs(m.v)),
                                        details::combine(x, coeffs(m.w))}),
                         1.0, 1.0);
    }

    // (x1+x3)⊗(e x1+x4)⊗(x1/e+x4) + x3⊗(-x2-x4)⊗(x1/e)
    // + x1⊗x4⊗(-x1/e-x3/e) + (e x2+x3)⊗(-e x1+x2)⊗(x1/e+x2)
    // + (x1+e x2)⊗(e x3+x4)⊗(x3/e-x4)
    const std::array<std::array<std::array<double, 4>, 3>, 5> terms{{
        {{{1, 0, 1, 0}, {e, 0, 0, 1}, {ie, 0, 0, 1}}},
        {{{0, 0, 1, 0}, {0, -1, 0, -1}, {ie, 0, 0, 0}}},
        {{{1, 0, 0, 0}, {0, 0, 0, 1}, {-ie, 0, -ie, 0}}},
        {{{0, e, 1, 0}, {-e, 1, 0, 0}, {ie, 1, 0, 0}}},
        {{{1, e, 0, 0}, {0, 0, e, 1}, {0, 0, ie, -1}}},
    }};
    KruskalModel comp;
    comp.shape = {inst.n, inst.n, inst.n};
    comp.delta.assign(5, 1.0);
    for (std::size_t mode = 0; mode < 3; ++mode) {
        Matrix f(static_cast<Eigen::Index>(inst.n), 5);
        for (std::size_t p = 0; p < 5; ++p) {
            const auto v = details::combine(x, terms[p][mode]);
            for (std::size_t j = 0; j < inst.n; ++j) {
                f(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(p)) = v[j];
            }
        }
        comp.factors.push_back(std::move(f));
    }
    return {std::move(sum), std::move(comp)};
}

/**
 * @brief The limit A = x1⊗x1⊗x1 + x1⊗x3⊗x3 + x2⊗x2⊗x1 + x2⊗x4⊗x3
 * + x3⊗x2⊗x2 + x3⊗x4⊗x4 of A_eps as eps -> 0.
 */
inline DenseTensor bclr_limit(std::size_t n = 4,
                              std::optional<std::array<std::vector<double>, 4>> basis = {}) {
    BclrInstance inst{1.0, n, std::move(basis)};
    inst.validate();
    const auto x = inst.basis_vectors();
    // Zero-based basis labels of the six terms.
    constexpr std::array<std::array<int, 3>, 6> terms{{
        {0, 0, 0}, {0, 2, 2}, {1, 1, 0}, {1, 3, 2}, {2, 1, 1}, {2, 3, 3},
    }};
    DenseTensor sum = DenseTensor::zeros({n, n, n});
    for (const auto& t : terms) {
        sum = add_scaled(sum, outer_product({x[t[0]], x[t[1]], x[t[2]]}), 1.0, 1.0);
    }
    return sum;
}

struct WSequence {
    std::vector<DenseTensor> a_n;
    DenseTensor a;
    DenseTensor b;
    DenseTensor c;
};

/**
 * @brief The 2x2x2 sequence A_n = A + B/n + C/n^2 converging to A.
 *
 * A_n is built from its entries directly: entry (i, j, k) depends only on the
 * number of ones among the indices (0 -> 0, 1 -> 1, 2 -> 1/n, 3 -> 1/n^2).
 * B holds the three entries with two ones; C the single entry (1,1,1).
 */
inline WSequence w_sequence(const std::vector<std::size_t>& n_values) {
    const Shape shape{2, 2, 2};
    auto by_weight = [&](std::array<double, 4> value) {
        std::vector<double> data(8);
        for_each_index(shape, [&](std::size_t flat, const IndexTuple& idx) {
            data[flat] = value[idx[0] + idx[1] + idx[2]];
        });
        return DenseTensor(shape, std::move(data));
    };
    WSequence out{{}, by_weight({0, 1, 0, 0}), by_weight({0, 0, 1, 0}),
                  by_weight({0, 0, 0, 1})};
    for (std::size_t n : n_values) {
        if (n == 0) throw std::invalid_argument("w_sequence needs n >= 1");
        const double inv = 1.0 / static_cast<double>(n);
        const double inv2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
        out.a_n.push_back(by_weight({0.0, 1.0, inv, inv2}));
    }
    return out;
}

struct KlCounterexample {
    DenseTensor a;
    DenseTensor x_n;
};

/// A = e⊗e⊗e with e = [1, 0] and the strictly positive rank-1
/// X_n = [1, 1/n]^{⊗3}; D_KL(A, X_n) -> 0 but no positive rank-1 X attains 0.
inline KlCounterexample kl_counterexample(std::size_t n) {
    if (n == 0) throw std::invalid_argument("kl_counterexample needs n >= 1");
    const std::vector<double> e{1.0, 0.0};
    const std::vector<double> xn{1.0, 1.0 / static_cast<double>(n)};
    return {outer_product({e, e, e}), outer_product({xn, xn, xn})};
}

} // namespace nntf
