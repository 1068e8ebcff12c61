#pragma once

#include "nntf/dense_tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nntf {

using Matrix = Eigen::MatrixXd;

/**
 * @brief CP representation X = sum_p delta_p u_p ⊗ v_p ⊗ ... ⊗ z_p.
 *
 * factors[i] is d_i x r; column p of factors[i] is the p-th factor vector
 * along mode i. The same type carries signed (unconstrained CP) models;
 * nonnegative-only operations check is_nonnegative() before running.
 */
struct KruskalModel {
    Shape shape;
    std::vector<double> delta;
    std::vector<Matrix> factors;

    std::size_t rank() const { return delta.size(); }
    std::size_t order() const { return shape.size(); }

    /// Throws std::invalid_argument when dimensions or finiteness are off.
    void validate() const {
        details::checked_num_entries(shape);
        if (factors.size() != shape.size()) {
            throw std::invalid_argument("model needs one factor matrix per mode");
        }
        for (std::size_t i = 0; i < factors.size(); ++i) {
            if (static_cast<std::size_t>(factors[i].rows()) != shape[i] ||
                static_cast<std::size_t>(factors[i].cols()) != delta.size()) {
                throw std::invalid_argument(
                    "factor matrix " + std::to_string(i) + " has wrong dimensions");
            }
            if (!factors[i].allFinite()) {
                throw std::invalid_argument("factor entries must be finite");
            }
        }
        for (double d : delta) {
            if (!std::isfinite(d)) {
                throw std::invalid_argument("model weights must be finite");
            }
        }
    }

    bool is_nonnegative() const {
        for (double d : delta) {
            if (d < 0.0) return false;
        }
        for (const auto& f : factors) {
            if (f.size() > 0 && f.minCoeff() < 0.0) return false;
        }
        return true;
    }

    /// Nonnegative with every factor column on the probability simplex.
    bool is_l1_normalized(double tol = 1e-12) const {
        if (!is_nonnegative()) return false;
        for (const auto& f : factors) {
            for (Eigen::Index p = 0; p < f.cols(); ++p) {
                if (std::abs(f.col(p).sum() - 1.0) > tol) return false;
            }
        }
        return true;
    }

    bool operator==(const KruskalModel& other) const {
        if (shape != other.shape || delta != other.delta ||
            factors.size() != other.factors.size()) {
            return false;
        }
        for (std::size_t i = 0; i < factors.size(); ++i) {
            if (factors[i].rows() != other.factors[i].rows() ||
                factors[i].cols() != other.factors[i].cols() ||
                factors[i] != other.factors[i]) {
                return false;
            }
        }
        return true;
    }
};

/// Joint distribution sum_theta prior(theta) prod_i q_i(j_i | theta).
struct NaiveBayesModel {
    std::vector<double> prior;
    std::vector<Matrix> conditionals;

    DenseTensor joint() const;
};

inline DenseTensor reconstruct(const KruskalModel& model) {
    model.validate();
    const std::size_t r = model.rank();
    std::vector<double> data(details::checked_num_entries(model.shape), 0.0);
    for_each_index(model.shape, [&](std::size_t flat, const IndexTuple& idx) {
        double acc = 0.0;
        for (std::size_t p = 0; p < r; ++p) {
            double term = model.delta[p];
            for (std::size_t m = 0; m < idx.size(); ++m) {
                term *= model.factors[m](static_cast<Eigen::Index>(idx[m]),
                                         static_cast<Eigen::Index>(p));
            }
            acc += term;
        }
        data[flat] = acc;
    });
    return DenseTensor(model.shape, std::move(data));
}

inline DenseTensor NaiveBayesModel::joint() const {
    KruskalModel m;
    for (const auto& q : conditionals) m.shape.push_back(static_cast<std::size_t>(q.rows()));
    m.delta = prior;
    m.factors = conditionals;
    return reconstruct(m);
}

/// F-norm of each rank-1 summand, |delta_p| * prod_i ||column||_2.
inline std::vector<double> component_f_norms(const KruskalModel& model) {
    std::vector<double> out(model.rank());
    for (std::size_t p = 0; p < model.rank(); ++p) {
        double v = std::abs(model.delta[p]);
        for (const auto& f : model.factors) v *= f.col(static_cast<Eigen::Index>(p)).norm();
        out[p] = v;
    }
    return out;
}

namespace details {

inline KruskalModel keep_components(const KruskalModel& model,
                                    const std::vector<std::size_t>& keep) {
    KruskalModel out;
    out.shape = model.shape;
    out.delta.reserve(keep.size());
    for (std::size_t p : keep) out.delta.push_back(model.delta[p]);
    for (const auto& f : model.factors) {
        Matrix g(f.rows(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t q = 0; q < keep.size(); ++q) {
            g.col(static_cast<Eigen::Index>(q)) = f.col(static_cast<Eigen::Index>(keep[q]));
        }
        out.factors.push_back(std::move(g));
    }
    return out;
}

} // namespace details

/**
 * @brief Simplex normalization of a nonnegative model.
 *
 * Every factor column is divided by its l1-norm and the weight absorbs the
 * product of those norms, so the weights sum to the E-norm of the
 * reconstruction. Components with a zero weight or a zero column contribute
 * nothing and are dropped.
 *
 * @throws std::invalid_argument if the model has a negative entry.
 */
inline KruskalModel normalize(const KruskalModel& model) {
    model.validate();
    if (!model.is_nonnegative()) {
        throw std::invalid_argument("normalize requires a nonnegative model");
    }
    KruskalModel out = model;
    std::vector<std::size_t> keep;
    for (std::size_t p = 0; p < model.rank(); ++p) {
        const auto col = static_cast<Eigen::Index>(p);
        bool zero = model.delta[p] == 0.0;
        double weight = model.delta[p];
        for (auto& f : out.factors) {
            const double s = f.col(col).sum();
            if (s == 0.0) {
                zero = true;
                break;
            }
            f.col(col) /= s;
            weight *= s;
        }
        if (!zero) {
            out.delta[p] = weight;
            keep.push_back(p);
        }
    }
    if (keep.size() == model.rank()) return out;
    return details::keep_components(out, keep);
}

/**
 * @brief Unit l2 columns for signed models; magnitudes go to |lambda_p|.
 *
 * Each column is sign-fixed so its largest-magnitude entry is positive and
 * the sign is moved into lambda_p. Zero components are dropped.
 */
inline KruskalModel normalize_signed(const KruskalModel& model) {
    model.validate();
    KruskalModel out = model;
    std::vector<std::size_t> keep;
    for (std::size_t p = 0; p < model.rank(); ++p) {
        const auto col = static_cast<Eigen::Index>(p);
        bool zero = model.delta[p] == 0.0;
        double weight = model.delta[p];
        for (auto& f : out.factors) {
            const double s = f.col(col).norm();
            if (s == 0.0) {
                zero = true;
                break;
            }
            Eigen::Index arg = 0;
            f.col(col).cwiseAbs().maxCoeff(&arg);
            const double sign = f(arg, col) < 0.0 ? -1.0 : 1.0;
            f.col(col) /= sign * s;
            weight *= sign * s;
        }
        if (!zero) {
            out.delta[p] = weight;
            keep.push_back(p);
        }
    }
    if (keep.size() == model.rank()) return out;
    return details::keep_components(out, keep);
}

/// Reorders components by descending |delta|; ties keep their order.
inline KruskalModel sort_components(const KruskalModel& model) {
    std::vector<std::size_t> order(model.rank());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(model.delta[a]) > std::abs(model.delta[b]);
    });
    return details::keep_components(model, order);
}

struct DeltaENormPair {
    double delta_l1;
    double e_norm;
};

/// Returns (||delta||_1, ||reconstruct(model)||_E); the two agree for any
/// simplex-normalized nonnegative model.
inline DeltaENormPair delta_l1_equals_e_norm_check(const KruskalModel& model) {
    model.validate();
    if (!model.is_l1_normalized()) {
        throw std::invalid_argument(
            "delta/E-norm check requires a normalized nonnegative model");
    }
    double l1 = 0.0;
    for (double d : model.delta) l1 += d;
    return {l1, norm(reconstruct(model), NormKind::E)};
}

inline NaiveBayesModel to_naive_bayes(const KruskalModel& model) {
    model.validate();
    if (!model.is_l1_normalized()) {
        throw std::invalid_argument(
            "naive Bayes conversion requires a normalized nonnegative model");
    }
    double total = 0.0;
    for (double d : model.delta) total += d;
    if (!(total > 0.0)) {
        throw std::invalid_argument("weights sum to zero; no distribution");
    }
    NaiveBayesModel nb;
    nb.prior.reserve(model.rank());
    for (double d : model.delta) nb.prior.push_back(d / total);
    nb.conditionals = model.factors;
    return nb;
}

/**
 * @brief Seeded random model for solver initialization.
 *
 * With @p nonneg, entries are uniform on (0.1, 1), columns are l1-normalized
 * and the weights are equal with sum @p target_e_norm. Otherwise factor
 * entries are standard normal and every weight is 1.
 */
inline KruskalModel random_model(const Shape& shape, std::size_t r,
                                 std::uint64_t seed, bool nonneg,
                                 double target_e_norm = 1.0) {
    details::checked_num_entries(shape);
    if (r == 0) {
        throw std::invalid_argument("random_model needs rank >= 1");
    }
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> uniform(0.1, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    KruskalModel m;
    m.shape = shape;
    for (std::size_t d : shape) {
        Matrix f(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(r));
        for (Eigen::Index i = 0; i < f.rows(); ++i) {
            for (Eigen::Index p = 0; p < f.cols(); ++p) {
                f(i, p) = nonneg ? uniform(gen) : normal(gen);
            }
        }
        m.factors.push_back(std::move(f));
    }
    if (nonneg) {
        for (auto& f : m.factors) {
            for (Eigen::Index p = 0; p < f.cols(); ++p) f.col(p) /= f.col(p).sum();
        }
        m.delta.assign(r, target_e_norm / static_cast<double>(r));
    } else {
        m.delta.assign(r, 1.0);
    }
    return m;
}

} // namespace nntf
