#pragma once

#include "nntf/dense_tensor.hpp"
#include "nntf/divergence.hpp"
#include "nntf/kruskal_model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nntf {

enum class Loss { Frobenius, KL };

inline Loss parse_loss(std::string_view s) {
    if (s == "frob" || s == "frobenius") return Loss::Frobenius;
    if (s == "kl") return Loss::KL;
    throw std::invalid_argument("unknown loss '" + std::string(s) + "'");
}

/**
 * @brief Solver hyperparameters.
 *
 * tol is the relative objective decrease over a 5-iteration window below
 * which a fit is declared converged; tol = 0 disables early stopping so that
 * a run always uses its full iteration budget.
 */
struct FitConfig {
    std::size_t rank = 1;
    Loss loss = Loss::Frobenius;
    bool nonneg = true;
    std::size_t max_iters = 1000;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    double reg_rho = 0.0;
    std::size_t trace_every = 1;

    void validate() const {
        if (rank == 0) throw std::invalid_argument("rank must be >= 1");
        if (max_iters == 0) throw std::invalid_argument("max_iters must be >= 1");
        if (!(tol >= 0.0)) throw std::invalid_argument("tol must be >= 0");
        if (!(reg_rho >= 0.0)) throw std::invalid_argument("reg_rho must be >= 0");
        if (reg_rho > 0.0 && loss != Loss::Frobenius) {
            throw std::invalid_argument("regularization needs the Frobenius loss");
        }
        if (trace_every == 0) throw std::invalid_argument("trace_every must be >= 1");
    }
};

struct TraceRow {
    std::size_t iter = 0;
    double objective = 0.0;
    /// ||delta||_1 after simplex normalization, or sum |lambda_p| for signed fits.
    double delta_l1 = 0.0;
    /// Largest F-norm among the rank-1 summands.
    double max_component_F = 0.0;
    double residual_E = 0.0;
    /// Not part of the CSV trace; kept for the coercivity check.
    double residual_F = 0.0;
};

struct FitTrace {
    std::vector<TraceRow> rows;
    /// Number of ALS normal-equation solves that needed the ridge jitter.
    std::size_t ridge_jitter_events = 0;
};

struct FitResult {
    KruskalModel model;
    FitTrace trace;
    bool converged = false;
    double final_objective = 0.0;
    std::size_t iterations = 0;
};

/// Denominator floor for multiplicative updates.
inline constexpr double kMuDenominatorFloor = 1e-12;
/// Ridge added to a singular ALS Gram matrix.
inline constexpr double kAlsRidgeJitter = 1e-12;

/**
 * @brief Fit objective of a model.
 *
 * Frobenius: ||A - X||_F^2 + rho * sum_p sum_i ||factors[i].col(p)||_2^2.
 * The penalty is taken on the factor columns as stored (delta is not folded
 * in), which is how the solvers hold their iterates.
 * KL: D_KL(A, max(X, 1e-300)).
 */
inline double objective(const DenseTensor& a, const KruskalModel& model, Loss loss,
                        double reg_rho = 0.0) {
    const DenseTensor x = reconstruct(model);
    require_same_shape(a, x);
    if (loss == Loss::KL) {
        if (!x.is_nonnegative()) {
            throw std::invalid_argument("KL objective needs a nonnegative model");
        }
        if (!a.is_nonnegative()) {
            throw std::invalid_argument("KL objective needs a nonnegative target");
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            acc += details::kl_term(a[i], details::kl_model_value(a[i], x[i]));
        }
        return acc;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - x[i];
        acc += d * d;
    }
    if (reg_rho > 0.0) {
        double pen = 0.0;
        for (std::size_t p = 0; p < model.rank(); ++p) {
            for (const auto& f : model.factors) {
                pen += f.col(static_cast<Eigen::Index>(p)).squaredNorm();
            }
        }
        acc += reg_rho * pen;
    }
    return acc;
}

namespace details {

/// Index table and per-mode kernels shared by the solvers.
class CpWorkspace {
  public:
    explicit CpWorkspace(const DenseTensor& a) : a_(a), k_(a.order()) {
        index_.resize(a.size() * k_);
        for_each_index(a.shape(), [&](std::size_t flat, const IndexTuple& idx) {
            std::copy(idx.begin(), idx.end(), index_.begin() + flat * k_);
        });
    }

    const DenseTensor& target() const { return a_; }
    std::size_t order() const { return k_; }

    /// X = sum_p lambda_p prod_i F_i(j_i, p).
    std::vector<double> model_values(const std::vector<Matrix>& f,
                                     const std::vector<double>& lambda) const {
        const auto r = static_cast<Eigen::Index>(lambda.size());
        std::vector<double> x(a_.size());
        for (std::size_t e = 0; e < a_.size(); ++e) {
            const std::size_t* idx = &index_[e * k_];
            double acc = 0.0;
            for (Eigen::Index p = 0; p < r; ++p) {
                double term = lambda[static_cast<std::size_t>(p)];
                for (std::size_t m = 0; m < k_; ++m) {
                    term *= f[m](static_cast<Eigen::Index>(idx[m]), p);
                }
                acc += term;
            }
            x[e] = acc;
        }
        return x;
    }

    /**
     * Matricized-tensor times Khatri-Rao product for mode n with entry
     * weights w: M(i, p) = sum_{j : j_n = i} w_j prod_{m != n} F_m(j_m, p).
     */
    Matrix mttkrp(const std::vector<double>& w, const std::vector<Matrix>& f,
                  std::size_t n) const {
        const Eigen::Index r = f[n].cols();
        Matrix out = Matrix::Zero(f[n].rows(), r);
        for (std::size_t e = 0; e < a_.size(); ++e) {
            if (w[e] == 0.0) continue;
            const std::size_t* idx = &index_[e * k_];
            const auto row = static_cast<Eigen::Index>(idx[n]);
            for (Eigen::Index p = 0; p < r; ++p) {
                double term = w[e];
                for (std::size_t m = 0; m < k_; ++m) {
                    if (m != n) term *= f[m](static_cast<Eigen::Index>(idx[m]), p);
                }
                out(row, p) += term;
            }
        }
        return out;
    }

    /// Hadamard product of the Gram matrices of every mode except n.
    static Matrix gram_except(const std::vector<Matrix>& f, std::size_t n) {
        const Eigen::Index r = f[n].cols();
        Matrix h = Matrix::Ones(r, r);
        for (std::size_t m = 0; m < f.size(); ++m) {
            if (m != n) h = h.cwiseProduct(f[m].transpose() * f[m]);
        }
        return h;
    }

  private:
    const DenseTensor& a_;
    std::size_t k_;
    std::vector<std::size_t> index_;
};

inline double frobenius_residual_sq(const DenseTensor& a, const std::vector<double>& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = a[i] - x[i];
        acc += d * d;
    }
    return acc;
}

inline double kl_floored(const DenseTensor& a, const std::vector<double>& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += kl_term(a[i], kl_model_value(a[i], x[i]));
    }
    return acc;
}

inline TraceRow make_row(std::size_t iter, double obj, const DenseTensor& a,
                         const std::vector<double>& x, double delta_l1,
                         double max_component_f) {
    TraceRow row;
    row.iter = iter;
    row.objective = obj;
    row.delta_l1 = delta_l1;
    row.max_component_F = max_component_f;
    double e = 0.0;
    double f2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = a[i] - x[i];
        e += std::abs(d);
        f2 += d * d;
    }
    row.residual_E = e;
    row.residual_F = std::sqrt(f2);
    return row;
}

/// Relative decrease over the last 5 iterations fell below tol.
inline bool window_converged(const std::vector<double>& history, double tol) {
    if (history.back() == 0.0) return true;
    if (tol <= 0.0 || history.size() < 6) return false;
    const double old = history[history.size() - 6];
    const double now = history.back();
    return (old - now) <= tol * std::abs(old);
}

/// Drives an iteration loop: records objectives, trace rows and stopping.
template <typename Step, typename Objective, typename Row>
FitResult run_loop(const FitConfig& cfg, Step&& step, Objective&& obj_fn, Row&& row_fn) {
    FitResult result;
    std::vector<double> history;
    double obj = obj_fn();
    history.push_back(obj);
    result.trace.rows.push_back(row_fn(0, obj));
    std::size_t it = 0;
    while (it < cfg.max_iters) {
        step();
        ++it;
        obj = obj_fn();
        history.push_back(obj);
        const bool stop = window_converged(history, cfg.tol);
        if (stop || it % cfg.trace_every == 0 || it == cfg.max_iters) {
            result.trace.rows.push_back(row_fn(it, obj));
        }
        if (stop) {
            result.converged = true;
            break;
        }
    }
    result.iterations = it;
    result.final_objective = result.trace.rows.back().objective;
    return result;
}

} // namespace details

/**
 * @brief Nonnegative CP fit by multiplicative updates.
 *
 * The iterate stores each component with its weight spread over the factor
 * columns, X = sum_p prod_i F_i(:, p), and updates one mode at a time.
 * Writing K for the Khatri-Rao product of the other modes, M = A_(n) K and
 * H = hadamard_{m != n} F_m^T F_m:
 *
 * - Frobenius (+ rho): the gradient 2(F_n H + rho F_n) - 2M splits into a
 *   positive part F_n H + rho F_n and a negative part M, giving
 *   F_n <- F_n * M / (F_n H + rho F_n).
 * - KL: the gradient is sum_j K(j, p) - sum_j (a/x)_j K(j, p), where the
 *   first sum is prod_{m != n} colsum(F_m)_p, giving
 *   F_n <- F_n * [(A/X)_(n) K] / colsums.
 *
 * Both are majorize-minimize steps, so the objective does not increase.
 * Denominators are floored at 1e-12. Initialization draws entries from
 * (0.1, 1) so no entry starts at zero. The output model is simplex
 * normalized with components sorted by descending weight.
 *
 * @throws std::invalid_argument if A has a negative entry or cfg is invalid.
 */
inline FitResult fit_nncp(const DenseTensor& a, const FitConfig& cfg) {
    cfg.validate();
    if (!cfg.nonneg) throw std::invalid_argument("fit_nncp needs cfg.nonneg = true");
    if (!a.is_nonnegative()) {
        throw std::invalid_argument("fit_nncp needs a nonnegative tensor");
    }
    const details::CpWorkspace ws(a);
    const std::size_t k = a.order();
    const std::size_t r = cfg.rank;

    KruskalModel init = random_model(a.shape(), r, cfg.seed, true, norm(a, NormKind::E));
    std::vector<Matrix> f = init.factors;
    for (std::size_t p = 0; p < r; ++p) {
        const double s = std::pow(init.delta[p], 1.0 / static_cast<double>(k));
        for (auto& m : f) m.col(static_cast<Eigen::Index>(p)) *= s;
    }
    const std::vector<double> ones(r, 1.0);
    const std::vector<double> target(a.data().begin(), a.data().end());
    std::vector<double> x = ws.model_values(f, ones);

    auto step = [&] {
        for (std::size_t n = 0; n < k; ++n) {
            Matrix numer;
            Matrix denom;
            if (cfg.loss == Loss::Frobenius) {
                numer = ws.mttkrp(target, f, n);
                denom = f[n] * details::CpWorkspace::gram_except(f, n);
                if (cfg.reg_rho > 0.0) denom += cfg.reg_rho * f[n];
            } else {
                std::vector<double> w(a.size());
                for (std::size_t i = 0; i < a.size(); ++i) {
                    w[i] = a[i] == 0.0 ? 0.0 : a[i] / std::max(x[i], kKlFloor);
                }
                numer = ws.mttkrp(w, f, n);
                Eigen::RowVectorXd colsum = Eigen::RowVectorXd::Ones(static_cast<Eigen::Index>(r));
                for (std::size_t m = 0; m < k; ++m) {
                    if (m != n) colsum = colsum.cwiseProduct(f[m].colwise().sum());
                }
                denom = colsum.replicate(f[n].rows(), 1);
            }
            f[n] = f[n].cwiseProduct(numer).cwiseQuotient(
                denom.cwiseMax(kMuDenominatorFloor));
            if (cfg.loss == Loss::KL) x = ws.model_values(f, ones);
        }
        if (cfg.loss == Loss::Frobenius) x = ws.model_values(f, ones);
    };

    auto obj_fn = [&] {
        if (cfg.loss == Loss::KL) return details::kl_floored(a, x);
        double obj = details::frobenius_residual_sq(a, x);
        if (cfg.reg_rho > 0.0) {
            double pen = 0.0;
            for (const auto& m : f) pen += m.squaredNorm();
            obj += cfg.reg_rho * pen;
        }
        return obj;
    };

    auto row_fn = [&](std::size_t iter, double obj) {
        double delta_l1 = 0.0;
        double max_f = 0.0;
        for (std::size_t p = 0; p < r; ++p) {
            const auto col = static_cast<Eigen::Index>(p);
            double w1 = 1.0;
            double w2 = 1.0;
            for (const auto& m : f) {
                w1 *= m.col(col).sum();
                w2 *= m.col(col).norm();
            }
            delta_l1 += w1;
            max_f = std::max(max_f, w2);
        }
        return details::make_row(iter, obj, a, x, delta_l1, max_f);
    };

    FitResult result = details::run_loop(cfg, step, obj_fn, row_fn);
    KruskalModel internal;
    internal.shape = a.shape();
    internal.delta = ones;
    internal.factors = std::move(f);
    result.model = sort_components(normalize(internal));
    return result;
}

/**
 * @brief Unconstrained CP fit by alternating least squares.
 *
 * Columns are kept at unit l2-norm with magnitudes in lambda. Each mode
 * update solves its least-squares subproblem exactly through the normal
 * equations F_n H = M; a Gram matrix that fails Cholesky is retried with a
 * 1e-12 ridge and the event is counted in the trace.
 */
inline FitResult fit_cp_unconstrained(const DenseTensor& a, const FitConfig& cfg) {
    cfg.validate();
    if (cfg.nonneg) {
        throw std::invalid_argument("fit_cp_unconstrained needs cfg.nonneg = false");
    }
    if (cfg.loss != Loss::Frobenius) {
        throw std::invalid_argument("unconstrained fits support the Frobenius loss only");
    }
    if (cfg.reg_rho > 0.0) {
        throw std::invalid_argument("regularization is only available for nonnegative fits");
    }
    const details::CpWorkspace ws(a);
    const std::size_t k = a.order();
    const std::size_t r = cfg.rank;
    const std::vector<double> target(a.data().begin(), a.data().end());

    KruskalModel init = random_model(a.shape(), r, cfg.seed, false);
    std::vector<Matrix> f = init.factors;
    std::vector<double> lambda = init.delta;

    auto absorb_norms = [&](std::size_t n) {
        for (std::size_t p = 0; p < r; ++p) {
            const auto col = static_cast<Eigen::Index>(p);
            const double s = f[n].col(col).norm();
            if (s > 0.0) {
                f[n].col(col) /= s;
            }
            if (n == 0) {
                lambda[p] = s;
            } else {
                lambda[p] *= s;
            }
        }
    };
    for (std::size_t n = 0; n < k; ++n) absorb_norms(n);

    std::vector<double> x = ws.model_values(f, lambda);
    std::size_t jitter_events = 0;

    auto step = [&] {
        for (std::size_t n = 0; n < k; ++n) {
            Matrix h = details::CpWorkspace::gram_except(f, n);
            const Matrix m = ws.mttkrp(target, f, n);
            Eigen::LLT<Matrix> llt(h);
            if (llt.info() != Eigen::Success) {
                ++jitter_events;
                h.diagonal().array() += kAlsRidgeJitter;
                llt.compute(h);
            }
            if (llt.info() == Eigen::Success) {
                f[n] = llt.solve(m.transpose()).transpose();
            } else {
                f[n] = h.completeOrthogonalDecomposition().solve(m.transpose()).transpose();
            }
            for (std::size_t p = 0; p < r; ++p) {
                const auto col = static_cast<Eigen::Index>(p);
                const double s = f[n].col(col).norm();
                lambda[p] = s;
                if (s > 0.0) f[n].col(col) /= s;
            }
        }
        x = ws.model_values(f, lambda);
    };

    auto obj_fn = [&] { return details::frobenius_residual_sq(a, x); };

    auto row_fn = [&](std::size_t iter, double obj) {
        double l1 = 0.0;
        double mx = 0.0;
        for (std::size_t p = 0; p < r; ++p) {
            // Columns are unit-norm (or zero with lambda 0), so |lambda_p| is
            // the F-norm of the p-th summand.
            double w = std::abs(lambda[p]);
            for (const auto& m : f) {
                w *= m.col(static_cast<Eigen::Index>(p)).norm();
            }
            l1 += w;
            mx = std::max(mx, w);
        }
        return details::make_row(iter, obj, a, x, l1, mx);
    };

    FitResult result = details::run_loop(cfg, step, obj_fn, row_fn);
    result.trace.ridge_jitter_events = jitter_events;
    KruskalModel internal;
    internal.shape = a.shape();
    internal.delta = lambda;
    internal.factors = std::move(f);
    result.model = sort_components(normalize_signed(internal));
    return result;
}

/// Dispatches on cfg.nonneg.
inline FitResult fit(const DenseTensor& a, const FitConfig& cfg) {
    return cfg.nonneg ? fit_nncp(a, cfg) : fit_cp_unconstrained(a, cfg);
}

} // namespace nntf
