#pragma once

#include "nntf/dense_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nntf {

enum class DivergenceKind { ENorm, FNorm, GNorm, KL };

inline std::string_view to_string(DivergenceKind kind) {
    switch (kind) {
    case DivergenceKind::ENorm: return "e";
    case DivergenceKind::FNorm: return "f";
    case DivergenceKind::GNorm: return "g";
    case DivergenceKind::KL: return "kl";
    }
    return "?";
}

inline DivergenceKind parse_divergence_kind(std::string_view s) {
    if (s == "e") return DivergenceKind::ENorm;
    if (s == "f") return DivergenceKind::FNorm;
    if (s == "g") return DivergenceKind::GNorm;
    if (s == "kl") return DivergenceKind::KL;
    throw std::invalid_argument("unknown divergence kind '" + std::string(s) + "'");
}

/// Model entries are clamped to this before log/division inside solvers.
inline constexpr double kKlFloor = 1e-300;

namespace details {

/// Model entry as seen by the KL objective: floored where the data is
/// positive, left alone where the data is zero.
inline double kl_model_value(double a, double x) {
    return a > 0.0 ? std::max(x, kKlFloor) : std::max(x, 0.0);
}

} // namespace details

namespace details {

/// a log(a/b) - a + b with 0 log 0 = 0; +inf when a > 0 and b == 0.
inline double kl_term(double a, double b) {
    if (a == 0.0) return b;
    if (b == 0.0) return std::numeric_limits<double>::infinity();
    return a * std::log(a / b) - a + b;
}

inline void require_kl_domain(const DenseTensor& a, const DenseTensor& b) {
    if (!a.is_nonnegative() || !b.is_nonnegative()) {
        throw std::invalid_argument("KL divergence needs nonnegative arguments");
    }
}

} // namespace details

/**
 * @brief Proximity d(A, B) under one of the three entrywise norms or the
 * generalized Kullback-Leibler divergence
 * sum [a log(a/b) - a + b] with 0 log 0 = 0.
 *
 * KL returns +infinity (not an exception) when some a > 0 meets b = 0, so
 * callers walking toward the boundary of the positive orthant can record the
 * trend.
 */
inline double distance(const DenseTensor& a, const DenseTensor& b,
                       DivergenceKind kind) {
    require_same_shape(a, b);
    switch (kind) {
    case DivergenceKind::ENorm: return norm(add_scaled(a, b, 1.0, -1.0), NormKind::E);
    case DivergenceKind::FNorm: return norm(add_scaled(a, b, 1.0, -1.0), NormKind::F);
    case DivergenceKind::GNorm: return norm(add_scaled(a, b, 1.0, -1.0), NormKind::G);
    case DivergenceKind::KL: {
        details::require_kl_domain(a, b);
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += details::kl_term(a[i], b[i]);
        return acc;
    }
    }
    throw std::logic_error("unknown divergence kind");
}

/// phi_KL(A) = sum a log a, the generator of the KL divergence.
inline double kl_phi(const DenseTensor& a) {
    double acc = 0.0;
    for (double v : a.data()) {
        if (v < 0.0) throw std::invalid_argument("kl_phi needs a nonnegative tensor");
        if (v > 0.0) acc += v * std::log(v);
    }
    return acc;
}

/// Gradient of phi_KL at a strictly positive B: log b + 1.
inline DenseTensor kl_phi_gradient(const DenseTensor& b) {
    std::vector<double> g(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (!(b[i] > 0.0)) {
            throw std::invalid_argument("kl_phi_gradient needs a strictly positive tensor");
        }
        g[i] = std::log(b[i]) + 1.0;
    }
    return DenseTensor(b.shape(), std::move(g));
}

/// D_phi(A, B) = phi(A) - phi(B) - <grad phi(B), A - B>.
inline double bregman_from_phi(const DenseTensor& a, const DenseTensor& b,
                               double phi_a, double phi_b,
                               const DenseTensor& grad_phi_b) {
    require_same_shape(a, b);
    require_same_shape(b, grad_phi_b);
    return phi_a - phi_b - inner(grad_phi_b, add_scaled(a, b, 1.0, -1.0));
}

} // namespace nntf
