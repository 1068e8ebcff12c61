#pragma once

#include "nntf/dense_tensor.hpp"
#include "nntf/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace nntf {

enum class Verdict { Degenerate, Bounded, Inconclusive };

inline std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::Degenerate: return "DEGENERATE";
    case Verdict::Bounded: return "BOUNDED";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

/// Scale of the target tensor needed to judge a trace.
struct TensorScale {
    double e_norm = 0.0;
    double f_norm = 0.0;
    std::size_t entries = 0;

    static TensorScale of(const DenseTensor& a) {
        return {norm(a, NormKind::E), norm(a, NormKind::F), a.size()};
    }
};

/// Experiment knobs, not statements about the mathematics.
struct DegeneracyThresholds {
    double blowup = 10.0;
    double residual_factor = 2.0;
    /// Relative slack on the coercivity cap.
    double cap_slack = 1e-9;
};

struct EvidenceRow {
    std::size_t iter;
    double residual;
    double max_component_F;
    double delta_l1;
};

struct DegeneracyReport {
    Verdict verdict = Verdict::Inconclusive;
    std::vector<EvidenceRow> evidence;
    double blowup_ratio = 0.0;
    double residual_trend = 0.0;
    /// Rows where delta_l1 > ||A||_E + sqrt(N) * residual_F.
    std::size_t cap_violations = 0;
};

/// ||A||_E + sqrt(N) * ||A - X||_F: bound on ||delta||_1 for every
/// nonnegative iterate X (triangle inequality plus E <= sqrt(N) F).
inline double coercivity_cap(const TensorScale& scale, double residual_f) {
    return scale.e_norm + std::sqrt(static_cast<double>(scale.entries)) * residual_f;
}

/**
 * @brief Classifies a fit trace.
 *
 * DEGENERATE: the final largest summand exceeds blowup * ||A||_F while the
 * F-residual fell by at least residual_factor from its initial value.
 * BOUNDED: every row kept ||delta||_1 under the coercivity cap (which also
 * bounds every summand). Anything else is INCONCLUSIVE: a finite budget
 * cannot certify that no minimizer exists.
 */
inline DegeneracyReport detect_degeneracy(const FitTrace& trace, const TensorScale& scale,
                                          const DegeneracyThresholds& th = {}) {
    if (trace.rows.empty()) throw std::invalid_argument("trace is empty");
    DegeneracyReport rep;
    rep.evidence.reserve(trace.rows.size());
    for (const auto& row : trace.rows) {
        rep.evidence.push_back({row.iter, row.residual_F, row.max_component_F, row.delta_l1});
        const double cap = coercivity_cap(scale, row.residual_F);
        if (row.delta_l1 > cap + th.cap_slack * std::max(1.0, cap)) ++rep.cap_violations;
    }
    const TraceRow& first = trace.rows.front();
    const TraceRow& last = trace.rows.back();
    rep.blowup_ratio = scale.f_norm > 0.0
                           ? last.max_component_F / scale.f_norm
                           : (last.max_component_F > 0.0
                                  ? std::numeric_limits<double>::infinity()
                                  : 0.0);
    rep.residual_trend = first.residual_F > 0.0 ? last.residual_F / first.residual_F : 1.0;

    const bool blew_up = rep.blowup_ratio > th.blowup;
    const bool fit_improved =
        last.residual_F * th.residual_factor <= first.residual_F && rep.residual_trend < 1.0;
    if (blew_up && fit_improved) {
        rep.verdict = Verdict::Degenerate;
    } else if (rep.cap_violations == 0) {
        rep.verdict = Verdict::Bounded;
    } else {
        rep.verdict = Verdict::Inconclusive;
    }
    return rep;
}

enum class Family { Nonneg, Unconstrained };

inline std::string_view to_string(Family f) {
    return f == Family::Nonneg ? "nonneg" : "unconstrained";
}

struct ContrastOptions {
    std::size_t max_iters = 2000;
    double tol = 0.0;
    /// Iterations between trace rows; the coercivity check sees only traced rows.
    std::size_t trace_every = 1;
    DegeneracyThresholds thresholds{};
    /// 0 picks std::thread::hardware_concurrency().
    std::size_t threads = 1;
};

struct ContrastRow {
    std::uint64_t seed = 0;
    Family family = Family::Nonneg;
    Verdict verdict = Verdict::Inconclusive;
    double final_residual_E = 0.0;
    double final_residual_F = 0.0;
    double blowup_ratio = 0.0;
    std::size_t iters = 0;
    /// Non-empty when the solver threw; the row is kept so counts stay whole.
    std::string error;
    DegeneracyReport report;
};

struct FamilyAggregate {
    double min_residual_E = 0.0;
    double median_residual_E = 0.0;
    double max_residual_E = 0.0;
    std::size_t degenerate = 0;
    std::size_t bounded = 0;
    std::size_t inconclusive = 0;
    std::size_t errors = 0;
};

struct ContrastSummary {
    /// Ordered by seed, nonneg row before unconstrained row.
    std::vector<ContrastRow> rows;
    FamilyAggregate nonneg;
    FamilyAggregate unconstrained;
};

namespace details {

inline ContrastRow contrast_run(const DenseTensor& a, std::size_t rank, std::uint64_t seed,
                                Family family, const ContrastOptions& opt,
                                const TensorScale& scale) {
    ContrastRow row;
    row.seed = seed;
    row.family = family;
    try {
        FitConfig cfg;
        cfg.rank = rank;
        cfg.loss = Loss::Frobenius;
        cfg.nonneg = family == Family::Nonneg;
        cfg.max_iters = opt.max_iters;
        cfg.tol = opt.tol;
        cfg.seed = seed;
        cfg.trace_every = opt.trace_every;
        const FitResult res = fit(a, cfg);
        row.report = detect_degeneracy(res.trace, scale, opt.thresholds);
        row.verdict = row.report.verdict;
        row.final_residual_E = res.trace.rows.back().residual_E;
        row.final_residual_F = res.trace.rows.back().residual_F;
        row.blowup_ratio = row.report.blowup_ratio;
        row.iters = res.iterations;
    } catch (const std::exception& ex) {
        row.error = ex.what();
        row.verdict = Verdict::Inconclusive;
    }
    return row;
}

inline FamilyAggregate aggregate(const std::vector<ContrastRow>& rows, Family family) {
    FamilyAggregate agg;
    std::vector<double> res;
    for (const auto& r : rows) {
        if (r.family != family) continue;
        if (!r.error.empty()) {
            ++agg.errors;
            continue;
        }
        res.push_back(r.final_residual_E);
        switch (r.verdict) {
        case Verdict::Degenerate: ++agg.degenerate; break;
        case Verdict::Bounded: ++agg.bounded; break;
        case Verdict::Inconclusive: ++agg.inconclusive; break;
        }
    }
    if (!res.empty()) {
        std::sort(res.begin(), res.end());
        agg.min_residual_E = res.front();
        agg.max_residual_E = res.back();
        const std::size_t m = res.size() / 2;
        agg.median_residual_E = res.size() % 2 ? res[m] : 0.5 * (res[m - 1] + res[m]);
    }
    return agg;
}

} // namespace details

/**
 * @brief Runs the nonnegative and the unconstrained solver on A for every
 * seed with the same budget and classifies each trace.
 *
 * Runs are independent and may be spread over worker threads; results are
 * stored by (seed position, family) so the summary does not depend on the
 * thread count. A solver error is recorded in its row instead of aborting.
 */
inline ContrastSummary run_contrast_experiment(const DenseTensor& a, std::size_t rank,
                                               const std::vector<std::uint64_t>& seeds,
                                               const ContrastOptions& opt = {}) {
    if (!a.is_nonnegative()) {
        throw std::invalid_argument("contrast experiment needs a nonnegative tensor");
    }
    const TensorScale scale = TensorScale::of(a);
    const std::size_t jobs = seeds.size() * 2;
    std::vector<ContrastRow> rows(jobs);
    auto run_job = [&](std::size_t j) {
        const Family fam = j % 2 == 0 ? Family::Nonneg : Family::Unconstrained;
        rows[j] = details::contrast_run(a, rank, seeds[j / 2], fam, opt, scale);
    };

    std::size_t threads = opt.threads == 0 ? std::thread::hardware_concurrency() : opt.threads;
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(jobs, 1));
    if (threads == 1) {
        for (std::size_t j = 0; j < jobs; ++j) run_job(j);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t j = t; j < jobs; j += threads) run_job(j);
            });
        }
        for (auto& th : pool) th.join();
    }

    ContrastSummary summary;
    summary.nonneg = details::aggregate(rows, Family::Nonneg);
    summary.unconstrained = details::aggregate(rows, Family::Unconstrained);
    summary.rows = std::move(rows);
    return summary;
}

} // namespace nntf
