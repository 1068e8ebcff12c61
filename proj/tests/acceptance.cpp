// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "nntf/nntf.hpp"
#include "nntf/io.hpp"
#include "oracles.hpp"
#include "trace_checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

using nntf::DenseTensor;
using nntf::NormKind;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Every fit run by this harness, with the target and the loss, for the
// suite-wide coercivity and monotonicity criteria.
struct FitRecord {
    std::string label;
    DenseTensor target;
    bool nonneg;
    nntf::FitTrace trace;
};
std::vector<FitRecord> g_fits;

nntf::FitResult tracked_fit(const std::string& label, const DenseTensor& a,
                            const nntf::FitConfig& cfg) {
    auto res = nntf::fit(a, cfg);
    g_fits.push_back({label, a, cfg.nonneg, res.trace});
    return res;
}

std::vector<std::uint64_t> seed_range(std::size_t k) {
    std::vector<std::uint64_t> s(k);
    std::iota(s.begin(), s.end(), 0);
    return s;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---- 1 ----
Outcome norm_multiplicativity() {
    oracle::Gen g(1001);
    std::size_t bad = 0;
    for (int t = 0; t < 500; ++t) {
        const std::size_t k = g.integer(3, 4);
        std::vector<std::vector<double>> vs;
        double e = 1, f = 1, gg = 1;
        for (std::size_t i = 0; i < k; ++i) {
            vs.push_back(g.vec(g.integer(1, 6), -2, 2));
            e *= oracle::l1(vs.back());
            f *= oracle::l2(vs.back());
            gg *= oracle::linf(vs.back());
        }
        const auto x = nntf::outer_product(vs);
        auto rel = [](double got, double want) {
            return want == 0 ? std::abs(got) : std::abs(got - want) / want;
        };
        if (rel(nntf::norm(x, NormKind::E), e) > 1e-12) ++bad;
        if (rel(nntf::norm(x, NormKind::F), f) > 1e-12) ++bad;
        if (rel(nntf::norm(x, NormKind::G), gg) > 1e-12) ++bad;
    }
    return {bad == 0, std::to_string(bad) + " violations / 1500 identities"};
}

// ---- 2 ----
Outcome holder_cauchy_schwarz() {
    oracle::Gen g(1002);
    std::size_t bad = 0;
    for (int t = 0; t < 500; ++t) {
        const auto shape = g.shape(g.integer(1, 4), 5);
        const auto a = g.tensor(shape, -3, 3);
        const auto b = g.tensor(shape, -3, 3);
        const double ip = std::abs(nntf::inner(a, b));
        if (ip > nntf::norm(a, NormKind::F) * nntf::norm(b, NormKind::F)) ++bad;
        if (ip > nntf::norm(a, NormKind::E) * nntf::norm(b, NormKind::G)) ++bad;
    }
    return {bad == 0, std::to_string(bad) + " violations / 1000 inequalities"};
}

// ---- 3 ----
Outcome normalization() {
    oracle::Gen g(1003);
    std::size_t bad = 0;
    double worst = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t k = g.integer(3, 4);
        const auto m = g.nonneg_model(g.shape(k, 5), g.integer(1, 5));
        const auto before = oracle::reconstruct(m);
        const auto n = nntf::normalize(m);
        const auto after = oracle::reconstruct(n);
        const double scale = std::max(1.0, oracle::linf(before));
        double diff = 0;
        for (std::size_t i = 0; i < before.size(); ++i)
            diff = std::max(diff, std::abs(before[i] - after[i]));
        if (diff > 1e-12 * scale) ++bad;
        const double dl1 = std::accumulate(n.delta.begin(), n.delta.end(), 0.0);
        const double gap = std::abs(dl1 - oracle::l1(after));
        worst = std::max(worst, gap);
        if (gap > 1e-10) ++bad;
    }
    return {bad == 0, std::to_string(bad) + " failures, max |‖δ‖₁ − ‖X‖_E| = " + fmt("%.2e", worst)};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---- 4 ----
Outcome bclr_consistency() {
    double worst = 0;
    for (double e : {1.0, 0.5, 0.1, 1e-2, 1e-3}) {
        const auto r = nntf::bclr_a_eps({e, 4, {}});
        const auto x = oracle::reconstruct(r.components);
        for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - r.tensor[i]));
    }
    const auto limit = nntf::bclr_limit();
    std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4}, gap, blow;
    for (double e : eps) {
        const auto r = nntf::bclr_a_eps({e, 4, {}});
        gap.push_back(nntf::distance(r.tensor, limit, nntf::DivergenceKind::GNorm));
        double mx = 0;
        for (double v : nntf::component_f_norms(r.components)) mx = std::max(mx, v);
        blow.push_back(mx);
    }
    const double sg = loglog_slope(eps, gap), sb = loglog_slope(eps, blow);
    const bool ok = worst <= 1e-12 && sg >= 0.8 && sg <= 1.2 && sb >= -1.2 && sb <= -0.8;
    return {ok, "max route gap " + fmt("%.2e", worst) + ", G-gap slope " + fmt("%.3f", sg) +
                    ", summand slope " + fmt("%.3f", sb)};
}

// ---- 5 ----
Outcome rank5_witness() {
    double worst = 0;
    bool five = true;
    for (double e : {1.0, 0.1, 0.01}) {
        const auto r = nntf::bclr_a_eps({e, 4, {}});
        five = five && r.components.rank() == 5;
        worst = std::max(worst, nntf::distance(nntf::reconstruct(r.components), r.tensor,
                                               nntf::DivergenceKind::GNorm));
    }
    return {five && worst <= 1e-12, "max entry gap " + fmt("%.2e", worst)};
}

// ---- 6 ----
Outcome w_identity() {
    const std::vector<std::size_t> ns{1, 2, 10, 100};
    const auto seq = nntf::w_sequence(ns);
    double worst_id = 0, worst_e = 0;
    for (std::size_t t = 0; t < ns.size(); ++t) {
        const double n = static_cast<double>(ns[t]);
        for (std::size_t i = 0; i < 8; ++i)
            worst_id = std::max(worst_id, std::abs(seq.a_n[t][i] -
                                                   (seq.a[i] + seq.b[i] / n + seq.c[i] / (n * n))));
        worst_e = std::max(worst_e, std::abs(nntf::distance(seq.a_n[t], seq.a,
                                                            nntf::DivergenceKind::ENorm) -
                                             (3 / n + 1 / (n * n))));
    }
    return {worst_id <= 1e-15 && worst_e <= 1e-15,
            "identity gap " + fmt("%.1e", worst_id) + ", E-distance gap " + fmt("%.1e", worst_e)};
}

// ---- 8 ----
std::string c8_csv;
Outcome bclr_contrast() {
    const auto a = nntf::bclr_limit();
    const auto s = nntf::run_contrast_experiment(a, 5, seed_range(20));
    c8_csv = nntf::io::summary_to_csv(s);
    bool nonneg_ok = s.nonneg.bounded == 20;
    for (const auto& r : s.rows) {
        if (r.family == nntf::Family::Nonneg && !(r.final_residual_E > 1e-3)) nonneg_ok = false;
    }
    std::size_t degenerate = 0;
    for (const auto& r : s.rows) {
        if (r.family != nntf::Family::Unconstrained) continue;
        if (r.verdict == nntf::Verdict::Degenerate && r.blowup_ratio > 10 &&
            r.report.residual_trend <= 0.5)
            ++degenerate;
    }
    return {nonneg_ok && degenerate >= 15,
            "nonneg BOUNDED " + std::to_string(s.nonneg.bounded) + "/20 (min residual_E " +
                fmt("%.3g", s.nonneg.min_residual_E) + "), unconstrained DEGENERATE " +
                std::to_string(degenerate) + "/20"};
}

// ---- 9 ----
Outcome kl_counterexample() {
    double prev = std::numeric_limits<double>::infinity();
    bool ok = true;
    std::string vals;
    for (std::size_t n : {1u, 10u, 100u, 1000u}) {
        const auto ex = nntf::kl_counterexample(n);
        const double d = nntf::distance(ex.a, ex.x_n, nntf::DivergenceKind::KL);
        if (!(d < prev)) ok = false;
        if (n >= 10 && !(d < 4.0 / static_cast<double>(n))) ok = false;
        prev = d;
        vals += (vals.empty() ? "" : ", ") + fmt("%.4g", d);
    }
    return {ok, "D_KL = " + vals};
}

// ---- 11 ----
std::string c11_csv;
Outcome recovery() {
    std::size_t rank1 = 0, kl = 0;
    std::string csv;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto a = nntf::reconstruct(nntf::random_model({3, 4, 5}, 1, 100 + s, true, 2.5));
        nntf::FitConfig c;
        c.rank = 1;
        c.tol = 1e-12;
        c.max_iters = 5000;
        c.seed = s;
        const auto res = tracked_fit("rank1 seed " + std::to_string(s), a, c);
        if (res.trace.rows.back().residual_E <= 1e-6 * nntf::norm(a, NormKind::E)) ++rank1;
        csv += nntf::io::trace_to_csv(res.trace);
    }
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto joint =
            nntf::to_naive_bayes(nntf::random_model({3, 4, 5}, 2, 200 + s, true, 1.0)).joint();
        nntf::FitConfig c;
        c.rank = 2;
        c.loss = nntf::Loss::KL;
        c.tol = 0;
        c.max_iters = 20000;
        c.seed = s;
        c.trace_every = 10;
        const auto res = tracked_fit("naive bayes kl seed " + std::to_string(s), joint, c);
        const double d =
            nntf::distance(joint, nntf::reconstruct(res.model), nntf::DivergenceKind::KL);
        if (d <= 1e-8) ++kl;
        csv += nntf::io::trace_to_csv(res.trace);
    }
    c11_csv = csv;
    return {rank1 >= 9 && kl >= 9, "rank-1 " + std::to_string(rank1) + "/10, naive Bayes KL " +
                                       std::to_string(kl) + "/10"};
}

// Extra fits so criteria 7 and 10 see both losses on generic data and the
// regularized path.
void extra_fits() {
    // The contrast runs of criterion 8, through the tracked path.
    const auto limit = nntf::bclr_limit();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        nntf::FitConfig c;
        c.rank = 5;
        c.max_iters = 2000;
        c.tol = 0;
        c.seed = seed;
        tracked_fit("bclr nonneg seed " + std::to_string(seed), limit, c);
        c.nonneg = false;
        tracked_fit("bclr als seed " + std::to_string(seed), limit, c);
    }
    oracle::Gen g(1010);
    for (int t = 0; t < 6; ++t) {
        const auto a = g.tensor(g.shape(3, 4), 0, 1);
        nntf::FitConfig c;
        c.rank = g.integer(1, 4);
        c.seed = static_cast<std::uint64_t>(t);
        c.max_iters = 500;
        c.loss = t % 2 ? nntf::Loss::KL : nntf::Loss::Frobenius;
        if (t == 4) c.reg_rho = 0.05;
        tracked_fit("random nonneg " + std::to_string(t), a, c);
        if (c.loss == nntf::Loss::Frobenius && c.reg_rho == 0) {
            c.nonneg = false;
            tracked_fit("random als " + std::to_string(t), a, c);
        }
    }
}

// ---- 7 ----
Outcome coercivity() {
    std::size_t rows = 0, bad = 0, fits = 0;
    for (const auto& f : g_fits) {
        if (!f.nonneg) continue;
        ++fits;
        rows += f.trace.rows.size();
        bad += checks::inspect(f.trace, f.target, true).coercivity_f;
    }
    return {bad == 0 && fits > 0, std::to_string(bad) + " violations over " +
                                      std::to_string(rows) + " rows of " + std::to_string(fits) +
                                      " nonnegative fits"};
}

// ---- 10 ----
Outcome monotonicity() {
    std::size_t bad = 0, rows = 0;
    std::string first;
    for (const auto& f : g_fits) {
        const auto issues = checks::inspect(f.trace, f.target, false, 1e-10);
        rows += f.trace.rows.size();
        if (issues.non_monotone + issues.non_finite > 0) {
            bad += issues.non_monotone + issues.non_finite;
            if (first.empty()) first = " (first: " + f.label + ")";
        }
    }
    return {bad == 0, std::to_string(bad) + " increases over " + std::to_string(rows) +
                          " rows of " + std::to_string(g_fits.size()) + " fits" + first};
}

// ---- 12 ----
Outcome determinism() {
    const std::string c8 = c8_csv, c11 = c11_csv;
    const auto saved = g_fits;
    bclr_contrast();
    recovery();
    g_fits = saved;
    const bool same8 = c8 == c8_csv && !c8.empty();
    const bool same11 = c11 == c11_csv && !c11.empty();
    return {same8 && same11, std::string("contrast summary ") + (same8 ? "identical" : "DIFFERS") +
                                 ", recovery traces " + (same11 ? "identical" : "DIFFERS") + " (" +
                                 std::to_string(c8.size() + c11.size()) + " bytes)"};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
        double max_seconds; ///< 0: no runtime bound
    };
    // Order matters: 7 and 10 consume the fits recorded by 8, 11 and the
    // extra runs; 12 reruns 8 and 11.
    const std::vector<Criterion> criteria{
        {1, "norm multiplicativity", norm_multiplicativity, 1.0},
        {2, "Holder and Cauchy-Schwarz", holder_cauchy_schwarz, 1.0},
        {3, "simplex normalization", normalization, 5.0},
        {4, "BCLR construction self-consistency", bclr_consistency, 1.0},
        {5, "rank(A_eps) <= 5 witness", rank5_witness, 0},
        {6, "A_n = A + B/n + C/n^2", w_identity, 0},
        {8, "BCLR contrast experiment", bclr_contrast, 120.0},
        {9, "KL boundary example", kl_counterexample, 1.0},
        {11, "generative recovery", recovery, 0},
        {7, "coercivity cap on every nonnegative iterate",
         [] {
             extra_fits();
             return coercivity();
         },
         0},
        {10, "solver monotonicity", monotonicity, 0},
        {12, "determinism", determinism, 0},
    };
    std::vector<std::pair<int, std::string>> lines;
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& ex) {
            o = {false, std::string("exception: ") + ex.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.max_seconds > 0 && secs >= c.max_seconds) {
            o.pass = false;
            o.detail += "; runtime bound " + fmt("%.0f s", c.max_seconds) + " exceeded";
        }
        if (!o.pass) ++failures;
        char head[160];
        std::snprintf(head, sizeof head, "[%s] criterion %2d: %s (%.2f s): ", o.pass ? "PASS" : "FAIL",
                      c.id, c.name, secs);
        lines.emplace_back(c.id, head + o.detail);
    }
    std::sort(lines.begin(), lines.end());
    for (const auto& l : lines) std::puts(l.second.c_str());
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
