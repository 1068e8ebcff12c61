#pragma once

#include "nntf/diagnostics.hpp"
#include "nntf/divergence.hpp"
#include "nntf/io.hpp"
#include "nntf/kruskal_model.hpp"
#include "nntf/pathologies.hpp"
#include "nntf/solvers.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nntf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidInput = 1;
inline constexpr int kExitInternal = 2;

/**
 * @brief Entry point of the nntf command-line tool.
 *
 * args[0] is the program name. Returns 0 on success, 1 for invalid input
 * (bad flags, malformed files, shape mismatches) and 2 for internal errors.
 * Diagnostics go to @p err as a single line.
 */
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Nonnegative CP decomposition and PARAFAC degeneracy toolkit", "nntf"};
    app.require_subcommand(1);

    // norms
    std::string norms_input;
    auto* norms = app.add_subcommand("norms", "Print the E-, F- and G-norms of a tensor");
    norms->add_option("--input", norms_input, "Tensor JSON file")->required();

    // divergence
    std::string div_a;
    std::string div_b;
    std::string div_kind = "kl";
    auto* divergence = app.add_subcommand("divergence", "Proximity between two tensors");
    divergence->add_option("--a", div_a, "First tensor")->required();
    divergence->add_option("--b", div_b, "Second tensor")->required();
    divergence->add_option("--kind", div_kind, "kl|e|f|g")
        ->check(CLI::IsMember({"kl", "e", "f", "g"}));

    // decompose
    std::string dec_input;
    std::size_t dec_rank = 1;
    std::string dec_loss = "frob";
    bool dec_nonneg = false;
    double dec_reg = 0.0;
    std::uint64_t dec_seed = 0;
    std::size_t dec_iters = 1000;
    double dec_tol = 1e-9;
    std::string dec_trace;
    std::string dec_out;
    auto* decompose = app.add_subcommand("decompose", "Fit a CP model");
    decompose->add_option("--input", dec_input, "Tensor JSON file")->required();
    decompose->add_option("--rank", dec_rank, "Number of components")->required();
    decompose->add_option("--loss", dec_loss, "frob|kl")->check(CLI::IsMember({"frob", "kl"}));
    decompose->add_flag("--nonneg", dec_nonneg, "Nonnegative multiplicative updates");
    decompose->add_option("--reg", dec_reg, "Loading-norm penalty rho (nonneg, frob)");
    decompose->add_option("--seed", dec_seed, "RNG seed");
    decompose->add_option("--max-iters", dec_iters, "Iteration budget");
    decompose->add_option("--tol", dec_tol, "Relative decrease threshold (0 = run all)");
    decompose->add_option("--trace", dec_trace, "Trace CSV output");
    decompose->add_option("--out", dec_out, "Model JSON output");

    // pathology
    auto* pathology = app.add_subcommand("pathology", "Generate the explicit constructions");
    pathology->require_subcommand(1);
    double bclr_eps = 1.0;
    std::size_t bclr_n = 4;
    std::string bclr_out;
    std::string bclr_components;
    auto* bclr = pathology->add_subcommand("bclr", "Degenerate family A_eps");
    bclr->add_option("--epsilon", bclr_eps, "eps > 0")->required();
    bclr->add_option("--n", bclr_n, "Ambient dimension (>= 4)");
    bclr->add_option("--out", bclr_out, "Tensor JSON output")->required();
    bclr->add_option("--components", bclr_components, "5-component model JSON output");

    std::size_t limit_n = 4;
    std::string limit_out;
    auto* bclr_limit_cmd = pathology->add_subcommand("bclr-limit", "Limit tensor of A_eps");
    bclr_limit_cmd->add_option("--n", limit_n, "Ambient dimension (>= 4)");
    bclr_limit_cmd->add_option("--out", limit_out, "Tensor JSON output")->required();

    std::size_t wseq_n = 1;
    std::string wseq_out;
    std::string wseq_limit_out;
    auto* wseq = pathology->add_subcommand("w-seq", "2x2x2 sequence A_n");
    wseq->add_option("--n", wseq_n, "Sequence index n >= 1")->required();
    wseq->add_option("--out", wseq_out, "A_n JSON output")->required();
    wseq->add_option("--limit-out", wseq_limit_out, "Limit A JSON output");

    std::size_t kl_n = 1;
    std::string kl_out;
    std::string kl_x_out;
    auto* klex = pathology->add_subcommand("kl-example", "KL boundary example");
    klex->add_option("--n", kl_n, "n >= 1")->required();
    klex->add_option("--out", kl_out, "A = e⊗e⊗e JSON output")->required();
    klex->add_option("--x-out", kl_x_out, "X_n JSON output");

    // degeneracy
    std::string deg_input;
    std::size_t deg_rank = 1;
    std::size_t deg_seeds = 1;
    std::size_t deg_iters = 2000;
    std::size_t deg_threads = 1;
    std::string deg_out;
    auto* degeneracy = app.add_subcommand("degeneracy", "Nonnegative vs unconstrained sweep");
    degeneracy->add_option("--input", deg_input, "Tensor JSON file")->required();
    degeneracy->add_option("--rank", deg_rank, "Number of components")->required();
    degeneracy->add_option("--seeds", deg_seeds, "Seeds 0..K-1")->required();
    degeneracy->add_option("--iters", deg_iters, "Iterations per run");
    degeneracy->add_option("--threads", deg_threads, "Worker threads (0 = all cores)");
    degeneracy->add_option("--out", deg_out, "Summary CSV output")->required();

    // normalize
    std::string norm_model;
    std::string norm_out;
    auto* normalize_cmd = app.add_subcommand("normalize", "Normalize a model file");
    normalize_cmd->add_option("--model", norm_model, "Model JSON file")->required();
    normalize_cmd->add_option("--out", norm_out, "Model JSON output")->required();

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& ex) {
        err << "nntf: " << ex.what() << '\n';
        return kExitInvalidInput;
    }

    try {
        if (*norms) {
            const auto t = io::load_tensor(norms_input);
            out << "E=" << io::format_double(norm(t, NormKind::E)) << '\n'
                << "F=" << io::format_double(norm(t, NormKind::F)) << '\n'
                << "G=" << io::format_double(norm(t, NormKind::G)) << '\n';
        } else if (*divergence) {
            const auto a = io::load_tensor(div_a);
            const auto b = io::load_tensor(div_b);
            out << io::format_double(distance(a, b, parse_divergence_kind(div_kind))) << '\n';
        } else if (*decompose) {
            const auto a = io::load_tensor(dec_input);
            FitConfig cfg;
            cfg.rank = dec_rank;
            cfg.loss = parse_loss(dec_loss);
            cfg.nonneg = dec_nonneg;
            cfg.reg_rho = dec_reg;
            cfg.seed = dec_seed;
            cfg.max_iters = dec_iters;
            cfg.tol = dec_tol;
            const FitResult res = fit(a, cfg);
            if (!dec_trace.empty()) io::write_file(dec_trace, io::trace_to_csv(res.trace));
            if (!dec_out.empty()) io::write_file(dec_out, io::model_to_json(res.model));
            const auto& last = res.trace.rows.back();
            out << "objective=" << io::format_double(res.final_objective) << '\n'
                << "residual_E=" << io::format_double(last.residual_E) << '\n'
                << "iterations=" << res.iterations << '\n'
                << "converged=" << (res.converged ? "true" : "false") << '\n';
        } else if (*pathology) {
            if (*bclr) {
                BclrInstance inst;
                inst.epsilon = bclr_eps;
                inst.n = bclr_n;
                const auto res = bclr_a_eps(inst);
                io::write_file(bclr_out, io::tensor_to_json(res.tensor));
                if (!bclr_components.empty()) {
                    io::write_file(bclr_components, io::model_to_json(res.components));
                }
            } else if (*bclr_limit_cmd) {
                io::write_file(limit_out, io::tensor_to_json(bclr_limit(limit_n)));
            } else if (*wseq) {
                const auto seq = w_sequence({wseq_n});
                io::write_file(wseq_out, io::tensor_to_json(seq.a_n.front()));
                if (!wseq_limit_out.empty()) {
                    io::write_file(wseq_limit_out, io::tensor_to_json(seq.a));
                }
            } else if (*klex) {
                const auto ex = kl_counterexample(kl_n);
                io::write_file(kl_out, io::tensor_to_json(ex.a));
                if (!kl_x_out.empty()) io::write_file(kl_x_out, io::tensor_to_json(ex.x_n));
            }
        } else if (*degeneracy) {
            const auto a = io::load_tensor(deg_input);
            std::vector<std::uint64_t> seeds(deg_seeds);
            std::iota(seeds.begin(), seeds.end(), std::uint64_t{0});
            ContrastOptions opt;
            opt.max_iters = deg_iters;
            opt.threads = deg_threads;
            const auto summary = run_contrast_experiment(a, deg_rank, seeds, opt);
            io::write_file(deg_out, io::summary_to_csv(summary));
            for (const auto& row : summary.rows) {
                if (!row.error.empty()) {
                    err << "nntf: seed " << row.seed << ' ' << to_string(row.family)
                        << ": " << row.error << '\n';
                }
            }
            auto line = [&](std::string_view name, const FamilyAggregate& g) {
                out << name << ": degenerate=" << g.degenerate << " bounded=" << g.bounded
                    << " inconclusive=" << g.inconclusive << " errors=" << g.errors
                    << " residual_E[min,median,max]=" << io::format_double(g.min_residual_E)
                    << ',' << io::format_double(g.median_residual_E) << ','
                    << io::format_double(g.max_residual_E) << '\n';
            };
            line("nonneg", summary.nonneg);
            line("unconstrained", summary.unconstrained);
        } else if (*normalize_cmd) {
            const auto m = io::load_model(norm_model);
            const auto n = m.is_nonnegative() ? normalize(m) : normalize_signed(m);
            io::write_file(norm_out, io::model_to_json(n));
        }
    } catch (const std::invalid_argument& ex) {
        err << "nntf: " << ex.what() << '\n';
        return kExitInvalidInput;
    } catch (const std::out_of_range& ex) {
        err << "nntf: " << ex.what() << '\n';
        return kExitInvalidInput;
    } catch (const std::exception& ex) {
        err << "nntf: internal error: " << ex.what() << '\n';
        return kExitInternal;
    }
    return kExitOk;
}

} // namespace nntf::cli
