// qjw — quantum-jump work statistics for a driven two-level system.
//
// Subcommands map onto the standard outputs: a single annotated trajectory
// (trace), a work-distribution ensemble (ensemble), a drive-amplitude /
// damping sweep with analytic overlays (sweep), the pure photon-number
// analytics (analytics), and an end-to-end self-check (validate).

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qjw/cayley.hpp"
#include "qjw/io.hpp"
#include "qjw/master_equation.hpp"
#include "qjw/model.hpp"
#include "qjw/parallel.hpp"
#include "qjw/stats.hpp"
#include "qjw/trajectory.hpp"
#include "qjw/work.hpp"

namespace {

using namespace qjw;

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

EnsembleOptions ensemble_options(const RunConfig& cfg) {
    EnsembleOptions opt;
    opt.n_trajectories = cfg.n_trajectories;
    opt.seed = cfg.seed;
    opt.dt = cfg.dt();
    opt.workers = cfg.workers;
    opt.integrator = cfg.integrator_kind();
    return opt;
}

int cmd_trace(const RunConfig& cfg) {
    const auto params = cfg.params();
    const auto proto = cfg.protocol();
    const double period = proto.period();
    const double T = proto.duration();
    const double t_start = -cfg.prelude_cycles * period;
    const double t_end = T + cfg.tail_cycles * period;

    TrajectoryOptions topt;
    topt.dt = cfg.dt();
    topt.sample_stride = std::max<int64_t>(1, cfg.dt_per_cycle / cfg.samples_per_cycle);
    topt.integrator = cfg.integrator_kind();

    RngStream rng(cfg.seed, 0);
    const auto init = sample_initial_state(params.gibbs().p_g, rng);
    const auto traj = run_trajectory(init, t_start, t_end, params, proto, topt, rng);

    write_file(join_path(cfg.out_dir, "trace.csv"),
               [&](std::ostream& out) { write_trace_csv(out, traj); });
    write_file(join_path(cfg.out_dir, "trace.svg"), [&](std::ostream& out) {
        write_trace_svg(out, traj, "quantum jump trajectory");
    });
    write_file(join_path(cfg.out_dir, "run_config.cfg"),
               [&](std::ostream& out) { out << emit_config(cfg); });

    // Two-measurement reading of the trace: the eigenstate entering the
    // drive, the heat inside the window, and the state the first post-drive
    // photon reveals.
    Eigenstate state_at_0 = init;
    for (const auto& j : traj.jumps) {
        if (j.time <= 0.0) {
            state_at_0 = (j.kind == JumpKind::Emission) ? Eigenstate::Ground
                                                        : Eigenstate::Excited;
        }
    }
    const int32_t q = heat_from_jumps(traj.jumps, 0.0, T);
    std::optional<Eigenstate> measured;
    for (const auto& j : traj.jumps) {
        if (j.time > T) {
            measured = (j.kind == JumpKind::Emission) ? Eigenstate::Excited
                                                      : Eigenstate::Ground;
            break;
        }
    }
    std::printf("trace: %zu jumps, initial (t=0) %s, Q/hw0 = %d\n", traj.jumps.size(),
                eigenstate_name(state_at_0), q);
    if (measured) {
        const int32_t du = static_cast<int32_t>(eigenstate_energy(*measured)) -
                           static_cast<int32_t>(eigenstate_energy(state_at_0));
        std::printf("trace: guardian photon measured %s, W/hw0 = %d\n",
                    eigenstate_name(*measured), du + q);
    } else {
        std::printf("trace: no guardian photon within the tail window\n");
    }
    std::printf("wrote %s\n", join_path(cfg.out_dir, "trace.csv").c_str());
    return 0;
}

int cmd_ensemble(const RunConfig& cfg) {
    const auto params = cfg.params();
    const auto proto = cfg.protocol();
    const auto res = run_protocol_ensemble(params, proto, ensemble_options(cfg));
    if (res.records.empty()) {
        std::fprintf(stderr, "ensemble: every realization timed out\n");
        return 1;
    }
    RngStream boot_rng(cfg.seed, 1u << 20);  // bootstrap stream, disjoint from trajectories
    const auto summary = summarize(res.records, params.beta_hbar_omega0,
                                   static_cast<int>(cfg.n_bootstrap), boot_rng);
    const auto hist = histogram(res.records);

    write_file(join_path(cfg.out_dir, "ensemble.csv"),
               [&](std::ostream& out) { write_ensemble_csv(out, res.records); });
    write_file(join_path(cfg.out_dir, "histogram.csv"),
               [&](std::ostream& out) { write_histogram_csv(out, hist); });
    write_file(join_path(cfg.out_dir, "histogram.svg"), [&](std::ostream& out) {
        write_histogram_svg(out, hist, "work distribution");
    });
    write_file(join_path(cfg.out_dir, "summary.csv"),
               [&](std::ostream& out) { write_summary_csv(out, summary); });
    write_file(join_path(cfg.out_dir, "metadata.txt"),
               [&](std::ostream& out) { write_run_metadata(out, cfg, res); });

    std::printf("ensemble: N = %zu (timeouts %lld)%s\n", res.records.size(),
                static_cast<long long>(res.n_timeouts),
                res.born_measurement ? ", isolated system (Born-sampled final state)" : "");
    std::printf("  <e^{-beta W}> = %.6f +- %.6f\n", summary.jarzynski.value,
                summary.jarzynski.se);
    if (summary.ratio_defined) {
        std::printf("  <W^2>/<W>     = %.6f +- %.6f (hbar omega0)\n", summary.ratio.value,
                    summary.ratio.se);
    } else {
        std::printf("  <W^2>/<W>     undefined (<W> within noise of zero)\n");
    }
    std::printf("wrote %s\n", join_path(cfg.out_dir, "ensemble.csv").c_str());
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    std::vector<McSweepRow> rows;
    PropagatorOptions popt;
    popt.grid_per_cycle = 1000;
    for (double gd : cfg.gamma_down_list) {
        for (double l0 : cfg.lambda0_list) {
            RunConfig point = cfg;
            point.gamma_down = gd;
            point.lambda0 = l0;
            const auto params = point.params();
            const auto proto = point.protocol();

            McSweepRow row;
            row.lambda0 = l0;
            row.gamma_down = gd;
            const auto res = run_protocol_ensemble(params, proto, ensemble_options(point));
            if (res.records.empty()) {
                std::fprintf(stderr, "sweep: point (%g, %g) produced no records\n", l0, gd);
                return 1;
            }
            RngStream boot_rng(point.seed, 1u << 20);
            row.mc = summarize(res.records, params.beta_hbar_omega0,
                               static_cast<int>(point.n_bootstrap), boot_rng);
            row.quad = cayley_analysis(params, proto, popt);
            if (proto.is_resonant(params.omega0) && proto.lambda0 > 0.0) {
                row.pert = perturbative_statistics(params, proto);
                row.has_pert = true;
            }
            rows.push_back(row);
            std::printf("sweep: lambda0 = %g gamma_down = %g  jarzynski = %.4f +- %.4f\n", l0,
                        gd, row.mc.jarzynski.value, row.mc.jarzynski.se);
        }
    }
    write_file(join_path(cfg.out_dir, "sweep.csv"),
               [&](std::ostream& out) { write_mc_sweep_csv(out, rows); });

    // Ratio vs drive amplitude: one analytic line plus one MC marker set
    // per damping value.
    const std::vector<std::string> palette{"steelblue", "seagreen", "darkorange", "crimson",
                                           "purple"};
    std::vector<PlotSeries> series;
    size_t color = 0;
    for (double gd : cfg.gamma_down_list) {
        PlotSeries quad_line{"quad gd=" + detail::fmt_fixed(gd, 3),
                             palette[color % palette.size()], false, {}, {}};
        PlotSeries mc_dots{"mc gd=" + detail::fmt_fixed(gd, 3),
                           palette[color % palette.size()], true, {}, {}};
        for (const auto& row : rows) {
            if (row.gamma_down != gd) continue;
            double quad_ratio = std::numeric_limits<double>::quiet_NaN();
            try {
                quad_ratio = combined_moment_ratio(row.quad.n0, row.quad.n1);
            } catch (const DegenerateDenominator&) {
            }
            quad_line.x.push_back(row.lambda0);
            quad_line.y.push_back(quad_ratio);
            if (row.mc.ratio_defined) {
                mc_dots.x.push_back(row.lambda0);
                mc_dots.y.push_back(row.mc.ratio.value);
            }
        }
        series.push_back(quad_line);
        series.push_back(mc_dots);
        ++color;
    }
    write_file(join_path(cfg.out_dir, "sweep_ratio.svg"), [&](std::ostream& out) {
        write_line_plot_svg(out, series, "work moment ratio vs drive amplitude", "lambda0",
                            "<W^2>/<W> (hbar omega0)");
    });
    std::printf("wrote %s\n", join_path(cfg.out_dir, "sweep.csv").c_str());
    return 0;
}

int cmd_analytics(const RunConfig& cfg) {
    std::vector<CayleySweepRow> rows;
    PropagatorOptions popt;
    popt.grid_per_cycle = 1000;
    for (double gd : cfg.gamma_down_list) {
        for (double l0 : cfg.lambda0_list) {
            RunConfig point = cfg;
            point.gamma_down = gd;
            point.lambda0 = l0;
            CayleySweepRow row;
            row.lambda0 = l0;
            row.gamma_down = gd;
            row.result = cayley_analysis(point.params(), point.protocol(), popt);
            rows.push_back(row);
            std::printf("analytics: lambda0 = %g gamma_down = %g  P0 = %.6f P1 = %.6f\n", l0,
                        gd, row.result.n0.p, row.result.n1.p);
        }
    }
    write_file(join_path(cfg.out_dir, "analytics.csv"),
               [&](std::ostream& out) { write_cayley_sweep_csv(out, rows); });
    std::printf("wrote %s\n", join_path(cfg.out_dir, "analytics.csv").c_str());
    return 0;
}

struct CheckReporter {
    int failures = 0;
    void report(const std::string& name, bool pass, const std::string& detail) {
        std::printf("%s  %s (%s)\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
        if (!pass) ++failures;
    }
};

int cmd_validate(const RunConfig& cfg) {
    CheckReporter rep;
    char buf[256];

    // Quantum-jump ensemble versus the master equation.
    {
        const auto params = cfg.params();
        const auto proto = cfg.protocol();
        const double T = proto.duration();
        const int64_t n = std::min<int64_t>(cfg.n_trajectories, 10000);
        TrajectoryOptions topt;
        topt.dt = cfg.dt();
        topt.sample_stride = std::max<int64_t>(1, cfg.dt_per_cycle / cfg.samples_per_cycle);
        topt.integrator = cfg.integrator_kind();
        const auto pops = params.gibbs();
        std::vector<Trajectory> ens(static_cast<size_t>(n));
        parallel_for_blocks(n, 64, cfg.workers, [&](int64_t lo, int64_t hi) {
            for (int64_t i = lo; i < hi; ++i) {
                RngStream rng(cfg.seed, static_cast<uint64_t>(i));
                const auto init =
                    rng.bernoulli(pops.p_g) ? Eigenstate::Ground : Eigenstate::Excited;
                ens[static_cast<size_t>(i)] = run_trajectory(init, 0.0, T, params, proto, topt,
                                                             rng);
            }
        });
        std::vector<double> grid;
        const int64_t n_steps = static_cast<int64_t>(std::llround(T / topt.dt));
        for (int64_t k = 0; k <= n_steps; ++k) grid.push_back(static_cast<double>(k) * topt.dt);
        const auto sol =
            integrate_master(params, proto, ReducedDensityMatrix::thermal(params), grid);
        const double sup = compare_ensemble(ens, sol);
        const double bound = 5.0 / std::sqrt(static_cast<double>(n));
        std::snprintf(buf, sizeof(buf), "sup|mean pop_e - sigma_ee| = %.5f, bound %.5f", sup,
                      bound);
        rep.report("master-equation equivalence", sup <= bound, buf);
    }

    // Guardian photon as a projective measurement.
    {
        const auto params = cfg.params();
        bool quad_ok = true;
        double worst = 0.0;
        RngStream rng(cfg.seed, 2u << 20);
        for (int i = 0; i < 10; ++i) {
            const double pe = 0.05 + 0.9 * rng.uniform();
            const double gd = 0.02 + 0.25 * rng.uniform();
            const double beta = 0.4 + 2.0 * rng.uniform();
            const auto p = ModelParams::with_detailed_balance(gd, beta);
            const auto g = guardian_excited_probability(pe, p);
            worst = std::max(worst, std::abs(g.value - pe));
            quad_ok = quad_ok && g.converged && std::abs(g.value - pe) <= 1e-6;
        }
        std::snprintf(buf, sizeof(buf), "max |P_E - p_e(T)| = %.2e over 10 random triples",
                      worst);
        rep.report("guardian quadrature identity", quad_ok, buf);

        const double pe = 0.37;
        const PureState s{Complex{std::sqrt(1.0 - pe), 0.0}, Complex{std::sqrt(pe), 0.0}};
        int excited = 0, measured = 0;
        const int n = 20000;
        const double dt = 0.02 / params.gamma_sum();
        for (int i = 0; i < n; ++i) {
            const auto g = measure_by_guardian(s, 0.0, params, dt, rng);
            if (g.timed_out) continue;
            ++measured;
            excited += (g.measured == Eigenstate::Excited) ? 1 : 0;
        }
        const double freq = static_cast<double>(excited) / measured;
        const double sigma = std::sqrt(pe * (1.0 - pe) / measured);
        std::snprintf(buf, sizeof(buf), "freq = %.4f, p_e = %.4f, 3 sigma = %.4f", freq, pe,
                      3.0 * sigma);
        rep.report("guardian monte carlo identity", std::abs(freq - pe) <= 3.0 * sigma, buf);
    }

    // Per-class Jarzynski identity (fails by design with broken rates).
    {
        const auto params = cfg.params();
        DriveProtocol proto = cfg.protocol();
        PropagatorOptions popt;
        popt.grid_per_cycle = 1000;
        const auto r0 = reverse_identity_check(params, proto, 0, popt);
        const auto r1 = reverse_identity_check(params, proto, 1, popt);
        std::snprintf(buf, sizeof(buf), "|lhs-rhs| n=0: %.2e, n=1: %.2e", r0.abs_diff,
                      r1.abs_diff);
        rep.report("per-class jarzynski identity", r0.abs_diff <= 1e-6 && r1.abs_diff <= 1e-6,
                   buf);
    }

    // Perturbative formulas approach the quadrature at first order.
    {
        DriveProtocol proto = cfg.protocol();
        proto.lambda0 = 0.05;
        PropagatorOptions popt;
        popt.grid_per_cycle = 500;
        popt.quad_tol = 1e-8;
        auto gap = [&](double gamma_down) {
            const auto p = ModelParams::with_detailed_balance(gamma_down, cfg.beta_hbar_omega0);
            const auto quad = p1_statistics(p, proto, popt).moments;
            const auto pert = perturbative_statistics(p, proto);
            return std::abs(quad.p - pert.n1.p);
        };
        const double ratio = gap(0.02) / gap(0.01);
        std::snprintf(buf, sizeof(buf), "P1 gap ratio (0.02 / 0.01) = %.2f, expect 4 +- 50%%",
                      ratio);
        rep.report("perturbation order", ratio >= 2.0 && ratio <= 6.0, buf);
    }

    // Determinism across worker counts.
    {
        RunConfig small = cfg;
        small.n_trajectories = std::min<int64_t>(cfg.n_trajectories, 1000);
        std::string first;
        bool same = true;
        for (int workers : {1, 4, 8}) {
            RunConfig wcfg = small;
            wcfg.workers = workers;
            const auto res = run_protocol_ensemble(wcfg.params(), wcfg.protocol(),
                                                   ensemble_options(wcfg));
            std::ostringstream out;
            write_ensemble_csv(out, res.records);
            if (first.empty()) {
                first = out.str();
            } else {
                same = same && (out.str() == first);
            }
        }
        std::snprintf(buf, sizeof(buf), "ensemble CSV identical for workers {1,4,8}, N = %lld",
                      static_cast<long long>(small.n_trajectories));
        rep.report("worker-count determinism", same, buf);
    }

    if (rep.failures > 0) {
        std::printf("validate: %d check(s) failed\n", rep.failures);
        return 1;
    }
    std::printf("validate: all checks passed\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum-jump work and heat statistics for a driven two-level system"};
    app.require_subcommand(1);

    std::string config_path;
    RunConfig cfg;

    // Flag storage; only flags the user actually passed override the file.
    double beta = 0, gd = 0, gu = 0, l0 = 0, cycles = 0, omega = 0, prelude = 0, tail = 0;
    uint64_t seed = 0;
    int64_t n_traj = 0, dt_pc = 0, samples_pc = 0, n_boot = 0;
    int workers = 0;
    std::string out_dir, integrator;
    bool break_db = false;
    std::vector<double> l0_list, gd_list;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "configuration file (key = value lines)");
        sub->add_option("--seed", seed, "master RNG seed");
        sub->add_option("--beta", beta, "beta * hbar * omega0 (inverse temperature)");
        sub->add_option("--gamma-down", gd, "emission rate (units of omega0)");
        sub->add_option("--gamma-up", gu, "absorption rate; omit for detailed balance");
        sub->add_option("--lambda0", l0, "drive amplitude (units of hbar omega0)");
        sub->add_option("--cycles", cycles, "drive duration in cycles");
        sub->add_option("--omega", omega, "drive frequency over omega0");
        sub->add_option("--trajectories", n_traj, "ensemble size");
        sub->add_option("--dt-per-cycle", dt_pc, "integration steps per drive cycle");
        sub->add_option("--samples-per-cycle", samples_pc, "trace samples per drive cycle");
        sub->add_option("--bootstrap", n_boot, "bootstrap replicates");
        sub->add_option("--workers", workers, "worker threads (0 = all cores)");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--prelude-cycles", prelude, "equilibration cycles before the drive");
        sub->add_option("--tail-cycles", tail, "cycles recorded after the drive");
        sub->add_option("--integrator", integrator, "rk4 | euler");
        sub->add_flag("--break-detailed-balance", break_db,
                      "scale gamma_up by 1.5 (negative control)");
        sub->add_option("--lambda0-list", l0_list, "sweep amplitudes");
        sub->add_option("--gamma-down-list", gd_list, "sweep emission rates");
    };

    auto* trace = app.add_subcommand("trace", "single annotated quantum-jump trajectory");
    auto* ensemble = app.add_subcommand("ensemble", "work distribution ensemble");
    auto* sweep = app.add_subcommand("sweep", "amplitude/damping sweep with analytic overlay");
    auto* analytics = app.add_subcommand("analytics", "photon-number class analytics sweep");
    auto* validate = app.add_subcommand("validate", "cross-check suite (exit 1 on failure)");
    for (auto* sub : {trace, ensemble, sweep, analytics, validate}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!config_path.empty()) cfg = load_config_file(config_path);
        CLI::App* sub = app.get_subcommands().front();
        if (sub->count("--seed")) cfg.seed = seed;
        if (sub->count("--beta")) cfg.beta_hbar_omega0 = beta;
        if (sub->count("--gamma-down")) cfg.gamma_down = gd;
        if (sub->count("--gamma-up")) cfg.gamma_up = gu;
        if (sub->count("--lambda0")) cfg.lambda0 = l0;
        if (sub->count("--cycles")) cfg.n_cycles = cycles;
        if (sub->count("--omega")) cfg.omega_over_omega0 = omega;
        if (sub->count("--trajectories")) cfg.n_trajectories = n_traj;
        if (sub->count("--dt-per-cycle")) cfg.dt_per_cycle = dt_pc;
        if (sub->count("--samples-per-cycle")) cfg.samples_per_cycle = samples_pc;
        if (sub->count("--bootstrap")) cfg.n_bootstrap = n_boot;
        if (sub->count("--workers")) cfg.workers = workers;
        if (sub->count("--out")) cfg.out_dir = out_dir;
        if (sub->count("--prelude-cycles")) cfg.prelude_cycles = prelude;
        if (sub->count("--tail-cycles")) cfg.tail_cycles = tail;
        if (sub->count("--integrator")) cfg.integrator = integrator;
        if (break_db) cfg.break_detailed_balance = true;
        if (sub->count("--lambda0-list")) cfg.lambda0_list = l0_list;
        if (sub->count("--gamma-down-list")) cfg.gamma_down_list = gd_list;
        cfg.validate();

        if (sub == trace) return cmd_trace(cfg);
        if (sub == ensemble) return cmd_ensemble(cfg);
        if (sub == sweep) return cmd_sweep(cfg);
        if (sub == analytics) return cmd_analytics(cfg);
        return cmd_validate(cfg);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const StepTooLarge& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
