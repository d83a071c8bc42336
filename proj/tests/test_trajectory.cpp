#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qjw/master_equation.hpp"
#include "qjw/model.hpp"
#include "qjw/parallel.hpp"
#include "qjw/rng.hpp"
#include "qjw/trajectory.hpp"

using namespace qjw;

namespace {

const DriveProtocol kNoDrive{};

ModelParams rates_only(double gd, double gu) {
    return ModelParams::with_rates(gd, gu, 1.0);
}

// One-sample Kolmogorov-Smirnov statistic against an exponential CDF.
double ks_statistic_exponential(std::vector<double> samples, double rate) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
        const double cdf = 1.0 - std::exp(-rate * samples[i]);
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
    }
    return d;
}

}  // namespace

TEST_CASE("no-jump derivatives vanish on eigenstates without drive", "[trajectory]") {
    const auto params = rates_only(0.1, 0.03);
    const auto dg = no_jump_derivatives(PureState::ground(), 0.7, params, kNoDrive);
    CHECK(std::abs(dg.da_dt) == 0.0);
    CHECK(std::abs(dg.db_dt) == 0.0);
    const auto de = no_jump_derivatives(PureState::excited(), 0.7, params, kNoDrive);
    CHECK(std::abs(de.da_dt) == 0.0);
    CHECK(std::abs(de.db_dt) == 0.0);
}

TEST_CASE("no-jump derivatives on an equal superposition", "[trajectory]") {
    const auto params = rates_only(0.1, 0.0);  // dG = 0.1
    const PureState s{Complex{std::numbers::sqrt2 / 2.0, 0.0},
                      Complex{std::numbers::sqrt2 / 2.0, 0.0}};
    const auto d = no_jump_derivatives(s, 0.0, params, kNoDrive);
    // da/dt = +0.025 a, db/dt = -0.025 b
    CHECK(std::abs(d.da_dt - 0.025 * s.a) < 1e-15);
    CHECK(std::abs(d.db_dt + 0.025 * s.b) < 1e-15);
    // norm conservation: d(|a|^2 + |b|^2)/dt = 0
    const double dnorm =
        2.0 * (std::real(std::conj(s.a) * d.da_dt) + std::real(std::conj(s.b) * d.db_dt));
    CHECK(std::abs(dnorm) < 1e-15);
}

TEST_CASE("no-jump step on decoupled eigenstates", "[trajectory]") {
    const auto frozen = step_no_jump(PureState::ground(), 0.0, 0.05, rates_only(0.2, 0.0),
                                     kNoDrive);
    CHECK(frozen.delta_p == 0.0);
    CHECK(frozen.state.pop_g() == 1.0);

    const auto decay = step_no_jump(PureState::excited(), 0.0, 0.01, rates_only(0.1, 0.0),
                                    kNoDrive);
    CHECK(decay.delta_p == Catch::Approx(1e-3).epsilon(1e-12));
    CHECK(decay.state.pop_e() == 1.0);
}

TEST_CASE("step guard rejects too-large jump probability", "[trajectory]") {
    CHECK_THROWS_AS(step_no_jump(PureState::excited(), 0.0, 0.3, rates_only(0.5, 0.0), kNoDrive),
                    StepTooLarge);
}

TEST_CASE("weak resonant drive follows the Rabi law on a stroboscopic grid", "[trajectory]") {
    // With dG = 0 the no-jump flow is the bare driven dynamics; for a weak
    // resonant drive the excited population follows sin^2(lambda0 t / 2) up
    // to counter-rotating corrections, which vanish at half-period samples.
    const double lambda0 = 1e-4;
    DriveProtocol proto;
    proto.lambda0 = lambda0;
    proto.omega = 1.0;
    proto.n_cycles = 8.0;
    const auto params = rates_only(0.0, 0.0);

    const double dt = proto.period() / 1000.0;
    PureState s = PureState::ground();
    double t = 0.0;
    for (int64_t k = 0; k < 8000; ++k) {
        s = step_no_jump(s, t, dt, params, proto).state;
        t = static_cast<double>(k + 1) * dt;
        if ((k + 1) % 500 == 0) {  // half-period samples
            const double expected = std::pow(std::sin(0.5 * lambda0 * t), 2);
            CHECK(std::abs(s.pop_e() - expected) < 1e-8);
        }
        CHECK(std::abs(s.norm2() - 1.0) < 1e-9);
    }
}

TEST_CASE("mc step branch selection", "[trajectory]") {
    // From |e> any jump is an emission.
    {
        const auto params = rates_only(0.5, 0.0);
        RngStream rng(5, 0);
        int jumps = 0;
        for (int i = 0; i < 2000 && jumps < 50; ++i) {
            const auto out = mc_step(PureState::excited(), 0.0, 0.15, params, kNoDrive, rng);
            if (out.jumped) {
                ++jumps;
                CHECK(out.event.kind == JumpKind::Emission);
                CHECK(out.state.pop_g() == 1.0);
            }
        }
        CHECK(jumps == 50);
    }
    // From |g> with Gamma_up = 0 no jump ever fires.
    {
        const auto params = rates_only(0.5, 0.0);
        RngStream rng(6, 0);
        for (int i = 0; i < 2000; ++i) {
            const auto out = mc_step(PureState::ground(), 0.0, 0.15, params, kNoDrive, rng);
            CHECK_FALSE(out.jumped);
        }
    }
}

TEST_CASE("conditional emission probability on an equal superposition", "[trajectory]") {
    // Gamma_up = Gamma_down keeps the equal superposition stationary, so the
    // printed branch ratio is exactly 1/2; binomial test over forced jumps.
    const auto params = rates_only(0.3, 0.3);
    const PureState s{Complex{std::numbers::sqrt2 / 2.0, 0.0},
                      Complex{std::numbers::sqrt2 / 2.0, 0.0}};
    RngStream rng(7, 0);
    const int target = 100000;
    int jumps = 0, emissions = 0;
    while (jumps < target) {
        const auto out = mc_step(s, 0.0, 0.3, params, kNoDrive, rng);
        if (out.jumped) {
            ++jumps;
            if (out.event.kind == JumpKind::Emission) ++emissions;
        }
    }
    const double freq = static_cast<double>(emissions) / target;
    const double sigma = std::sqrt(0.25 / target);
    CHECK(std::abs(freq - 0.5) < 3.0 * sigma);
}

TEST_CASE("trajectory without bath or drive is inert", "[trajectory]") {
    RngStream rng(1, 0);
    TrajectoryOptions opt;
    opt.dt = 0.1;
    opt.sample_stride = 10;
    const auto traj = run_trajectory(Eigenstate::Excited, 0.0, 50.0, rates_only(0.0, 0.0),
                                     kNoDrive, opt, rng);
    CHECK(traj.jumps.empty());
    CHECK(traj.final_state.pop_e() == 1.0);
    for (const auto& smp : traj.samples) CHECK(smp.pop_e == 1.0);
}

TEST_CASE("trajectory rejects a window not divisible by dt", "[trajectory]") {
    RngStream rng(1, 0);
    TrajectoryOptions opt;
    opt.dt = 0.3;
    CHECK_THROWS_AS(
        run_trajectory(Eigenstate::Ground, 0.0, 1.0, rates_only(0.1, 0.0), kNoDrive, opt, rng),
        std::invalid_argument);
}

TEST_CASE("jump times are strictly increasing and trajectories deterministic", "[trajectory]") {
    const auto params = ModelParams::with_detailed_balance(0.1, 1.0);
    DriveProtocol proto;
    proto.lambda0 = 0.1;
    proto.omega = 1.0;
    proto.n_cycles = 8.0;
    TrajectoryOptions opt;
    opt.dt = proto.period() / 1000.0;
    opt.sample_stride = 100;

    RngStream r1(321, 11);
    const auto t1 = run_trajectory(Eigenstate::Ground, 0.0, proto.duration(), params, proto,
                                   opt, r1);
    RngStream r2(321, 11);
    const auto t2 = run_trajectory(Eigenstate::Ground, 0.0, proto.duration(), params, proto,
                                   opt, r2);

    REQUIRE(t1.jumps.size() == t2.jumps.size());
    for (size_t i = 0; i < t1.jumps.size(); ++i) {
        CHECK(t1.jumps[i].time == t2.jumps[i].time);
        CHECK(t1.jumps[i].kind == t2.jumps[i].kind);
        if (i > 0) CHECK(t1.jumps[i].time > t1.jumps[i - 1].time);
    }
    REQUIRE(t1.samples.size() == t2.samples.size());
    for (size_t i = 0; i < t1.samples.size(); ++i) {
        CHECK(t1.samples[i].pop_e == t2.samples[i].pop_e);
        CHECK(t1.samples[i].pop_e >= 0.0);
        CHECK(t1.samples[i].pop_e <= 1.0);
    }
    CHECK(t1.final_state.a == t2.final_state.a);
    CHECK(t1.final_state.b == t2.final_state.b);
}

TEST_CASE("tabulated drive coupling matches direct evaluation", "[trajectory]") {
    const auto params = ModelParams::with_detailed_balance(0.05, 1.0);
    DriveProtocol proto;
    proto.lambda0 = 0.1;
    proto.omega = 1.0;
    proto.n_cycles = 4.0;
    const double dt = proto.period() / 500.0;

    // Jump-free comparison (rates entered through dG only): run_trajectory
    // uses the periodic table, the manual loop evaluates trig directly.
    const auto drift_params = ModelParams::with_rates(0.05, 0.05 * std::exp(-1.0), 1.0);
    RngStream rng(9, 0);
    TrajectoryOptions opt;
    opt.dt = dt;
    auto quiet = drift_params;
    quiet.gamma_down = 0.0;
    quiet.gamma_up = 0.0;  // no jumps; nonlinear drift off too (dG = 0)
    const auto table_run =
        run_trajectory(Eigenstate::Ground, 0.0, proto.duration(), quiet, proto, opt, rng);

    PureState s = PureState::ground();
    for (int64_t k = 0; k < 2000; ++k) {
        s = step_no_jump(s, static_cast<double>(k) * dt, dt, quiet, proto).state;
    }
    CHECK(std::abs(table_run.final_state.a - s.a) < 1e-12);
    CHECK(std::abs(table_run.final_state.b - s.b) < 1e-12);
}

TEST_CASE("first jump times from the excited state are exponential", "[trajectory]") {
    const double gamma = 0.1;
    const auto params = rates_only(gamma, 0.0);
    const int n = 10000;
    std::vector<double> times(n);
    parallel_for_blocks(n, 256, 0, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            RngStream rng(2718, static_cast<uint64_t>(i));
            const auto fj =
                evolve_until_first_jump(PureState::excited(), 0.0, 400.0, 0.01, params, rng);
            REQUIRE(fj.found);
            times[static_cast<size_t>(i)] = fj.event.time;
        }
    });
    const double d = ks_statistic_exponential(times, gamma);
    // 1% critical value of the Kolmogorov distribution
    CHECK(d * std::sqrt(static_cast<double>(n)) < 1.628);
}

TEST_CASE("undriven occupation fraction converges to Gamma_up/Gamma_sum", "[trajectory]") {
    const auto params = ModelParams::with_detailed_balance(0.1, 1.0);
    const double target = params.gamma_up / params.gamma_sum();
    const int n_traj = 48;
    const double window = 4000.0;
    const double dt = 0.25;

    std::vector<double> fractions(n_traj);
    parallel_for_blocks(n_traj, 4, 0, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            RngStream rng(1111, static_cast<uint64_t>(i));
            TrajectoryOptions opt;
            opt.dt = dt;
            opt.sample_stride = 1;
            const auto traj = run_trajectory(Eigenstate::Ground, 0.0, window, params, kNoDrive,
                                             opt, rng);
            double occupied = 0.0;
            for (const auto& smp : traj.samples) occupied += smp.pop_e;
            fractions[static_cast<size_t>(i)] =
                occupied / static_cast<double>(traj.samples.size());
        }
    });
    double mean = 0.0;
    for (double f : fractions) mean += f;
    mean /= n_traj;
    double var = 0.0;
    for (double f : fractions) var += (f - mean) * (f - mean);
    var /= (n_traj - 1);
    const double se = std::sqrt(var / n_traj);
    CHECK(std::abs(mean - target) < 3.0 * se);
}

TEST_CASE("rk4 no-jump integration is 4th order in dt", "[trajectory]") {
    DriveProtocol proto;
    proto.lambda0 = 0.1;
    proto.omega = 1.0;
    proto.n_cycles = 2.0;
    const auto params = rates_only(0.0, 0.0);
    const double T = proto.duration();

    auto integrate = [&](double dt) {
        PureState s = PureState::ground();
        const int64_t n = static_cast<int64_t>(std::llround(T / dt));
        for (int64_t k = 0; k < n; ++k) {
            s = step_no_jump(s, static_cast<double>(k) * dt, dt, params, proto).state;
        }
        return s;
    };

    const double dt0 = proto.period() / 40.0;
    const auto ref = integrate(dt0 / 16.0);
    auto err = [&](const PureState& s) {
        return std::sqrt(std::norm(s.a - ref.a) + std::norm(s.b - ref.b));
    };
    const double e1 = err(integrate(dt0));
    const double e2 = err(integrate(dt0 / 2.0));
    const double ratio = e1 / e2;
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("literal first-order mode converges linearly to the rk4 flow", "[trajectory]") {
    DriveProtocol proto;
    proto.lambda0 = 0.1;
    proto.omega = 1.0;
    proto.n_cycles = 2.0;
    const auto params = ModelParams::with_detailed_balance(0.05, 1.0);
    const double T = proto.duration();

    auto integrate = [&](double dt, IntegratorKind kind) {
        PureState s = PureState::ground();
        const int64_t n = static_cast<int64_t>(std::llround(T / dt));
        for (int64_t k = 0; k < n; ++k) {
            s = step_no_jump(s, static_cast<double>(k) * dt, dt, params, proto, kind).state;
        }
        return s;
    };

    const auto ref = integrate(proto.period() / 8000.0, IntegratorKind::Rk4);
    auto err = [&](const PureState& s) {
        return std::sqrt(std::norm(s.a - ref.a) + std::norm(s.b - ref.b));
    };
    const double e1 = err(integrate(proto.period() / 250.0, IntegratorKind::EulerLiteral));
    const double e2 = err(integrate(proto.period() / 500.0, IntegratorKind::EulerLiteral));
    CHECK(e1 / e2 > 1.7);
    CHECK(e1 / e2 < 2.3);
}

TEST_CASE("ensemble mean pop_e tracks the master equation", "[trajectory][master]") {
    const auto params = ModelParams::with_detailed_balance(0.1, 1.0);
    DriveProtocol proto;
    proto.lambda0 = 0.1;
    proto.omega = 1.0;
    proto.n_cycles = 8.0;
    const double T = proto.duration();
    const int n = 2000;

    TrajectoryOptions opt;
    opt.dt = proto.period() / 1000.0;
    opt.sample_stride = 100;  // 10 samples per cycle

    const auto pops = params.gibbs();
    std::vector<Trajectory> ensemble(n);
    parallel_for_blocks(n, 64, 0, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            RngStream rng(4242, static_cast<uint64_t>(i));
            const Eigenstate init =
                rng.bernoulli(pops.p_g) ? Eigenstate::Ground : Eigenstate::Excited;
            ensemble[static_cast<size_t>(i)] =
                run_trajectory(init, 0.0, T, params, proto, opt, rng);
        }
    });

    std::vector<double> grid;
    for (int64_t k = 0; k <= 8000; ++k) grid.push_back(static_cast<double>(k) * opt.dt);
    const auto sol = integrate_master(params, proto, ReducedDensityMatrix::thermal(params), grid);
    const double sup = compare_ensemble(ensemble, sol);
    CHECK(sup < 5.0 / std::sqrt(static_cast<double>(n)));
}
