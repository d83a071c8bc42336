#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "qjw/cayley.hpp"
#include "qjw/model.hpp"
#include "qjw/parallel.hpp"
#include "qjw/rng.hpp"
#include "qjw/work.hpp"

using namespace qjw;

namespace {

DriveProtocol fig3_drive(double lambda0) {
    DriveProtocol p;
    p.lambda0 = lambda0;
    p.omega = 1.0;
    p.n_cycles = 10.0;
    return p;
}

constexpr double kCoth1 = 1.3130352854993312;  // coth(beta/2) at beta = 2

}  // namespace

TEST_CASE("propagator branches without drive", "[cayley]") {
    const auto params = ModelParams::with_rates(0.08, 0.03, 1.0);
    DriveProtocol off;
    off.lambda0 = 0.0;
    off.omega = 1.0;
    off.n_cycles = 3.0;
    const double T = off.duration();
    const auto prop = propagate_amplitudes(0.0, T, params, off);

    for (size_t k = 0; k < prop.from_g.a.size(); k += 500) {
        const double t = static_cast<double>(k) * prop.dt;
        CHECK(std::abs(prop.from_g.a[k]) == Catch::Approx(1.0).margin(1e-12));
        CHECK(std::abs(prop.from_g.b[k]) == Catch::Approx(0.0).margin(1e-12));
        CHECK(prop.from_g.pi[k] == Catch::Approx(params.gamma_up * t).margin(1e-10));
        CHECK(prop.from_e.pi[k] == Catch::Approx(params.gamma_down * t).margin(1e-10));
    }
}

TEST_CASE("propagator invariants on the dense grid", "[cayley]") {
    const auto params = ModelParams::with_detailed_balance(0.02, 2.0);
    const auto proto = fig3_drive(0.1);
    const auto prop = propagate_amplitudes(0.0, proto.duration(), params, proto);

    for (const auto* br : {&prop.from_g, &prop.from_e}) {
        CHECK(br->pi.front() == 0.0);
        double prev_pi = -1.0;
        for (size_t k = 0; k < br->a.size(); ++k) {
            CHECK(std::abs(std::norm(br->a[k]) + std::norm(br->b[k]) - 1.0) < 1e-9);
            CHECK(br->pi[k] >= prev_pi);
            prev_pi = br->pi[k];
        }
    }

    // Interpolation agrees with direct integration off the grid nodes.
    RngStream rng(3, 0);
    for (int i = 0; i < 5; ++i) {
        const double t = proto.duration() * (0.05 + 0.9 * rng.uniform());
        const auto direct = propagate_between(Eigenstate::Ground, 0.0, t, params, proto,
                                              prop.dt);
        CHECK(prop.pop_e_at(Eigenstate::Ground, t) ==
              Catch::Approx(std::norm(direct.b)).margin(1e-9));
        CHECK(prop.pi_at(Eigenstate::Ground, t) == Catch::Approx(direct.pi).margin(1e-9));
    }
}

TEST_CASE("propagator follows the Rabi law at dG = 0", "[cayley]") {
    const double lambda0 = 1e-4;
    auto proto = fig3_drive(lambda0);
    proto.n_cycles = 8.0;
    const auto params = ModelParams::with_rates(0.05, 0.05, 0.0);  // dG = 0
    const auto prop = propagate_amplitudes(0.0, proto.duration(), params, proto);
    const int64_t half_period = prop.n / 16;  // stroboscopic: counter-rotating terms cancel
    for (int64_t k = half_period; k <= prop.n; k += half_period) {
        const double t = static_cast<double>(k) * prop.dt;
        const double expected = std::pow(std::sin(0.5 * lambda0 * t), 2);
        CHECK(std::abs(std::norm(prop.from_g.b[static_cast<size_t>(k)]) - expected) < 1e-8);
    }
}

TEST_CASE("zero-photon statistics for the isolated pi pulse", "[cayley]") {
    // Weak pulse keeps the counter-rotating leakage (order (lambda0/4)^2)
    // below the tolerance.
    const auto params = ModelParams::with_rates(0.0, 0.0, 1.0);
    const auto proto = DriveProtocol::pi_pulse(0.005);
    const auto n0 = p0_statistics(params, proto, {});
    const auto pops = params.gibbs();
    CHECK(n0.p == Catch::Approx(1.0).margin(1e-12));
    CHECK(n0.p_w == Catch::Approx(pops.p_g - pops.p_e).margin(1e-4));
    CHECK(n0.p_w2 == Catch::Approx(1.0).margin(1e-4));
    CHECK(n0.jarzynski ==
          Catch::Approx(pops.p_g * std::exp(-1.0) + pops.p_e * std::exp(1.0)).margin(1e-3));
}

TEST_CASE("zero-photon moment ratio is the fluctuation-dissipation value", "[cayley]") {
    // <W^2>_0 / <W>_0 = coth(beta/2) independent of the drive amplitude.
    PropagatorOptions opt;
    opt.grid_per_cycle = 8000;
    const auto params = ModelParams::with_detailed_balance(0.01, 2.0);
    for (double lambda0 : {0.01, 0.05, 0.1, 0.2}) {
        const auto n0 = p0_statistics(params, fig3_drive(lambda0), opt);
        CHECK(std::abs(n0.p_w2 / n0.p_w - kCoth1) < 1e-9);
    }
}

TEST_CASE("one-photon class vanishes without a bath", "[cayley]") {
    const auto params = ModelParams::with_rates(0.0, 0.0, 1.0);
    const auto one = p1_statistics(params, fig3_drive(0.05), {});
    CHECK(one.moments.p == 0.0);
    CHECK(one.moments.p_w == 0.0);
    CHECK(one.moments.p_w2 == 0.0);
    CHECK(one.moments.jarzynski == 0.0);
}

TEST_CASE("one-photon probability matches the first-order formula", "[cayley]") {
    const auto params = ModelParams::with_detailed_balance(0.005, 2.0);
    const auto proto = fig3_drive(0.05);
    PropagatorOptions opt;
    opt.grid_per_cycle = 500;
    opt.quad_tol = 1e-8;
    const auto one = p1_statistics(params, proto, opt);
    const auto pert = perturbative_statistics(params, proto);
    REQUIRE(one.converged);
    // first-order agreement: relative error of order Gamma_sum T
    const double rel = std::abs(one.moments.p - pert.n1.p) / one.moments.p;
    CHECK(rel < 0.75 * params.gamma_sum() * proto.duration());
}

TEST_CASE("class probabilities close to second order in Gamma", "[cayley]") {
    // P0 + P1 - 1 = O(Gamma^2): halving Gamma_down shrinks the residual
    // by about 4 (asserted within a factor 1.5).
    const auto proto = fig3_drive(0.05);
    PropagatorOptions opt;
    opt.grid_per_cycle = 500;
    opt.quad_tol = 1e-8;
    auto residual = [&](double gd) {
        const auto params = ModelParams::with_detailed_balance(gd, 2.0);
        return std::abs(p0_statistics(params, proto, opt).p +
                        p1_statistics(params, proto, opt).moments.p - 1.0);
    };
    const double ratio = residual(0.02) / residual(0.01);
    CHECK(ratio > 8.0 / 3.0);
    CHECK(ratio < 6.0);
}

TEST_CASE("perturbative closed forms", "[cayley]") {
    const auto proto = fig3_drive(0.05);
    {
        // beta = 0: the polarization term cancels, P0 = 1 - Gamma_sum T / 2.
        const auto params = ModelParams::with_rates(0.01, 0.01, 0.0);
        const auto pert = perturbative_statistics(params, proto);
        CHECK(pert.n0.p ==
              Catch::Approx(1.0 - 0.5 * params.gamma_sum() * proto.duration()).margin(1e-14));
    }
    {
        const auto params = ModelParams::with_detailed_balance(0.01, 2.0);
        const auto pert = perturbative_statistics(params, proto);
        const double expected =
            -(params.delta_gamma() / proto.lambda0) * std::sin(proto.lambda0 * proto.duration());
        CHECK(pert.pi_g - pert.pi_e == Catch::Approx(expected).margin(1e-14));
        // class probabilities are complementary to first order
        CHECK(pert.n0.p + pert.n1.p == Catch::Approx(1.0).margin(1e-14));
    }
    {
        auto detuned = proto;
        detuned.omega = 0.9;
        const auto params = ModelParams::with_detailed_balance(0.01, 2.0);
        CHECK_THROWS_AS(perturbative_statistics(params, detuned), NotResonant);
        CHECK_THROWS_AS(perturbative_statistics(params, proto.reversed()), NotResonant);
    }
}

TEST_CASE("combined moment ratio limits", "[cayley]") {
    const auto params = ModelParams::with_detailed_balance(0.01, 2.0);
    {
        // Gamma -> 0: ratio reduces to the zero-photon value.
        const auto isolated = ModelParams::with_rates(0.0, 0.0, 2.0);
        const auto n0 = p0_statistics(isolated, fig3_drive(0.05), {});
        const auto n1 = p1_statistics(isolated, fig3_drive(0.05), {});
        CHECK(std::abs(combined_moment_ratio(n0, n1.moments) - kCoth1) < 1e-9);
    }
    {
        // lambda0 -> 0 with Gamma > 0: linear response recovers coth.
        PropagatorOptions opt;
        opt.grid_per_cycle = 1000;
        const auto n0 = p0_statistics(params, fig3_drive(0.001), opt);
        const auto n1 = p1_statistics(params, fig3_drive(0.001), opt);
        CHECK(std::abs(combined_moment_ratio(n0, n1.moments) - kCoth1) < 1e-4);
    }
    {
        // zero drive: <W> = 0, the ratio is undefined.
        DriveProtocol off;
        off.lambda0 = 0.0;
        off.omega = 1.0;
        off.n_cycles = 2.0;
        const auto n0 = p0_statistics(params, off, {});
        const auto n1 = p1_statistics(params, off, {});
        CHECK_THROWS_AS(combined_moment_ratio(n0, n1.moments), DegenerateDenominator);
    }
}

TEST_CASE("time-reversal propagator relations", "[cayley]") {
    // |a_g(t1,t2)|^2 e^{-pi_g(t1,t2)} and friends equal the corresponding
    // reversed-protocol weights at the mirrored times.
    const auto params = ModelParams::with_detailed_balance(0.02, 2.0);
    const auto proto = fig3_drive(0.1);
    const auto rev = proto.reversed();
    const double T = proto.duration();
    const double dt = proto.period() / 2000.0;

    RngStream rng(5150, 0);
    for (int i = 0; i < 10; ++i) {
        double t2 = T * rng.uniform(), t1 = T * rng.uniform();
        if (t2 > t1) std::swap(t2, t1);
        const auto fg = propagate_between(Eigenstate::Ground, t2, t1, params, proto, dt);
        const auto fe = propagate_between(Eigenstate::Excited, t2, t1, params, proto, dt);
        const auto rg = propagate_between(Eigenstate::Ground, T - t1, T - t2, params, rev, dt);
        const auto re = propagate_between(Eigenstate::Excited, T - t1, T - t2, params, rev, dt);
        CHECK(std::norm(fg.a) * std::exp(-fg.pi) ==
              Catch::Approx(std::norm(rg.a) * std::exp(-rg.pi)).margin(1e-8));
        CHECK(std::norm(fg.b) * std::exp(-fg.pi) ==
              Catch::Approx(std::norm(re.a) * std::exp(-re.pi)).margin(1e-8));
        CHECK(std::norm(fe.a) * std::exp(-fe.pi) ==
              Catch::Approx(std::norm(rg.b) * std::exp(-rg.pi)).margin(1e-8));
        CHECK(std::norm(fe.b) * std::exp(-fe.pi) ==
              Catch::Approx(std::norm(re.b) * std::exp(-re.pi)).margin(1e-8));
    }
}

TEST_CASE("per-class jarzynski identity and its negative control", "[cayley]") {
    const auto proto = fig3_drive(0.1);
    PropagatorOptions opt;
    opt.grid_per_cycle = 1000;

    const auto params = ModelParams::with_detailed_balance(0.01, 2.0);
    {
        // no drive, n = 0: both sides are P0
        DriveProtocol off;
        off.lambda0 = 0.0;
        off.omega = 1.0;
        off.n_cycles = 2.0;
        const auto r = reverse_identity_check(params, off, 0, opt);
        CHECK(r.abs_diff < 1e-12);
    }
    const auto r0 = reverse_identity_check(params, proto, 0, opt);
    CHECK(r0.abs_diff < 1e-6);
    const auto r1 = reverse_identity_check(params, proto, 1, opt);
    REQUIRE(r1.converged);
    CHECK(r1.abs_diff < 1e-6);

    // Broken rate detailed balance: the n = 1 identity fails by design.
    // (The n = 0 identity only needs the Gibbs populations, so it stays.)
    const auto broken = ModelParams::with_rates(0.01, 1.5 * params.gamma_up, 2.0);
    const auto b1 = reverse_identity_check(broken, proto, 1, opt);
    CHECK(b1.abs_diff > 1e-3);
}

TEST_CASE("monte carlo conditional work moments match the class values",
          "[cayley][ensemble]") {
    // lambda0 = 0.05 makes the window a pi pulse; 0.1 would be a 2*pi pulse
    // whose zero-jump work is degenerate at W = 0.
    const auto params = ModelParams::with_detailed_balance(0.01, 2.0);
    const auto proto = fig3_drive(0.05);
    PropagatorOptions opt;
    opt.grid_per_cycle = 1000;
    const auto n0 = p0_statistics(params, proto, opt);
    const auto n1 = p1_statistics(params, proto, opt);

    EnsembleOptions eopt;
    eopt.n_trajectories = 30000;
    eopt.seed = 777;
    eopt.dt = proto.period() / 250.0;
    const auto res = run_protocol_ensemble(params, proto, eopt);

    std::map<int, std::vector<double>> by_jumps;
    for (const auto& r : res.records) {
        by_jumps[r.n_emit + r.n_absorb].push_back(static_cast<double>(r.w_over_hw0));
    }
    auto check_class = [&](int n, const CayleyMoments& m) {
        const auto& ws = by_jumps[n];
        REQUIRE(ws.size() > 100);
        double mean = 0.0;
        for (double w : ws) mean += w;
        mean /= static_cast<double>(ws.size());
        double var = 0.0;
        for (double w : ws) var += (w - mean) * (w - mean);
        var /= static_cast<double>(ws.size() - 1);
        const double se = std::sqrt(var / static_cast<double>(ws.size()));
        CHECK(std::abs(mean - m.w_mean()) < 3.0 * std::max(se, 1e-12));
        // class weight against the multinomial error
        const double freq =
            static_cast<double>(ws.size()) / static_cast<double>(res.records.size());
        const double se_p = std::sqrt(m.p * (1.0 - m.p) / static_cast<double>(res.records.size()));
        CHECK(std::abs(freq - m.p) < 3.0 * se_p);
    };
    check_class(0, n0);
    check_class(1, n1.moments);
}
