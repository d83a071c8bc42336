// work.hpp — Work and heat bookkeeping for the two-measurement protocol.
//
// A realization samples the initial eigenstate from the Gibbs distribution
// (equivalent to conditioning on the last photon exchanged before the
// drive), runs the quantum-jump dynamics over the drive window, counts the
// exchanged photons as heat, and reads the final eigenstate off the first
// photon exchanged after the drive (the guardian photon). The work is
// W = dU + Q, an integer multiple of hbar*omega0.

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "qjw/model.hpp"
#include "qjw/parallel.hpp"
#include "qjw/quadrature.hpp"
#include "qjw/rng.hpp"
#include "qjw/trajectory.hpp"

namespace qjw {

struct WorkRecord {
    int64_t index = 0;       // trajectory index (RNG stream)
    Eigenstate initial = Eigenstate::Ground;
    Eigenstate final = Eigenstate::Ground;
    int32_t n_emit = 0;      // jumps inside the drive window
    int32_t n_absorb = 0;
    int32_t q_over_hw0 = 0;  // heat released to the bath
    int32_t w_over_hw0 = 0;  // work done by the drive
    double guardian_wait = 0.0;
};

inline Eigenstate sample_initial_state(double p_g, RngStream& rng) {
    if (p_g < 0.0 || p_g > 1.0) throw std::invalid_argument("sample_initial_state: p_g in [0,1]");
    return rng.bernoulli(p_g) ? Eigenstate::Ground : Eigenstate::Excited;
}

/// Q in units of hbar*omega0: emissions minus absorptions inside [t_lo, t_hi].
inline int32_t heat_from_jumps(std::span<const JumpEvent> jumps, double t_lo, double t_hi) {
    int32_t q = 0;
    for (const auto& j : jumps) {
        if (j.time < t_lo || j.time > t_hi) continue;
        q += (j.kind == JumpKind::Emission) ? 1 : -1;
    }
    return q;
}

/// Post-drive excited population under free relaxation,
/// p_e(t) = 1 / (1 + r e^{dG (t-T)}) with r = (1 - p_e(T)) / p_e(T).
inline double relaxation_pe(double pe_T, double delta_gamma, double elapsed) {
    if (pe_T < 0.0 || pe_T > 1.0) throw std::invalid_argument("relaxation_pe: pe_T in [0,1]");
    if (pe_T == 0.0 || pe_T == 1.0) return pe_T;  // exact fixed points
    if (delta_gamma == 0.0 || elapsed == 0.0) return pe_T;
    const double r = (1.0 - pe_T) / pe_T;
    return 1.0 / (1.0 + r * std::exp(delta_gamma * elapsed));
}

/// Probability that the guardian photon reports the excited state,
/// P_E = int_T^inf dt G_down p_e(t) exp(-int_T^t [G_up(1-p_e) + G_down p_e]).
/// Evaluated by adaptive quadrature; analytically this equals p_e(T) for
/// any rates.
struct GuardianProbability {
    double value = 0.0;
    double truncation = 0.0;   // no-jump mass beyond the integration horizon
    double error_estimate = 0.0;
    bool converged = false;
};

inline GuardianProbability guardian_excited_probability(double pe_T, const ModelParams& params,
                                                        double abs_tol = 1e-9) {
    if (pe_T < 0.0 || pe_T > 1.0) {
        throw std::invalid_argument("guardian_excited_probability: pe_T in [0,1]");
    }
    GuardianProbability out;
    if (!(params.gamma_sum() > 0.0)) {
        throw std::invalid_argument("guardian_excited_probability: Gamma_sum must be > 0");
    }
    if (pe_T == 0.0) {
        out.converged = true;
        return out;
    }
    const double dg = params.delta_gamma();
    const double r = (1.0 - pe_T) / pe_T;
    // Accumulated jump exposure; the log form avoids any 1/dG.
    auto exposure = [&](double s) {
        return params.gamma_down * s - std::log1p(r * std::exp(dg * s)) + std::log1p(r);
    };
    auto integrand = [&](double s) {
        const double pe = 1.0 / (1.0 + r * std::exp(dg * s));
        return params.gamma_down * pe * std::exp(-exposure(s));
    };
    // Truncate where the remaining no-jump mass (= p_e(s) e^{-exposure}) is
    // negligible against the tolerance.
    double horizon = 10.0 / params.gamma_sum();
    double tail = relaxation_pe(pe_T, dg, horizon) * std::exp(-exposure(horizon));
    while (tail > 0.1 * abs_tol && horizon < 1e7 / params.gamma_sum()) {
        horizon *= 2.0;
        tail = relaxation_pe(pe_T, dg, horizon) * std::exp(-exposure(horizon));
    }
    const int panels = 64;
    const auto quad = adaptive_simpson(integrand, 0.0, horizon, abs_tol, panels);
    out.value = quad.value;
    out.truncation = tail;
    out.error_estimate = quad.error_estimate + tail;
    out.converged = quad.converged;
    return out;
}

struct GuardianOutcome {
    Eigenstate measured = Eigenstate::Ground;
    double wait_time = 0.0;
    bool timed_out = false;
};

/// Evolves the post-drive state with the drive off until the first photon
/// exchange: an emission reveals the excited state, an absorption the
/// ground state. Gives up (timed_out) after 50 / Gamma_sum.
inline GuardianOutcome measure_by_guardian(const PureState& state_at_T, double T,
                                           const ModelParams& params, double dt,
                                           RngStream& rng,
                                           IntegratorKind kind = IntegratorKind::Rk4) {
    if (!(params.gamma_sum() > 0.0)) {
        throw std::invalid_argument("measure_by_guardian: Gamma_sum must be > 0");
    }
    const double horizon = 50.0 / params.gamma_sum();
    const auto fj = evolve_until_first_jump(state_at_T, T, horizon, dt, params, rng, kind);
    GuardianOutcome out;
    if (!fj.found) {
        out.timed_out = true;
        out.wait_time = horizon;
        return out;
    }
    out.measured =
        (fj.event.kind == JumpKind::Emission) ? Eigenstate::Excited : Eigenstate::Ground;
    out.wait_time = fj.event.time - T;
    return out;
}

struct EnsembleOptions {
    int64_t n_trajectories = 10000;
    uint64_t seed = 1;
    double dt = 0.0;            // 0: drive period / 1000
    double guardian_dt = 0.0;   // 0: 0.02 / Gamma_sum
    int workers = 1;
    IntegratorKind integrator = IntegratorKind::Rk4;
};

struct EnsembleResult {
    std::vector<WorkRecord> records;
    int64_t n_requested = 0;
    int64_t n_timeouts = 0;       // realizations discarded
    bool born_measurement = false;  // isolated system: final state Born-sampled
};

/// Runs n independent realizations of the two-measurement protocol.
/// Deterministic in (seed, index); realizations whose guardian photon never
/// arrives are discarded and counted.
inline EnsembleResult run_protocol_ensemble(const ModelParams& params,
                                            const DriveProtocol& protocol,
                                            const EnsembleOptions& opt) {
    if (opt.n_trajectories < 1) throw std::invalid_argument("run_protocol_ensemble: n >= 1");
    const double T = protocol.duration();
    const double dt = (opt.dt > 0.0) ? opt.dt : protocol.period() / 1000.0;
    const bool isolated = !(params.gamma_sum() > 0.0);
    const double guardian_dt =
        isolated ? 0.0 : ((opt.guardian_dt > 0.0) ? opt.guardian_dt : 0.02 / params.gamma_sum());
    const auto pops = params.gibbs();

    struct Slot {
        WorkRecord rec;
        bool ok = false;
    };
    std::vector<Slot> slots(static_cast<size_t>(opt.n_trajectories));

    TrajectoryOptions topt;
    topt.dt = dt;
    topt.integrator = opt.integrator;

    parallel_for_blocks(opt.n_trajectories, 64, opt.workers, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            RngStream rng(opt.seed, static_cast<uint64_t>(i));
            WorkRecord rec;
            rec.index = i;
            rec.initial = sample_initial_state(pops.p_g, rng);
            const auto traj = run_trajectory(rec.initial, 0.0, T, params, protocol, topt, rng);
            for (const auto& j : traj.jumps) {
                if (j.kind == JumpKind::Emission) {
                    ++rec.n_emit;
                } else {
                    ++rec.n_absorb;
                }
            }
            rec.q_over_hw0 = rec.n_emit - rec.n_absorb;
            bool ok = true;
            if (isolated) {
                rec.final = rng.bernoulli(traj.final_state.pop_e()) ? Eigenstate::Excited
                                                                    : Eigenstate::Ground;
                rec.guardian_wait = 0.0;
            } else {
                const auto g = measure_by_guardian(traj.final_state, T, params, guardian_dt, rng,
                                                   opt.integrator);
                ok = !g.timed_out;
                rec.final = g.measured;
                rec.guardian_wait = g.wait_time;
            }
            if (ok) {
                const int32_t du = static_cast<int32_t>(eigenstate_energy(rec.final)) -
                                   static_cast<int32_t>(eigenstate_energy(rec.initial));
                rec.w_over_hw0 = du + rec.q_over_hw0;
                slots[static_cast<size_t>(i)] = {rec, true};
            }
        }
    });

    EnsembleResult out;
    out.n_requested = opt.n_trajectories;
    out.born_measurement = isolated;
    out.records.reserve(slots.size());
    for (const auto& s : slots) {
        if (s.ok) {
            out.records.push_back(s.rec);
        } else {
            ++out.n_timeouts;
        }
    }
    return out;
}

}  // namespace qjw
