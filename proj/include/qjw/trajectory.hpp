// trajectory.hpp — Quantum-jump Monte Carlo evolution of a PureState.
//
// Between photon exchanges the normalized amplitudes follow the nonlinear
// no-jump equations (interaction picture, hbar = 1):
//
//   da/dt = -i e^{-i omega0 t} lambda(t) b + (dG/2) |b|^2 a
//   db/dt = -i e^{+i omega0 t} lambda(t) a - (dG/2) |a|^2 b,   dG = G_down - G_up.
//
// A step of size dt carries the jump probability
// dp = dt [ G_up |a|^2 + G_down |b|^2 ]; when a jump fires, the state
// collapses to |g> (emission into the bath) or |e> (absorption).

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qjw/model.hpp"
#include "qjw/rng.hpp"

namespace qjw {

enum class IntegratorKind {
    Rk4,           // classical fixed-step 4th order on the normalized equations
    EulerLiteral,  // first-order non-Hermitian update + renormalization
};

enum class JumpKind { Emission, Absorption };

inline const char* jump_kind_name(JumpKind k) {
    return (k == JumpKind::Emission) ? "emission" : "absorption";
}

struct JumpEvent {
    double time = 0.0;
    JumpKind kind = JumpKind::Emission;
};

struct TrajectorySample {
    double t = 0.0;
    double pop_e = 0.0;
};

struct Trajectory {
    std::vector<JumpEvent> jumps;
    std::vector<TrajectorySample> samples;
    PureState final_state;
};

/// Thrown when a requested step would exceed the dp < 0.1 guard.
class StepTooLarge : public std::runtime_error {
public:
    StepTooLarge(double t, double dt, double delta_p)
        : std::runtime_error("step at t = " + std::to_string(t) + " with dt = " +
                             std::to_string(dt) + " gives jump probability " +
                             std::to_string(delta_p) +
                             " >= 0.1; reduce dt (increase dt_per_cycle)"),
          time(t), dt(dt), delta_p(delta_p) {}
    double time;
    double dt;
    double delta_p;
};

struct AmplitudeDerivatives {
    Complex da_dt;
    Complex db_dt;
};

namespace detail {

/// Drive coupling c(t) = lambda(t) e^{-i omega0 t} entering the amplitude
/// equations. For resonant protocols on a commensurate step lattice the
/// values repeat over one drive period and are served from a table.
class DriveCoupling {
public:
    DriveCoupling(const ModelParams& params, const DriveProtocol& protocol,
                  double t_start, double dt)
        : proto_(protocol), omega0_(params.omega0), t_start_(t_start), half_dt_(0.5 * dt) {
        zero_ = (proto_.lambda0 == 0.0) || (proto_.n_cycles <= 0.0);
        if (zero_) return;
        const double T = proto_.duration();
        const double period = proto_.period();
        const double hpp = period / half_dt_;
        const double jstart = t_start_ / half_dt_;
        const double jT = T / half_dt_;
        const double ratio = omega0_ / proto_.omega;
        const bool commensurate =
            std::abs(ratio - std::round(ratio)) < 1e-9 && std::round(ratio) >= 1.0 &&
            std::abs(hpp - std::round(hpp)) < 1e-9 * hpp &&
            std::abs(jstart - std::round(jstart)) < 1e-9 * std::max(1.0, std::abs(jstart)) &&
            std::abs(jT - std::round(jT)) < 1e-9 * std::max(1.0, jT);
        if (!commensurate) return;
        period_len_ = static_cast<int64_t>(std::llround(hpp));
        offset_ = static_cast<int64_t>(std::llround(jstart));
        j_hi_ = static_cast<int64_t>(std::llround(jT));
        table_.resize(static_cast<size_t>(period_len_));
        for (int64_t j = 0; j < period_len_; ++j) {
            const double t = static_cast<double>(j) * half_dt_;
            const double tf = (proto_.direction == DriveDirection::Forward) ? t : T - t;
            const double lam = proto_.lambda0 * std::sin(proto_.omega * tf);
            table_[static_cast<size_t>(j)] =
                lam * std::exp(Complex(0.0, -omega0_ * t));
        }
        tabulated_ = true;
    }

    /// Coupling at t = t_start + half_index * dt/2.
    Complex at(int64_t half_index) const {
        if (zero_) return {0.0, 0.0};
        if (tabulated_) {
            const int64_t j = half_index + offset_;
            if (j < 0 || j > j_hi_) return {0.0, 0.0};
            return table_[static_cast<size_t>(j % period_len_)];
        }
        const double t = t_start_ + static_cast<double>(half_index) * half_dt_;
        const double lam = drive_value(proto_, t);
        if (lam == 0.0) return {0.0, 0.0};
        return lam * std::exp(Complex(0.0, -omega0_ * t));
    }

    bool always_zero() const { return zero_; }

private:
    DriveProtocol proto_;
    double omega0_;
    double t_start_;
    double half_dt_;
    bool zero_ = false;
    bool tabulated_ = false;
    std::vector<Complex> table_;
    int64_t offset_ = 0;
    int64_t j_hi_ = 0;
    int64_t period_len_ = 1;
};

struct AmpDerivs {
    Complex da, db;
};

/// No-jump derivatives for coupling c and drift dG (= Gamma_down - Gamma_up
/// forward; negated for the time-reversed propagators).
inline AmpDerivs amp_derivs(Complex a, Complex b, Complex c, double drift) {
    const Complex ih(0.0, -1.0);
    return {ih * c * b + 0.5 * drift * std::norm(b) * a,
            ih * std::conj(c) * a - 0.5 * drift * std::norm(a) * b};
}

struct CoreStep {
    Complex a, b;       // normalized post-step amplitudes
    double delta_p;     // jump probability of the step
    double pop_g_eff;   // populations entering delta_p and the branch ratio
    double pop_e_eff;
};

/// One no-jump step. RK4 advances the normalized equations and evaluates
/// dp from the mid-step (trapezoid) populations; the literal first-order
/// mode reproduces the textbook non-Hermitian Euler update with dp taken
/// at the left endpoint.
inline CoreStep no_jump_step_core(Complex a, Complex b, double t, double dt, Complex c0,
                                  Complex cH, Complex c1, const ModelParams& p,
                                  IntegratorKind kind) {
    const double pg0 = std::norm(a), pe0 = std::norm(b);
    CoreStep out{};
    if (kind == IntegratorKind::EulerLiteral) {
        out.pop_g_eff = pg0;
        out.pop_e_eff = pe0;
        out.delta_p = dt * (p.gamma_up * pg0 + p.gamma_down * pe0);
        if (out.delta_p >= 0.1) throw StepTooLarge(t, dt, out.delta_p);
        const Complex ih(0.0, -1.0);
        const Complex an = a + dt * (ih * c0 * b - 0.5 * p.gamma_up * a);
        const Complex bn = b + dt * (ih * std::conj(c0) * a - 0.5 * p.gamma_down * b);
        const double inv = 1.0 / std::sqrt(std::norm(an) + std::norm(bn));
        out.a = an * inv;
        out.b = bn * inv;
        return out;
    }
    const double drift = p.delta_gamma();
    const AmpDerivs k1 = amp_derivs(a, b, c0, drift);
    const AmpDerivs k2 = amp_derivs(a + 0.5 * dt * k1.da, b + 0.5 * dt * k1.db, cH, drift);
    const AmpDerivs k3 = amp_derivs(a + 0.5 * dt * k2.da, b + 0.5 * dt * k2.db, cH, drift);
    const AmpDerivs k4 = amp_derivs(a + dt * k3.da, b + dt * k3.db, c1, drift);
    Complex an = a + (dt / 6.0) * (k1.da + 2.0 * k2.da + 2.0 * k3.da + k4.da);
    Complex bn = b + (dt / 6.0) * (k1.db + 2.0 * k2.db + 2.0 * k3.db + k4.db);
    const double inv = 1.0 / std::sqrt(std::norm(an) + std::norm(bn));
    an *= inv;
    bn *= inv;
    out.a = an;
    out.b = bn;
    out.pop_g_eff = 0.5 * (pg0 + std::norm(an));
    out.pop_e_eff = 0.5 * (pe0 + std::norm(bn));
    out.delta_p = dt * (p.gamma_up * out.pop_g_eff + p.gamma_down * out.pop_e_eff);
    if (out.delta_p >= 0.1) throw StepTooLarge(t, dt, out.delta_p);
    return out;
}

}  // namespace detail

/// Right-hand side of the no-jump amplitude equations.
inline AmplitudeDerivatives no_jump_derivatives(const PureState& state, double t,
                                                const ModelParams& params,
                                                const DriveProtocol& protocol) {
    const double lam = drive_value(protocol, t);
    const Complex c = (lam == 0.0) ? Complex{0.0, 0.0}
                                   : lam * std::exp(Complex(0.0, -params.omega0 * t));
    const auto d = detail::amp_derivs(state.a, state.b, c, params.delta_gamma());
    return {d.da, d.db};
}

struct NoJumpStep {
    PureState state;
    double delta_p = 0.0;
};

/// Deterministic no-jump advance over [t, t+dt] plus the step's jump
/// probability. Throws StepTooLarge when delta_p would reach 0.1.
inline NoJumpStep step_no_jump(const PureState& state, double t, double dt,
                               const ModelParams& params, const DriveProtocol& protocol,
                               IntegratorKind kind = IntegratorKind::Rk4) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_no_jump: dt must be > 0");
    auto coupling_at = [&](double tau) -> Complex {
        const double lam = drive_value(protocol, tau);
        if (lam == 0.0) return {0.0, 0.0};
        return lam * std::exp(Complex(0.0, -params.omega0 * tau));
    };
    const auto core = detail::no_jump_step_core(state.a, state.b, t, dt, coupling_at(t),
                                                coupling_at(t + 0.5 * dt),
                                                coupling_at(t + dt), params, kind);
    return {PureState{core.a, core.b}, core.delta_p};
}

struct StepOutcome {
    bool jumped = false;
    PureState state;       // post-step state (eigenstate if jumped)
    JumpEvent event;       // valid when jumped
    double delta_p = 0.0;
};

/// One Monte Carlo step: draws eps; eps < dp fires a jump, whose kind is
/// selected with probability G_down pop_e / (G_up pop_g + G_down pop_e)
/// for emission. Jumps are placed at the step end time.
inline StepOutcome mc_step(const PureState& state, double t, double dt,
                           const ModelParams& params, const DriveProtocol& protocol,
                           RngStream& rng, IntegratorKind kind = IntegratorKind::Rk4) {
    const NoJumpStep adv = step_no_jump(state, t, dt, params, protocol, kind);
    StepOutcome out;
    out.delta_p = adv.delta_p;
    const double eps = rng.uniform();
    if (eps >= adv.delta_p) {
        out.state = adv.state;
        return out;
    }
    // Branch ratio from the same populations that entered delta_p.
    const double pg = (kind == IntegratorKind::EulerLiteral)
                          ? state.pop_g()
                          : 0.5 * (state.pop_g() + adv.state.pop_g());
    const double pe = (kind == IntegratorKind::EulerLiteral)
                          ? state.pop_e()
                          : 0.5 * (state.pop_e() + adv.state.pop_e());
    const double w_emit = params.gamma_down * pe;
    const double w_abs = params.gamma_up * pg;
    const double p_emit = w_emit / (w_emit + w_abs);
    out.jumped = true;
    if (rng.uniform() < p_emit) {
        out.event = {t + dt, JumpKind::Emission};
        out.state = PureState::ground();
    } else {
        out.event = {t + dt, JumpKind::Absorption};
        out.state = PureState::excited();
    }
    return out;
}

struct TrajectoryOptions {
    double dt = 0.0;             // integration step; must divide the window
    int64_t sample_stride = 0;   // record pop_e every this many steps (0 = none)
    IntegratorKind integrator = IntegratorKind::Rk4;
};

/// Full quantum-jump trajectory over [t_start, t_end] from an eigenstate.
/// After each jump the state restarts from the collapsed eigenstate and the
/// remainder of the step is not re-integrated.
inline Trajectory run_trajectory(Eigenstate initial, double t_start, double t_end,
                                 const ModelParams& params, const DriveProtocol& protocol,
                                 const TrajectoryOptions& opt, RngStream& rng) {
    if (!(opt.dt > 0.0)) throw std::invalid_argument("run_trajectory: dt must be > 0");
    const double span = t_end - t_start;
    const double steps_real = span / opt.dt;
    const int64_t n_steps = static_cast<int64_t>(std::llround(steps_real));
    if (n_steps < 0 || std::abs(steps_real - static_cast<double>(n_steps)) > 1e-6) {
        throw std::invalid_argument("run_trajectory: dt must divide the window");
    }
    const detail::DriveCoupling coupling(params, protocol, t_start, opt.dt);

    Trajectory traj;
    PureState s = eigenstate_to_state(initial);
    if (opt.sample_stride > 0) {
        traj.samples.reserve(static_cast<size_t>(n_steps / opt.sample_stride) + 2);
        traj.samples.push_back({t_start, s.pop_e()});
    }
    for (int64_t k = 0; k < n_steps; ++k) {
        const double t = t_start + static_cast<double>(k) * opt.dt;
        const auto core = detail::no_jump_step_core(
            s.a, s.b, t, opt.dt, coupling.at(2 * k), coupling.at(2 * k + 1),
            coupling.at(2 * k + 2), params, opt.integrator);
        const double eps = rng.uniform();
        if (eps < core.delta_p) {
            const double w_emit = params.gamma_down * core.pop_e_eff;
            const double w_abs = params.gamma_up * core.pop_g_eff;
            const bool emit = rng.uniform() < w_emit / (w_emit + w_abs);
            traj.jumps.push_back({t + opt.dt, emit ? JumpKind::Emission : JumpKind::Absorption});
            s = emit ? PureState::ground() : PureState::excited();
        } else {
            s = {core.a, core.b};
        }
        if (opt.sample_stride > 0 && (k + 1) % opt.sample_stride == 0) {
            traj.samples.push_back({t_start + static_cast<double>(k + 1) * opt.dt, s.pop_e()});
        }
    }
    traj.final_state = s;
    return traj;
}

struct FirstJumpResult {
    bool found = false;
    JumpEvent event;
    PureState state;    // state when the search stopped (collapsed or last no-jump)
    int64_t steps = 0;
};

/// Undriven evolution from `state` at t0 until the first jump, or until
/// t0 + horizon. Used for guardian-photon measurements and trace tails.
inline FirstJumpResult evolve_until_first_jump(PureState state, double t0, double horizon,
                                               double dt, const ModelParams& params,
                                               RngStream& rng,
                                               IntegratorKind kind = IntegratorKind::Rk4) {
    if (!(dt > 0.0)) throw std::invalid_argument("evolve_until_first_jump: dt must be > 0");
    const int64_t n_steps = static_cast<int64_t>(std::ceil(horizon / dt - 1e-9));
    FirstJumpResult out;
    PureState s = state;
    for (int64_t k = 0; k < n_steps; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        const auto core = detail::no_jump_step_core(s.a, s.b, t, dt, {0.0, 0.0}, {0.0, 0.0},
                                                    {0.0, 0.0}, params, kind);
        const double eps = rng.uniform();
        if (eps < core.delta_p) {
            const double w_emit = params.gamma_down * core.pop_e_eff;
            const double w_abs = params.gamma_up * core.pop_g_eff;
            const bool emit = rng.uniform() < w_emit / (w_emit + w_abs);
            out.found = true;
            out.event = {t + dt, emit ? JumpKind::Emission : JumpKind::Absorption};
            out.state = emit ? PureState::ground() : PureState::excited();
            out.steps = k + 1;
            return out;
        }
        s = {core.a, core.b};
    }
    out.state = s;
    out.steps = n_steps;
    return out;
}

}  // namespace qjw
