// cayley.hpp — Semi-analytic work statistics by photon number.
//
// Quantum trajectories branch into classes labelled by the number of
// photons exchanged with the bath (a Cayley tree). The class weights are
// built from no-jump amplitude propagators a_s(t2, t1), b_s(t2, t1)
// (initial eigenstate s at t1) and the accumulated jump exposure
//
//   pi_s(t2, t1) = int_{t1}^{t2} [ G_up |a_s|^2 + G_down |b_s|^2 ] dt,
//
// whose exponential e^{-pi} is the no-jump (Poisson) factor. The zero- and
// one-photon classes are evaluated here in closed quadrature form, together
// with first-order (weak-dissipation) formulas and the time-reversed class
// probabilities P_{R,n} that enter the trajectory-level Jarzynski identity
// P_n <e^{-beta W}>_n = P_{R,n}.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qjw/model.hpp"
#include "qjw/quadrature.hpp"
#include "qjw/trajectory.hpp"

namespace qjw {

class NotResonant : public std::invalid_argument {
public:
    explicit NotResonant(const std::string& what) : std::invalid_argument(what) {}
};

class DegenerateDenominator : public std::domain_error {
public:
    explicit DegenerateDenominator(const std::string& what) : std::domain_error(what) {}
};

struct PropagatorOptions {
    int grid_per_cycle = 2000;  // dense grid and integration step density
    double quad_tol = 1e-9;
    int quad_panels_per_cycle = 8;
    int quad_max_depth = 20;
};

struct TwoTimeValues {
    Complex a{1.0, 0.0};
    Complex b{0.0, 0.0};
    double pi = 0.0;
};

namespace detail {

struct AmpPiState {
    Complex a, b;
    double pi;
};

inline AmpPiState amp_pi_derivs(const AmpPiState& y, Complex c, double drift,
                                const ModelParams& p) {
    const auto d = amp_derivs(y.a, y.b, c, drift);
    return {d.da, d.db, p.gamma_up * std::norm(y.a) + p.gamma_down * std::norm(y.b)};
}

/// One RK4 step of (a, b, pi); amplitudes renormalized afterwards.
inline void amp_pi_step(AmpPiState& y, double t, double dt, const ModelParams& p,
                        const DriveProtocol& proto, double drift) {
    auto coupling = [&](double tau) -> Complex {
        const double lam = drive_value(proto, tau);
        if (lam == 0.0) return {0.0, 0.0};
        return lam * std::exp(Complex(0.0, -p.omega0 * tau));
    };
    const Complex c0 = coupling(t), cH = coupling(t + 0.5 * dt), c1 = coupling(t + dt);
    const auto k1 = amp_pi_derivs(y, c0, drift, p);
    const AmpPiState y2{y.a + 0.5 * dt * k1.a, y.b + 0.5 * dt * k1.b, 0.0};
    const auto k2 = amp_pi_derivs(y2, cH, drift, p);
    const AmpPiState y3{y.a + 0.5 * dt * k2.a, y.b + 0.5 * dt * k2.b, 0.0};
    const auto k3 = amp_pi_derivs(y3, cH, drift, p);
    const AmpPiState y4{y.a + dt * k3.a, y.b + dt * k3.b, 0.0};
    const auto k4 = amp_pi_derivs(y4, c1, drift, p);
    y.a += (dt / 6.0) * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
    y.b += (dt / 6.0) * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
    y.pi += (dt / 6.0) * (k1.pi + 2.0 * k2.pi + 2.0 * k3.pi + k4.pi);
    const double inv = 1.0 / std::sqrt(std::norm(y.a) + std::norm(y.b));
    y.a *= inv;
    y.b *= inv;
}

}  // namespace detail

/// Amplitudes and jump exposure at t_to for the no-jump flow started in
/// `initial` at t_from.
inline TwoTimeValues propagate_between(Eigenstate initial, double t_from, double t_to,
                                       const ModelParams& params, const DriveProtocol& protocol,
                                       double dt_target) {
    TwoTimeValues out;
    detail::AmpPiState y{(initial == Eigenstate::Ground) ? Complex{1.0, 0.0} : Complex{0.0, 0.0},
                         (initial == Eigenstate::Ground) ? Complex{0.0, 0.0} : Complex{1.0, 0.0},
                         0.0};
    const double span = t_to - t_from;
    if (span < 0.0) throw std::invalid_argument("propagate_between: t_to < t_from");
    if (span == 0.0) return {y.a, y.b, 0.0};
    const int64_t n = std::max<int64_t>(1, static_cast<int64_t>(std::ceil(span / dt_target - 1e-12)));
    const double dt = span / static_cast<double>(n);
    const double drift = params.delta_gamma();
    for (int64_t k = 0; k < n; ++k) {
        detail::amp_pi_step(y, t_from + static_cast<double>(k) * dt, dt, params, protocol, drift);
    }
    return {y.a, y.b, y.pi};
}

/// Dense tabulation of both propagator branches on [t1, T], with cubic
/// interpolation of populations and exposure.
struct AmplitudePropagator {
    double t1 = 0.0, T = 0.0, dt = 0.0;
    int64_t n = 0;

    struct Branch {
        std::vector<Complex> a, b;
        std::vector<double> pi;
    };
    Branch from_g, from_e;

    const Branch& branch(Eigenstate s) const {
        return (s == Eigenstate::Ground) ? from_g : from_e;
    }

    double pop_e_at(Eigenstate initial, double t) const {
        return interp(branch(initial), t, /*want_pi=*/false);
    }
    double pi_at(Eigenstate initial, double t) const {
        return interp(branch(initial), t, /*want_pi=*/true);
    }

private:
    double interp(const Branch& br, double t, bool want_pi) const {
        const double u = (t - t1) / dt;
        int64_t i0 = static_cast<int64_t>(std::floor(u)) - 1;
        i0 = std::max<int64_t>(0, std::min(i0, n - 3));
        const double x = u - static_cast<double>(i0);
        auto value = [&](int64_t i) {
            const size_t k = static_cast<size_t>(i0 + i);
            return want_pi ? br.pi[k] : std::norm(br.b[k]);
        };
        const double w0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
        const double w1 = x * (x - 2.0) * (x - 3.0) / 2.0;
        const double w2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
        const double w3 = x * (x - 1.0) * (x - 2.0) / 6.0;
        return w0 * value(0) + w1 * value(1) + w2 * value(2) + w3 * value(3);
    }
};

inline AmplitudePropagator propagate_amplitudes(double t1, double T, const ModelParams& params,
                                                const DriveProtocol& protocol,
                                                const PropagatorOptions& opt = {}) {
    if (!(T > t1)) throw std::invalid_argument("propagate_amplitudes: T must exceed t1");
    AmplitudePropagator prop;
    prop.t1 = t1;
    prop.T = T;
    prop.n = std::max<int64_t>(
        8, static_cast<int64_t>(std::ceil((T - t1) / protocol.period() *
                                          static_cast<double>(opt.grid_per_cycle))));
    prop.dt = (T - t1) / static_cast<double>(prop.n);
    const double drift = params.delta_gamma();

    for (auto init : {Eigenstate::Ground, Eigenstate::Excited}) {
        auto& br = (init == Eigenstate::Ground) ? prop.from_g : prop.from_e;
        br.a.reserve(static_cast<size_t>(prop.n) + 1);
        br.b.reserve(static_cast<size_t>(prop.n) + 1);
        br.pi.reserve(static_cast<size_t>(prop.n) + 1);
        detail::AmpPiState y{
            (init == Eigenstate::Ground) ? Complex{1.0, 0.0} : Complex{0.0, 0.0},
            (init == Eigenstate::Ground) ? Complex{0.0, 0.0} : Complex{1.0, 0.0}, 0.0};
        br.a.push_back(y.a);
        br.b.push_back(y.b);
        br.pi.push_back(0.0);
        for (int64_t k = 0; k < prop.n; ++k) {
            detail::amp_pi_step(y, t1 + static_cast<double>(k) * prop.dt, prop.dt, params,
                                protocol, drift);
            br.a.push_back(y.a);
            br.b.push_back(y.b);
            br.pi.push_back(y.pi);
        }
    }
    return prop;
}

/// Statistics of one photon-number class: the class probability, the
/// conditional moments of W (units of hbar*omega0) and the Jarzynski term
/// P_n <e^{-beta W}>_n.
struct CayleyMoments {
    double p = 0.0;
    double p_w = 0.0;    // P_n <W>_n
    double p_w2 = 0.0;   // P_n <W^2>_n
    double jarzynski = 0.0;

    double w_mean() const { return p_w / p; }
    double w2_mean() const { return p_w2 / p; }
};

inline CayleyMoments p0_statistics(const ModelParams& params, const DriveProtocol& protocol,
                                   const PropagatorOptions& opt = {}) {
    const double T = protocol.duration();
    const double dt = protocol.period() / static_cast<double>(opt.grid_per_cycle);
    const auto pops = params.gibbs();
    const double beta = params.beta_hbar_omega0;

    CayleyMoments out;
    const auto g = propagate_between(Eigenstate::Ground, 0.0, T, params, protocol, dt);
    const double eg = std::exp(-g.pi);
    const double ag2 = std::norm(g.a), bg2 = std::norm(g.b);
    out.p += pops.p_g * eg;
    out.p_w += pops.p_g * eg * bg2;          // g -> e carries W = +1
    out.p_w2 += pops.p_g * eg * bg2;
    out.jarzynski += pops.p_g * eg * (ag2 + bg2 * std::exp(-beta));
    if (pops.p_e > 0.0) {
        const auto e = propagate_between(Eigenstate::Excited, 0.0, T, params, protocol, dt);
        const double ee = std::exp(-e.pi);
        const double ae2 = std::norm(e.a), be2 = std::norm(e.b);
        out.p += pops.p_e * ee;
        out.p_w -= pops.p_e * ee * ae2;      // e -> g carries W = -1
        out.p_w2 += pops.p_e * ee * ae2;
        out.jarzynski += pops.p_e * ee * (ae2 * std::exp(beta) + be2);
    }
    return out;
}

namespace detail {

struct RestartValues {
    double surv_g = 1.0;  // e^{-pi_g(T, t)}
    double surv_e = 1.0;
    double ag2 = 1.0, bg2 = 0.0;  // |a_g(T,t)|^2, |b_g(T,t)|^2
    double ae2 = 0.0, be2 = 1.0;
};

/// Both post-jump propagators from t to T in one pass (shared couplings).
inline RestartValues integrate_restarts(double t, double T, const ModelParams& params,
                                        const DriveProtocol& proto, double dt_target) {
    RestartValues out;
    const double span = T - t;
    if (span <= 0.0) return out;
    const int64_t n =
        std::max<int64_t>(1, static_cast<int64_t>(std::ceil(span / dt_target - 1e-12)));
    const double dt = span / static_cast<double>(n);
    const double drift = params.delta_gamma();
    AmpPiState yg{{1.0, 0.0}, {0.0, 0.0}, 0.0};
    AmpPiState ye{{0.0, 0.0}, {1.0, 0.0}, 0.0};
    auto coupling = [&](double tau) -> Complex {
        const double lam = drive_value(proto, tau);
        if (lam == 0.0) return {0.0, 0.0};
        return lam * std::exp(Complex(0.0, -params.omega0 * tau));
    };
    for (int64_t k = 0; k < n; ++k) {
        const double tk = t + static_cast<double>(k) * dt;
        const Complex c0 = coupling(tk), cH = coupling(tk + 0.5 * dt), c1 = coupling(tk + dt);
        for (AmpPiState* y : {&yg, &ye}) {
            const auto k1 = amp_pi_derivs(*y, c0, drift, params);
            const AmpPiState y2{y->a + 0.5 * dt * k1.a, y->b + 0.5 * dt * k1.b, 0.0};
            const auto k2 = amp_pi_derivs(y2, cH, drift, params);
            const AmpPiState y3{y->a + 0.5 * dt * k2.a, y->b + 0.5 * dt * k2.b, 0.0};
            const auto k3 = amp_pi_derivs(y3, cH, drift, params);
            const AmpPiState y4{y->a + dt * k3.a, y->b + dt * k3.b, 0.0};
            const auto k4 = amp_pi_derivs(y4, c1, drift, params);
            y->a += (dt / 6.0) * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
            y->b += (dt / 6.0) * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
            y->pi += (dt / 6.0) * (k1.pi + 2.0 * k2.pi + 2.0 * k3.pi + k4.pi);
            const double inv = 1.0 / std::sqrt(std::norm(y->a) + std::norm(y->b));
            y->a *= inv;
            y->b *= inv;
        }
    }
    out.surv_g = std::exp(-yg.pi);
    out.surv_e = std::exp(-ye.pi);
    out.ag2 = std::norm(yg.a);
    out.bg2 = std::norm(yg.b);
    out.ae2 = std::norm(ye.a);
    out.be2 = std::norm(ye.b);
    return out;
}

}  // namespace detail

struct OnePhotonResult {
    CayleyMoments moments;
    double quad_error = 0.0;
    bool converged = true;
    int64_t evaluations = 0;
};

/// One-photon class: adaptive quadrature over the jump time of the eight
/// trajectory weights (two initial states x two jump kinds x two final
/// states), with both restart propagators integrated per node.
inline OnePhotonResult p1_statistics(const ModelParams& params, const DriveProtocol& protocol,
                                     const PropagatorOptions& opt = {}) {
    const double T = protocol.duration();
    const auto pops = params.gibbs();
    const double beta = params.beta_hbar_omega0;
    const double dt = protocol.period() / static_cast<double>(opt.grid_per_cycle);

    OnePhotonResult out;
    if (params.gamma_sum() == 0.0) return out;  // integrand proportional to the rates

    const auto fwd = propagate_amplitudes(0.0, T, params, protocol, opt);

    // exp(-beta W) per path, with the W = 0 guard keeping beta = inf finite.
    auto boltz = [&](int w) { return (w == 0) ? 1.0 : std::exp(-beta * w); };

    auto integrand = [&](double t) -> std::vector<double> {
        const auto rs = detail::integrate_restarts(t, T, params, protocol, dt);
        std::vector<double> f(4, 0.0);
        for (auto init : {Eigenstate::Ground, Eigenstate::Excited}) {
            const double p_init = (init == Eigenstate::Ground) ? pops.p_g : pops.p_e;
            if (p_init == 0.0) continue;
            const double pe_t = fwd.pop_e_at(init, t);
            const double outer = p_init * std::exp(-fwd.pi_at(init, t));
            const int u_i = (init == Eigenstate::Ground) ? 0 : 1;
            // absorption at t (Q = -1), restart from |e>
            const double w_abs = outer * params.gamma_up * (1.0 - pe_t) * rs.surv_e;
            if (w_abs > 0.0) {
                const int w_end_g = -1 - u_i;  // final |g>
                const int w_end_e = -u_i;      // final |e>
                f[0] += w_abs;
                f[1] += w_abs * (rs.ae2 * w_end_g + rs.be2 * w_end_e);
                f[2] += w_abs * (rs.ae2 * w_end_g * w_end_g + rs.be2 * w_end_e * w_end_e);
                f[3] += w_abs * (rs.ae2 * boltz(w_end_g) + rs.be2 * boltz(w_end_e));
            }
            // emission at t (Q = +1), restart from |g>
            const double w_emit = outer * params.gamma_down * pe_t * rs.surv_g;
            if (w_emit > 0.0) {
                const int w_end_g = 1 - u_i;
                const int w_end_e = 2 - u_i;
                f[0] += w_emit;
                f[1] += w_emit * (rs.ag2 * w_end_g + rs.bg2 * w_end_e);
                f[2] += w_emit * (rs.ag2 * w_end_g * w_end_g + rs.bg2 * w_end_e * w_end_e);
                f[3] += w_emit * (rs.ag2 * boltz(w_end_g) + rs.bg2 * boltz(w_end_e));
            }
        }
        return f;
    };

    const int panels = std::max(
        8, static_cast<int>(std::ceil(opt.quad_panels_per_cycle * protocol.n_cycles)));
    const auto quad =
        adaptive_simpson_vec(integrand, 4, 0.0, T, opt.quad_tol, panels, opt.quad_max_depth);
    out.moments.p = quad.value[0];
    out.moments.p_w = quad.value[1];
    out.moments.p_w2 = quad.value[2];
    out.moments.jarzynski = quad.value[3];
    out.quad_error = quad.error_estimate;
    out.converged = quad.converged;
    out.evaluations = quad.evaluations;
    return out;
}

/// First-order weak-dissipation formulas for a resonant forward drive.
struct PerturbativeResult {
    CayleyMoments n0;
    CayleyMoments n1;
    double pi_g = 0.0;  // pi_{g,e}(T, 0) to first order in dG
    double pi_e = 0.0;
};

inline PerturbativeResult perturbative_statistics(const ModelParams& params,
                                                  const DriveProtocol& protocol) {
    if (protocol.omega != params.omega0) {
        throw NotResonant("perturbative_statistics: requires a resonant drive (omega = omega0)");
    }
    if (protocol.direction != DriveDirection::Forward) {
        throw NotResonant("perturbative_statistics: requires the forward protocol");
    }
    const double T = protocol.duration();
    const double l0 = protocol.lambda0;
    if (!(l0 > 0.0)) throw NotResonant("perturbative_statistics: requires lambda0 > 0");
    const auto pops = params.gibbs();
    const double gs = params.gamma_sum();
    const double dg = params.delta_gamma();

    const double sinLT = std::sin(l0 * T);
    const double sin2_half = std::pow(std::sin(0.5 * l0 * T), 2);
    const double pol = pops.p_g - pops.p_e;

    PerturbativeResult out;
    out.pi_g = 0.5 * gs * T - 0.5 * (dg / l0) * sinLT;
    out.pi_e = 0.5 * gs * T + 0.5 * (dg / l0) * sinLT;

    out.n0.p = 1.0 - 0.5 * gs * T + pol * 0.5 * (dg / l0) * sinLT;
    out.n0.p_w = pol * (1.0 - 0.5 * gs * T) * sin2_half;
    out.n0.p_w2 = (1.0 - 0.5 * gs * T) * sin2_half;
    out.n0.jarzynski = out.n0.p;

    const double a_term = 0.25 * T - 0.125 * T * std::cos(l0 * T) - sinLT / (8.0 * l0);
    const double b_term = 0.25 * T + 0.125 * T * std::cos(l0 * T) - 3.0 * sinLT / (8.0 * l0);
    out.n1.p = 0.5 * gs * T - pol * 0.5 * (dg / l0) * sinLT;
    out.n1.p_w = dg * a_term +
                 2.0 * (pops.p_g * params.gamma_down - pops.p_e * params.gamma_up) * b_term;
    out.n1.p_w2 = gs * a_term +
                  4.0 * (pops.p_g * params.gamma_down + pops.p_e * params.gamma_up) * b_term;
    out.n1.jarzynski = out.n1.p;
    return out;
}

/// <W^2> / <W> over the combined zero- and one-photon classes, in units of
/// hbar*omega0.
inline double combined_moment_ratio(const CayleyMoments& n0, const CayleyMoments& n1) {
    const double num = n0.p_w2 + n1.p_w2;
    const double den = n0.p_w + n1.p_w;
    if (std::abs(den) < 1e-12 * std::max(1.0, std::abs(num))) {
        throw DegenerateDenominator("combined_moment_ratio: <W> is zero");
    }
    return num / den;
}

struct ReverseIdentity {
    double lhs = 0.0;  // P_n <e^{-beta W}>_n, forward protocol
    double rhs = 0.0;  // P_{R,n}, reversed protocol
    double abs_diff = 0.0;
    bool converged = true;
};

/// Trajectory-level Jarzynski identity for the n-photon class: the
/// Boltzmann-weighted forward class weight equals the plain class
/// probability of the process driven by lambda(T - t) with the same bath.
/// Exact when rates and populations satisfy detailed balance; a broken
/// Gamma_up/Gamma_down ratio makes the two sides measurably differ.
inline ReverseIdentity reverse_identity_check(const ModelParams& params,
                                              const DriveProtocol& protocol, int n,
                                              const PropagatorOptions& opt = {}) {
    if (n != 0 && n != 1) {
        throw std::invalid_argument("reverse_identity_check: n must be 0 or 1");
    }
    ReverseIdentity out;
    if (n == 0) {
        out.lhs = p0_statistics(params, protocol, opt).jarzynski;
        out.rhs = p0_statistics(params, protocol.reversed(), opt).p;
    } else {
        const auto f = p1_statistics(params, protocol, opt);
        const auto r = p1_statistics(params, protocol.reversed(), opt);
        out.lhs = f.moments.jarzynski;
        out.rhs = r.moments.p;
        out.converged = f.converged && r.converged;
    }
    out.abs_diff = std::abs(out.lhs - out.rhs);
    return out;
}

/// Everything the analytics sweep emits for one parameter point.
struct CayleyResult {
    CayleyMoments n0;
    CayleyMoments n1;
    double reverse_p0 = 0.0;
    double reverse_p1 = 0.0;
    double two_photon_bound = 0.0;  // (Gamma_sum T)^2 / 2
    bool converged = true;
};

inline CayleyResult cayley_analysis(const ModelParams& params, const DriveProtocol& protocol,
                                    const PropagatorOptions& opt = {}) {
    CayleyResult out;
    out.n0 = p0_statistics(params, protocol, opt);
    const auto one = p1_statistics(params, protocol, opt);
    out.n1 = one.moments;
    out.converged = one.converged;

    const auto rev_proto = protocol.reversed();
    out.reverse_p0 = p0_statistics(params, rev_proto, opt).p;
    const auto rev_one = p1_statistics(params, rev_proto, opt);
    out.reverse_p1 = rev_one.moments.p;
    out.converged = out.converged && rev_one.converged;

    const double gst = params.gamma_sum() * protocol.duration();
    out.two_photon_bound = 0.5 * gst * gst;
    return out;
}

}  // namespace qjw
