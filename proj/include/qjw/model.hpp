// model.hpp — Two-level system parameters, drive protocols, pure states.
//
// Unit conventions used throughout the library: hbar = 1 and omega0 = 1,
// i.e. energies are measured in units of hbar*omega0, times in 1/omega0 and
// rates in omega0. All types here are immutable value objects once built.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qjw {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct GibbsPopulations {
    double p_g;
    double p_e;
};

/// Thermal occupation of the undriven two-level system,
/// p_g = 1/(1 + e^{-beta}), p_e = 1 - p_g. beta is the dimensionless
/// inverse temperature beta*hbar*omega0; +infinity selects T = 0.
inline GibbsPopulations gibbs_populations(double beta_hbar_omega0) {
    if (std::isnan(beta_hbar_omega0) || beta_hbar_omega0 < 0.0) {
        throw std::invalid_argument(
            "gibbs_populations: beta_hbar_omega0 must be >= 0 (got " +
            std::to_string(beta_hbar_omega0) + ")");
    }
    const double w = std::exp(-beta_hbar_omega0);  // exp(-inf) == 0
    const double p_g = 1.0 / (1.0 + w);
    return {p_g, 1.0 - p_g};
}

/// Detailed balance: Gamma_up = Gamma_down * e^{-beta*hbar*omega0}.
inline double rates_from_detailed_balance(double gamma_down,
                                          double beta_hbar_omega0) {
    if (gamma_down < 0.0) {
        throw std::invalid_argument("rates_from_detailed_balance: gamma_down must be >= 0");
    }
    if (std::isnan(beta_hbar_omega0) || beta_hbar_omega0 < 0.0) {
        throw std::invalid_argument("rates_from_detailed_balance: beta_hbar_omega0 must be >= 0");
    }
    return gamma_down * std::exp(-beta_hbar_omega0);
}

/// Physical parameters of the dissipative two-level system.
///
/// gamma_down is the photon emission rate (|e> -> |g>, photon into the
/// bath) and gamma_up the absorption rate (|g> -> |e>). For a thermal
/// bath they satisfy detailed balance; with_rates() allows deliberately
/// broken ratios for negative tests.
struct ModelParams {
    double omega0 = 1.0;            // fixed by the unit convention
    double beta_hbar_omega0 = 1.0;  // dimensionless inverse temperature
    double gamma_down = 0.0;
    double gamma_up = 0.0;

    static ModelParams with_detailed_balance(double gamma_down, double beta_hbar_omega0) {
        ModelParams p;
        p.beta_hbar_omega0 = beta_hbar_omega0;
        p.gamma_down = gamma_down;
        p.gamma_up = rates_from_detailed_balance(gamma_down, beta_hbar_omega0);
        return p;
    }

    static ModelParams with_rates(double gamma_down, double gamma_up,
                                  double beta_hbar_omega0) {
        if (gamma_down < 0.0 || gamma_up < 0.0) {
            throw std::invalid_argument("ModelParams: rates must be >= 0");
        }
        ModelParams p;
        p.beta_hbar_omega0 = beta_hbar_omega0;
        p.gamma_down = gamma_down;
        p.gamma_up = gamma_up;
        return p;
    }

    double delta_gamma() const { return gamma_down - gamma_up; }
    double gamma_sum() const { return gamma_down + gamma_up; }

    GibbsPopulations gibbs() const { return gibbs_populations(beta_hbar_omega0); }
};

enum class DriveDirection { Forward, Reversed };

/// Sinusoidal drive window lambda(t) = lambda0 * sin(omega t) on [0, T],
/// zero outside; T is expressed as a (possibly fractional) number of
/// drive cycles. The reversed protocol evaluates the forward one at T - t.
struct DriveProtocol {
    double lambda0 = 0.0;       // amplitude, units of hbar*omega0
    double omega = 1.0;         // drive frequency, units of omega0
    double n_cycles = 0.0;      // duration in drive cycles
    DriveDirection direction = DriveDirection::Forward;

    double period() const { return kTwoPi / omega; }
    double duration() const { return n_cycles * period(); }

    bool is_resonant(double omega0 = 1.0) const { return omega == omega0; }

    DriveProtocol reversed() const {
        DriveProtocol r = *this;
        r.direction = (direction == DriveDirection::Forward) ? DriveDirection::Reversed
                                                             : DriveDirection::Forward;
        return r;
    }

    /// Resonant pulse of duration pi/lambda0 (a pi-pulse: it swaps the
    /// eigenstates up to counter-rotating corrections).
    static DriveProtocol pi_pulse(double lambda0, double omega = 1.0) {
        DriveProtocol p;
        p.lambda0 = lambda0;
        p.omega = omega;
        p.n_cycles = (std::numbers::pi / lambda0) / (kTwoPi / omega);
        return p;
    }
};

inline double drive_value(const DriveProtocol& protocol, double t) {
    const double T = protocol.duration();
    const double tf = (protocol.direction == DriveDirection::Forward) ? t : T - t;
    if (tf < 0.0 || tf > T) return 0.0;
    return protocol.lambda0 * std::sin(protocol.omega * tf);
}

/// |psi> = a|g> + b|e>, kept normalized by the evolution routines.
struct PureState {
    Complex a{1.0, 0.0};
    Complex b{0.0, 0.0};

    double pop_g() const { return std::norm(a); }
    double pop_e() const { return std::norm(b); }
    double norm2() const { return std::norm(a) + std::norm(b); }

    PureState normalized() const {
        const double n = std::sqrt(norm2());
        return {a / n, b / n};
    }

    static PureState ground() { return {Complex{1.0, 0.0}, Complex{0.0, 0.0}}; }
    static PureState excited() { return {Complex{0.0, 0.0}, Complex{1.0, 0.0}}; }
};

enum class Eigenstate { Ground, Excited };

inline PureState eigenstate_to_state(Eigenstate s) {
    return (s == Eigenstate::Ground) ? PureState::ground() : PureState::excited();
}

inline double eigenstate_energy(Eigenstate s) {
    return (s == Eigenstate::Ground) ? 0.0 : 1.0;  // units of hbar*omega0
}

inline const char* eigenstate_name(Eigenstate s) {
    return (s == Eigenstate::Ground) ? "g" : "e";
}

}  // namespace qjw
