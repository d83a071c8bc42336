// master_equation.hpp — Bloch-Redfield master equation for the driven
// two-level system, used as the deterministic oracle for quantum-jump
// ensemble averages. Interaction picture, no rotating-wave approximation:
//
//   d(sigma_gg)/dt = -2 lambda(t) Im(sigma_ge e^{i omega0 t})
//                    - Gamma_sum sigma_gg + Gamma_down
//   d(sigma_ge)/dt = i lambda(t) e^{-i omega0 t} (2 sigma_gg - 1)
//                    - Gamma_sum sigma_ge / 2

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "qjw/model.hpp"
#include "qjw/trajectory.hpp"

namespace qjw {

struct ReducedDensityMatrix {
    double sigma_gg = 1.0;
    Complex sigma_ge{0.0, 0.0};

    double sigma_ee() const { return 1.0 - sigma_gg; }

    static ReducedDensityMatrix thermal(const ModelParams& params) {
        const auto pops = params.gibbs();
        return {pops.p_g, {0.0, 0.0}};
    }
};

inline ReducedDensityMatrix bloch_redfield_derivatives(const ReducedDensityMatrix& sigma,
                                                       double t, const ModelParams& params,
                                                       const DriveProtocol& protocol) {
    const double lam = drive_value(protocol, t);
    const double gs = params.gamma_sum();
    ReducedDensityMatrix d;
    if (lam != 0.0) {
        const Complex phase = std::exp(Complex(0.0, params.omega0 * t));
        d.sigma_gg = -2.0 * lam * std::imag(sigma.sigma_ge * phase) - gs * sigma.sigma_gg +
                     params.gamma_down;
        d.sigma_ge = Complex(0.0, lam) * std::conj(phase) * (2.0 * sigma.sigma_gg - 1.0) -
                     0.5 * gs * sigma.sigma_ge;
    } else {
        d.sigma_gg = -gs * sigma.sigma_gg + params.gamma_down;
        d.sigma_ge = -0.5 * gs * sigma.sigma_ge;
    }
    return d;
}

struct MasterSolution {
    std::vector<double> t;
    std::vector<double> sigma_ee;
    std::vector<Complex> sigma_ge;
};

/// Fixed-step RK4 integration of the master equation onto t_grid
/// (strictly increasing; each grid interval is one RK4 step, optionally
/// subdivided).
inline MasterSolution integrate_master(const ModelParams& params,
                                       const DriveProtocol& protocol,
                                       const ReducedDensityMatrix& sigma0,
                                       const std::vector<double>& t_grid,
                                       int substeps = 1) {
    if (t_grid.size() < 2) throw std::invalid_argument("integrate_master: need >= 2 grid points");
    if (substeps < 1) substeps = 1;
    MasterSolution sol;
    sol.t = t_grid;
    sol.sigma_ee.reserve(t_grid.size());
    sol.sigma_ge.reserve(t_grid.size());

    ReducedDensityMatrix s = sigma0;
    sol.sigma_ee.push_back(s.sigma_ee());
    sol.sigma_ge.push_back(s.sigma_ge);
    for (size_t i = 0; i + 1 < t_grid.size(); ++i) {
        if (!(t_grid[i + 1] > t_grid[i])) {
            throw std::invalid_argument("integrate_master: t_grid must be increasing");
        }
        const double h = (t_grid[i + 1] - t_grid[i]) / substeps;
        for (int m = 0; m < substeps; ++m) {
            const double t = t_grid[i] + m * h;
            const auto k1 = bloch_redfield_derivatives(s, t, params, protocol);
            ReducedDensityMatrix s2{s.sigma_gg + 0.5 * h * k1.sigma_gg,
                                    s.sigma_ge + 0.5 * h * k1.sigma_ge};
            const auto k2 = bloch_redfield_derivatives(s2, t + 0.5 * h, params, protocol);
            ReducedDensityMatrix s3{s.sigma_gg + 0.5 * h * k2.sigma_gg,
                                    s.sigma_ge + 0.5 * h * k2.sigma_ge};
            const auto k3 = bloch_redfield_derivatives(s3, t + 0.5 * h, params, protocol);
            ReducedDensityMatrix s4{s.sigma_gg + h * k3.sigma_gg, s.sigma_ge + h * k3.sigma_ge};
            const auto k4 = bloch_redfield_derivatives(s4, t + h, params, protocol);
            s.sigma_gg += (h / 6.0) * (k1.sigma_gg + 2.0 * k2.sigma_gg + 2.0 * k3.sigma_gg +
                                       k4.sigma_gg);
            s.sigma_ge += (h / 6.0) * (k1.sigma_ge + 2.0 * k2.sigma_ge + 2.0 * k3.sigma_ge +
                                       k4.sigma_ge);
        }
        sol.sigma_ee.push_back(s.sigma_ee());
        sol.sigma_ge.push_back(s.sigma_ge);
    }
    return sol;
}

/// Sup over shared sample times of |mean pop_e - sigma_ee|. Trajectory
/// sample grids must be a subset of the master-equation grid (no
/// interpolation).
inline double compare_ensemble(const std::vector<Trajectory>& trajectories,
                               const MasterSolution& sol) {
    if (trajectories.empty()) throw std::invalid_argument("compare_ensemble: no trajectories");
    const auto& ref = trajectories.front().samples;
    if (ref.empty()) throw std::invalid_argument("compare_ensemble: trajectories carry no samples");

    // Map each sample time onto the master grid.
    std::vector<size_t> grid_index(ref.size());
    size_t j = 0;
    for (size_t i = 0; i < ref.size(); ++i) {
        while (j < sol.t.size() && sol.t[j] < ref[i].t - 1e-9) ++j;
        if (j >= sol.t.size() || std::abs(sol.t[j] - ref[i].t) > 1e-9) {
            throw std::invalid_argument("compare_ensemble: sample times not on the master grid");
        }
        grid_index[i] = j;
    }

    const double inv_n = 1.0 / static_cast<double>(trajectories.size());
    double sup = 0.0;
    std::vector<double> acc(ref.size(), 0.0), comp(ref.size(), 0.0);
    for (const auto& traj : trajectories) {
        if (traj.samples.size() != ref.size()) {
            throw std::invalid_argument("compare_ensemble: inconsistent sample grids");
        }
        for (size_t i = 0; i < ref.size(); ++i) {
            // Kahan accumulation keeps the mean independent of magnitude drift.
            const double y = traj.samples[i].pop_e - comp[i];
            const double t = acc[i] + y;
            comp[i] = (t - acc[i]) - y;
            acc[i] = t;
        }
    }
    for (size_t i = 0; i < ref.size(); ++i) {
        const double diff = std::abs(acc[i] * inv_n - sol.sigma_ee[grid_index[i]]);
        if (diff > sup) sup = diff;
    }
    return sup;
}

}  // namespace qjw
