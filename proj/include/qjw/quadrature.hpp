// quadrature.hpp — Adaptive Simpson quadrature, scalar and vector-valued.
//
// The interval is first cut into a fixed number of panels (callers pick
// enough to resolve the fastest oscillation), then each panel is refined
// recursively with the usual Richardson acceptance test.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace qjw {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
    int64_t evaluations = 0;
};

namespace detail {

template <typename F>
void simpson_recurse(const F& f, double a, double m, double b, double fa, double fm, double fb,
                     double whole, double tol, int depth, QuadratureResult& out) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    out.evaluations += 2;
    const double h6 = (b - a) / 12.0;
    const double left = h6 * (fa + 4.0 * flm + fm);
    const double right = h6 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        out.value += left + right + delta / 15.0;
        out.error_estimate += std::abs(delta) / 15.0;
        if (depth <= 0 && std::abs(delta) > 15.0 * tol) out.converged = false;
        return;
    }
    simpson_recurse(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
    simpson_recurse(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

}  // namespace detail

template <typename F>
QuadratureResult adaptive_simpson(const F& f, double a, double b, double abs_tol,
                                  int initial_panels = 8, int max_depth = 24) {
    if (!(b > a)) {
        if (b == a) return {};
        throw std::invalid_argument("adaptive_simpson: b must be >= a");
    }
    if (initial_panels < 1) initial_panels = 1;
    QuadratureResult out;
    const double h = (b - a) / initial_panels;
    const double panel_tol = abs_tol / initial_panels;
    for (int p = 0; p < initial_panels; ++p) {
        const double pa = a + p * h;
        const double pb = (p + 1 == initial_panels) ? b : pa + h;
        const double pm = 0.5 * (pa + pb);
        const double fa = f(pa), fm = f(pm), fb = f(pb);
        out.evaluations += 3;
        const double whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
        detail::simpson_recurse(f, pa, pm, pb, fa, fm, fb, whole, panel_tol, max_depth, out);
    }
    return out;
}

struct VectorQuadratureResult {
    std::vector<double> value;
    double error_estimate = 0.0;
    bool converged = true;
    int64_t evaluations = 0;
};

namespace detail {

using VecF = std::function<std::vector<double>(double)>;

inline void vec_axpy(std::vector<double>& y, double alpha, const std::vector<double>& x) {
    for (size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

inline void simpson_recurse_vec(const VecF& f, double a, double m, double b,
                                const std::vector<double>& fa, const std::vector<double>& fm,
                                const std::vector<double>& fb, const std::vector<double>& whole,
                                double tol, int depth, VectorQuadratureResult& out) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const auto flm = f(lm), frm = f(rm);
    out.evaluations += 2;
    const size_t dim = fa.size();
    const double h6 = (b - a) / 12.0;
    std::vector<double> left(dim), right(dim);
    double max_delta = 0.0;
    for (size_t i = 0; i < dim; ++i) {
        left[i] = h6 * (fa[i] + 4.0 * flm[i] + fm[i]);
        right[i] = h6 * (fm[i] + 4.0 * frm[i] + fb[i]);
        max_delta = std::max(max_delta, std::abs(left[i] + right[i] - whole[i]));
    }
    if (depth <= 0 || max_delta <= 15.0 * tol) {
        for (size_t i = 0; i < dim; ++i) {
            const double delta = left[i] + right[i] - whole[i];
            out.value[i] += left[i] + right[i] + delta / 15.0;
        }
        out.error_estimate += max_delta / 15.0;
        if (depth <= 0 && max_delta > 15.0 * tol) out.converged = false;
        return;
    }
    simpson_recurse_vec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
    simpson_recurse_vec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

}  // namespace detail

/// Integrates all components of f simultaneously; the refinement decision
/// uses the max-norm over components, so every output shares one node set.
inline VectorQuadratureResult adaptive_simpson_vec(const detail::VecF& f, size_t dim, double a,
                                                   double b, double abs_tol,
                                                   int initial_panels = 8, int max_depth = 24) {
    VectorQuadratureResult out;
    out.value.assign(dim, 0.0);
    if (!(b > a)) {
        if (b == a) return out;
        throw std::invalid_argument("adaptive_simpson_vec: b must be >= a");
    }
    if (initial_panels < 1) initial_panels = 1;
    const double h = (b - a) / initial_panels;
    const double panel_tol = abs_tol / initial_panels;
    for (int p = 0; p < initial_panels; ++p) {
        const double pa = a + p * h;
        const double pb = (p + 1 == initial_panels) ? b : pa + h;
        const double pm = 0.5 * (pa + pb);
        const auto fa = f(pa), fm = f(pm), fb = f(pb);
        out.evaluations += 3;
        std::vector<double> whole(dim);
        for (size_t i = 0; i < dim; ++i) {
            whole[i] = (pb - pa) / 6.0 * (fa[i] + 4.0 * fm[i] + fb[i]);
        }
        detail::simpson_recurse_vec(f, pa, pm, pb, fa, fm, fb, whole, panel_tol, max_depth, out);
    }
    return out;
}

}  // namespace qjw
