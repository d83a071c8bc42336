// stats.hpp — Ensemble statistics for work records: integer-binned
// histograms, plug-in moments, the Jarzynski average e^{-beta W}, and
// percentile-bootstrap standard errors and intervals.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "qjw/rng.hpp"
#include "qjw/work.hpp"

namespace qjw {

/// Counts per integer value of W / (hbar*omega0).
struct WorkHistogram {
    int32_t w_min = 0;
    std::vector<int64_t> counts;
    int64_t total = 0;

    int32_t w_max() const { return w_min + static_cast<int32_t>(counts.size()) - 1; }

    int64_t count_at(int32_t w) const {
        if (w < w_min || w > w_max()) return 0;
        return counts[static_cast<size_t>(w - w_min)];
    }

    double probability(int32_t w) const {
        return total == 0 ? 0.0 : static_cast<double>(count_at(w)) / static_cast<double>(total);
    }

    int occupied_bins() const {
        int n = 0;
        for (int64_t c : counts) n += (c > 0) ? 1 : 0;
        return n;
    }

    double mass_outside(int32_t lo, int32_t hi) const {
        if (total == 0) return 0.0;
        int64_t inside = 0;
        for (int32_t w = lo; w <= hi; ++w) inside += count_at(w);
        return static_cast<double>(total - inside) / static_cast<double>(total);
    }

    void merge(const WorkHistogram& other) {
        if (other.total == 0) return;
        if (total == 0) {
            *this = other;
            return;
        }
        const int32_t lo = std::min(w_min, other.w_min);
        const int32_t hi = std::max(w_max(), other.w_max());
        std::vector<int64_t> merged(static_cast<size_t>(hi - lo + 1), 0);
        for (int32_t w = w_min; w <= w_max(); ++w) {
            merged[static_cast<size_t>(w - lo)] += count_at(w);
        }
        for (int32_t w = other.w_min; w <= other.w_max(); ++w) {
            merged[static_cast<size_t>(w - lo)] += other.count_at(w);
        }
        w_min = lo;
        counts = std::move(merged);
        total += other.total;
    }
};

inline WorkHistogram histogram(std::span<const WorkRecord> records) {
    WorkHistogram h;
    if (records.empty()) return h;
    int32_t lo = records.front().w_over_hw0, hi = lo;
    for (const auto& r : records) {
        lo = std::min(lo, r.w_over_hw0);
        hi = std::max(hi, r.w_over_hw0);
    }
    h.w_min = lo;
    h.counts.assign(static_cast<size_t>(hi - lo + 1), 0);
    for (const auto& r : records) {
        ++h.counts[static_cast<size_t>(r.w_over_hw0 - lo)];
        ++h.total;
    }
    return h;
}

struct EstimatorSummary {
    double value = 0.0;
    double se = 0.0;      // bootstrap standard error
    double ci_lo = 0.0;   // percentile 2.5%
    double ci_hi = 0.0;   // percentile 97.5%
};

struct EnsembleSummary {
    int64_t n = 0;
    int n_bootstrap = 0;
    EstimatorSummary mean_w;      // units of hbar*omega0
    EstimatorSummary mean_w2;
    EstimatorSummary ratio;       // <W^2> / (hbar*omega0 <W>)
    bool ratio_defined = false;   // |<W>| >= 3 SE(<W>)
    EstimatorSummary jarzynski;   // <e^{-beta W}>
};

namespace detail {

inline EstimatorSummary summarize_replicates(double value, std::vector<double>& reps) {
    EstimatorSummary s;
    s.value = value;
    if (reps.empty()) return s;
    double mean = 0.0;
    for (double r : reps) mean += r;
    mean /= static_cast<double>(reps.size());
    double var = 0.0;
    for (double r : reps) var += (r - mean) * (r - mean);
    var /= std::max<size_t>(1, reps.size() - 1);
    s.se = std::sqrt(var);
    std::sort(reps.begin(), reps.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(reps.size() - 1);
        const size_t i = static_cast<size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        return (i + 1 < reps.size()) ? (1.0 - frac) * reps[i] + frac * reps[i + 1] : reps[i];
    };
    s.ci_lo = quantile(0.025);
    s.ci_hi = quantile(0.975);
    return s;
}

}  // namespace detail

/// Plug-in estimators with percentile-bootstrap errors. W is an exact
/// integer per record, so all sums run over the per-value counts and are
/// order-insensitive by construction.
inline EnsembleSummary summarize(std::span<const WorkRecord> records, double beta,
                                 int n_bootstrap, RngStream& rng) {
    if (records.empty()) throw std::invalid_argument("summarize: no records");
    if (n_bootstrap < 0) throw std::invalid_argument("summarize: n_bootstrap >= 0");

    EnsembleSummary out;
    out.n = static_cast<int64_t>(records.size());
    out.n_bootstrap = n_bootstrap;

    const WorkHistogram h = histogram(records);
    const int32_t w_lo = h.w_min;
    const size_t n_vals = h.counts.size();
    std::vector<double> boltz(n_vals);
    for (size_t i = 0; i < n_vals; ++i) {
        const int32_t w = w_lo + static_cast<int32_t>(i);
        boltz[i] = (w == 0) ? 1.0 : std::exp(-beta * static_cast<double>(w));
    }

    auto estimates = [&](const std::vector<int64_t>& counts, int64_t total, double est[3]) {
        // exact integer sums for W and W^2
        int64_t sw = 0, sw2 = 0;
        double sj = 0.0;
        for (size_t i = 0; i < counts.size(); ++i) {
            const int64_t w = w_lo + static_cast<int64_t>(i);
            sw += counts[i] * w;
            sw2 += counts[i] * w * w;
            sj += static_cast<double>(counts[i]) * boltz[i];
        }
        const double inv = 1.0 / static_cast<double>(total);
        est[0] = static_cast<double>(sw) * inv;
        est[1] = static_cast<double>(sw2) * inv;
        est[2] = sj * inv;
    };

    double base[3];
    estimates(h.counts, h.total, base);

    // Bootstrap: resample N records (equivalently their W values) per
    // replicate; the ratio replicate reuses the same resample.
    std::vector<double> reps_w, reps_w2, reps_j, reps_ratio;
    reps_w.reserve(static_cast<size_t>(n_bootstrap));
    reps_w2.reserve(static_cast<size_t>(n_bootstrap));
    reps_j.reserve(static_cast<size_t>(n_bootstrap));
    reps_ratio.reserve(static_cast<size_t>(n_bootstrap));
    std::vector<int64_t> resample(n_vals);
    const auto n = static_cast<uint64_t>(records.size());
    std::vector<uint16_t> w_bin(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        w_bin[i] = static_cast<uint16_t>(records[i].w_over_hw0 - w_lo);
    }
    for (int b = 0; b < n_bootstrap; ++b) {
        std::fill(resample.begin(), resample.end(), 0);
        for (uint64_t i = 0; i < n; ++i) {
            const auto idx = static_cast<size_t>(rng.uniform() * static_cast<double>(n));
            ++resample[w_bin[std::min<size_t>(idx, w_bin.size() - 1)]];
        }
        double est[3];
        estimates(resample, h.total, est);
        reps_w.push_back(est[0]);
        reps_w2.push_back(est[1]);
        reps_j.push_back(est[2]);
        if (est[0] != 0.0) reps_ratio.push_back(est[1] / est[0]);
    }

    out.mean_w = detail::summarize_replicates(base[0], reps_w);
    out.mean_w2 = detail::summarize_replicates(base[1], reps_w2);
    out.jarzynski = detail::summarize_replicates(base[2], reps_j);
    out.ratio_defined = std::abs(base[0]) >= 3.0 * out.mean_w.se && base[0] != 0.0;
    if (out.ratio_defined) {
        out.ratio = detail::summarize_replicates(base[1] / base[0], reps_ratio);
    }
    return out;
}

}  // namespace qjw
