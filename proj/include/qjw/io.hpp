// io.hpp — Run configuration, CSV emission and self-contained SVG plots.
//
// All numeric output goes through snprintf with C-locale semantics and
// fixed formats, so identical inputs produce byte-identical files on any
// worker count.

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qjw/cayley.hpp"
#include "qjw/master_equation.hpp"
#include "qjw/model.hpp"
#include "qjw/stats.hpp"
#include "qjw/trajectory.hpp"
#include "qjw/work.hpp"

namespace qjw {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
    double beta_hbar_omega0 = 1.0;
    double gamma_down = 0.1;
    double gamma_up = -1.0;  // < 0: derive from detailed balance
    double lambda0 = 0.1;
    double n_cycles = 8.0;
    double omega_over_omega0 = 1.0;
    uint64_t seed = 1;
    int64_t n_trajectories = 10000;
    int64_t dt_per_cycle = 1000;
    int64_t samples_per_cycle = 10;
    int64_t n_bootstrap = 1000;
    int workers = 1;
    double prelude_cycles = 8.0;
    double tail_cycles = 8.0;
    std::string out_dir = "out";
    std::string integrator = "rk4";
    bool break_detailed_balance = false;
    std::vector<double> lambda0_list{0.02, 0.05, 0.1};
    std::vector<double> gamma_down_list{0.005, 0.01, 0.015, 0.02};

    bool operator==(const RunConfig&) const = default;

    ModelParams params() const {
        ModelParams p = (gamma_up < 0.0)
                            ? ModelParams::with_detailed_balance(gamma_down, beta_hbar_omega0)
                            : ModelParams::with_rates(gamma_down, gamma_up, beta_hbar_omega0);
        if (break_detailed_balance) p.gamma_up *= 1.5;
        return p;
    }

    DriveProtocol protocol() const {
        DriveProtocol proto;
        proto.lambda0 = lambda0;
        proto.omega = omega_over_omega0;
        proto.n_cycles = n_cycles;
        return proto;
    }

    double dt() const { return protocol().period() / static_cast<double>(dt_per_cycle); }

    IntegratorKind integrator_kind() const {
        if (integrator == "rk4") return IntegratorKind::Rk4;
        if (integrator == "euler") return IntegratorKind::EulerLiteral;
        throw ConfigError("integrator: expected 'rk4' or 'euler', got '" + integrator + "'");
    }

    void validate() const {
        auto fail = [](const std::string& field, const std::string& why) {
            throw ConfigError(field + ": " + why);
        };
        if (std::isnan(beta_hbar_omega0) || beta_hbar_omega0 < 0.0) {
            fail("beta_hbar_omega0", "must be >= 0");
        }
        if (gamma_down < 0.0) fail("gamma_down", "must be >= 0");
        if (lambda0 < 0.0) fail("lambda0", "must be >= 0");
        if (!(n_cycles > 0.0)) fail("n_cycles", "must be > 0");
        if (!(omega_over_omega0 > 0.0)) fail("omega_over_omega0", "must be > 0");
        if (n_trajectories < 1) fail("n_trajectories", "must be >= 1");
        if (dt_per_cycle < 1) fail("dt_per_cycle", "must be >= 1");
        if (samples_per_cycle < 1) fail("samples_per_cycle", "must be >= 1");
        if (n_bootstrap < 0) fail("n_bootstrap", "must be >= 0");
        if (workers < 0) fail("workers", "must be >= 0 (0 = all cores)");
        if (prelude_cycles < 0.0) fail("prelude_cycles", "must be >= 0");
        if (tail_cycles < 0.0) fail("tail_cycles", "must be >= 0");
        integrator_kind();
        for (double l : lambda0_list) {
            if (l < 0.0) fail("lambda0_list", "entries must be >= 0");
        }
        for (double g : gamma_down_list) {
            if (g < 0.0) fail("gamma_down_list", "entries must be >= 0");
        }
    }
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_fixed(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

inline double parse_double(const std::string& key, const std::string& s) {
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a number: '" + s + "'");
    }
}

inline int64_t parse_int(const std::string& key, const std::string& s) {
    try {
        size_t pos = 0;
        const int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an integer: '" + s + "'");
    }
}

inline uint64_t parse_uint(const std::string& key, const std::string& s) {
    try {
        size_t pos = 0;
        const uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an unsigned integer: '" + s + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError(key + ": not a boolean: '" + s + "'");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(parse_double(key, item.substr(b, e - b + 1)));
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

inline std::string format_list(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += fmt_double(v[i]);
    }
    return s;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return (b == std::string::npos) ? std::string{} : s.substr(b, e - b + 1);
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key == "beta_hbar_omega0") {
            cfg.beta_hbar_omega0 = detail::parse_double(key, val);
        } else if (key == "gamma_down") {
            cfg.gamma_down = detail::parse_double(key, val);
        } else if (key == "gamma_up") {
            cfg.gamma_up = (val == "auto") ? -1.0 : detail::parse_double(key, val);
        } else if (key == "lambda0") {
            cfg.lambda0 = detail::parse_double(key, val);
        } else if (key == "n_cycles") {
            cfg.n_cycles = detail::parse_double(key, val);
        } else if (key == "omega_over_omega0") {
            cfg.omega_over_omega0 = detail::parse_double(key, val);
        } else if (key == "seed") {
            cfg.seed = detail::parse_uint(key, val);
        } else if (key == "n_trajectories") {
            cfg.n_trajectories = detail::parse_int(key, val);
        } else if (key == "dt_per_cycle") {
            cfg.dt_per_cycle = detail::parse_int(key, val);
        } else if (key == "samples_per_cycle") {
            cfg.samples_per_cycle = detail::parse_int(key, val);
        } else if (key == "n_bootstrap") {
            cfg.n_bootstrap = detail::parse_int(key, val);
        } else if (key == "workers") {
            cfg.workers = static_cast<int>(detail::parse_int(key, val));
        } else if (key == "prelude_cycles") {
            cfg.prelude_cycles = detail::parse_double(key, val);
        } else if (key == "tail_cycles") {
            cfg.tail_cycles = detail::parse_double(key, val);
        } else if (key == "out_dir") {
            cfg.out_dir = val;
        } else if (key == "integrator") {
            cfg.integrator = val;
        } else if (key == "break_detailed_balance") {
            cfg.break_detailed_balance = detail::parse_bool(key, val);
        } else if (key == "lambda0_list") {
            cfg.lambda0_list = detail::parse_list(key, val);
        } else if (key == "gamma_down_list") {
            cfg.gamma_down_list = detail::parse_list(key, val);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    return cfg;
}

inline std::string emit_config(const RunConfig& c) {
    using detail::fmt_double;
    std::string s;
    s += "beta_hbar_omega0 = " + fmt_double(c.beta_hbar_omega0) + "\n";
    s += "gamma_down = " + fmt_double(c.gamma_down) + "\n";
    s += (c.gamma_up < 0.0) ? std::string("gamma_up = auto\n")
                            : "gamma_up = " + fmt_double(c.gamma_up) + "\n";
    s += "lambda0 = " + fmt_double(c.lambda0) + "\n";
    s += "n_cycles = " + fmt_double(c.n_cycles) + "\n";
    s += "omega_over_omega0 = " + fmt_double(c.omega_over_omega0) + "\n";
    s += "seed = " + std::to_string(c.seed) + "\n";
    s += "n_trajectories = " + std::to_string(c.n_trajectories) + "\n";
    s += "dt_per_cycle = " + std::to_string(c.dt_per_cycle) + "\n";
    s += "samples_per_cycle = " + std::to_string(c.samples_per_cycle) + "\n";
    s += "n_bootstrap = " + std::to_string(c.n_bootstrap) + "\n";
    s += "workers = " + std::to_string(c.workers) + "\n";
    s += "prelude_cycles = " + fmt_double(c.prelude_cycles) + "\n";
    s += "tail_cycles = " + fmt_double(c.tail_cycles) + "\n";
    s += "out_dir = " + c.out_dir + "\n";
    s += "integrator = " + c.integrator + "\n";
    s += "break_detailed_balance = " + std::string(c.break_detailed_balance ? "true" : "false") +
         "\n";
    s += "lambda0_list = " + detail::format_list(c.lambda0_list) + "\n";
    s += "gamma_down_list = " + detail::format_list(c.gamma_down_list) + "\n";
    return s;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// CSV and metadata emission

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

}  // namespace detail

inline void write_trace_csv(std::ostream& out, const Trajectory& traj) {
    out << "t,pop_e,jump_flag,jump_kind\n";
    size_t j = 0;
    for (const auto& smp : traj.samples) {
        // jumps strictly before this sample get their own rows
        while (j < traj.jumps.size() && traj.jumps[j].time < smp.t - 1e-12) {
            const auto& jump = traj.jumps[j++];
            const double pop = (jump.kind == JumpKind::Emission) ? 0.0 : 1.0;
            out << detail::fmt_double(jump.time) << "," << detail::fmt_double(pop) << ",1,"
                << jump_kind_name(jump.kind) << "\n";
        }
        const bool at_jump =
            j < traj.jumps.size() && std::abs(traj.jumps[j].time - smp.t) <= 1e-12;
        if (at_jump) {
            out << detail::fmt_double(smp.t) << "," << detail::fmt_double(smp.pop_e) << ",1,"
                << jump_kind_name(traj.jumps[j++].kind) << "\n";
        } else {
            out << detail::fmt_double(smp.t) << "," << detail::fmt_double(smp.pop_e) << ",0,\n";
        }
    }
    for (; j < traj.jumps.size(); ++j) {
        const double pop = (traj.jumps[j].kind == JumpKind::Emission) ? 0.0 : 1.0;
        out << detail::fmt_double(traj.jumps[j].time) << "," << detail::fmt_double(pop) << ",1,"
            << jump_kind_name(traj.jumps[j].kind) << "\n";
    }
}

inline void write_ensemble_csv(std::ostream& out, std::span<const WorkRecord> records) {
    out << "index,initial,final,n_emit,n_absorb,Q_over_hw0,W_over_hw0\n";
    for (const auto& r : records) {
        out << r.index << "," << eigenstate_name(r.initial) << "," << eigenstate_name(r.final)
            << "," << r.n_emit << "," << r.n_absorb << "," << r.q_over_hw0 << ","
            << r.w_over_hw0 << "\n";
    }
}

inline void write_histogram_csv(std::ostream& out, const WorkHistogram& h) {
    out << "W_over_hw0,count,probability\n";
    for (int32_t w = h.w_min; w <= h.w_max(); ++w) {
        out << w << "," << h.count_at(w) << "," << detail::fmt_double(h.probability(w)) << "\n";
    }
}

inline void write_summary_csv(std::ostream& out, const EnsembleSummary& s) {
    auto est = [](const EstimatorSummary& e) {
        return detail::fmt_double(e.value) + "," + detail::fmt_double(e.se) + "," +
               detail::fmt_double(e.ci_lo) + "," + detail::fmt_double(e.ci_hi);
    };
    out << "n,n_bootstrap,mean_w,se_w,ci_lo_w,ci_hi_w,mean_w2,se_w2,ci_lo_w2,ci_hi_w2,"
           "ratio,se_ratio,ci_lo_ratio,ci_hi_ratio,ratio_defined,"
           "jarzynski,se_jarzynski,ci_lo_jarzynski,ci_hi_jarzynski\n";
    out << s.n << "," << s.n_bootstrap << "," << est(s.mean_w) << "," << est(s.mean_w2) << ","
        << est(s.ratio) << "," << (s.ratio_defined ? 1 : 0) << "," << est(s.jarzynski) << "\n";
}

inline void write_master_csv(std::ostream& out, const MasterSolution& sol) {
    out << "t,sigma_ee,re_sigma_ge,im_sigma_ge\n";
    for (size_t i = 0; i < sol.t.size(); ++i) {
        out << detail::fmt_double(sol.t[i]) << "," << detail::fmt_double(sol.sigma_ee[i]) << ","
            << detail::fmt_double(sol.sigma_ge[i].real()) << ","
            << detail::fmt_double(sol.sigma_ge[i].imag()) << "\n";
    }
}

struct CayleySweepRow {
    double lambda0 = 0.0;
    double gamma_down = 0.0;
    CayleyResult result;
};

inline void write_cayley_sweep_csv(std::ostream& out, std::span<const CayleySweepRow> rows) {
    out << "lambda0,gamma_down,P0,P1,W1_mean,W2_mean,ratio,jarzynski_lhs,jarzynski_rhs\n";
    for (const auto& row : rows) {
        const auto& r = row.result;
        double ratio = std::numeric_limits<double>::quiet_NaN();
        try {
            ratio = combined_moment_ratio(r.n0, r.n1);
        } catch (const DegenerateDenominator&) {
        }
        out << detail::fmt_double(row.lambda0) << "," << detail::fmt_double(row.gamma_down)
            << "," << detail::fmt_double(r.n0.p) << "," << detail::fmt_double(r.n1.p) << ","
            << detail::fmt_double(r.n0.p_w + r.n1.p_w) << ","
            << detail::fmt_double(r.n0.p_w2 + r.n1.p_w2) << "," << detail::fmt_double(ratio)
            << "," << detail::fmt_double(r.n0.jarzynski + r.n1.jarzynski) << ","
            << detail::fmt_double(r.reverse_p0 + r.reverse_p1) << "\n";
    }
}

struct McSweepRow {
    double lambda0 = 0.0;
    double gamma_down = 0.0;
    EnsembleSummary mc;
    CayleyResult quad;
    bool has_pert = false;
    PerturbativeResult pert;
};

inline void write_mc_sweep_csv(std::ostream& out, std::span<const McSweepRow> rows) {
    out << "lambda0,gamma_down,mc_ratio,mc_ratio_se,mc_ratio_defined,mc_jarzynski,"
           "mc_jarzynski_se,quad_P0,quad_P1,quad_ratio,quad_jarzynski_lhs,quad_jarzynski_rhs,"
           "pert_P0,pert_P1,pert_ratio\n";
    for (const auto& row : rows) {
        double quad_ratio = std::numeric_limits<double>::quiet_NaN();
        try {
            quad_ratio = combined_moment_ratio(row.quad.n0, row.quad.n1);
        } catch (const DegenerateDenominator&) {
        }
        double pert_ratio = std::numeric_limits<double>::quiet_NaN();
        double pert_p0 = std::numeric_limits<double>::quiet_NaN();
        double pert_p1 = std::numeric_limits<double>::quiet_NaN();
        if (row.has_pert) {
            pert_p0 = row.pert.n0.p;
            pert_p1 = row.pert.n1.p;
            try {
                pert_ratio = combined_moment_ratio(row.pert.n0, row.pert.n1);
            } catch (const DegenerateDenominator&) {
            }
        }
        out << detail::fmt_double(row.lambda0) << "," << detail::fmt_double(row.gamma_down)
            << "," << detail::fmt_double(row.mc.ratio.value) << ","
            << detail::fmt_double(row.mc.ratio.se) << "," << (row.mc.ratio_defined ? 1 : 0)
            << "," << detail::fmt_double(row.mc.jarzynski.value) << ","
            << detail::fmt_double(row.mc.jarzynski.se) << ","
            << detail::fmt_double(row.quad.n0.p) << "," << detail::fmt_double(row.quad.n1.p)
            << "," << detail::fmt_double(quad_ratio) << ","
            << detail::fmt_double(row.quad.n0.jarzynski + row.quad.n1.jarzynski) << ","
            << detail::fmt_double(row.quad.reverse_p0 + row.quad.reverse_p1) << ","
            << detail::fmt_double(pert_p0) << "," << detail::fmt_double(pert_p1) << ","
            << detail::fmt_double(pert_ratio) << "\n";
    }
}

inline void write_run_metadata(std::ostream& out, const RunConfig& cfg,
                               const EnsembleResult& res) {
    out << "# run metadata\n";
    out << "n_requested = " << res.n_requested << "\n";
    out << "n_records = " << res.records.size() << "\n";
    out << "n_guardian_timeouts = " << res.n_timeouts << "\n";
    out << "born_measurement = " << (res.born_measurement ? "true" : "false") << "\n";
    out << emit_config(cfg);
}

// ---------------------------------------------------------------------------
// Minimal standalone SVG plots

namespace detail {

struct SvgFrame {
    double x0, y0, x1, y1;          // data ranges
    double px0, py0, px1, py1;      // pixel box
    double x(double v) const { return px0 + (v - x0) / (x1 - x0) * (px1 - px0); }
    double y(double v) const { return py0 + (v - y0) / (y1 - y0) * (py1 - py0); }
};

inline void svg_header(std::ostream& out, int w, int h, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"14\">" << title << "</text>\n";
}

inline void svg_axes(std::ostream& out, const SvgFrame& f, const std::string& xlabel,
                     const std::string& ylabel) {
    out << "<g stroke=\"black\" stroke-width=\"1\">\n";
    out << "<line x1=\"" << fmt_fixed(f.px0, 1) << "\" y1=\"" << fmt_fixed(f.py0, 1) << "\" x2=\""
        << fmt_fixed(f.px1, 1) << "\" y2=\"" << fmt_fixed(f.py0, 1) << "\"/>\n";
    out << "<line x1=\"" << fmt_fixed(f.px0, 1) << "\" y1=\"" << fmt_fixed(f.py0, 1) << "\" x2=\""
        << fmt_fixed(f.px0, 1) << "\" y2=\"" << fmt_fixed(f.py1, 1) << "\"/>\n";
    out << "</g>\n";
    out << "<text x=\"" << fmt_fixed(0.5 * (f.px0 + f.px1), 1) << "\" y=\""
        << fmt_fixed(f.py0 + 32.0, 1)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xlabel
        << "</text>\n";
    out << "<text x=\"14\" y=\"" << fmt_fixed(0.5 * (f.py0 + f.py1), 1)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\""
        << " transform=\"rotate(-90 14 " << fmt_fixed(0.5 * (f.py0 + f.py1), 1) << ")\">"
        << ylabel << "</text>\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", f.x0);
    out << "<text x=\"" << fmt_fixed(f.px0, 1) << "\" y=\"" << fmt_fixed(f.py0 + 16.0, 1)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << buf
        << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", f.x1);
    out << "<text x=\"" << fmt_fixed(f.px1, 1) << "\" y=\"" << fmt_fixed(f.py0 + 16.0, 1)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << buf
        << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", f.y0);
    out << "<text x=\"" << fmt_fixed(f.px0 - 6.0, 1) << "\" y=\"" << fmt_fixed(f.py0, 1)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << buf
        << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", f.y1);
    out << "<text x=\"" << fmt_fixed(f.px0 - 6.0, 1) << "\" y=\"" << fmt_fixed(f.py1 + 4.0, 1)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << buf
        << "</text>\n";
}

}  // namespace detail

inline void write_histogram_svg(std::ostream& out, const WorkHistogram& h,
                                const std::string& title) {
    const int w = 520, hh = 360;
    detail::svg_header(out, w, hh, title);
    double pmax = 0.0;
    for (int32_t b = h.w_min; b <= h.w_max(); ++b) pmax = std::max(pmax, h.probability(b));
    if (pmax == 0.0) pmax = 1.0;
    const detail::SvgFrame f{static_cast<double>(h.w_min) - 1.0,
                             0.0,
                             static_cast<double>(h.w_max()) + 1.0,
                             1.08 * pmax,
                             60.0,
                             310.0,
                             490.0,
                             40.0};
    detail::svg_axes(out, f, "W / (hbar omega0)", "probability");
    for (int32_t b = h.w_min; b <= h.w_max(); ++b) {
        if (h.count_at(b) == 0) continue;
        const double p = h.probability(b);
        const double x0 = f.x(static_cast<double>(b) - 0.4);
        const double x1 = f.x(static_cast<double>(b) + 0.4);
        out << "<rect class=\"bar\" x=\"" << detail::fmt_fixed(x0, 2) << "\" y=\""
            << detail::fmt_fixed(f.y(p), 2) << "\" width=\"" << detail::fmt_fixed(x1 - x0, 2)
            << "\" height=\"" << detail::fmt_fixed(f.y(0.0) - f.y(p), 2)
            << "\" fill=\"steelblue\"/>\n";
    }
    out << "</svg>\n";
}

struct PlotSeries {
    std::string name;
    std::string color = "steelblue";
    bool markers = false;
    std::vector<double> x;
    std::vector<double> y;
};

inline void write_line_plot_svg(std::ostream& out, std::span<const PlotSeries> series,
                                const std::string& title, const std::string& xlabel,
                                const std::string& ylabel) {
    const int w = 640, h = 400;
    detail::svg_header(out, w, h, title);
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    bool first = true;
    for (const auto& s : series) {
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (first) {
                x0 = x1 = s.x[i];
                y0 = y1 = s.y[i];
                first = false;
            }
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (x1 == x0) x1 = x0 + 1.0;
    if (y1 == y0) y1 = y0 + 1.0;
    const double pad = 0.06 * (y1 - y0);
    const detail::SvgFrame f{x0, y0 - pad, x1, y1 + pad, 64.0, 350.0, 610.0, 40.0};
    detail::svg_axes(out, f, xlabel, ylabel);
    int legend_y = 52;
    for (const auto& s : series) {
        if (!s.markers) {
            out << "<polyline class=\"line\" fill=\"none\" stroke=\"" << s.color
                << "\" stroke-width=\"1.5\" points=\"";
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.y[i])) continue;
                out << detail::fmt_fixed(f.x(s.x[i]), 2) << "," << detail::fmt_fixed(f.y(s.y[i]), 2)
                    << " ";
            }
            out << "\"/>\n";
        } else {
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.y[i])) continue;
                out << "<circle class=\"marker\" cx=\"" << detail::fmt_fixed(f.x(s.x[i]), 2)
                    << "\" cy=\"" << detail::fmt_fixed(f.y(s.y[i]), 2) << "\" r=\"3\" fill=\""
                    << s.color << "\"/>\n";
            }
        }
        out << "<text x=\"72\" y=\"" << legend_y << "\" font-family=\"sans-serif\""
            << " font-size=\"11\" fill=\"" << s.color << "\">" << s.name << "</text>\n";
        legend_y += 14;
    }
    out << "</svg>\n";
}

/// Trace plot: pop_e over time with jump markers.
inline void write_trace_svg(std::ostream& out, const Trajectory& traj,
                            const std::string& title) {
    PlotSeries pop;
    pop.name = "pop_e";
    pop.color = "steelblue";
    for (const auto& s : traj.samples) {
        pop.x.push_back(s.t);
        pop.y.push_back(s.pop_e);
    }
    PlotSeries jumps;
    jumps.name = "jumps";
    jumps.color = "crimson";
    jumps.markers = true;
    for (const auto& j : traj.jumps) {
        jumps.x.push_back(j.time);
        jumps.y.push_back(j.kind == JumpKind::Emission ? 0.0 : 1.0);
    }
    const PlotSeries series[] = {pop, jumps};
    write_line_plot_svg(out, series, title, "t (1/omega0)", "excited population");
}

template <typename WriteFn>
void write_file(const std::string& path, WriteFn&& fn) {
    auto out = detail::open_out(path);
    fn(out);
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace qjw
