#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "relqho/constants.hpp"
#include "relqho/dynamics.hpp"
#include "relqho/fock.hpp"
#include "relqho/svg.hpp"

namespace relqho {

// Scenario orchestration and deterministic serialization. CSV carries one
// '#'-prefixed schema line; floats are written with 17 significant digits via
// to_chars, so identical configs produce byte-identical files.

using ordered_json = nlohmann::ordered_json;

enum class ExitCode : int { ok = 0, io_error = 2, convergence_error = 3, config_error = 4 };

inline std::string format_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
    if (ec != std::errc{})
        throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, ptr);
}

/// Write-then-rename; a failed run never leaves a partial file behind.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    static std::mt19937_64 rng{std::random_device{}()};
    const fs::path tmp = path.string() + ".tmp-" + std::to_string(rng());
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw std::runtime_error("atomic_write: cannot open " + tmp.string());
        out << content;
        if (!out.flush())
            throw std::runtime_error("atomic_write: write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

enum class Scenario { custom, electron_1kev, electron_10kev, natural };

inline const char* scenario_name(Scenario s) {
    switch (s) {
    case Scenario::custom: return "custom";
    case Scenario::electron_1kev: return "electron-1keV";
    case Scenario::electron_10kev: return "electron-10keV";
    case Scenario::natural: return "natural";
    }
    return "?";
}

inline Scenario parse_scenario(const std::string& s) {
    if (s == "custom") return Scenario::custom;
    if (s == "electron-1keV" || s == "electron-1kev") return Scenario::electron_1kev;
    if (s == "electron-10keV" || s == "electron-10kev") return Scenario::electron_10kev;
    if (s == "natural") return Scenario::natural;
    throw std::invalid_argument("unknown scenario: " + s);
}

struct RunConfig {
    Scenario scenario = Scenario::natural;
    double eps = 1e-3; // natural/custom scenarios: eta_E, i.e. c = 1/sqrt(eps)
    std::optional<double> q0, p0, sigma_q; // natural-unit packet overrides
    double periods = 4.0;
    int points_per_period = 200;
    CoeffSource coeff_source = CoeffSource::oracle;
    int fock_dim = 128;
    int workers = 0; // 0 = hardware concurrency
    bool emit_svg = false;
    std::filesystem::path out_dir = ".";

    void validate() const {
        if (!(periods > 0.0))
            throw std::invalid_argument("RunConfig: periods must be > 0");
        if (points_per_period < 8)
            throw std::invalid_argument("RunConfig: points_per_period must be >= 8");
        if (!(eps > 0.0))
            throw std::invalid_argument("RunConfig: eps must be > 0");
        if (fock_dim < 32)
            throw std::invalid_argument("RunConfig: fock_dim must be >= 32");
    }
};

struct Scene {
    OscillatorParams params; // input-unit parameters
    GaussianPacket packet;
    NaturalForm natural;
};

inline Scene make_scene(const RunConfig& cfg) {
    cfg.validate();
    Scene sc;
    switch (cfg.scenario) {
    case Scenario::natural:
    case Scenario::custom:
        sc.params = natural_params(1.0 / std::sqrt(cfg.eps));
        break;
    case Scenario::electron_1kev:
    case Scenario::electron_10kev: {
        const double ev = cfg.scenario == Scenario::electron_1kev ? 1e3 : 1e4;
        const double omega = ev * constants::electron_volt / constants::hbar;
        sc.params = {constants::electron_mass, omega, constants::hbar, constants::speed_of_light};
        break;
    }
    }
    sc.packet = ground_packet(sc.params);
    if (cfg.q0 || cfg.p0 || cfg.sigma_q) {
        // overrides are specified in natural units, applied through the scales
        NaturalForm base = to_natural(sc.params, sc.packet);
        const double L = base.scale.length_scale, P = base.scale.momentum_scale;
        if (cfg.q0)
            sc.packet.q0 = *cfg.q0 * L;
        if (cfg.p0)
            sc.packet.p0 = *cfg.p0 * P;
        if (cfg.sigma_q)
            sc.packet.sigma_q = *cfg.sigma_q * L;
    }
    sc.natural = to_natural(sc.params, sc.packet);
    return sc;
}

inline std::vector<double> natural_time_grid(double periods, int points_per_period,
                                             double omega = 1.0) {
    const int n = static_cast<int>(std::llround(periods * points_per_period));
    std::vector<double> g(n + 1);
    for (int i = 0; i <= n; ++i)
        g[i] = 2.0 * M_PI * periods * i / (n * omega);
    return g;
}

// ---------------------------------------------------------------------------
// coeffs subcommand

inline std::string render_coeffs_csv(const RunConfig& cfg) {
    const Scene sc = make_scene(cfg);
    const OscillatorParams& pr = sc.natural.params;
    const auto grid = natural_time_grid(cfg.periods, cfg.points_per_period);
    std::ostringstream os;
    os << "# omega_t";
    for (const char* tag : {"printed", "oracle"})
        for (const char* ch : {"A1", "A2", "A3", "A4", "B1", "B2", "B3", "B4"})
            os << "," << ch << "_" << tag;
    for (const char* ch : {"A1", "A2", "A3", "A4", "B1", "B2", "B3", "B4"})
        os << ",dev_" << ch;
    os << "\n";
    for (double t : grid) {
        os << format_double(pr.omega * t);
        double printed[8], oracle[8];
        int k = 0;
        for (CoeffSide side : {CoeffSide::P, CoeffSide::Q})
            for (int j = 1; j <= 4; ++j, ++k) {
                printed[k] = coeff_printed({side, j}, t, pr);
                oracle[k] = coeff_oracle({side, j}, t, pr);
            }
        for (double v : printed)
            os << "," << format_double(v);
        for (double v : oracle)
            os << "," << format_double(v);
        for (int i = 0; i < 8; ++i)
            os << "," << format_double(std::abs(printed[i] - oracle[i]));
        os << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// evolve subcommand

inline std::string render_series_csv(const MomentSeries& s) {
    std::ostringstream os;
    os << "# t,omega_t,sigma_q2_nr,sigma_p2_nr,sigma_q2_rel,sigma_p2_rel,product_rel,"
          "corr_q2,corr_p2,corr_product\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        os << format_double(s.times[i]) << "," << format_double(s.omega_t[i]) << ","
           << format_double(s.sigma_q2_nr[i]) << "," << format_double(s.sigma_p2_nr[i]) << ","
           << format_double(s.sigma_q2_rel[i]) << "," << format_double(s.sigma_p2_rel[i]) << ","
           << format_double(s.product_rel[i]) << "," << format_double(s.corr_q2[i]) << ","
           << format_double(s.corr_p2[i]) << "," << format_double(s.corr_product[i]) << "\n";
    }
    return os.str();
}

struct EvolveSummary {
    double eta_e;
    double max_abs_f1;
    double max_abs_f2;
    double max_rel_product_shift;
    double max_rel_width_shift;
    double secular_slope; // 0 when the series is too short for a fit
};

struct EvolveResult {
    MomentSeries natural_series;
    MomentSeries series; // input units
    EvolveSummary summary;
    std::vector<std::string> warnings;
};

inline EvolveResult run_evolve(const RunConfig& cfg) {
    const Scene sc = make_scene(cfg);
    const auto grid = natural_time_grid(cfg.periods, cfg.points_per_period);
    EvolveResult r;
    r.natural_series = series(sc.natural.packet, sc.natural.params, grid, cfg.coeff_source);
    r.series = denormalize(r.natural_series, sc.natural.scale);
    r.summary.eta_e = eta_e(sc.params);
    double f1 = 0, f2 = 0, shp = 0, shw = 0;
    const bool ground = sc.natural.packet.q0 == 0.0 && sc.natural.packet.p0 == 0.0 &&
                        is_coherent(sc.natural.packet, sc.natural.params, 1e-9);
    for (std::size_t i = 0; i < r.natural_series.size(); ++i) {
        const auto& ns = r.natural_series;
        shp = std::max(shp, std::abs(ns.corr_product[i]) / (0.5 * sc.natural.params.hbar));
        shw = std::max(shw, std::abs(ns.corr_q2[i]) / ns.sigma_q2_nr[i]);
        if (ground) {
            const ScalingSample ss =
                scaling_functions(ns.omega_t[i], sc.natural.params, cfg.coeff_source);
            f1 = std::max(f1, std::abs(ss.f1));
            f2 = std::max(f2, std::abs(ss.f2));
        }
    }
    r.summary.max_abs_f1 = f1;
    r.summary.max_abs_f2 = f2;
    r.summary.max_rel_product_shift = shp;
    r.summary.max_rel_width_shift = shw;
    r.summary.secular_slope = 0.0;
    if (cfg.periods >= 10.0)
        r.summary.secular_slope = secular_fit(r.natural_series).slope;
    const ValidityDiagnostics vd = validity_guard(sc.params, sc.packet);
    r.warnings = vd.warnings;
    return r;
}

inline ordered_json summary_json(const EvolveSummary& s) {
    ordered_json j;
    j["eta_e"] = s.eta_e;
    j["max_abs_f1"] = s.max_abs_f1;
    j["max_abs_f2"] = s.max_abs_f2;
    j["max_rel_product_shift"] = s.max_rel_product_shift;
    j["max_rel_width_shift"] = s.max_rel_width_shift;
    j["secular_slope"] = s.secular_slope;
    return j;
}

// ---------------------------------------------------------------------------
// compare subcommand

struct RichardsonRow {
    double t;
    double R_full; // residual at eps
    double R_half; // residual at eps/2
    double ratio;  // R_half / R_full, 0.25 for a clean O(eps^2) residual
};

struct CompareResult {
    DiscrepancyReport formulas;
    std::vector<CoeffDiscrepancy> coefficients;
    std::map<std::string, fock::CommutatorResiduals> commutator; // by source
    std::vector<RichardsonRow> richardson_q2;
    std::vector<RichardsonRow> richardson_product;
    std::vector<MomentDeviation> moment_table;
    double solver_noise;
};

/// Residual of the first-order engine against exact Fock propagation:
/// R(eps, t) = sigma^2_exact - sigma^2_NR - corr(eps, t), on the natural-unit
/// ground packet.
inline std::vector<RichardsonRow> richardson_table(const RunConfig& cfg, double eps,
                                                   std::span<const double> grid, bool product) {
    fock::FockConfig fc{cfg.fock_dim, 1e-12, 20};
    std::vector<std::vector<double>> exact(2);
    const GaussianPacket pk = ground_packet(natural_params());
    for (int half = 0; half < 2; ++half) {
        const double e = half ? eps / 2.0 : eps;
        const OscillatorParams pr = natural_params(1.0 / std::sqrt(e));
        const fock::Operators op = fock::build_operators(fc, pr);
        const fock::State psi0 = fock::project_packet(pk, fc, pr);
        const auto states = fock::evolve(op.H, psi0, grid, pr.hbar);
        const fock::ExactMoments m = fock::exact_moments(states, grid, op);
        exact[half] = product ? m.product : m.sigma_q2;
    }
    std::vector<RichardsonRow> rows;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        double corr_full, corr_half, nr;
        if (product) {
            nr = 0.5;
            corr_full = uncertainty_product(t, pk, natural_params(1.0 / std::sqrt(eps)),
                                            cfg.coeff_source) - 0.5;
            corr_half = uncertainty_product(t, pk, natural_params(1.0 / std::sqrt(eps / 2.0)),
                                            cfg.coeff_source) - 0.5;
        } else {
            nr = nr_variances(pk, natural_params(), t).sigma_q2;
            corr_full =
                rel_variances(t, pk, natural_params(1.0 / std::sqrt(eps)), cfg.coeff_source)
                    .sigma_q2_rel - nr;
            corr_half =
                rel_variances(t, pk, natural_params(1.0 / std::sqrt(eps / 2.0)), cfg.coeff_source)
                    .sigma_q2_rel - nr;
        }
        const double Rf = exact[0][i] - nr - corr_full;
        const double Rh = exact[1][i] - nr - corr_half;
        rows.push_back({t, Rf, Rh, Rf != 0.0 ? Rh / Rf : 0.0});
    }
    return rows;
}

inline ordered_json compare_json(const CompareResult& r) {
    ordered_json j;
    ordered_json jf = ordered_json::object();
    for (const auto& f : r.formulas.formulas) {
        jf[f.name] = {{"max_abs_dev", f.max_abs_dev}, {"max_rel_dev", f.max_rel_dev}};
    }
    j["formulas"] = jf;
    ordered_json jc = ordered_json::array();
    for (const auto& c : r.coefficients) {
        ordered_json e;
        e["channel"] = channel_name(c.channel);
        e["max_abs_dev"] = c.max_abs_dev;
        if (c.fitted_ratio)
            e["fitted_ratio"] = *c.fitted_ratio;
        else
            e["fitted_ratio"] = nullptr;
        jc.push_back(e);
    }
    j["coefficients"] = jc;
    ordered_json jm = ordered_json::object();
    for (const auto& [src, res] : r.commutator)
        jm[src] = {{"residual_p", res.residual_p}, {"residual_q", res.residual_q}};
    j["commutator"] = jm;
    auto rich = [&](const std::vector<RichardsonRow>& rows) {
        ordered_json a = ordered_json::array();
        for (const auto& row : rows)
            a.push_back({{"t", row.t}, {"R", row.R_full}, {"R_half", row.R_half},
                         {"ratio", row.ratio}});
        return a;
    };
    j["richardson_sigma_q2"] = rich(r.richardson_q2);
    j["richardson_product"] = rich(r.richardson_product);
    ordered_json ja = ordered_json::array();
    for (const auto& d : r.moment_table)
        ja.push_back({{"moment", moment_name(d.kind)},
                      {"printed_re", d.printed.real()},
                      {"printed_im", d.printed.imag()},
                      {"confirmed_re", d.confirmed.real()},
                      {"confirmed_im", d.confirmed.imag()}});
    j["moment_deviations"] = ja;
    j["solver_noise"] = r.solver_noise;
    return j;
}

// ---------------------------------------------------------------------------
// sweep subcommand

struct SweepPoint {
    int index;
    double eta_e;
    double max_abs_f1, max_abs_f2;
    double max_rel_width_shift, max_rel_product_shift;
    double secular_slope;
};

inline SweepPoint sweep_point(int index, double eps, const RunConfig& base) {
    RunConfig cfg = base;
    cfg.scenario = Scenario::natural;
    cfg.eps = eps;
    cfg.periods = std::max(base.periods, 10.0); // secular fit needs >= 10 periods
    const EvolveResult r = run_evolve(cfg);
    return {index,  r.summary.eta_e,
            r.summary.max_abs_f1, r.summary.max_abs_f2,
            r.summary.max_rel_width_shift, r.summary.max_rel_product_shift,
            r.summary.secular_slope};
}

inline std::vector<SweepPoint> run_sweep(const RunConfig& base, std::span<const double> eps_values) {
    if (eps_values.size() < 2)
        throw std::invalid_argument("run_sweep: need at least 2 sweep points");
    const int workers = base.workers > 0
                            ? base.workers
                            : std::max(1u, std::thread::hardware_concurrency());
    std::vector<SweepPoint> out(eps_values.size());
    std::size_t next = 0;
    while (next < eps_values.size()) {
        std::vector<std::future<SweepPoint>> batch;
        for (int w = 0; w < workers && next < eps_values.size(); ++w, ++next)
            batch.push_back(std::async(std::launch::async, sweep_point, static_cast<int>(next),
                                       eps_values[next], base));
        for (auto& f : batch) {
            SweepPoint p = f.get();
            out[p.index] = p;
        }
    }
    return out;
}

inline std::string render_sweep_csv(std::span<const SweepPoint> pts) {
    std::ostringstream os;
    os << "# index,eta_e,max_abs_f1,max_abs_f2,max_rel_width_shift,max_rel_product_shift,"
          "secular_slope\n";
    for (const auto& p : pts) {
        os << p.index << "," << format_double(p.eta_e) << "," << format_double(p.max_abs_f1)
           << "," << format_double(p.max_abs_f2) << "," << format_double(p.max_rel_width_shift)
           << "," << format_double(p.max_rel_product_shift) << ","
           << format_double(p.secular_slope) << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// key=value config files

inline std::map<std::string, std::string> parse_kv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file: " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (!key.empty())
            kv[key] = val;
    }
    return kv;
}

inline void apply_kv(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) {
        if (k == "scenario")
            cfg.scenario = parse_scenario(v);
        else if (k == "eps")
            cfg.eps = std::stod(v);
        else if (k == "q0")
            cfg.q0 = std::stod(v);
        else if (k == "p0")
            cfg.p0 = std::stod(v);
        else if (k == "sigma_q")
            cfg.sigma_q = std::stod(v);
        else if (k == "periods")
            cfg.periods = std::stod(v);
        else if (k == "points_per_period")
            cfg.points_per_period = std::stoi(v);
        else if (k == "coeff_source")
            cfg.coeff_source = v == "printed" ? CoeffSource::printed : CoeffSource::oracle;
        else if (k == "fock_dim")
            cfg.fock_dim = std::stoi(v);
        else if (k == "workers")
            cfg.workers = std::stoi(v);
        else if (k == "svg")
            cfg.emit_svg = v == "1" || v == "true";
        else if (k == "out")
            cfg.out_dir = v;
        else
            throw std::invalid_argument("unknown config key: " + k);
    }
}

} // namespace relqho
