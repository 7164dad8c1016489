// relqho - relativistic corrections to harmonic-oscillator wave packets.
//
// Subcommands:
//   coeffs   channel coefficients, printed vs defining-integral, CSV
//   evolve   variance/uncertainty series + summary JSON
//   compare  verbatim-vs-assembled, commutator residuals, Richardson table
//   sweep    eta_E sweep of scaling summaries
//   report   all of the above into one directory
//
// Exit codes: 0 ok (warnings on stderr allowed), 2 I/O failure,
// 3 convergence/basis failure, 4 invalid configuration.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "relqho/relqho.hpp"

namespace {

using namespace relqho;

struct CliOptions {
    RunConfig cfg;
    std::string scenario = "natural";
    std::string coeff_source = "oracle";
    std::string config_path;
    std::string out_dir;
    double q0 = 0.0, p0 = 0.0, sigma_q = 0.0;
    bool has_q0 = false, has_p0 = false, has_sigma = false;
    std::vector<double> sweep_eps;
};

void add_common(CLI::App* app, CliOptions& o) {
    app->add_option("--config", o.config_path, "key=value configuration file");
    app->add_option("--out", o.out_dir, "output directory");
    app->add_option("--scenario", o.scenario,
                    "custom | electron-1keV | electron-10keV | natural");
    app->add_option("--eps", o.cfg.eps, "eta_E for natural/custom scenarios");
    app->add_option("--periods", o.cfg.periods, "grid length in oscillator periods");
    app->add_option("--points-per-period", o.cfg.points_per_period, "grid density");
    app->add_option("--coeff-source", o.coeff_source, "oracle | printed");
    app->add_option("--fock-dim", o.cfg.fock_dim, "Fock basis size");
    app->add_option("--workers", o.cfg.workers, "sweep worker count (0 = hardware)");
    app->add_flag("--svg", o.cfg.emit_svg, "also write SVG charts");
    auto* q = app->add_option("--q0", o.q0, "packet centre position (natural units)");
    auto* p = app->add_option("--p0", o.p0, "packet centre momentum (natural units)");
    auto* s = app->add_option("--sigma-q", o.sigma_q, "packet width (natural units)");
    app->callback([&o, q, p, s] {
        o.has_q0 = q->count() > 0;
        o.has_p0 = p->count() > 0;
        o.has_sigma = s->count() > 0;
    });
}

RunConfig finalize(CliOptions& o) {
    RunConfig cfg = o.cfg;
    if (!o.config_path.empty())
        apply_kv(cfg, parse_kv_file(o.config_path));
    cfg.scenario = parse_scenario(o.scenario);
    cfg.coeff_source =
        o.coeff_source == "printed" ? CoeffSource::printed : CoeffSource::oracle;
    if (o.coeff_source != "printed" && o.coeff_source != "oracle")
        throw std::invalid_argument("coeff-source must be oracle or printed");
    if (o.has_q0)
        cfg.q0 = o.q0;
    if (o.has_p0)
        cfg.p0 = o.p0;
    if (o.has_sigma)
        cfg.sigma_q = o.sigma_q;
    if (!o.out_dir.empty())
        cfg.out_dir = o.out_dir;
    else if (const char* env = std::getenv("RELQHO_OUT"))
        cfg.out_dir = env;
    cfg.validate();
    return cfg;
}

int cmd_coeffs(const RunConfig& cfg) {
    atomic_write(cfg.out_dir / "coeffs.csv", render_coeffs_csv(cfg));
    return 0;
}

int cmd_evolve(const RunConfig& cfg) {
    const EvolveResult r = run_evolve(cfg);
    for (const auto& w : r.warnings)
        std::cerr << "warning: " << w << "\n";
    atomic_write(cfg.out_dir / "evolve.csv", render_series_csv(r.series));
    atomic_write(cfg.out_dir / "summary.json", summary_json(r.summary).dump(2) + "\n");
    if (cfg.emit_svg) {
        const auto& s = r.natural_series;
        svg::Curve nr{"sigma_q2_nr", "#888888", s.omega_t, s.sigma_q2_nr};
        svg::Curve rel{"sigma_q2_rel", "#c0392b", s.omega_t, s.sigma_q2_rel};
        atomic_write(cfg.out_dir / "evolve_sigma_q2.svg",
                     svg::line_chart("sigma_q^2(t), natural units", {nr, rel}));
        svg::Curve cp{"corr_product", "#2980b9", s.omega_t, s.corr_product};
        atomic_write(cfg.out_dir / "evolve_corr_product.svg",
                     svg::line_chart("uncertainty-product correction", {cp}));
    }
    return 0;
}

int cmd_compare(const RunConfig& cfg) {
    const Scene sc = make_scene(cfg);
    CompareResult r;
    const auto grid = natural_time_grid(cfg.periods, cfg.points_per_period);
    r.formulas =
        formula_discrepancies(sc.natural.packet, sc.natural.params, grid, cfg.coeff_source);
    r.coefficients = discrepancy_scan(grid, sc.natural.params);
    for (CoeffSource src : {CoeffSource::oracle, CoeffSource::printed}) {
        fock::CommutatorResiduals worst{0.0, 0.0};
        fock::FockConfig fc{64, 1e-12, 20};
        for (double t : {0.5, 1.0, 2.0, M_PI, 5.0}) {
            const auto res = fock::commutator_check(t, fc, sc.natural.params, src);
            worst.residual_p = std::max(worst.residual_p, res.residual_p);
            worst.residual_q = std::max(worst.residual_q, res.residual_q);
        }
        r.commutator[src == CoeffSource::oracle ? "oracle" : "printed"] = worst;
    }
    const auto rich_grid = natural_time_grid(3.0, 32);
    r.richardson_q2 = richardson_table(cfg, 2e-3, rich_grid, false);
    r.richardson_product = richardson_table(cfg, 2e-3, rich_grid, true);
    // generic probe packet; the slips vanish on centred packets
    r.moment_table = printed_moment_deviations({2.0, 3.0, 0.8}, sc.natural.params.hbar);
    r.solver_noise = 1e-11;
    atomic_write(cfg.out_dir / "compare.json", compare_json(r).dump(2) + "\n");
    return 0;
}

int cmd_sweep(const RunConfig& cfg, std::vector<double> eps_values) {
    if (eps_values.empty())
        eps_values = {1e-9, 1e-7, 1e-5, 1e-4, 1e-3, 2e-3, 1e-2, 2e-2};
    const auto pts = run_sweep(cfg, eps_values);
    atomic_write(cfg.out_dir / "sweep.csv", render_sweep_csv(pts));
    return 0;
}

int dispatch(const std::string& name, CliOptions& o) {
    const RunConfig cfg = finalize(o);
    if (name == "coeffs")
        return cmd_coeffs(cfg);
    if (name == "evolve")
        return cmd_evolve(cfg);
    if (name == "compare")
        return cmd_compare(cfg);
    if (name == "sweep")
        return cmd_sweep(cfg, o.sweep_eps);
    if (name == "report") {
        int rc = cmd_coeffs(cfg);
        if (!rc)
            rc = cmd_evolve(cfg);
        if (!rc)
            rc = cmd_compare(cfg);
        if (!rc)
            rc = cmd_sweep(cfg, o.sweep_eps);
        return rc;
    }
    return static_cast<int>(ExitCode::config_error);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"relativistic harmonic-oscillator wave-packet corrections"};
    app.require_subcommand(1);
    CliOptions o;
    std::string invoked;
    for (const char* name : {"coeffs", "evolve", "compare", "sweep", "report"}) {
        auto* sub = app.add_subcommand(name, "");
        add_common(sub, o);
        if (std::string(name) == "sweep" || std::string(name) == "report")
            sub->add_option("--sweep-eps", o.sweep_eps, "eta_E sweep values");
        sub->callback([&invoked, name] { invoked = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(relqho::ExitCode::config_error);
    }
    try {
        return dispatch(invoked, o);
    } catch (const relqho::fock::BasisTooSmallError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(relqho::ExitCode::convergence_error);
    } catch (const relqho::QuadratureError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(relqho::ExitCode::convergence_error);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(relqho::ExitCode::config_error);
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(relqho::ExitCode::config_error);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(relqho::ExitCode::io_error);
    }
}
