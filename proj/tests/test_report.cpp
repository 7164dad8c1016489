#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "relqho/report.hpp"

using namespace relqho;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path d = fs::temp_directory_path() / ("relqho_test_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}
} // namespace

TEST_CASE("double formatting is fixed-width scientific", "[report]") {
    CHECK(format_double(0.5) == "5.0000000000000000e-01");
    CHECK(format_double(-1.0 / 3.0) == "-3.3333333333333331e-01");
    CHECK(format_double(0.0) == "0.0000000000000000e+00");
}

TEST_CASE("atomic write leaves no temporaries", "[report]") {
    const fs::path dir = fresh_dir("atomic");
    atomic_write(dir / "x.txt", "hello\n");
    CHECK(slurp(dir / "x.txt") == "hello\n");
    int entries = 0;
    for (auto& e : fs::directory_iterator(dir)) {
        (void)e;
        ++entries;
    }
    CHECK(entries == 1);
}

TEST_CASE("coeffs CSV starts at zero and reruns byte-identically", "[report]") {
    RunConfig cfg;
    cfg.periods = 1.0;
    cfg.points_per_period = 16;
    const std::string a = render_coeffs_csv(cfg);
    const std::string b = render_coeffs_csv(cfg);
    CHECK(a == b);
    std::istringstream is(a);
    std::string header, first;
    std::getline(is, header);
    CHECK(header.rfind("# omega_t", 0) == 0);
    std::getline(is, first);
    std::istringstream row(first);
    std::string cell;
    int idx = 0;
    while (std::getline(row, cell, ',')) {
        if (idx > 0 && idx <= 16) // the sixteen coefficient columns
            CHECK(std::stod(cell) == 0.0);
        ++idx;
    }
    CHECK(idx == 25);
}

TEST_CASE("evolve summary", "[report]") {
    SECTION("natural scenario anchors the product at hbar/2") {
        RunConfig cfg;
        cfg.periods = 2.0;
        cfg.points_per_period = 32;
        const EvolveResult r = run_evolve(cfg);
        CHECK(r.series.product_rel[0] == Approx(0.5).epsilon(1e-13));
        CHECK(r.summary.eta_e == Approx(1e-3).epsilon(1e-12));
    }
    SECTION("electron presets carry the published eta") {
        RunConfig cfg;
        cfg.scenario = Scenario::electron_1kev;
        cfg.periods = 1.0;
        cfg.points_per_period = 16;
        const EvolveResult r = run_evolve(cfg);
        CHECK(r.summary.eta_e == Approx(1.9569512e-3).epsilon(1e-5));
        // product column is hbar/2 in SI units at t = 0
        CHECK(r.series.product_rel[0] == Approx(0.5 * constants::hbar).epsilon(1e-12));
    }
}

TEST_CASE("config files and overrides", "[report]") {
    const fs::path dir = fresh_dir("cfg");
    {
        std::ofstream out(dir / "run.cfg");
        out << "# comment line\n"
            << "scenario = natural\n"
            << "eps = 2e-3\n"
            << "periods=3\n"
            << "coeff_source = printed\n";
    }
    RunConfig cfg;
    apply_kv(cfg, parse_kv_file(dir / "run.cfg"));
    CHECK(cfg.scenario == Scenario::natural);
    CHECK(cfg.eps == Approx(2e-3));
    CHECK(cfg.periods == Approx(3.0));
    CHECK(cfg.coeff_source == CoeffSource::printed);
    CHECK_THROWS_AS(apply_kv(cfg, {{"bogus", "1"}}), std::invalid_argument);
    CHECK_THROWS_AS(parse_kv_file(dir / "missing.cfg"), std::runtime_error);
}

TEST_CASE("run config validation", "[report]") {
    RunConfig cfg;
    cfg.points_per_period = 4;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.periods = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("sweep is linear in eta and ordered", "[report]") {
    RunConfig base;
    base.periods = 10.0;
    base.points_per_period = 48;
    base.workers = 2;
    const std::vector<double> eps{1e-9, 1e-6, 1e-4, 1e-3};
    const auto pts = run_sweep(base, eps);
    REQUIRE(pts.size() == 4);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(pts[i].index == static_cast<int>(i));
        CHECK(pts[i].eta_e == Approx(eps[i]).epsilon(1e-12));
        CHECK(pts[i].max_abs_f1 <= 20.0);
        CHECK(pts[i].max_abs_f2 <= 20.0);
    }
    // GHz-regime point: negligible shifts
    CHECK(pts[0].max_rel_width_shift < 1e-8);
    // shift / eta is an engine identity, constant across the sweep
    const double k0 = pts[0].max_rel_width_shift / pts[0].eta_e;
    for (const auto& p : pts)
        CHECK(p.max_rel_width_shift / p.eta_e == Approx(k0).epsilon(1e-10));
    CHECK_THROWS_AS(run_sweep(base, std::vector<double>{1e-3}), std::invalid_argument);
}

TEST_CASE("cli end-to-end exit codes", "[report][cli]") {
    const char* cli = std::getenv("RELQHO_CLI");
    REQUIRE(cli != nullptr);
    const fs::path dir = fresh_dir("cli");
    const std::string base = std::string("\"") + cli + "\"";
    SECTION("evolve succeeds and writes both artifacts") {
        const int rc = std::system((base + " evolve --scenario natural --periods 1" +
                                    " --points-per-period 16 --out " + dir.string() +
                                    " >/dev/null 2>&1")
                                       .c_str());
        CHECK(WEXITSTATUS(rc) == 0);
        CHECK(fs::exists(dir / "evolve.csv"));
        CHECK(fs::exists(dir / "summary.json"));
    }
    SECTION("invalid configuration exits 4") {
        const int rc = std::system((base + " evolve --scenario bogus >/dev/null 2>&1").c_str());
        CHECK(WEXITSTATUS(rc) == 4);
        const int rc2 =
            std::system((base + " evolve --periods -2 >/dev/null 2>&1").c_str());
        CHECK(WEXITSTATUS(rc2) == 4);
    }
    SECTION("svg emission") {
        const int rc = std::system((base + " evolve --scenario natural --periods 1" +
                                    " --points-per-period 16 --svg --out " + dir.string() +
                                    " >/dev/null 2>&1")
                                       .c_str());
        CHECK(WEXITSTATUS(rc) == 0);
        CHECK(fs::exists(dir / "evolve_sigma_q2.svg"));
        const std::string svg = slurp(dir / "evolve_sigma_q2.svg");
        CHECK(svg.find("<svg") != std::string::npos);
        CHECK(svg.find("polyline") != std::string::npos);
    }
}
