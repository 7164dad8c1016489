#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "relqho/fock.hpp"

using namespace relqho;
using Catch::Approx;

namespace {
const OscillatorParams kNat = natural_params(); // c = 1e3, eps = 1e-6

std::vector<double> grid3p(int n = 97) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = 6.0 * M_PI * i / (n - 1.0);
    return g;
}
} // namespace

TEST_CASE("ladder-built operators", "[fock]") {
    fock::FockConfig cfg{64, 1e-12, 20};
    const auto op = fock::build_operators(cfg, kNat);
    CHECK(std::abs(op.q(0, 1) - std::complex<double>(1.0 / std::sqrt(2.0))) < 1e-14);
    CHECK(fock::is_hermitian(op.q));
    CHECK(fock::is_hermitian(op.p));
    CHECK(fock::is_hermitian(op.p4, 1e-10));
    CHECK(fock::is_hermitian(op.H, 1e-10));
    CHECK(fock::is_hermitian(op.w_p2q, 1e-10));

    SECTION("canonical commutator away from the truncation edge") {
        const fock::Operator comm = op.q * op.p - op.p * op.q;
        const int nb = cfg.dim - cfg.guard;
        for (int i = 0; i < nb; ++i)
            for (int j = 0; j < nb; ++j) {
                const std::complex<double> want =
                    i == j ? std::complex<double>(0.0, 1.0) : std::complex<double>(0.0);
                CHECK(std::abs(comm(i, j) - want) < 1e-10);
            }
    }
    SECTION("p^2 q + p q p + q p^2 = 3 p q p on the reliable block") {
        const fock::Operator lhs = op.p * op.p * op.q + op.p * op.q * op.p + op.q * op.p * op.p;
        const fock::Operator rhs = 3.0 * (op.p * op.q * op.p);
        const int nb = cfg.dim - cfg.guard;
        CHECK((lhs.topLeftCorner(nb, nb) - rhs.topLeftCorner(nb, nb)).cwiseAbs().maxCoeff() <
              1e-10);
    }
}

TEST_CASE("packet projection", "[fock]") {
    fock::FockConfig cfg{128, 1e-12, 20};
    SECTION("coherent ground packet is exactly |0>") {
        const auto psi = fock::project_packet(ground_packet(kNat), cfg, kNat);
        CHECK(std::abs(psi(0) - std::complex<double>(1.0)) < 1e-12);
        for (int n = 1; n < cfg.dim; ++n)
            CHECK(std::abs(psi(n)) < 1e-12);
    }
    SECTION("displaced coherent packet has Poisson weights") {
        const GaussianPacket disp{1.0, 0.0, 1.0 / std::sqrt(2.0)};
        const auto psi = fock::project_packet(disp, cfg, kNat);
        CHECK(std::norm(psi(0)) == Approx(std::exp(-0.5)).epsilon(1e-10));
        // mean occupation |alpha|^2 = 1/2
        double nbar = 0.0;
        for (int n = 0; n < cfg.dim; ++n)
            nbar += n * std::norm(psi(n));
        CHECK(nbar == Approx(0.5).epsilon(1e-10));
    }
    SECTION("centred squeezed packet populates even levels only") {
        const GaussianPacket sq{0.0, 0.0, std::sqrt(2.0)};
        const auto psi = fock::project_packet(sq, cfg, kNat);
        for (int n = 1; n < cfg.dim; n += 2)
            CHECK(std::abs(psi(n)) < 1e-12);
        CHECK(std::abs(psi(2)) > 0.1);
    }
    SECTION("undersized basis raises with a recommendation") {
        fock::FockConfig tiny{16, 1e-12, 4};
        const GaussianPacket far{3.0, 0.0, 1.0 / std::sqrt(2.0)};
        CHECK_THROWS_AS(fock::project_packet(far, tiny, kNat), fock::BasisTooSmallError);
        try {
            fock::project_packet(far, tiny, kNat);
        } catch (const fock::BasisTooSmallError& e) {
            CHECK(e.tail_mass() > 1e-12);
            CHECK(e.recommended_dim() >= 32);
            // the recommended size clears the tolerance
            fock::FockConfig fixed{e.recommended_dim(), 1e-12, 4};
            CHECK_NOTHROW(fock::project_packet(far, fixed, kNat));
        }
    }
}

TEST_CASE("convergence report", "[fock]") {
    fock::FockConfig cfg{64, 1e-12, 20};
    // exact ground state: tail mass is pure quadrature roundoff
    const auto rep = fock::convergence_report(ground_packet(kNat), kNat, cfg);
    CHECK(rep.tail_mass < 1e-12);
    CHECK(rep.recommended_dim == 64);
    fock::FockConfig tiny{16, 1e-12, 4};
    const auto rep2 = fock::convergence_report({3.0, 0.0, 1.0 / std::sqrt(2.0)}, kNat, tiny);
    CHECK(rep2.tail_mass > 1e-12);
    CHECK(rep2.recommended_dim > 16);
}

TEST_CASE("exact evolution", "[fock]") {
    fock::FockConfig cfg{128, 1e-12, 20};
    const auto op = fock::build_operators(cfg, kNat);
    const GaussianPacket disp{1.0, 0.0, 1.0 / std::sqrt(2.0)};
    const auto psi0 = fock::project_packet(disp, cfg, kNat);
    const auto grid = grid3p();

    SECTION("t = 0 reproduces the initial state") {
        const auto states = fock::evolve(op.H0, psi0, std::vector<double>{0.0}, 1.0);
        CHECK((states[0] - psi0).norm() < 1e-12);
    }
    SECTION("unitarity and energy conservation") {
        const auto states = fock::evolve(op.H, psi0, grid, 1.0);
        const double e0 = (psi0.adjoint() * (op.H * psi0))(0, 0).real();
        for (const auto& psi : states) {
            CHECK(std::abs(psi.norm() - 1.0) < 1e-10);
            const double e = (psi.adjoint() * (op.H * psi))(0, 0).real();
            CHECK(e == Approx(e0).epsilon(1e-10));
        }
    }
    SECTION("NR coherent packet keeps sigma_q over three periods") {
        const auto states = fock::evolve(op.H0, psi0, grid, 1.0);
        const auto m = fock::exact_moments(states, grid, op);
        for (std::size_t i = 0; i < m.times.size(); ++i) {
            CHECK(m.sigma_q2[i] == Approx(0.5).margin(1e-10));
            CHECK(m.product[i] == Approx(0.5).margin(1e-9));
        }
    }
    SECTION("initial moments agree with the closed-form packet moments") {
        const auto m = fock::exact_moments(std::vector<fock::State>{psi0},
                                           std::vector<double>{0.0}, op);
        CHECK(m.q_mean[0] == Approx(1.0).margin(1e-9));
        CHECK(m.sigma_q2[0] == Approx(0.5).margin(1e-9));
        CHECK(m.sigma_p2[0] == Approx(0.5).margin(1e-9));
    }
}

TEST_CASE("basis convergence of reported moments", "[fock]") {
    const GaussianPacket disp{1.0, 0.5, 1.0 / std::sqrt(2.0)};
    const OscillatorParams pr = natural_params(1.0 / std::sqrt(2e-3));
    std::vector<double> grid{0.9, 4.4};
    double prev_q2 = 0.0;
    for (int dim : {128, 256}) {
        fock::FockConfig cfg{dim, 1e-12, 20};
        const auto op = fock::build_operators(cfg, pr);
        const auto psi0 = fock::project_packet(disp, cfg, pr);
        const auto m = fock::exact_moments(fock::evolve(op.H, psi0, grid, 1.0), grid, op);
        if (dim > 128)
            CHECK(m.sigma_q2[1] == Approx(prev_q2).epsilon(1e-9));
        prev_q2 = m.sigma_q2[1];
    }
}

TEST_CASE("commutator check", "[fock]") {
    fock::FockConfig cfg{64, 1e-12, 20};
    SECTION("V(0) = 0 gives zero residuals") {
        const auto r = fock::commutator_check(0.0, cfg, kNat);
        CHECK(r.residual_p == 0.0);
        CHECK(r.residual_q == 0.0);
    }
    SECTION("defining-integral coefficients satisfy the identity") {
        for (double t : {0.5, 1.0, 2.0, M_PI, 5.0}) {
            const auto r = fock::commutator_check(t, cfg, kNat, CoeffSource::oracle);
            CHECK(r.residual_p < 1e-8);
            CHECK(r.residual_q < 1e-8);
        }
    }
    SECTION("printed coefficients leave order-one residuals at generic times") {
        const auto r = fock::commutator_check(2.0, cfg, kNat, CoeffSource::printed);
        CHECK(r.residual_p > 0.1);
        CHECK(r.residual_q > 0.1);
    }
}

TEST_CASE("first-order engine agrees with exact propagation", "[fock]") {
    // quick Richardson probe at one generic time; the acceptance suite runs
    // the full grid version
    const double t = 1.7;
    const GaussianPacket pk = ground_packet(kNat);
    auto exact_q2 = [&](double eps) {
        const OscillatorParams pr = natural_params(1.0 / std::sqrt(eps));
        fock::FockConfig cfg{128, 1e-12, 20};
        const auto op = fock::build_operators(cfg, pr);
        const auto psi0 = fock::project_packet(pk, cfg, pr);
        const auto m = fock::exact_moments(fock::evolve(op.H, psi0, std::vector<double>{t}, 1.0),
                                           std::vector<double>{t}, op);
        return m.sigma_q2[0];
    };
    const double K = -0.375 * std::sin(t) * std::sin(t); // first-order kernel per epsilon
    const double R1 = exact_q2(2e-3) - 0.5 - 2e-3 * K;
    const double R2 = exact_q2(1e-3) - 0.5 - 1e-3 * K;
    CHECK(std::abs(R1) > 1e-9);
    CHECK(R2 / R1 == Approx(0.25).margin(0.05));
}
