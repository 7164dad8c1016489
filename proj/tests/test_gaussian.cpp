#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "relqho/gaussian.hpp"

using namespace relqho;
using Catch::Approx;

namespace {
const double kGrid_q0[] = {-1.0, 0.0, 2.0};
const double kGrid_p0[] = {-1.0, 0.0, 3.0};
const double kGrid_s[] = {0.4, 1.0 / std::sqrt(2.0), 1.7};

bool close(cplx a, cplx b, double rel) {
    return std::abs(a - b) <= rel * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}
} // namespace

TEST_CASE("closed forms match the quadrature oracle on the 27-point grid", "[gaussian]") {
    for (double q0 : kGrid_q0)
        for (double p0 : kGrid_p0)
            for (double s : kGrid_s) {
                const GaussianPacket pk{q0, p0, s};
                for (MomentKind k : all_moment_kinds) {
                    const cplx closed = moment(pk, k, 1.0);
                    const cplx oracle = moment_oracle_kind(pk, k, 1.0);
                    INFO(moment_name(k) << " at q0=" << q0 << " p0=" << p0 << " s=" << s);
                    CHECK(close(closed, oracle, 1e-10));
                }
            }
}

TEST_CASE("moment spot values", "[gaussian]") {
    const GaussianPacket any{0.7, -0.4, 1.2};
    CHECK(moment(any, MomentKind::q, 1.0) == cplx(0.7, 0.0));
    CHECK(moment({0.0, 0.3, 1.0}, MomentKind::q4, 1.0).real() == Approx(3.0).epsilon(1e-14));
    CHECK(moment({0.2, 0.0, 1.0 / std::sqrt(2.0)}, MomentKind::p4, 1.0).real() ==
          Approx(0.75).epsilon(1e-14));
}

TEST_CASE("moment oracle basics", "[gaussian]") {
    const GaussianPacket pk{1.1, -0.6, 0.8};
    CHECK(std::abs(moment_oracle(pk, "q", 1.0) - cplx(1.1)) < 1e-12);
    // canonical commutator through the oracle words
    const cplx comm = moment_oracle(pk, "qp", 1.0) - moment_oracle(pk, "pq", 1.0);
    CHECK(std::abs(comm - cplx(0.0, 1.0)) < 1e-12);
    CHECK(std::abs(moment_oracle({0.0, 0.0, 1.0 / std::sqrt(2.0)}, "pppp", 1.0) - cplx(0.75)) <
          1e-10);
    CHECK_THROWS_AS(moment_oracle(pk, "qpqpqpq", 1.0), std::invalid_argument);
    CHECK_THROWS_AS(moment_oracle(pk, "qxp", 1.0), std::invalid_argument);
}

TEST_CASE("hermitian-conjugate pairs", "[gaussian]") {
    const GaussianPacket pk{2.0, 3.0, 0.9};
    auto conj_pair = [&](MomentKind a, MomentKind b) {
        CHECK(std::abs(moment(pk, a, 1.0) - std::conj(moment(pk, b, 1.0))) < 1e-12);
    };
    conj_pair(MomentKind::pq3, MomentKind::q3p);
    conj_pair(MomentKind::qp3, MomentKind::p3q);
    conj_pair(MomentKind::q_w_p2q, MomentKind::w_p2q_q);
    conj_pair(MomentKind::p_w_p2q, MomentKind::w_p2q_p);
    conj_pair(MomentKind::q_w_q2p, MomentKind::w_q2p_q);
    conj_pair(MomentKind::p_w_q2p, MomentKind::w_q2p_p);
}

TEST_CASE("parity flips odd moments", "[gaussian]") {
    const GaussianPacket plus{1.3, 0.8, 1.1};
    const GaussianPacket minus{-1.3, -0.8, 1.1};
    for (MomentKind odd : {MomentKind::q, MomentKind::q3, MomentKind::p, MomentKind::p3,
                           MomentKind::w_p2q, MomentKind::w_q2p})
        CHECK(std::abs(moment(plus, odd, 1.0) + moment(minus, odd, 1.0)) < 1e-12);
    for (MomentKind even : {MomentKind::q4, MomentKind::p4, MomentKind::pq3, MomentKind::qp3,
                            MomentKind::q_w_p2q, MomentKind::p_w_q2p})
        CHECK(std::abs(moment(plus, even, 1.0) - moment(minus, even, 1.0)) < 1e-12);
}

TEST_CASE("static covariance table", "[gaussian]") {
    SECTION("spot values") {
        const CovarianceTable c = static_covariances({0.0, 0.5, 1.0}, 1.0);
        CHECK(c.cov_p_q3 == 0.0);
        CHECK(c.cov_q_p3 == 0.0);
        CHECK(c.cov_q_q3 == Approx(3.0).epsilon(1e-14));
        // cov(q, W(q^2 p)) is proportional to p0 q0
        CHECK(c.cov_q_Wq2p == 0.0);
    }
    SECTION("assembly from raw symmetrized moments reproduces the table") {
        for (double q0 : kGrid_q0)
            for (double p0 : kGrid_p0)
                for (double s : kGrid_s) {
                    const GaussianPacket pk{q0, p0, s};
                    const CovarianceTable c = static_covariances(pk, 1.0);
                    auto cov = [&](MomentKind xy, MomentKind yx, MomentKind x, MomentKind y) {
                        const cplx v = 0.5 * (moment_oracle_kind(pk, xy, 1.0) +
                                              moment_oracle_kind(pk, yx, 1.0)) -
                                       moment_oracle_kind(pk, x, 1.0) *
                                           moment_oracle_kind(pk, y, 1.0);
                        CHECK(std::abs(v.imag()) < 1e-10 * (1.0 + std::abs(v)));
                        return v.real();
                    };
                    auto rel = [](double a, double b) {
                        return std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(b));
                    };
                    CHECK(rel(cov(MomentKind::pq3, MomentKind::q3p, MomentKind::p, MomentKind::q3),
                              c.cov_p_q3));
                    CHECK(rel(cov(MomentKind::qp3, MomentKind::p3q, MomentKind::q, MomentKind::p3),
                              c.cov_q_p3));
                    CHECK(rel(cov(MomentKind::p_w_p2q, MomentKind::w_p2q_p, MomentKind::p,
                                  MomentKind::w_p2q),
                              c.cov_p_Wp2q));
                    CHECK(rel(cov(MomentKind::q_w_p2q, MomentKind::w_p2q_q, MomentKind::q,
                                  MomentKind::w_p2q),
                              c.cov_q_Wp2q));
                    CHECK(rel(cov(MomentKind::p_w_q2p, MomentKind::w_q2p_p, MomentKind::p,
                                  MomentKind::w_q2p),
                              c.cov_p_Wq2p));
                    CHECK(rel(cov(MomentKind::q_w_q2p, MomentKind::w_q2p_q, MomentKind::q,
                                  MomentKind::w_q2p),
                              c.cov_q_Wq2p));
                }
    }
}

TEST_CASE("weyl expectations", "[gaussian]") {
    CHECK(std::abs(weyl_expectation({0.0, 5.0, 1.3}, {2, 1, WeylOrder::p_first}, 1.0)) < 1e-14);
    CHECK(weyl_expectation({0.0, 2.0, 1.0}, {1, 2, WeylOrder::q_first}, 1.0).real() ==
          Approx(1.5).epsilon(1e-14));
    CHECK_THROWS_AS(weyl_expectation({0, 0, 1}, {3, 1, WeylOrder::p_first}, 1.0),
                    std::domain_error);

    // operator identity p^2 q + p q p + q p^2 = 3 p q p in expectation
    const GaussianPacket pk{0.9, -1.7, 0.6};
    const cplx lhs = moment_oracle(pk, "ppq", 1.0) + moment_oracle(pk, "pqp", 1.0) +
                     moment_oracle(pk, "qpp", 1.0);
    const cplx rhs = 3.0 * moment_oracle(pk, "pqp", 1.0);
    CHECK(std::abs(lhs - rhs) < 1e-12 * (1.0 + std::abs(rhs)));
}

TEST_CASE("published moment-table deviations are logged, not corrected", "[gaussian]") {
    // q0 = p0 = 1 makes every printed slip coincide with the confirmed value
    CHECK(printed_moment_deviations({1.0, 1.0, 0.8}, 1.0).empty());
    const auto devs = printed_moment_deviations({2.0, 3.0, 0.8}, 1.0);
    REQUIRE(devs.size() == 6);
    for (const auto& d : devs) {
        const bool expected =
            d.kind == MomentKind::q_w_p2q || d.kind == MomentKind::w_p2q_q ||
            d.kind == MomentKind::w_p2q_p || d.kind == MomentKind::p_w_p2q ||
            d.kind == MomentKind::p_w_q2p || d.kind == MomentKind::w_q2p_p;
        CHECK(expected);
        // the oracle arbitrates towards the confirmed value
        CHECK(std::abs(moment_oracle_kind({2.0, 3.0, 0.8}, d.kind, 1.0) - d.confirmed) <
              1e-9 * (1.0 + std::abs(d.confirmed)));
    }
}
