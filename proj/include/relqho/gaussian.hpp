#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "relqho/params.hpp"
#include "relqho/quad.hpp"

namespace relqho {

// Static expectation values of the Gaussian packet
//   psi(q) = (2 pi sigma^2)^{-1/4} exp(-(q-q0)^2 / 4 sigma^2 + i p0 q / hbar)
// over the operator list used by the dynamics assembly, plus an independent
// position-space quadrature oracle for arbitrary words in (q, p) up to
// length 6. W denotes the symmetrization
//   W(p^2 q) = (p^2 q + p q p + q p^2) / 4,
//   W(q^2 p) = (q^2 p + q p q + p q^2) / 4.

using cplx = std::complex<double>;

enum class MomentKind {
    q, q3, q4, p, p3, p4,
    pq3, q3p, qp3, p3q,
    w_p2q, q_w_p2q, w_p2q_q, w_p2q_p, p_w_p2q,
    w_q2p, q_w_q2p, w_q2p_q, p_w_q2p, w_q2p_p,
};

inline constexpr MomentKind all_moment_kinds[] = {
    MomentKind::q, MomentKind::q3, MomentKind::q4, MomentKind::p, MomentKind::p3,
    MomentKind::p4, MomentKind::pq3, MomentKind::q3p, MomentKind::qp3, MomentKind::p3q,
    MomentKind::w_p2q, MomentKind::q_w_p2q, MomentKind::w_p2q_q, MomentKind::w_p2q_p,
    MomentKind::p_w_p2q, MomentKind::w_q2p, MomentKind::q_w_q2p, MomentKind::w_q2p_q,
    MomentKind::p_w_q2p, MomentKind::w_q2p_p,
};

inline const char* moment_name(MomentKind k) {
    switch (k) {
    case MomentKind::q: return "q";
    case MomentKind::q3: return "q^3";
    case MomentKind::q4: return "q^4";
    case MomentKind::p: return "p";
    case MomentKind::p3: return "p^3";
    case MomentKind::p4: return "p^4";
    case MomentKind::pq3: return "p q^3";
    case MomentKind::q3p: return "q^3 p";
    case MomentKind::qp3: return "q p^3";
    case MomentKind::p3q: return "p^3 q";
    case MomentKind::w_p2q: return "W(p^2 q)";
    case MomentKind::q_w_p2q: return "q W(p^2 q)";
    case MomentKind::w_p2q_q: return "W(p^2 q) q";
    case MomentKind::w_p2q_p: return "W(p^2 q) p";
    case MomentKind::p_w_p2q: return "p W(p^2 q)";
    case MomentKind::w_q2p: return "W(q^2 p)";
    case MomentKind::q_w_q2p: return "q W(q^2 p)";
    case MomentKind::w_q2p_q: return "W(q^2 p) q";
    case MomentKind::p_w_q2p: return "p W(q^2 p)";
    case MomentKind::w_q2p_p: return "W(q^2 p) p";
    }
    return "?";
}

/// Closed-form moments. Where the published moment table carries transcription
/// slips (see moment_printed), these are the quadrature-confirmed forms.
inline cplx moment(const GaussianPacket& pk, MomentKind kind, double hbar) {
    pk.validate();
    const double q0 = pk.q0, p0 = pk.p0;
    const double s2 = pk.sigma_q2(), s4 = s2 * s2;
    const double h = hbar, h2 = h * h, h3 = h2 * h;
    const cplx I(0.0, 1.0);
    switch (kind) {
    case MomentKind::q: return q0;
    case MomentKind::q3: return q0 * q0 * q0 + 3.0 * q0 * s2;
    case MomentKind::q4: return q0 * q0 * q0 * q0 + 6.0 * q0 * q0 * s2 + 3.0 * s4;
    case MomentKind::p: return p0;
    case MomentKind::p3: return 0.75 * h2 * p0 / s2 + p0 * p0 * p0;
    case MomentKind::p4:
        return 3.0 * h2 * h2 / (16.0 * s4) + 1.5 * h2 * p0 * p0 / s2 + p0 * p0 * p0 * p0;
    case MomentKind::pq3:
        return p0 * (q0 * q0 * q0 + 3.0 * q0 * s2) - 1.5 * I * h * (q0 * q0 + s2);
    case MomentKind::q3p:
        return p0 * (q0 * q0 * q0 + 3.0 * q0 * s2) + 1.5 * I * h * (q0 * q0 + s2);
    case MomentKind::qp3:
        return (8.0 * p0 * p0 * p0 * q0 * s2 + 12.0 * I * h * p0 * p0 * s2 +
                6.0 * h2 * p0 * q0 + 3.0 * I * h3) / (8.0 * s2);
    case MomentKind::p3q:
        return (8.0 * p0 * p0 * p0 * q0 * s2 - 12.0 * I * h * p0 * p0 * s2 +
                6.0 * h2 * p0 * q0 - 3.0 * I * h3) / (8.0 * s2);
    case MomentKind::w_p2q: return 3.0 * q0 * (4.0 * p0 * p0 * s2 + h2) / (16.0 * s2);
    case MomentKind::q_w_p2q:
        return 3.0 *
               ((4.0 * p0 * p0 * s2 + h2) * (q0 * q0 + s2) + 4.0 * I * h * p0 * q0 * s2) /
               (16.0 * s2);
    case MomentKind::w_p2q_q:
        return 3.0 *
               ((4.0 * p0 * p0 * s2 + h2) * (q0 * q0 + s2) - 4.0 * I * h * p0 * q0 * s2) /
               (16.0 * s2);
    case MomentKind::w_p2q_p:
        return 3.0 *
               (8.0 * p0 * p0 * p0 * q0 * s2 + 6.0 * h2 * p0 * q0 +
                I * h * (4.0 * p0 * p0 * s2 + h2)) /
               (32.0 * s2);
    case MomentKind::p_w_p2q:
        return 3.0 *
               (8.0 * p0 * p0 * p0 * q0 * s2 + 6.0 * h2 * p0 * q0 -
                I * h * (4.0 * p0 * p0 * s2 + h2)) /
               (32.0 * s2);
    case MomentKind::w_q2p: return 0.75 * p0 * (q0 * q0 + s2);
    case MomentKind::q_w_q2p:
        return 0.375 * (2.0 * p0 * (q0 * q0 * q0 + 3.0 * q0 * s2) + I * h * (q0 * q0 + s2));
    case MomentKind::w_q2p_q:
        return 0.375 * (2.0 * p0 * (q0 * q0 * q0 + 3.0 * q0 * s2) - I * h * (q0 * q0 + s2));
    case MomentKind::p_w_q2p:
        return 3.0 *
               ((4.0 * p0 * p0 * s2 + h2) * (q0 * q0 + s2) - 4.0 * I * h * p0 * q0 * s2) /
               (16.0 * s2);
    case MomentKind::w_q2p_p:
        return 3.0 *
               ((4.0 * p0 * p0 * s2 + h2) * (q0 * q0 + s2) + 4.0 * I * h * p0 * q0 * s2) /
               (16.0 * s2);
    }
    throw std::invalid_argument("moment: unknown kind");
}

/// Verbatim transcription of the published moment table. Six entries differ from
/// moment(): the mixed-Weyl rows print (q0 + sigma^2) where the quadrature
/// oracle requires (q0^2 + sigma^2), and the imaginary parts of <W(p^2 q) p>,
/// <p W(p^2 q)> print 4 i hbar p0 sigma^2 for 4 i hbar p0^2 sigma^2.
inline cplx moment_printed(const GaussianPacket& pk, MomentKind kind, double hbar) {
    const double q0 = pk.q0, p0 = pk.p0;
    const double s2 = pk.sigma_q2();
    const double h = hbar, h2 = h * h;
    const cplx I(0.0, 1.0);
    switch (kind) {
    case MomentKind::q_w_p2q:
        return 3.0 *
               (4.0 * p0 * p0 * s2 * (q0 + s2) + 4.0 * I * h * p0 * q0 * s2 +
                h2 * (q0 * q0 + s2)) /
               (16.0 * s2);
    case MomentKind::w_p2q_q:
        return 3.0 *
               (4.0 * p0 * p0 * s2 * (q0 + s2) - 4.0 * I * h * p0 * q0 * s2 +
                h2 * (q0 * q0 + s2)) /
               (16.0 * s2);
    case MomentKind::w_p2q_p:
        return 3.0 *
               (8.0 * p0 * p0 * p0 * q0 * s2 + 4.0 * I * h * p0 * s2 + 6.0 * h2 * p0 * q0 +
                I * h * h2) /
               (32.0 * s2);
    case MomentKind::p_w_p2q:
        return 3.0 *
               (8.0 * p0 * p0 * p0 * q0 * s2 - 4.0 * I * h * p0 * s2 + 6.0 * h2 * p0 * q0 -
                I * h * h2) /
               (32.0 * s2);
    case MomentKind::p_w_q2p:
        return 3.0 *
               (4.0 * p0 * p0 * s2 * (q0 + s2) - 4.0 * I * h * p0 * q0 * s2 +
                h2 * (q0 * q0 + s2)) /
               (16.0 * s2);
    case MomentKind::w_q2p_p:
        return 3.0 *
               (4.0 * p0 * p0 * s2 * (q0 + s2) + 4.0 * I * h * p0 * q0 * s2 +
                h2 * (q0 * q0 + s2)) /
               (16.0 * s2);
    default:
        return moment(pk, kind, hbar);
    }
}

struct CovarianceTable {
    double cov_q_q3;
    double cov_p_p3;
    double cov_p_q3;
    double cov_q_p3;
    double cov_p_Wp2q;
    double cov_q_Wp2q;
    double cov_p_Wq2p;
    double cov_q_Wq2p;
};

/// The eight static symmetrized covariances feeding the variance assembly.
inline CovarianceTable static_covariances(const GaussianPacket& pk, double hbar) {
    pk.validate();
    const double q0 = pk.q0, p0 = pk.p0;
    const double s2 = pk.sigma_q2(), s4 = s2 * s2;
    const double h2 = hbar * hbar;
    CovarianceTable c;
    c.cov_q_q3 = 3.0 * s2 * (q0 * q0 + s2);
    c.cov_p_p3 = 3.0 * h2 * (h2 + 4.0 * p0 * p0 * s2) / (16.0 * s4);
    c.cov_p_q3 = 0.0;
    c.cov_q_p3 = 0.0;
    c.cov_p_Wp2q = 3.0 * h2 * p0 * q0 / (8.0 * s2);
    c.cov_q_Wp2q = 3.0 * h2 / 16.0 + 0.75 * p0 * p0 * s2;
    c.cov_p_Wq2p = 3.0 * h2 * (q0 * q0 + s2) / (16.0 * s2);
    c.cov_q_Wq2p = 1.5 * p0 * q0 * s2;
    return c;
}

// ---------------------------------------------------------------------------
// Quadrature oracle: apply a word of q/p operators to psi symbolically
// (polynomial x Gaussian closure), then integrate with Gauss-Hermite.

namespace detail {

// complex polynomial in (q - q0), low degree
struct Poly {
    std::vector<cplx> c; // c[k] (q-q0)^k

    static Poly one() { return {{1.0}}; }
    cplx at(double u) const {
        cplx acc = 0.0;
        for (std::size_t k = c.size(); k-- > 0;)
            acc = acc * u + c[k];
        return acc;
    }
};

/// q acting on poly * psi: multiply by (q - q0) + q0.
inline Poly apply_q(const Poly& f, double q0) {
    Poly g;
    g.c.assign(f.c.size() + 1, 0.0);
    for (std::size_t k = 0; k < f.c.size(); ++k) {
        g.c[k + 1] += f.c[k];
        g.c[k] += q0 * f.c[k];
    }
    return g;
}

/// p acting on poly * psi with psi'/psi = -(q-q0)/(2 sigma^2) + i p0/hbar:
/// p (f psi) = (-i hbar f' + i hbar (q-q0)/(2 sigma^2) f + p0 f) psi.
inline Poly apply_p(const Poly& f, double p0, double s2, double hbar) {
    const cplx I(0.0, 1.0);
    Poly g;
    g.c.assign(f.c.size() + 1, 0.0);
    for (std::size_t k = 0; k < f.c.size(); ++k) {
        if (k > 0)
            g.c[k - 1] += -I * hbar * static_cast<double>(k) * f.c[k];
        g.c[k + 1] += I * hbar / (2.0 * s2) * f.c[k];
        g.c[k] += p0 * f.c[k];
    }
    return g;
}

/// E[poly(q-q0)] under |psi|^2 = N(q0, sigma^2) with an n-point Gauss-Hermite
/// rule; substitution u = (q-q0)/(sigma sqrt 2).
inline cplx gh_expect(const Poly& f, double s2, int order) {
    const QuadRule& r = gauss_hermite(order);
    const double scale = std::sqrt(2.0 * s2);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
        acc += r.weights[i] * f.at(scale * r.nodes[i]);
    return acc / std::sqrt(M_PI);
}

} // namespace detail

/// <psi| word |psi> for a word over the alphabet {q, p} of length <= 6,
/// leftmost letter applied last. Gauss-Hermite order doubles from `order`
/// until two successive evaluations agree within tol.
inline cplx moment_oracle(const GaussianPacket& pk, std::string_view word, double hbar,
                          double tol = 1e-12, int order = 80) {
    pk.validate();
    if (word.size() > 6)
        throw std::invalid_argument("moment_oracle: word length must be <= 6");
    detail::Poly f = detail::Poly::one();
    for (std::size_t i = word.size(); i-- > 0;) {
        const char ch = word[i];
        if (ch == 'q')
            f = detail::apply_q(f, pk.q0);
        else if (ch == 'p')
            f = detail::apply_p(f, pk.p0, pk.sigma_q2(), hbar);
        else if (ch == ' ')
            continue;
        else
            throw std::invalid_argument("moment_oracle: word must consist of 'q'/'p'");
    }
    cplx prev = detail::gh_expect(f, pk.sigma_q2(), order);
    for (int k = 0; k < 3; ++k) {
        order *= 2;
        const cplx cur = detail::gh_expect(f, pk.sigma_q2(), order);
        if (std::abs(cur - prev) <= tol * (1.0 + std::abs(cur)))
            return cur;
        prev = cur;
    }
    throw QuadratureError("moment_oracle: Gauss-Hermite doubling did not converge",
                          std::abs(prev), tol);
}

/// Oracle value of a MomentKind, assembling the W-kinds from their word sums.
inline cplx moment_oracle_kind(const GaussianPacket& pk, MomentKind kind, double hbar,
                               double tol = 1e-12) {
    auto w3 = [&](const char* a, const char* b, const char* c) {
        return (moment_oracle(pk, a, hbar, tol) + moment_oracle(pk, b, hbar, tol) +
                moment_oracle(pk, c, hbar, tol)) / 4.0;
    };
    switch (kind) {
    case MomentKind::q: return moment_oracle(pk, "q", hbar, tol);
    case MomentKind::q3: return moment_oracle(pk, "qqq", hbar, tol);
    case MomentKind::q4: return moment_oracle(pk, "qqqq", hbar, tol);
    case MomentKind::p: return moment_oracle(pk, "p", hbar, tol);
    case MomentKind::p3: return moment_oracle(pk, "ppp", hbar, tol);
    case MomentKind::p4: return moment_oracle(pk, "pppp", hbar, tol);
    case MomentKind::pq3: return moment_oracle(pk, "pqqq", hbar, tol);
    case MomentKind::q3p: return moment_oracle(pk, "qqqp", hbar, tol);
    case MomentKind::qp3: return moment_oracle(pk, "qppp", hbar, tol);
    case MomentKind::p3q: return moment_oracle(pk, "pppq", hbar, tol);
    case MomentKind::w_p2q: return w3("ppq", "pqp", "qpp");
    case MomentKind::q_w_p2q: return w3("qppq", "qpqp", "qqpp");
    case MomentKind::w_p2q_q: return w3("ppqq", "pqpq", "qppq");
    case MomentKind::w_p2q_p: return w3("ppqp", "pqpp", "qppp");
    case MomentKind::p_w_p2q: return w3("pppq", "ppqp", "pqpp");
    case MomentKind::w_q2p: return w3("qqp", "qpq", "pqq");
    case MomentKind::q_w_q2p: return w3("qqqp", "qqpq", "qpqq");
    case MomentKind::w_q2p_q: return w3("qqpq", "qpqq", "pqqq");
    case MomentKind::p_w_q2p: return w3("pqqp", "pqpq", "ppqq");
    case MomentKind::w_q2p_p: return w3("qqpp", "qpqp", "pqqp");
    }
    throw std::invalid_argument("moment_oracle_kind: unknown kind");
}

enum class WeylOrder { q_first, p_first };

struct WeylSpec {
    int p_exp;
    int q_exp;
    WeylOrder order;
};

/// Expectation of the symmetrized monomial; only the (2,1) cases appearing in
/// the cubic expansion are supported.
inline cplx weyl_expectation(const GaussianPacket& pk, const WeylSpec& spec, double hbar) {
    if (spec.order == WeylOrder::p_first && spec.p_exp == 2 && spec.q_exp == 1)
        return moment(pk, MomentKind::w_p2q, hbar);
    if (spec.order == WeylOrder::q_first && spec.q_exp == 2 && spec.p_exp == 1)
        return moment(pk, MomentKind::w_q2p, hbar);
    throw std::domain_error("weyl_expectation: only W(p^2 q) and W(q^2 p) are supported");
}

struct MomentDeviation {
    MomentKind kind;
    cplx printed;
    cplx confirmed;
    double abs_dev;
};

/// Entries where the published moment table disagrees with the oracle-backed
/// closed forms for this packet. Logged by the compare pipeline, never fixed
/// silently.
inline std::vector<MomentDeviation> printed_moment_deviations(const GaussianPacket& pk,
                                                                  double hbar) {
    std::vector<MomentDeviation> out;
    for (MomentKind k : all_moment_kinds) {
        const cplx a = moment_printed(pk, k, hbar);
        const cplx b = moment(pk, k, hbar);
        const double dev = std::abs(a - b);
        if (dev > 1e-12 * (1.0 + std::abs(b)))
            out.push_back({k, a, b, dev});
    }
    return out;
}

} // namespace relqho
