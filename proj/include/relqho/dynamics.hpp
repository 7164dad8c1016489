#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "relqho/coeffs.hpp"
#include "relqho/gaussian.hpp"
#include "relqho/params.hpp"

namespace relqho {

// First-order (1/c^2) corrections to the wave-packet variances:
//
//   sigma_q^2_R(t) = sigma_q^2_NR(t) + cov(q_s, [V, q_s]) / (i hbar 4 m^3 c^2)
//   sigma_p^2_R(t) = sigma_p^2_NR(t) + cov(p_s, [V, p_s]) / (i hbar 4 m^3 c^2)
//
// assembled canonically as channel coefficients x static covariances x the
// Heisenberg mixing p_s = b1 p + a1 q, q_s = b2 p + a2 q. The verbatim()
// layer transcribes the published long-form expressions and is a comparison
// surface only; formula_discrepancies() quantifies the gap.

struct NrVariances {
    double sigma_q2;
    double sigma_p2;
    double product; // sqrt(sigma_q2 * sigma_p2)
};

inline NrVariances nr_variances(const GaussianPacket& pk, const OscillatorParams& pr, double t) {
    pk.validate();
    pr.validate();
    const double c1 = std::cos(pr.omega * t), s1 = std::sin(pr.omega * t);
    const double c2 = c1 * c1, s2 = s1 * s1;
    const double mw = pr.mass * pr.omega;
    const double sq2 = pk.sigma_q2(), sp2 = pk.sigma_p2(pr.hbar);
    NrVariances v;
    v.sigma_q2 = c2 * sq2 + s2 * sp2 / (mw * mw);
    v.sigma_p2 = c2 * sp2 + mw * mw * s2 * sq2;
    v.product = std::sqrt(v.sigma_q2 * v.sigma_p2);
    return v;
}

/// cov(p_s(t), [V(t), p_s(t)]) / (i hbar).
inline double cov_vps(double t, const GaussianPacket& pk, const OscillatorParams& pr,
                      CoeffSource src = CoeffSource::oracle) {
    const CoeffSet cs = coeff_set(src, t, pr);
    const CovarianceTable cv = static_covariances(pk, pr.hbar);
    const double covP[4] = {cv.cov_p_p3, cv.cov_p_Wp2q, cv.cov_p_Wq2p, cv.cov_p_q3};
    const double covQ[4] = {cv.cov_q_p3, cv.cov_q_Wp2q, cv.cov_q_Wq2p, cv.cov_q_q3};
    static constexpr double mult[4] = {1.0, 4.0, 4.0, 1.0};
    double acc = 0.0;
    for (int j = 0; j < 4; ++j)
        acc += mult[j] * cs.A[j] * (cs.b1 * covP[j] + cs.a1 * covQ[j]);
    return acc;
}

/// cov(q_s(t), [V(t), q_s(t)]) / (i hbar).
inline double cov_vqs(double t, const GaussianPacket& pk, const OscillatorParams& pr,
                      CoeffSource src = CoeffSource::oracle) {
    const CoeffSet cs = coeff_set(src, t, pr);
    const CovarianceTable cv = static_covariances(pk, pr.hbar);
    const double covP[4] = {cv.cov_p_p3, cv.cov_p_Wp2q, cv.cov_p_Wq2p, cv.cov_p_q3};
    const double covQ[4] = {cv.cov_q_p3, cv.cov_q_Wp2q, cv.cov_q_Wq2p, cv.cov_q_q3};
    static constexpr double mult[4] = {1.0, 4.0, 4.0, 1.0};
    double acc = 0.0;
    for (int j = 0; j < 4; ++j)
        acc += mult[j] * cs.B[j] * (cs.b2 * covP[j] + cs.a2 * covQ[j]);
    return acc;
}

struct RelVariances {
    double sigma_q2_rel;
    double sigma_p2_rel;
};

inline RelVariances rel_variances(double t, const GaussianPacket& pk, const OscillatorParams& pr,
                                  CoeffSource src = CoeffSource::oracle) {
    const NrVariances nr = nr_variances(pk, pr, t);
    const double pref = 1.0 / (4.0 * pr.mass * pr.mass * pr.mass * pr.c * pr.c);
    return {nr.sigma_q2 + pref * cov_vqs(t, pk, pr, src),
            nr.sigma_p2 + pref * cov_vps(t, pk, pr, src)};
}

enum class ProductForm { linearized, product };

/// Corrected uncertainty product, truncated to first order in 1/c^2. The
/// linearized form is anchored at hbar/2 and refuses non-coherent packets.
inline double uncertainty_product(double t, const GaussianPacket& pk, const OscillatorParams& pr,
                                  CoeffSource src = CoeffSource::oracle,
                                  ProductForm form = ProductForm::linearized) {
    pk.validate();
    pr.validate();
    const double pref = 1.0 / (4.0 * pr.mass * pr.mass * pr.mass * pr.c * pr.c);
    const double corr_q2 = pref * cov_vqs(t, pk, pr, src);
    const double corr_p2 = pref * cov_vps(t, pk, pr, src);
    if (form == ProductForm::linearized) {
        if (!is_coherent(pk, pr, 1e-9))
            throw std::domain_error(
                "uncertainty_product: linearized form requires a coherent packet");
        const double sq2 = pk.sigma_q2(), sp2 = pk.sigma_p2(pr.hbar);
        return 0.5 * pr.hbar * (1.0 + 0.5 * (corr_q2 / sq2 + corr_p2 / sp2));
    }
    const NrVariances nr = nr_variances(pk, pr, t);
    return nr.product * (1.0 + 0.5 * (corr_q2 / nr.sigma_q2 + corr_p2 / nr.sigma_p2));
}

struct ScalingSample {
    double omega_t;
    double f1; // relative first-order shift of the uncertainty product per eta_E
    double f2; // relative first-order shift of sigma_q^2 per eta_E
};

/// Ground-packet scaling functions; exact identities of the linear engine,
/// independent of eta_E.
inline ScalingSample scaling_functions(double omega_t, const OscillatorParams& pr,
                                       CoeffSource src = CoeffSource::oracle) {
    pr.validate();
    const GaussianPacket pk = ground_packet(pr);
    const double eps = eta_e(pr);
    const double t = omega_t / pr.omega;
    const double pref = 1.0 / (4.0 * pr.mass * pr.mass * pr.mass * pr.c * pr.c);
    const double corr_q2 = pref * cov_vqs(t, pk, pr, src);
    const double corr_p2 = pref * cov_vps(t, pk, pr, src);
    const NrVariances nr = nr_variances(pk, pr, t);
    const double corr_product = 0.25 * pr.hbar * (corr_q2 / nr.sigma_q2 + corr_p2 / nr.sigma_p2);
    return {omega_t, (corr_product / (0.5 * pr.hbar)) / eps, (corr_q2 / nr.sigma_q2) / eps};
}

struct MomentSeries {
    std::vector<double> times;
    std::vector<double> omega_t;
    std::vector<double> sigma_q2_nr, sigma_p2_nr;
    std::vector<double> sigma_q2_rel, sigma_p2_rel;
    std::vector<double> product_rel;
    std::vector<double> corr_q2, corr_p2, corr_product;
    CoeffSource mode = CoeffSource::oracle;

    std::size_t size() const { return times.size(); }
};

inline MomentSeries series(const GaussianPacket& pk, const OscillatorParams& pr,
                           std::span<const double> t_grid,
                           CoeffSource src = CoeffSource::oracle) {
    pk.validate();
    pr.validate();
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw std::invalid_argument("series: time grid must be strictly increasing");
    MomentSeries s;
    s.mode = src;
    const std::size_t n = t_grid.size();
    for (auto* v : {&s.times, &s.omega_t, &s.sigma_q2_nr, &s.sigma_p2_nr, &s.sigma_q2_rel,
                    &s.sigma_p2_rel, &s.product_rel, &s.corr_q2, &s.corr_p2, &s.corr_product})
        v->reserve(n);
    const double pref = 1.0 / (4.0 * pr.mass * pr.mass * pr.mass * pr.c * pr.c);
    for (double t : t_grid) {
        const NrVariances nr = nr_variances(pk, pr, t);
        const double cq = pref * cov_vqs(t, pk, pr, src);
        const double cp = pref * cov_vps(t, pk, pr, src);
        const double cprod = 0.5 * nr.product * (cq / nr.sigma_q2 + cp / nr.sigma_p2);
        s.times.push_back(t);
        s.omega_t.push_back(pr.omega * t);
        s.sigma_q2_nr.push_back(nr.sigma_q2);
        s.sigma_p2_nr.push_back(nr.sigma_p2);
        s.sigma_q2_rel.push_back(nr.sigma_q2 + cq);
        s.sigma_p2_rel.push_back(nr.sigma_p2 + cp);
        s.product_rel.push_back(nr.product + cprod);
        s.corr_q2.push_back(cq);
        s.corr_p2.push_back(cp);
        s.corr_product.push_back(cprod);
    }
    return s;
}

/// Map a natural-unit series back to the input unit system.
inline MomentSeries denormalize(MomentSeries s, const ScaleRecord& sc) {
    const double L2 = sc.length_scale * sc.length_scale;
    const double P2 = sc.momentum_scale * sc.momentum_scale;
    const double LP = sc.length_scale * sc.momentum_scale;
    for (auto& t : s.times)
        t *= sc.time_scale;
    for (auto* v : {&s.sigma_q2_nr, &s.sigma_q2_rel, &s.corr_q2})
        for (auto& x : *v)
            x *= L2;
    for (auto* v : {&s.sigma_p2_nr, &s.sigma_p2_rel, &s.corr_p2})
        for (auto& x : *v)
            x *= P2;
    for (auto* v : {&s.product_rel, &s.corr_product})
        for (auto& x : *v)
            x *= LP;
    return s;
}

struct SecularFit {
    double slope;
    double intercept;
    double r_squared;
};

/// Least-squares line through the per-period maxima of |corr_q2|. r_squared
/// is reported as 0 when the maxima carry no variance to explain.
inline SecularFit secular_fit(const MomentSeries& s) {
    if (s.size() < 2)
        throw std::domain_error("secular_fit: series too short");
    const double span = s.omega_t.back() - s.omega_t.front();
    const int periods = static_cast<int>(std::floor(span / (2.0 * M_PI) + 1e-9));
    if (periods < 10)
        throw std::domain_error("secular_fit: series must span at least 10 periods");
    std::vector<double> ymax(periods, 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double phase = s.omega_t[i] - s.omega_t.front();
        int k = static_cast<int>(phase / (2.0 * M_PI));
        k = std::clamp(k, 0, periods - 1);
        ymax[k] = std::max(ymax[k], std::abs(s.corr_q2[i]));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < periods; ++k) {
        const double x = k + 1.0;
        sx += x;
        sy += ymax[k];
        sxx += x * x;
        sxy += x * ymax[k];
    }
    const double n = periods;
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0, scale = 0;
    const double mean = sy / n;
    for (int k = 0; k < periods; ++k) {
        const double fit = slope * (k + 1.0) + intercept;
        ss_res += (ymax[k] - fit) * (ymax[k] - fit);
        ss_tot += (ymax[k] - mean) * (ymax[k] - mean);
        scale += ymax[k] * ymax[k];
    }
    const double r2 = ss_tot > 1e-24 * std::max(scale, 1e-300) ? 1.0 - ss_res / ss_tot : 0.0;
    return {slope, intercept, r2};
}

// ---------------------------------------------------------------------------
// Verbatim layer.

enum class VerbatimFormula { relpv, relqv, relmug, covps, covqs };

inline const char* verbatim_name(VerbatimFormula f) {
    switch (f) {
    case VerbatimFormula::relpv: return "relpv";
    case VerbatimFormula::relqv: return "relqv";
    case VerbatimFormula::relmug: return "relmug";
    case VerbatimFormula::covps: return "covps";
    case VerbatimFormula::covqs: return "covqs";
    }
    return "?";
}

namespace detail {

inline double verbatim_relpv(double t, const GaussianPacket& pk, const OscillatorParams& pr) {
    const double m = pr.mass, w = pr.omega, hb = pr.hbar, c2 = pr.c * pr.c;
    const double q0 = pk.q0, p0 = pk.p0;
    const double s2 = pk.sigma_q2(), s4 = s2 * s2, s6 = s4 * s2;
    const double hb2 = hb * hb, hb4 = hb2 * hb2;
    const double m2w2 = m * m * w * w, m4w4 = m2w2 * m2w2;
    const double S1 = std::sin(w * t), S2 = std::sin(2 * w * t), S3 = std::sin(3 * w * t),
                 S4 = std::sin(4 * w * t), C1 = std::cos(w * t);
    const double secular =
        w * t *
        (-32.0 * hb2 * m * w * p0 * q0 * s4 * C1 * C1 +
         128.0 * m * m * m * w * w * w * p0 * q0 * s6 * S1 * S1 +
         (96.0 * m4w4 * s6 * (q0 * q0 + s2) +
          8.0 * m2w2 * (hb2 * q0 * q0 * s2 + 4.0 * p0 * p0 * s6 + 2.0 * hb2 * s4) -
          24.0 * hb2 * p0 * p0 * s2 - 6.0 * hb4) *
             S2);
    const double rest =
        (-144.0 * m4w4 * s6 * (q0 * q0 + s2) - 28.0 * m2w2 * s4 * (4.0 * p0 * p0 * s2 + hb2)) *
            S1 * S1 +
        (-128.0 * m * m * m * p0 * q0 * w * w * w * s6) * C1 * S1 * S1 * S1 +
        (-4.0 * hb2 * p0 * p0 * s2 - 4.0 * hb2 * m2w2 * s2 * (q0 * q0 + s2) - hb4) * S2 * S2 +
        (16.0 * m2w2 * p0 * p0 * s6 - 16.0 * m4w4 * s6 * (q0 * q0 + s2) +
         4.0 * hb2 * m2w2 * s4) *
            S1 * S3 +
        (-4.0 * hb2 * m * w * p0 * q0 * s4 * (-6.0 * S2 + S4));
    return pk.sigma_p2(hb) + 3.0 / (512.0 * m * m * c2 * s4) * (secular + rest);
}

inline double verbatim_relqv(double t, const GaussianPacket& pk, const OscillatorParams& pr) {
    const double m = pr.mass, w = pr.omega, hb = pr.hbar, c2 = pr.c * pr.c;
    const double q0 = pk.q0, p0 = pk.p0;
    const double s2 = pk.sigma_q2(), s4 = s2 * s2, s6 = s4 * s2;
    const double hb2 = hb * hb, hb4 = hb2 * hb2;
    const double m2w2 = m * m * w * w, m4w4 = m2w2 * m2w2;
    const double S1 = std::sin(w * t), S2 = std::sin(2 * w * t), S3 = std::sin(3 * w * t),
                 S4 = std::sin(4 * w * t), C1 = std::cos(w * t), C2 = std::cos(2 * w * t);
    const double secular =
        w * t *
        (128.0 * m * m * w * p0 * q0 * s6 * C1 -
         (1.0 / (m * w * w)) *
             (4.0 * S1 *
                  (48.0 * m4w4 * s6 * (q0 * q0 + s2) +
                   4.0 * m2w2 * s4 * (4.0 * p0 * p0 * s2 + hb2) -
                   3.0 * (4.0 * p0 * p0 * s2 * hb2 + hb4)) *
                  C1 -
              4.0 * m * w * s2 * hb2 * (m * w * (q0 * q0 + s2) - 2.0 * p0 * q0 * S1)));
    const double rest =
        4.0 * m * s2 * (8.0 * m * p0 * q0 * w * s4 * C1 + (q0 * q0 + s2) * hb2 * S1) *
            (5.0 * S1 - 3.0 * S3) -
        16.0 * m * m * m * w * w * s6 * (q0 * q0 + s2) * S2 * (5.0 * S2 + S4) +
        (8.0 * s2 * S1 / w) *
            (m * w * s2 * (4.0 * p0 * p0 * s2 + hb2) * C1 + 2.0 * p0 * q0 * hb2 * S1) *
            (3.0 * S2 + S4) +
        ((4.0 * p0 * p0 * s2 * hb2 + hb4) * S1 / m2w2) *
            ((12.0 * w + 4.0 * w * C2) * S1 * S1 * S1 + m * C1 * (8.0 * S2 + S4));
    return s2 + 3.0 / (512.0 * c2 * m * m * m * s4) * (secular + rest);
}

/// Published corrected uncertainty product, kept exactly as printed
/// (including its dimensionally mixed groupings such as 16 sigma^8 + hbar^3).
inline double verbatim_relmug(double t, const GaussianPacket& pk, const OscillatorParams& pr) {
    const double m = pr.mass, w = pr.omega, hb = pr.hbar, c2 = pr.c * pr.c;
    const double q0 = pk.q0, p0 = pk.p0;
    const double s02 = pk.sigma_q2(), s04 = s02 * s02, s06 = s04 * s02, s08 = s04 * s04;
    const double hb2 = hb * hb, hb3 = hb2 * hb, hb4 = hb2 * hb2;
    const double S1 = std::sin(w * t), S2 = std::sin(2 * w * t), S3 = std::sin(3 * w * t),
                 C1 = std::cos(w * t), C2 = std::cos(2 * w * t);
    const double m4w4 = std::pow(m * w, 4);
    const double term1 =
        -(3.0 * t / (m * w * s04)) *
        (16.0 * m * m * m * p0 * q0 * w * w * w * s02 * (16.0 * s08 + hb3) * C1 * C1 +
         64.0 * m * p0 * q0 * w * s06 * hb * (m4w4 + hb) * S1 * S1 -
         (4.0 * s04 - m * m * w * w * hb) *
             (48.0 * m * w * s06 * (q0 * q0 + s02) -
              4.0 * m * m * w * w * s02 * (4.0 * p0 * p0 * s04 + (q0 * q0 + 2.0 * s02) * hb2) +
              12.0 * p0 * p0 * s02 * hb2 + 3.0 * hb4) *
             S2);
    const double term2 =
        1.5 *
        (32.0 * hb * m * m * w * w * s02 * (q0 * q0 + s02) * (5.0 + C2) * S1 * S1 +
         8.0 * hb2 * (4.0 * p0 * p0 * s02 + hb2) * (7.0 + 3.0 * C2) * S1 * S1 / (m * w * w) +
         8.0 * hb * m * m * m * w * w * S1 *
             (-(q0 * q0 + s02) * hb2 * C1 + 8.0 * m * p0 * q0 * w * s04 * S1) * S2 / s02 -
         96.0 * s02 * S1 *
             (m * w * s02 * (4.0 * p0 * p0 * s02 + hb2) * C1 + 2.0 * p0 * q0 * hb2 * S1) * S2 /
             w -
         192.0 * s06 * (q0 * q0 + s02) * S2 * S2 / w -
         m * hb3 * (4.0 * p0 * p0 * s02 + hb2) * S2 * S2 / s04 -
         16.0 * m * s02 * (8.0 * m * p0 * q0 * w * s04 * C1 + (q0 * q0 + s02) * hb2 * S1) *
             (5.0 * S1 - 3.0 * S3) +
         4.0 * m * m * w * hb *
             (-2.0 * p0 * q0 * hb2 * C1 + m * w * s02 * (4.0 * p0 * p0 * s02 + hb2) * S1) *
             (-7.0 * S1 + S3) / s02);
    return 0.5 * hb + (term1 + term2) / (1024.0 * c2 * m * m * m * s02);
}

/// Published covariance assemblies; note they pair the a-factors with the
/// cov(p, .)-valued entries, opposite to the Heisenberg mixing, and carry the
/// printed coefficient table. Returned divided by i hbar.
inline double verbatim_covps(double t, const GaussianPacket& pk, const OscillatorParams& pr) {
    const CoeffSet cs = coeff_set(CoeffSource::printed, t, pr);
    const CovarianceTable cv = static_covariances(pk, pr.hbar);
    return cs.A[0] * cs.a1 * cv.cov_p_p3 +
           4.0 * cs.A[1] * (cs.a1 * cv.cov_p_Wp2q + cs.b1 * cv.cov_q_Wp2q) +
           4.0 * cs.A[2] * (cs.a1 * cv.cov_p_Wq2p + cs.b1 * cv.cov_q_Wq2p) +
           cs.A[3] * cs.b1 * cv.cov_q_q3;
}

inline double verbatim_covqs(double t, const GaussianPacket& pk, const OscillatorParams& pr) {
    const CoeffSet cs = coeff_set(CoeffSource::printed, t, pr);
    const CovarianceTable cv = static_covariances(pk, pr.hbar);
    return cs.B[0] * cs.a2 * cv.cov_p_p3 +
           4.0 * cs.B[1] * (cs.a2 * cv.cov_p_Wp2q + cs.b2 * cv.cov_q_Wp2q) +
           4.0 * cs.B[2] * (cs.a2 * cv.cov_p_Wq2p + cs.b2 * cv.cov_q_Wq2p) +
           cs.B[3] * cs.b2 * cv.cov_q_q3;
}

} // namespace detail

inline double verbatim(VerbatimFormula f, double t, const GaussianPacket& pk,
                       const OscillatorParams& pr) {
    pk.validate();
    pr.validate();
    switch (f) {
    case VerbatimFormula::relpv: return detail::verbatim_relpv(t, pk, pr);
    case VerbatimFormula::relqv: return detail::verbatim_relqv(t, pk, pr);
    case VerbatimFormula::relmug: return detail::verbatim_relmug(t, pk, pr);
    case VerbatimFormula::covps: return detail::verbatim_covps(t, pk, pr);
    case VerbatimFormula::covqs: return detail::verbatim_covqs(t, pk, pr);
    }
    throw std::invalid_argument("verbatim: unknown formula");
}

struct FormulaDeviation {
    std::string name;
    double max_abs_dev;
    double max_rel_dev;
};

struct DiscrepancyReport {
    std::vector<FormulaDeviation> formulas;
    std::vector<double> grid;
};

/// Verbatim-vs-assembled comparison over a time grid; deviations are expected
/// and recorded, never corrected.
inline DiscrepancyReport formula_discrepancies(const GaussianPacket& pk,
                                               const OscillatorParams& pr,
                                               std::span<const double> t_grid,
                                               CoeffSource src = CoeffSource::oracle) {
    DiscrepancyReport rep;
    rep.grid.assign(t_grid.begin(), t_grid.end());
    const bool coherent = is_coherent(pk, pr, 1e-9);
    struct Acc {
        double abs = 0.0, rel = 0.0;
        void add(double a, double b) {
            const double d = std::abs(a - b);
            abs = std::max(abs, d);
            rel = std::max(rel, d / std::max(std::abs(b), 1e-300));
        }
    } acc[5];
    for (double t : t_grid) {
        const RelVariances rv = rel_variances(t, pk, pr, src);
        acc[0].add(verbatim(VerbatimFormula::relpv, t, pk, pr), rv.sigma_p2_rel);
        acc[1].add(verbatim(VerbatimFormula::relqv, t, pk, pr), rv.sigma_q2_rel);
        acc[2].add(verbatim(VerbatimFormula::relmug, t, pk, pr),
                   uncertainty_product(t, pk, pr, src,
                                       coherent ? ProductForm::linearized : ProductForm::product));
        acc[3].add(verbatim(VerbatimFormula::covps, t, pk, pr), cov_vps(t, pk, pr, src));
        acc[4].add(verbatim(VerbatimFormula::covqs, t, pk, pr), cov_vqs(t, pk, pr, src));
    }
    const char* names[5] = {"relpv", "relqv", "relmug", "covps", "covqs"};
    for (int i = 0; i < 5; ++i)
        rep.formulas.push_back({names[i], acc[i].abs, acc[i].rel});
    return rep;
}

} // namespace relqho
