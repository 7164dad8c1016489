#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "relqho/coeffs.hpp"
#include "relqho/params.hpp"
#include "relqho/quad.hpp"

namespace relqho::fock {

// Non-perturbative ground truth: dense operator matrices in the oscillator
// eigenbasis, exact propagation through one Hermitian eigendecomposition, and
// the matrix-level test of the commutator channel decomposition. Everything
// near the truncation edge is corrupt by construction; norms and moments are
// trusted only while the state keeps its support below dim - guard, policed
// through tail_tol.

using Operator = Eigen::MatrixXcd;
using State = Eigen::VectorXcd;

struct FockConfig {
    int dim = 128;
    double tail_tol = 1e-12;
    int guard = 20;

    void validate() const {
        if (dim <= guard || guard < 0 || !(tail_tol > 0.0))
            throw std::invalid_argument("FockConfig: need dim > guard >= 0 and tail_tol > 0");
    }
};

class BasisTooSmallError : public std::runtime_error {
public:
    BasisTooSmallError(double tail_mass, int recommended_dim)
        : std::runtime_error("Fock basis too small: guard-band mass " +
                             std::to_string(tail_mass) + ", recommend dim >= " +
                             std::to_string(recommended_dim)),
          tail_mass_(tail_mass), recommended_dim_(recommended_dim) {}
    double tail_mass() const { return tail_mass_; }
    int recommended_dim() const { return recommended_dim_; }

private:
    double tail_mass_;
    int recommended_dim_;
};

inline bool is_hermitian(const Operator& M, double tol = 1e-12) {
    return (M - M.adjoint()).cwiseAbs().maxCoeff() < tol;
}

struct Operators {
    Operator q, p, p2, p4, H0, H, p3, q3, w_p2q, w_q2p;
};

inline Operators build_operators(const FockConfig& cfg, const OscillatorParams& pr) {
    cfg.validate();
    pr.validate();
    const int n = cfg.dim;
    Operator a = Operator::Zero(n, n);
    for (int k = 1; k < n; ++k)
        a(k - 1, k) = std::sqrt(static_cast<double>(k));
    const Operator ad = a.adjoint();
    Operators op;
    const std::complex<double> I(0.0, 1.0);
    op.q = std::sqrt(pr.hbar / (2.0 * pr.mass * pr.omega)) * (a + ad);
    op.p = I * std::sqrt(pr.hbar * pr.mass * pr.omega / 2.0) * (ad - a);
    op.p2 = op.p * op.p;
    op.p4 = op.p2 * op.p2;
    op.p3 = op.p2 * op.p;
    op.q3 = op.q * op.q * op.q;
    op.w_p2q = (op.p2 * op.q + op.p * op.q * op.p + op.q * op.p2) / 4.0;
    op.w_q2p = (op.q * op.q * op.p + op.q * op.p * op.q + op.p * op.q * op.q) / 4.0;
    op.H0 = Operator::Zero(n, n);
    for (int k = 0; k < n; ++k)
        op.H0(k, k) = pr.hbar * pr.omega * (k + 0.5);
    op.H = op.H0 - op.p4 / (8.0 * pr.mass * pr.mass * pr.mass * pr.c * pr.c);
    return op;
}

struct ConvergenceReport {
    double tail_mass;
    int recommended_dim;
};

namespace detail {

/// Amplitudes c_n = <phi_n|psi> by Gauss-Hermite quadrature against the
/// oscillator eigenfunctions, natural length xi = q sqrt(m w / hbar).
inline std::vector<std::complex<double>> raw_amplitudes(const GaussianPacket& pk,
                                                        const OscillatorParams& pr, int dim,
                                                        int order = 0) {
    const double xi_scale = std::sqrt(pr.mass * pr.omega / pr.hbar);
    const double q0 = pk.q0 * xi_scale;
    const double p0 = pk.p0 / (pr.hbar * xi_scale);
    const double s2 = pk.sigma_q2() * xi_scale * xi_scale;
    // combined Gaussian exp(-xi^2/2 - (xi-q0)^2/(4 s2)) centred for quadrature
    const double alpha = 0.5 + 1.0 / (4.0 * s2);
    const double ctr = q0 / (4.0 * s2 * alpha);
    if (order == 0)
        order = std::max(160, 2 * dim);
    const QuadRule& r = gauss_hermite(order);
    std::vector<std::complex<double>> c(dim, 0.0);
    std::vector<double> phi(dim);
    const double norm = std::pow(2.0 * M_PI * s2, -0.25);
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const double x = r.nodes[i] / std::sqrt(alpha) + ctr;
        // phi_n(x) with the e^{-x^2/2} factor folded into the residual exponent
        phi[0] = std::pow(M_PI, -0.25);
        if (dim > 1)
            phi[1] = std::sqrt(2.0) * x * phi[0];
        for (int n = 2; n < dim; ++n)
            phi[n] = std::sqrt(2.0 / n) * x * phi[n - 1] - std::sqrt((n - 1.0) / n) * phi[n - 2];
        const double rex = -(x - q0) * (x - q0) / (4.0 * s2) - 0.5 * x * x +
                           alpha * (x - ctr) * (x - ctr);
        const std::complex<double> packet =
            norm * std::exp(std::complex<double>(rex, p0 * x));
        const std::complex<double> wpack = r.weights[i] * packet / std::sqrt(alpha);
        for (int n = 0; n < dim; ++n)
            c[n] += phi[n] * wpack;
    }
    return c;
}

inline double guard_band_mass(std::span<const std::complex<double>> c, int guard) {
    double tail = 0.0;
    for (std::size_t n = c.size() - guard; n < c.size(); ++n)
        tail += std::norm(c[n]);
    double total = 0.0;
    for (const auto& x : c)
        total += std::norm(x);
    // include the norm defect: mass that fell beyond dim entirely
    return tail + std::max(0.0, 1.0 - total);
}

} // namespace detail

/// Population in the guard band at the packet's current dim, plus the smallest
/// power-of-two-scaled dim whose guard band drops below tail_tol.
inline ConvergenceReport convergence_report(const GaussianPacket& pk, const OscillatorParams& pr,
                                            const FockConfig& cfg) {
    cfg.validate();
    auto c = detail::raw_amplitudes(pk, pr, cfg.dim);
    ConvergenceReport rep{detail::guard_band_mass(c, cfg.guard), cfg.dim};
    int dim = cfg.dim;
    double tail = rep.tail_mass;
    while (tail > cfg.tail_tol && dim < (1 << 15)) {
        dim *= 2;
        tail = detail::guard_band_mass(detail::raw_amplitudes(pk, pr, dim), cfg.guard);
    }
    rep.recommended_dim = dim;
    return rep;
}

inline ConvergenceReport convergence_report(const State& psi, const FockConfig& cfg) {
    cfg.validate();
    double tail = 0.0;
    for (int n = cfg.dim - cfg.guard; n < cfg.dim; ++n)
        tail += std::norm(psi(n));
    int dim = cfg.dim;
    if (tail > cfg.tail_tol)
        dim = 2 * cfg.dim;
    return {tail, dim};
}

/// Projection of the Gaussian packet onto the eigenbasis, renormalized.
/// Throws BasisTooSmallError when the guard band holds more than tail_tol.
inline State project_packet(const GaussianPacket& pk, const FockConfig& cfg,
                            const OscillatorParams& pr) {
    cfg.validate();
    pk.validate();
    pr.validate();
    auto c = detail::raw_amplitudes(pk, pr, cfg.dim);
    const double tail = detail::guard_band_mass(c, cfg.guard);
    if (tail > cfg.tail_tol) {
        const ConvergenceReport rep = convergence_report(pk, pr, cfg);
        throw BasisTooSmallError(tail, rep.recommended_dim);
    }
    State psi(cfg.dim);
    for (int n = 0; n < cfg.dim; ++n)
        psi(n) = c[n];
    psi.normalize();
    return psi;
}

/// Exact propagator through one Hermitian eigendecomposition.
class Evolver {
public:
    Evolver(const Operator& H, double hbar) : hbar_(hbar) {
        if (!is_hermitian(H, 1e-10 * std::max(1.0, H.cwiseAbs().maxCoeff())))
            throw std::invalid_argument("Evolver: Hamiltonian must be Hermitian");
        Eigen::SelfAdjointEigenSolver<Operator> es(H);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("Evolver: eigendecomposition failed");
        energies_ = es.eigenvalues();
        vectors_ = es.eigenvectors();
    }

    State at(double t, const State& psi0) const {
        const Eigen::VectorXcd amps = vectors_.adjoint() * psi0;
        Eigen::VectorXcd phased(amps.size());
        for (Eigen::Index k = 0; k < amps.size(); ++k)
            phased(k) = amps(k) * std::exp(std::complex<double>(0.0, -energies_(k) * t / hbar_));
        return vectors_ * phased;
    }

    const Eigen::VectorXd& energies() const { return energies_; }

private:
    double hbar_;
    Eigen::VectorXd energies_;
    Eigen::MatrixXcd vectors_;
};

inline std::vector<State> evolve(const Operator& H, const State& psi0,
                                 std::span<const double> t_grid, double hbar) {
    if (std::abs(psi0.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("evolve: psi0 must be normalized");
    Evolver ev(H, hbar);
    std::vector<State> out;
    out.reserve(t_grid.size());
    for (double t : t_grid)
        out.push_back(ev.at(t, psi0));
    return out;
}

struct ExactMoments {
    std::vector<double> times;
    std::vector<double> q_mean, p_mean;
    std::vector<double> sigma_q2, sigma_p2, product;
};

inline ExactMoments exact_moments(std::span<const State> states, std::span<const double> t_grid,
                                  const Operators& op) {
    if (states.size() != t_grid.size())
        throw std::invalid_argument("exact_moments: state/grid size mismatch");
    ExactMoments m;
    const Operator q2 = op.q * op.q;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const State& psi = states[i];
        auto ev = [&](const Operator& A) { return (psi.adjoint() * (A * psi))(0, 0).real(); };
        const double qm = ev(op.q), pm = ev(op.p);
        const double sq = ev(q2) - qm * qm;
        const double sp = ev(op.p2) - pm * pm;
        m.times.push_back(t_grid[i]);
        m.q_mean.push_back(qm);
        m.p_mean.push_back(pm);
        m.sigma_q2.push_back(sq);
        m.sigma_p2.push_back(sp);
        m.product.push_back(std::sqrt(sq * sp));
    }
    return m;
}

/// V(t) = Int_0^t [p cos(ws) - m w q sin(ws)]^4 ds at matrix level, composite
/// Gauss-Legendre with node doubling until the Frobenius norm settles.
inline Operator interaction_integral(double t, const Operators& op, const OscillatorParams& pr,
                                     double rel_tol = 1e-12) {
    const int n = op.q.rows();
    auto build = [&](int panels_per_period) {
        const double period = 2.0 * M_PI / pr.omega;
        const int panels = std::max(2, static_cast<int>(std::ceil(t / period * panels_per_period)));
        const QuadRule& r = gauss_legendre(16);
        Operator V = Operator::Zero(n, n);
        for (int s = 0; s < panels; ++s) {
            const double x0 = t * s / panels, x1 = t * (s + 1) / panels;
            const double mid = 0.5 * (x0 + x1), half = 0.5 * (x1 - x0);
            for (std::size_t i = 0; i < r.nodes.size(); ++i) {
                const double u = mid + half * r.nodes[i];
                const Operator M =
                    op.p * std::cos(pr.omega * u) - pr.mass * pr.omega * op.q * std::sin(pr.omega * u);
                const Operator M2 = M * M;
                V.noalias() += (half * r.weights[i]) * (M2 * M2);
            }
        }
        return V;
    };
    int ppp = 8;
    Operator prev = build(ppp);
    for (int k = 0; k < 6; ++k) {
        ppp *= 2;
        Operator cur = build(ppp);
        if ((cur - prev).norm() <= rel_tol * cur.norm())
            return cur;
        prev = std::move(cur);
    }
    throw QuadratureError("interaction_integral: node doubling did not settle", prev.norm(), 0.0);
}

struct CommutatorResiduals {
    double residual_p;
    double residual_q;
};

/// Relative Frobenius residuals of
///   [V, p_s(t)] - i hbar (A1 p^3 + 4 A2 W(p^2 q) + 4 A3 W(q^2 p) + A4 q^3)
///   [V, q_s(t)] - i hbar (B1 p^3 + 4 B2 W(p^2 q) + 4 B3 W(q^2 p) + B4 q^3)
/// on the reliable block, with the channel coefficients taken from src.
/// With the oracle source this is the ground-truth test of the coefficient
/// tables; the printed source documents how far the published table strays.
inline CommutatorResiduals commutator_check(double t, const FockConfig& cfg,
                                            const OscillatorParams& pr,
                                            CoeffSource src = CoeffSource::oracle) {
    cfg.validate();
    pr.validate();
    const Operators op = build_operators(cfg, pr);
    if (t == 0.0)
        return {0.0, 0.0};
    const Operator V = interaction_integral(t, op, pr);
    const double th = pr.omega * t;
    const Operator ps = op.p * std::cos(th) - pr.mass * pr.omega * op.q * std::sin(th);
    const Operator qs = op.p * (std::sin(th) / (pr.mass * pr.omega)) + op.q * std::cos(th);
    const CoeffSet cs = coeff_set(src, t, pr);
    const std::complex<double> ih(0.0, pr.hbar);
    const Operator rhs_p =
        ih * (cs.A[0] * op.p3 + 4.0 * cs.A[1] * op.w_p2q + 4.0 * cs.A[2] * op.w_q2p +
              cs.A[3] * op.q3);
    const Operator rhs_q =
        ih * (cs.B[0] * op.p3 + 4.0 * cs.B[1] * op.w_p2q + 4.0 * cs.B[2] * op.w_q2p +
              cs.B[3] * op.q3);
    const int nb = cfg.dim - cfg.guard;
    auto blk = [&](const Operator& M) { return M.topLeftCorner(nb, nb); };
    const Operator comm_p = V * ps - ps * V;
    const Operator comm_q = V * qs - qs * V;
    return {(blk(comm_p) - blk(rhs_p)).norm() / blk(comm_p).norm(),
            (blk(comm_q) - blk(rhs_q)).norm() / blk(comm_q).norm()};
}

} // namespace relqho::fock
