#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace relqho {

/// Trap parameters. Any self-consistent unit system is accepted; downstream
/// code normalizes to natural units (hbar = m = omega = 1) before computing.
struct OscillatorParams {
    double mass;
    double omega;
    double hbar;
    double c;

    void validate() const {
        auto ok = [](double x) { return std::isfinite(x) && x > 0.0; };
        if (!ok(mass) || !ok(omega) || !ok(hbar) || !ok(c))
            throw std::invalid_argument("OscillatorParams: all fields must be finite and > 0");
    }
};

inline OscillatorParams natural_params(double c = 1.0e3) {
    return {1.0, 1.0, 1.0, c};
}

/// Gaussian packet psi(q) ~ exp(-(q-q0)^2/(4 sigma_q^2) + i p0 q / hbar).
/// Minimum-uncertainty by construction: sigma_p = hbar / (2 sigma_q).
struct GaussianPacket {
    double q0;
    double p0;
    double sigma_q;

    void validate() const {
        if (!std::isfinite(q0) || !std::isfinite(p0) || !std::isfinite(sigma_q) || sigma_q <= 0.0)
            throw std::invalid_argument("GaussianPacket: sigma_q must be > 0 and all fields finite");
    }

    double sigma_q2() const { return sigma_q * sigma_q; }
    double sigma_p2(double hbar) const { return hbar * hbar / (4.0 * sigma_q2()); }
};

/// eta_E = hbar omega / (m c^2), one oscillator quantum over the rest energy.
inline double eta_e(const OscillatorParams& p) {
    p.validate();
    return p.hbar * p.omega / (p.mass * p.c * p.c);
}

/// Packet at the trap centre with the ground-state width sqrt(hbar / 2 m omega).
inline GaussianPacket ground_packet(const OscillatorParams& p) {
    p.validate();
    return {0.0, 0.0, std::sqrt(p.hbar / (2.0 * p.mass * p.omega))};
}

inline bool is_coherent(const GaussianPacket& pk, const OscillatorParams& pr, double rel_tol = 1e-12) {
    const double lhs = pr.mass * pr.omega * pk.sigma_q2();
    return std::abs(lhs - 0.5 * pr.hbar) <= rel_tol * 0.5 * pr.hbar;
}

/// Multiplicative factors mapping natural-unit quantities back to input units,
/// plus the perturbation parameter epsilon = eta_E.
struct ScaleRecord {
    double length_scale;
    double momentum_scale;
    double time_scale;
    double energy_scale;
    double epsilon;
};

struct NaturalForm {
    OscillatorParams params; // hbar = m = omega = 1, c = 1/sqrt(epsilon)
    GaussianPacket packet;
    ScaleRecord scale;
};

inline NaturalForm to_natural(const OscillatorParams& p, const GaussianPacket& pk) {
    p.validate();
    pk.validate();
    const double L = std::sqrt(p.hbar / (p.mass * p.omega));
    const double P = std::sqrt(p.hbar * p.mass * p.omega);
    const double eps = eta_e(p);
    NaturalForm n;
    n.scale = {L, P, 1.0 / p.omega, p.hbar * p.omega, eps};
    n.params = {1.0, 1.0, 1.0, 1.0 / std::sqrt(eps)};
    n.packet = {pk.q0 / L, pk.p0 / P, pk.sigma_q / L};
    return n;
}

struct ValidityThresholds {
    double eta_e_max = 0.05;
    double v_over_c_max = 0.15;
};

struct ValidityDiagnostics {
    double eta_e;
    double v_rms_over_c;
    std::vector<std::string> warnings;
};

/// Diagnoses how far into the relativistic regime the scenario sits. The
/// velocity figure is the peak classical scale sqrt(2 <p^2>)/m over c, which
/// for the ground packet equals sqrt(eta_E).
inline ValidityDiagnostics validity_guard(const OscillatorParams& p, const GaussianPacket& pk,
                                          const ValidityThresholds& th = {}) {
    p.validate();
    pk.validate();
    ValidityDiagnostics d;
    d.eta_e = eta_e(p);
    const double p2 = pk.p0 * pk.p0 + p.hbar * p.hbar / (4.0 * pk.sigma_q2());
    d.v_rms_over_c = std::sqrt(2.0 * p2) / (p.mass * p.c);
    if (d.eta_e > th.eta_e_max)
        d.warnings.push_back("eta_E = " + std::to_string(d.eta_e) + " exceeds " +
                             std::to_string(th.eta_e_max) + "; 1/c^2 truncation degrades");
    if (d.v_rms_over_c > th.v_over_c_max)
        d.warnings.push_back("v/c = " + std::to_string(d.v_rms_over_c) + " exceeds " +
                             std::to_string(th.v_over_c_max) + "; 1/c^2 truncation degrades");
    return d;
}

} // namespace relqho
