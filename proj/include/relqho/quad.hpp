#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace relqho {

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double estimate, double achieved_error)
        : std::runtime_error(what), estimate_(estimate), achieved_error_(achieved_error) {}
    double estimate() const { return estimate_; }
    double achieved_error() const { return achieved_error_; }

private:
    double estimate_;
    double achieved_error_;
};

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

/// Legendre P_n and P_n' at x by upward recurrence.
inline std::pair<double, double> legendre(int n, double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

inline QuadRule make_gauss_legendre(int n) {
    QuadRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Tricomi-style initial guess, then Newton.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double p, dp;
        for (int it = 0; it < 100; ++it) {
            std::tie(p, dp) = legendre(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        std::tie(p, dp) = legendre(n, x);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        r.nodes[n / 2] = 0.0;
        auto [p, dp] = legendre(n, 0.0);
        (void)p;
        r.weights[n / 2] = 2.0 / (dp * dp);
    }
    return r;
}

/// Orthonormal Hermite functions h_k(x) = H_k(x) e^{-x^2/2} / sqrt(2^k k! sqrt(pi)),
/// evaluated by the stable normalized recurrence. Avoids overflow for large n.
inline std::pair<double, double> hermite_normalized(int n, double x) {
    double h0 = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
    if (n == 0)
        return {h0, -x * h0};
    double h1 = std::sqrt(2.0) * x * h0;
    for (int k = 2; k <= n; ++k) {
        const double h2 = std::sqrt(2.0 / k) * x * h1 - std::sqrt((k - 1.0) / k) * h0;
        h0 = h1;
        h1 = h2;
    }
    // h_n'(x) = sqrt(2n) h_{n-1}(x) - x h_n(x)
    return {h1, std::sqrt(2.0 * n) * h0 - x * h1};
}

inline QuadRule make_gauss_hermite(int n) {
    QuadRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const int half = (n + 1) / 2;
    double x = 0.0;
    for (int i = 0; i < half; ++i) {
        // Initial guesses from largest root downwards (Numerical Recipes style).
        if (i == 0)
            x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            x -= 1.14 * std::pow(n, 0.426) / x;
        else if (i == 2)
            x = 1.86 * x - 0.86 * r.nodes[n - 1];
        else if (i == 3)
            x = 1.91 * x - 0.91 * r.nodes[n - 2];
        else
            x = 2.0 * x - r.nodes[n - i + 1];
        double h, dh;
        for (int it = 0; it < 200; ++it) {
            std::tie(h, dh) = hermite_normalized(n, x);
            const double dx = h / dh;
            x -= dx;
            if (std::abs(dx) < 1e-15 * (1.0 + std::abs(x)))
                break;
        }
        std::tie(h, dh) = hermite_normalized(n, x);
        // w_i = 2 / Htilde_n'(x_i)^2 with Htilde' = dh e^{x^2/2}; computed in
        // logs so tail nodes neither overflow nor divide by an underflowed dh.
        const double w = dh != 0.0 ? std::exp(std::log(2.0) - 2.0 * std::log(std::abs(dh)) -
                                              x * x)
                                   : 0.0;
        r.nodes[n - 1 - i] = x;
        r.nodes[i] = -x;
        r.weights[n - 1 - i] = w;
        r.weights[i] = w;
    }
    if (n % 2 == 1)
        r.nodes[n / 2] = 0.0;
    return r;
}

} // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1], cached.
inline const QuadRule& gauss_legendre(int n) {
    static std::map<int, QuadRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lk(mtx);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, detail::make_gauss_legendre(n)).first;
    return it->second;
}

/// n-point Gauss-Hermite rule for weight e^{-x^2} on the real line, cached.
inline const QuadRule& gauss_hermite(int n) {
    static std::map<int, QuadRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lk(mtx);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, detail::make_gauss_hermite(n)).first;
    return it->second;
}

template <class F>
double gl_fixed(F&& f, double a, double b, int panels, int order = 16) {
    const QuadRule& r = gauss_legendre(order);
    double total = 0.0;
    for (int s = 0; s < panels; ++s) {
        const double x0 = a + (b - a) * s / panels;
        const double x1 = a + (b - a) * (s + 1) / panels;
        const double mid = 0.5 * (x0 + x1), half = 0.5 * (x1 - x0);
        for (std::size_t i = 0; i < r.nodes.size(); ++i)
            total += half * r.weights[i] * f(mid + half * r.nodes[i]);
    }
    return total;
}

/// Composite Gauss-Legendre with panel doubling until two successive
/// refinements agree within abs_tol.
template <class F>
double gl_adaptive(F&& f, double a, double b, double abs_tol, int max_doublings = 12) {
    if (!(abs_tol > 0.0))
        throw std::invalid_argument("gl_adaptive: abs_tol must be > 0");
    if (a == b)
        return 0.0;
    int panels = 1;
    double prev = gl_fixed(f, a, b, panels);
    for (int k = 0; k < max_doublings; ++k) {
        panels *= 2;
        const double cur = gl_fixed(f, a, b, panels);
        if (std::abs(cur - prev) <= abs_tol)
            return cur;
        prev = cur;
    }
    const double final_err = std::abs(gl_fixed(f, a, b, panels * 2) - prev);
    throw QuadratureError("gl_adaptive: tolerance not reached", prev, final_err);
}

} // namespace relqho
