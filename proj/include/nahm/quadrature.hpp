#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <type_traits>
#include <vector>

#include "nahm/errors.hpp"

namespace nahm {

enum class Rule { tanh_sinh, gauss_legendre, gauss_chebyshev };

inline const char* to_string(Rule r) {
    switch (r) {
        case Rule::tanh_sinh: return "tanh-sinh";
        case Rule::gauss_legendre: return "gauss-legendre";
        case Rule::gauss_chebyshev: return "gauss-chebyshev";
    }
    return "?";
}

struct QuadratureSpec {
    Rule rule = Rule::gauss_chebyshev;
    int panels = 4;
    int order = 24;  // nodes per panel
    double tol = 1e-10;
    bool endpoint_handling = true;

    void validate() const {
        if (!(tol > 0)) throw DomainError("quadrature tol must be positive");
        if (panels < 1 || order < 2) throw DomainError("quadrature needs panels >= 1 and order >= 2");
    }
    QuadratureSpec refined() const {
        QuadratureSpec q = *this;
        q.panels *= 2;
        return q;
    }
};

template <class T>
struct Estimate {
    T value{};
    double error = 0;
    int terms = 0;
};

struct GaussRule {
    std::vector<double> x, w;  // on [-1, 1]
};

// Nodes by Newton iteration on P_n; memoized per order.
inline const GaussRule& gauss_legendre_rule(int n) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussRule g;
    g.x.resize(n);
    g.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double pn = n == 1 ? x : p1;
            double pm = n == 1 ? 1 : p0;
            dp = n * (x * pn - pm) / (x * x - 1);
            double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        g.x[i] = -x;
        g.x[n - 1 - i] = x;
        g.w[i] = g.w[n - 1 - i] = 2 / ((1 - x * x) * dp * dp);
    }
    return cache.emplace(n, std::move(g)).first->second;
}

template <class F>
auto gauss_legendre(F&& f, double a, double b, int panels, int order) {
    using R = std::decay_t<decltype(f(a))>;
    const auto& g = gauss_legendre_rule(order);
    R sum{};
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double c = a + (p + 0.5) * h;
        R part{};
        for (int i = 0; i < order; ++i) part += g.w[i] * f(c + 0.5 * h * g.x[i]);
        sum += part * (0.5 * h);
    }
    return sum;
}

// x = a + (b-a)(1-cos t)/2; the Jacobian sin t absorbs 1/sqrt endpoint singularities at both ends.
template <class F>
auto chebyshev_substitution(F&& f, double a, double b, int panels, int order) {
    double half = 0.5 * (b - a);
    return gauss_legendre(
        [&](double t) {
            double x = t < 0.5 * std::numbers::pi ? a + half * (1 - std::cos(t))
                                                  : b - half * (1 + std::cos(t));
            return f(x) * (half * std::sin(t));
        },
        0.0, std::numbers::pi, panels, order);
}

template <class F>
auto tanh_sinh(F&& f, double a, double b, double tol, int max_level = 10) {
    using R = std::decay_t<decltype(f(a))>;
    const double c = 0.5 * (a + b), r = 0.5 * (b - a), hp = 0.5 * std::numbers::pi;
    double h = 1.0;
    auto term = [&](double t) -> R {
        double s = hp * std::sinh(t);
        double ch = std::cosh(s);
        double w = hp * std::cosh(t) / (ch * ch);
        double u = std::tanh(s);
        R v{};
        double x1 = c + r * u, x2 = c - r * u;
        if (x1 > a && x1 < b) v += f(x1);
        if (t != 0 && x2 > a && x2 < b) v += f(x2);
        return v * w;
    };
    const double tmax = 4.0;
    R sum = term(0);
    for (double t = h; t <= tmax; t += h) sum += term(t);
    R prev = sum * (h * r);
    int n = 0;
    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        for (double t = h; t <= tmax; t += 2 * h) sum += term(t), ++n;
        R cur = sum * (h * r);
        using std::abs;
        double err = abs(cur - prev);
        prev = cur;
        if (level >= 3 && err <= tol * std::max(1.0, double(abs(cur)))) return Estimate<R>{cur, err, n};
    }
    throw ConvergenceError("tanh-sinh did not reach tolerance");
}

// Error estimate from a panel-doubled second evaluation.
template <class F>
auto integrate(F&& f, double a, double b, const QuadratureSpec& q) {
    q.validate();
    using R = std::decay_t<decltype(f(a))>;
    if (q.rule == Rule::tanh_sinh) return tanh_sinh(f, a, b, q.tol);
    auto run = [&](int panels) -> R {
        return q.rule == Rule::gauss_chebyshev ? chebyshev_substitution(f, a, b, panels, q.order)
                                               : gauss_legendre(f, a, b, panels, q.order);
    };
    R coarse = run(q.panels);
    R fine = run(2 * q.panels);
    using std::abs;
    return Estimate<R>{fine, static_cast<double>(abs(fine - coarse)), 3 * q.panels * q.order};
}

}  // namespace nahm
