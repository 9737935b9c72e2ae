#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "nahm/errors.hpp"
#include "nahm/quadrature.hpp"

namespace nahm {

struct Band {
    double lo, hi;  // hi = +inf for the last band
};

// Spectral density (states per unit length) of a periodic Schroedinger operator, together with
// the local expansions needed to continue lambda-integrals past lambda = 0 and lambda = infinity.
// The vacuum density is rho0 = 1 / (2 pi sqrt(lambda)) on (0, inf).
class DensityModel {
public:
    virtual ~DensityModel() = default;

    virtual std::string route() const = 0;
    virtual double period() const = 0;
    virtual std::vector<Band> bands() const = 0;
    virtual double density(double lambda) const = 0;

    // Taylor coefficients of sqrt(lambda - e) rho(lambda) in (lambda - e) at a lower band edge e.
    virtual std::vector<double> edge_series(double e, int n) const = 0;
    // Distance from e to the nearest other band edge.
    virtual double edge_radius(double e) const {
        double r = std::numeric_limits<double>::infinity();
        for (auto& b : bands()) {
            for (double x : {b.lo, b.hi})
                if (std::isfinite(x) && std::abs(x - e) > 1e-12 * (1 + std::abs(e))) r = std::min(r, std::abs(x - e));
        }
        return r;
    }
    // rho = (1 / 2 pi) lambda^{-1/2} sum_k r_k lambda^{-k} for lambda >= tail_start(); r_0 = 1.
    virtual std::vector<double> tail_series(int n) const = 0;
    virtual double tail_start() const = 0;

    std::vector<double> edges() const {
        std::vector<double> e;
        for (auto& b : bands()) {
            e.push_back(b.lo);
            if (std::isfinite(b.hi)) e.push_back(b.hi);
        }
        return e;
    }
};

inline double vacuum_density(double lambda) {
    return lambda > 0 ? 1 / (2 * std::numbers::pi * std::sqrt(lambda)) : 0.0;
}

namespace series {

using S = std::vector<double>;

inline S mul(const S& a, const S& b, int n) {
    S r(n, 0.0);
    for (int i = 0; i < n && i < (int)a.size(); ++i)
        for (int j = 0; i + j < n && j < (int)b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

// a^alpha for a_0 > 0 (J. C. P. Miller recurrence).
inline S pow(const S& a, double alpha, int n) {
    if (a.empty() || !(a[0] > 0)) throw DomainError("series::pow needs a positive constant term");
    S f(n, 0.0);
    f[0] = std::pow(a[0], alpha);
    for (int k = 1; k < n; ++k) {
        double s = 0;
        for (int j = 1; j <= k && j < (int)a.size(); ++j) s += ((alpha + 1) * j - k) * a[j] * f[k - j];
        f[k] = s / (k * a[0]);
    }
    return f;
}

// Coefficients of prod_i (c_i + d_i x).
inline S linear_product(const std::vector<std::pair<double, double>>& f, int n) {
    S r{1.0};
    for (auto [c, d] : f) r = mul(r, S{c, d}, n);
    r.resize(n, 0.0);
    return r;
}

}  // namespace series

// ---- lambda-integral engine

namespace detail {

struct Pair {
    std::complex<double> v, d;
    Pair& operator+=(const Pair& o) {
        v += o.v;
        d += o.d;
        return *this;
    }
    friend Pair operator*(Pair p, double s) { return {p.v * s, p.d * s}; }
    friend Pair operator*(double s, Pair p) { return {p.v * s, p.d * s}; }
    friend Pair operator-(Pair a, const Pair& b) { return {a.v - b.v, a.d - b.d}; }
    friend double abs(const Pair& p) { return std::max(std::abs(p.v), std::abs(p.d)); }
};

// Local behaviour near lambda = 0: sqrt(lambda)(rho0 - rho) = sum g_n lambda^n on [0, c0].
struct ZeroPiece {
    double c0;
    std::vector<double> g;
};

inline ZeroPiece zero_piece(const DensityModel& m, int nterms) {
    const double inv2pi = 1 / (2 * std::numbers::pi);
    auto bands = m.bands();
    double scale = 1;
    for (double e : m.edges()) scale = std::max(scale, std::abs(e));
    const double tol = 1e-9 * scale;
    double nearest = std::numeric_limits<double>::infinity();
    for (double e : m.edges())
        if (std::abs(e) > tol) nearest = std::min(nearest, std::abs(e));
    nearest = std::min({nearest, m.tail_start() / 2, 2 * std::pow(std::numbers::pi / m.period(), 2)});
    for (auto& b : bands) {
        if (std::abs(b.lo) <= tol) {
            double c0 = std::min(m.edge_radius(b.lo) / 3, nearest / 2);
            auto a = m.edge_series(b.lo, nterms);
            for (auto& x : a) x = -x;
            a[0] += inv2pi;
            return {c0, a};
        }
        if (b.lo < -tol && b.hi > tol) throw DomainError("lambda = 0 lies inside a band; continuation at 0 unsupported");
    }
    return {nearest / 2, {inv2pi}};
}

// Edges within 1e-9 of zero (relative to the spectral scale) are snapped to zero.
inline std::vector<double> breakpoints(const DensityModel& m, double c0, double T) {
    std::vector<double> p = m.edges();
    double scale = 1;
    for (double e : p) scale = std::max(scale, std::abs(e));
    for (double& e : p)
        if (std::abs(e) <= 1e-9 * scale) e = 0;
    p.push_back(0);
    p.push_back(c0);
    p.push_back(T);
    double lo = *std::min_element(p.begin(), p.end());
    std::sort(p.begin(), p.end());
    std::vector<double> out;
    for (double x : p) {
        if (x < lo || x > T) continue;
        if (!out.empty() && std::abs(x - out.back()) <= 1e-13 * (1 + std::abs(x))) continue;
        out.push_back(x);
    }
    return out;
}

inline double edge_scale(const DensityModel& m) {
    double scale = 0;
    for (auto& b : m.bands()) {
        scale = std::max(scale, std::abs(b.lo));
        if (std::isfinite(b.hi)) scale = std::max(scale, std::abs(b.hi));
    }
    return scale;
}

inline double tail_start_checked(const DensityModel& m) {
    double T = m.tail_start();
    for (double e : m.edges())
        if (e >= T) throw DomainError("tail expansion starts below a band edge");
    return T;
}

// Upper incomplete gamma Gamma(1/2 - k, x) for k = 0..n-1, by downward recurrence from k = 0.
inline std::vector<double> gamma_half_upper(double x, int n) {
    std::vector<double> g(n);
    g[0] = std::sqrt(std::numbers::pi) * std::erfc(std::sqrt(x));
    for (int k = 1; k < n; ++k) {
        double a = 0.5 - k;
        g[k] = (g[k - 1] - std::pow(x, a) * std::exp(-x)) / a;
    }
    return g;
}

}  // namespace detail

struct SpectralZeta {
    std::complex<double> value, derivative;  // Z(s) and dZ/ds
    double error = 0;
};

// Z(s) = int lambda^{-s} (rho0 - rho) d lambda per unit length, principal branch for lambda < 0,
// continued meromorphically through the expansions at 0 and at infinity.
inline SpectralZeta spectral_zeta(const DensityModel& m, std::complex<double> s, const QuadratureSpec& q,
                                  int nterms = 40) {
    using cd = std::complex<double>;
    const cd I(0, 1);
    const double pi = std::numbers::pi;
    auto zp = detail::zero_piece(m, nterms);
    double T = detail::tail_start_checked(m);
    auto pts = detail::breakpoints(m, zp.c0, T);

    auto integrand = [&](double lam) -> detail::Pair {
        double diff = vacuum_density(lam) - m.density(lam);
        if (diff == 0) return {0, 0};
        cd lg = lam > 0 ? cd(std::log(lam)) : cd(std::log(-lam), pi);
        cd w = std::exp(-s * lg) * diff;
        return {w, -lg * w};
    };
    detail::Pair total{0, 0};
    double err = 0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        double a = pts[i], b = pts[i + 1];
        if (a >= 0 && b <= zp.c0 + 1e-15) continue;
        auto est = integrate(integrand, a, b, q);
        total += est.value;
        err += est.error;
    }
    // [0, c0]: sum g_n c0^{n+1/2-s} / (n+1/2-s)
    double lc = std::log(zp.c0);
    for (size_t n = 0; n < zp.g.size(); ++n) {
        if (zp.g[n] == 0) continue;
        cd a = double(n) + 0.5 - s;
        if (std::abs(a) < 1e-10) {
            if (std::abs(zp.g[n]) > 1e-12)
                throw PoleError("zeta has a pole at s = " + std::to_string(n + 0.5) +
                                    " (band edge at lambda = 0, coefficient " + std::to_string(zp.g[n]) + ")",
                                n + 0.5);
            continue;
        }
        cd ca = std::exp(a * lc);
        total.v += zp.g[n] * ca / a;
        total.d += zp.g[n] * (-ca * lc / a + ca / (a * a));
    }
    if (!zp.g.empty()) err += std::abs(zp.g.back()) * std::pow(zp.c0, zp.g.size() - 0.5);
    // [T, inf): -(1/2pi) sum_{k>=1} r_k T^{-a}/a,  a = k + s - 1/2
    auto r = m.tail_series(nterms);
    double lT = std::log(T);
    for (size_t k = 1; k < r.size(); ++k) {
        if (r[k] == 0) continue;
        cd a = double(k) + s - 0.5;
        if (std::abs(a) < 1e-10) throw PoleError("zeta has a pole from the large-lambda expansion", 0.5 - k);
        cd Ta = std::exp(-a * lT);
        total.v += -r[k] / (2 * pi) * Ta / a;
        total.d += -r[k] / (2 * pi) * (-lT * Ta / a - Ta / (a * a));
    }
    // truncation: the first omitted term is taken as the last nonzero one times (edge scale)/T
    // (models may pad the series with zeros)
    double scale = detail::edge_scale(m);
    for (size_t k = r.size(); k-- > 1;)
        if (r[k] != 0) {
            double a = std::abs(double(k) + s - 0.5);
            err += std::abs(r[k]) / (2 * pi) * std::pow(T, 0.5 - double(k) - s.real()) / a * std::min(1.0, scale / T);
            break;
        }
    (void)I;
    return {total.v, total.d, err};
}

// h(t) = int e^{-lambda t} (rho0 - rho) d lambda per unit length.
inline Estimate<double> subtracted_heat(const DensityModel& m, double t, const QuadratureSpec& q, int nterms = 40) {
    if (!(t > 0)) throw DomainError("heat trace needs t > 0");
    auto zp = detail::zero_piece(m, nterms);
    double T = detail::tail_start_checked(m);
    auto pts = detail::breakpoints(m, zp.c0, T);
    auto f = [&](double lam) { return std::exp(-lam * t) * (vacuum_density(lam) - m.density(lam)); };
    double total = 0, err = 0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        double a = pts[i], b = pts[i + 1];
        if (a >= 0 && b <= zp.c0 + 1e-15) continue;
        auto est = integrate(f, a, b, q);
        total += est.value;
        err += est.error;
    }
    // [0, c0] with lambda = v^2: 2 int_0^{sqrt c0} e^{-v^2 t} g(v^2) dv
    auto g = [&](double v) {
        double l = v * v, s = 0;
        for (int n = (int)zp.g.size() - 1; n >= 0; --n) s = s * l + zp.g[n];
        return 2 * std::exp(-l * t) * s;
    };
    QuadratureSpec gl = q;
    gl.rule = Rule::gauss_legendre;
    auto z = integrate(g, 0.0, std::sqrt(zp.c0), gl);
    total += z.value;
    err += z.error;
    auto r = m.tail_series(nterms);
    auto G = detail::gamma_half_upper(T * t, (int)r.size());
    size_t last = 0;
    for (size_t k = 1; k < r.size(); ++k) {
        total += -r[k] / (2 * std::numbers::pi) * std::pow(t, k - 0.5) * G[k];
        if (r[k] != 0) last = k;
    }
    if (last)
        err += std::abs(r[last]) / (2 * std::numbers::pi) * std::pow(t, last - 0.5) * std::abs(G[last]) *
               std::min(1.0, detail::edge_scale(m) / T);
    return {total, err, 0};
}

// int_a^b rho d lambda per unit length.
inline Estimate<double> integrated_density(const DensityModel& m, double a, double b, const QuadratureSpec& q,
                                           int nterms = 40) {
    if (b < a) throw DomainError("integrated_density: b < a");
    double T = detail::tail_start_checked(m);
    std::vector<double> pts{a};
    for (double e : m.edges())
        if (e > a && e < std::min(b, T)) pts.push_back(e);
    pts.push_back(std::min(b, T));
    std::sort(pts.begin(), pts.end());
    double total = 0, err = 0;
    auto f = [&](double l) { return m.density(l); };
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i + 1] <= pts[i]) continue;
        auto est = integrate(f, pts[i], pts[i + 1], q);
        total += est.value;
        err += est.error;
    }
    if (b > T) {
        auto r = m.tail_series(nterms);
        for (size_t k = 0; k < r.size(); ++k) {
            double e = 0.5 - double(k);
            total += r[k] / (2 * std::numbers::pi) * (std::pow(b, e) - std::pow(T, e)) / e;
        }
    }
    return {total, err, 0};
}

// Density of the operator shifted by -shift, rho_s(lambda) = rho(lambda + shift).
class ShiftedDensity : public DensityModel {
public:
    ShiftedDensity(std::shared_ptr<const DensityModel> base, double shift) : base_(std::move(base)), c_(shift) {}

    std::string route() const override { return base_->route() + "+shift"; }
    double period() const override { return base_->period(); }
    std::vector<Band> bands() const override {
        auto b = base_->bands();
        for (auto& x : b) {
            x.lo -= c_;
            x.hi -= c_;
        }
        return b;
    }
    double density(double lambda) const override { return base_->density(lambda + c_); }
    std::vector<double> edge_series(double e, int n) const override { return base_->edge_series(e + c_, n); }
    double edge_radius(double e) const override { return base_->edge_radius(e + c_); }
    double tail_start() const override { return std::max(base_->tail_start() - c_, 4 * std::abs(c_)); }
    // sum_k r_k (lambda + c)^{-1/2-k}, re-expanded in 1/lambda
    std::vector<double> tail_series(int n) const override {
        auto r = base_->tail_series(n);
        std::vector<double> out(n, 0.0);
        for (int k = 0; k < (int)r.size() && k < n; ++k) {
            double binom = 1, a = -0.5 - k;
            for (int j = 0; k + j < n; ++j) {
                out[k + j] += r[k] * binom * std::pow(c_, j);
                binom *= (a - j) / (j + 1);
            }
        }
        return out;
    }

private:
    std::shared_ptr<const DensityModel> base_;
    double c_;
};

}  // namespace nahm
