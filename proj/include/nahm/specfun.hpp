#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "nahm/errors.hpp"
#include "nahm/quadrature.hpp"

namespace nahm {

// Parameter m = k^2. The lemniscatic case k = i is m = -1.
struct EllipticParameter {
    double m;

    explicit EllipticParameter(double m_) : m(m_) {
        if (!(m < 1)) throw DomainError("elliptic parameter must satisfy m < 1");
    }
    static EllipticParameter from_modulus(std::complex<double> k) {
        std::complex<double> m = k * k;
        if (std::abs(m.imag()) > 1e-14 * std::max(1.0, std::abs(m)))
            throw DomainError("modulus squared must be real");
        return EllipticParameter(m.real());
    }
    // principal root; purely imaginary for m < 0
    std::complex<double> modulus() const { return std::sqrt(std::complex<double>(m)); }
};

struct JacobiTriple {
    double sn, cn, dn;
};

struct AgmResult {
    double K, E;
    int iterations;
};

// K = pi / (2 AGM(1, sqrt(1-m))), E = K (1 - sum 2^{n-1} c_n^2) with c_0^2 = m.
template <class Real = double>
AgmResult agm_complete(Real m) {
    if (!(m < 1)) throw DomainError("complete elliptic integrals need m < 1");
    Real a = 1, b = std::sqrt(1 - m);
    Real sum = m / 2, pow2 = 0.5;
    int it = 0;
    while (std::abs(a - b) > 4 * std::numeric_limits<Real>::epsilon() * a) {
        if (++it > 40) throw ConvergenceError("AGM did not converge");
        Real c = (a - b) / 2;
        Real an = (a + b) / 2;
        b = std::sqrt(a * b);
        a = an;
        pow2 *= 2;
        sum += pow2 * c * c;
    }
    Real K = std::numbers::pi_v<Real> / (2 * a);
    return {K, K * (1 - sum), it};
}

inline double complete_K(double m) { return agm_complete(m).K; }
inline double complete_E(double m) { return agm_complete(m).E; }
inline double complete_K(EllipticParameter p) { return complete_K(p.m); }
inline double complete_E(EllipticParameter p) { return complete_E(p.m); }

namespace detail {

// Descending Landen / AGM scheme for 0 <= m < 1.
inline JacobiTriple jacobi_unit(double u, double m) {
    if (m == 0) return {std::sin(u), std::cos(u), 1.0};
    constexpr int maxn = 40;
    std::array<double, maxn + 1> a{}, c{};
    a[0] = 1;
    double b = std::sqrt(1 - m);
    c[0] = std::sqrt(m);
    int n = 0;
    while (std::abs(c[n]) > std::numeric_limits<double>::epsilon() * a[n]) {
        if (n == maxn) throw ConvergenceError("Landen iteration did not converge");
        a[n + 1] = (a[n] + b) / 2;
        c[n + 1] = (a[n] - b) / 2;
        b = std::sqrt(a[n] * b);
        ++n;
    }
    double phi = std::ldexp(a[n] * u, n);
    for (int k = n; k > 0; --k) phi = 0.5 * (phi + std::asin(c[k] / a[k] * std::sin(phi)));
    double sn = std::sin(phi), cn = std::cos(phi);
    return {sn, cn, std::sqrt(1 - m * sn * sn)};
}

}  // namespace detail

// For m < 0 the parameter is mapped to mu = -m/(1-m) in (0,1):
// sn(u|m) = sd(v|mu)/sqrt(1-m), cn = cd(v|mu), dn = nd(v|mu), v = u sqrt(1-m).
inline JacobiTriple jacobi(double u, double m) {
    if (!(m < 1)) throw DomainError("jacobi: parameter must satisfy m < 1");
    if (!std::isfinite(u)) throw DomainError("jacobi: non-finite argument");
    if (m >= 0) return detail::jacobi_unit(u, m);
    double s = std::sqrt(1 - m);
    JacobiTriple t = detail::jacobi_unit(u * s, -m / (1 - m));
    return {t.sn / (t.dn * s), t.cn / t.dn, 1 / t.dn};
}
inline JacobiTriple jacobi(double u, EllipticParameter p) { return jacobi(u, p.m); }

// Period average of sn^2 over [0, 2K].
inline double mean_sn2(double m) {
    if (m == 0) return 0.5;
    auto r = agm_complete(m);
    return (r.K - r.E) / (m * r.K);
}

// Genus-1 theta series, nome q, theta_3(v,q) = 1 + 2 sum q^{n^2} cos 2nv.
inline Estimate<double> theta_g1(double v, double q, int kind, int N) {
    if (!(q > 0 && q < 1)) throw DomainError("theta_g1: nome must lie in (0,1)");
    if (kind < 1 || kind > 4) throw DomainError("theta_g1: kind must be 1..4");
    if (N < 0) throw DomainError("theta_g1: negative truncation");
    double sum = 0;
    bool half = kind == 1 || kind == 2;
    for (int n = N; n >= 0; --n) {  // smallest terms first
        double e = half ? (n + 0.5) * (n + 0.5) : double(n) * n;
        double qn = std::pow(q, e);
        double sign = (kind == 1 || kind == 4) && (n & 1) ? -1.0 : 1.0;
        switch (kind) {
            case 1: sum += 2 * sign * qn * std::sin((2 * n + 1) * v); break;
            case 2: sum += 2 * qn * std::cos((2 * n + 1) * v); break;
            case 3: sum += n == 0 ? 1.0 : 2 * qn * std::cos(2 * n * v); break;
            case 4: sum += n == 0 ? 1.0 : 2 * sign * qn * std::cos(2 * n * v); break;
        }
    }
    double e = half ? (N + 1.5) * (N + 1.5) : double(N + 1) * (N + 1);
    double tail = 2 * std::pow(q, e) / (1 - q);
    return {sum, tail, N + 1};
}

}  // namespace nahm
