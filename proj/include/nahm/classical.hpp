#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>

#include "nahm/errors.hpp"
#include "nahm/polynomial.hpp"
#include "nahm/quadrature.hpp"
#include "nahm/specfun.hpp"

namespace nahm {

inline constexpr double lemniscatic_m = -1.0;

struct NahmParams {
    double b = 1.0;
    double hbar = 1.0;
    int d = 1;

    void validate() const {
        if (!(b > 0) || !std::isfinite(b)) throw DomainError("b must be a positive finite number");
        if (!(hbar >= 0) || !std::isfinite(hbar)) throw DomainError("hbar must be non-negative");
        if (d < 1) throw DomainError("transverse dimension d must be >= 1");
    }
    // Period of sn^2(bx, -1).
    double period() const { return 2 * complete_K(lemniscatic_m) / b; }
};

// phi is the real representative chi = b sn(bx, -1); the field itself is i*chi, so V''(i chi) = -6 chi^2 = u.
struct FieldSample {
    double x, phi, dphi, u, z;
};

inline FieldSample field(double x, const NahmParams& p) {
    if (!std::isfinite(x)) throw DomainError("field: non-finite x");
    auto j = jacobi(p.b * x, lemniscatic_m);
    double chi = p.b * j.sn;
    return {x, chi, p.b * p.b * j.cn * j.dn, -6 * chi * chi, j.cn * j.cn};
}

inline double nahm_potential(double x, double b) {
    double s = jacobi(b * x, lemniscatic_m).sn;
    return -6 * b * b * s * s;
}

// ---- matrix constraint, exact

struct GaussRational {
    Rational re, im;
    friend GaussRational operator+(const GaussRational& a, const GaussRational& b) { return {a.re + b.re, a.im + b.im}; }
    friend GaussRational operator-(const GaussRational& a, const GaussRational& b) { return {a.re - b.re, a.im - b.im}; }
    friend GaussRational operator*(const GaussRational& a, const GaussRational& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
};

using ExactMat2 = std::array<GaussRational, 4>;

inline ExactMat2 operator*(const ExactMat2& a, const ExactMat2& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}
inline ExactMat2 operator-(const ExactMat2& a, const ExactMat2& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}
inline ExactMat2 operator+(const ExactMat2& a, const ExactMat2& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

inline std::array<ExactMat2, 3> pauli_exact() {
    GaussRational o{0, 0}, one{1, 0}, i{0, 1}, mi{0, -1}, m1{-1, 0};
    return {ExactMat2{o, one, one, o}, ExactMat2{o, mi, i, o}, ExactMat2{one, o, o, m1}};
}

// max over i and entries of |2 a_i - sum_j [a_j, [a_j, a_i]]|, a_i = scale * sigma_i;
// entry size is max(|re|, |im|) so the result stays rational.
inline Rational check_matrix_constraint(const Rational& scale) {
    auto s = pauli_exact();
    GaussRational c{scale, 0}, two{2, 0};
    std::array<ExactMat2, 3> a;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 4; ++k) a[i][k] = c * s[i][k];
    auto comm = [](const ExactMat2& x, const ExactMat2& y) { return x * y - y * x; };
    Rational worst = 0;
    for (int i = 0; i < 3; ++i) {
        ExactMat2 r;
        for (int k = 0; k < 4; ++k) r[k] = two * a[i][k];
        for (int j = 0; j < 3; ++j) r = r - comm(a[j], comm(a[j], a[i]));
        for (auto& e : r) {
            Rational re = abs(e.re), im = abs(e.im);
            if (re > worst) worst = re;
            if (im > worst) worst = im;
        }
    }
    return worst;
}

inline double check_matrix_constraint(double scale) {
    return to_double(check_matrix_constraint(Rational(scale)));
}

// ---- first integral

enum class Branch {
    periodic,   // chi = b sn(bx,-1), field i*chi
    unbounded,  // phi = b nc(sqrt2 b x | 1/2), real, poles where cn vanishes
};

struct FirstIntegralResidual {
    double first_integral;       // |phi'^2 - phi^4 + b^4|
    double equation_of_motion;   // |phi'' - 2 phi^3|
    double derivative_mismatch;  // closed-form vs central-difference phi', phi''
};

namespace detail {

struct Branch3 {
    double f, df, d2f;
};

inline Branch3 branch_values(double x, double b, Branch br) {
    if (br == Branch::periodic) {
        auto j = jacobi(b * x, lemniscatic_m);
        double b2 = b * b;
        return {b * j.sn, b2 * j.cn * j.dn, b2 * b * j.sn * (j.cn * j.cn - j.dn * j.dn)};
    }
    const double m = 0.5, r2 = std::sqrt(2.0);
    auto j = jacobi(r2 * b * x, m);
    if (std::abs(j.cn) < 1e-8) throw DomainError("unbounded branch: x at a pole");
    double cn2 = j.cn * j.cn;
    double g1 = j.sn * j.dn / cn2;
    double g2 = (j.dn * j.dn - m * j.sn * j.sn) / j.cn + 2 * j.sn * j.sn * j.dn * j.dn / (cn2 * j.cn);
    return {b / j.cn, r2 * b * b * g1, 2 * b * b * b * g2};
}

}  // namespace detail

inline FirstIntegralResidual first_integral_residual(double x, const NahmParams& p,
                                                     Branch br = Branch::periodic) {
    double b = p.b, b4 = b * b * b * b;
    auto v = detail::branch_values(x, b, br);
    FirstIntegralResidual r{};
    if (br == Branch::periodic) {
        // phi = i chi: phi'^2 = -chi'^2, phi^4 = chi^4, phi'' - 2 phi^3 = i (chi'' + 2 chi^3)
        double c2 = v.f * v.f;
        r.first_integral = std::abs(-v.df * v.df - c2 * c2 + b4);
        r.equation_of_motion = std::abs(v.d2f + 2 * c2 * v.f);
    } else {
        double c2 = v.f * v.f;
        r.first_integral = std::abs(v.df * v.df - c2 * c2 + b4) / std::max(1.0, c2 * c2 / b4);
        r.equation_of_motion = std::abs(v.d2f - 2 * c2 * v.f) / std::max(1.0, c2 * v.f / (b4 / b));
    }
    double h = 1e-4 / b;
    auto fp = detail::branch_values(x + h, b, br), fm = detail::branch_values(x - h, b, br);
    double d1 = (fp.f - fm.f) / (2 * h), d2 = (fp.f - 2 * v.f + fm.f) / (h * h);
    double scale = std::max({1.0, std::abs(v.df), std::abs(v.d2f)});
    r.derivative_mismatch = std::max(std::abs(d1 - v.df), std::abs(d2 - v.d2f)) / scale;
    return r;
}

// ---- Lagrangian density

struct LagrangianDensity {
    double matrix;       // sum_i T0i T0i + sum_ik Tik Tik, assembled as 2x2 matrices
    double closed_form;  // 3 (phi'^2 + 8 phi^4)
};

inline LagrangianDensity lagrangian_density(double phi, double dphi) {
    using M = Eigen::Matrix2cd;
    const std::complex<double> I(0, 1);
    std::array<M, 3> s;
    s[0] << 0, 1, 1, 0;
    s[1] << 0, -I, I, 0;
    s[2] << 1, 0, 0, -1;
    auto eps = [](int i, int k, int l) { return double((i - k) * (k - l) * (l - i)) / 2; };
    M sum = M::Zero();
    for (int i = 0; i < 3; ++i) {
        M t0 = dphi * s[i];
        sum += t0 * t0;
        for (int k = 0; k < 3; ++k) {
            M t = M::Zero();
            for (int l = 0; l < 3; ++l) t += 2 * phi * phi * eps(i, k, l) * s[l];
            sum += t * t;
        }
    }
    return {0.5 * sum.trace().real(), 3 * (dphi * dphi + 8 * phi * phi * phi * phi)};
}

inline LagrangianDensity lagrangian_density(double x, const NahmParams& p) {
    auto f = field(x, p);
    return lagrangian_density(f.phi, f.dphi);
}

// x in [-K/b, K/b] with b sn(bx,-1) = phi: x = (1/b) int_0^{asin(phi/b)} dt / sqrt(1 + sin^2 t),
// which is int_0^phi dchi / sqrt(b^4 - chi^4) after chi = b sin t.
inline double invert_lemniscate(double phi, const NahmParams& p) {
    p.validate();
    double r = phi / p.b;
    if (!(std::abs(r) <= 1 + 1e-15)) throw DomainError("invert_lemniscate: phi outside [-b, b]");
    double t = std::asin(std::clamp(r, -1.0, 1.0));
    double v = gauss_legendre([](double s) { return 1 / std::sqrt(1 + std::sin(s) * std::sin(s)); }, 0.0, t, 2, 32);
    return v / p.b;
}

// Uses the sign of phi' to pick x in [-K/b, 3K/b).
inline double invert_lemniscate(double phi, double dphi, const NahmParams& p) {
    double x = invert_lemniscate(phi, p);
    return dphi >= 0 ? x : 2 * complete_K(lemniscatic_m) / p.b - x;
}

}  // namespace nahm
