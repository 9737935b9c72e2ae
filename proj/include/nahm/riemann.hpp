#pragma once

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "nahm/errors.hpp"
#include "nahm/quadrature.hpp"
#include "nahm/spectral.hpp"
#include "nahm/specfun.hpp"

namespace nahm {

using cd = std::complex<double>;
using Vec2c = Eigen::Vector2cd;
using Mat2c = Eigen::Matrix2cd;

struct CurvePoint {
    cd mu, p;
};

// mu^2 = prod_i (p - e_i) with five real branch points. Cuts [e0,e1], [e2,e3], [e4,inf);
// a-cycles encircle [e0,e1] and [e2,e3]; b0 = c1 + c3, b1 = c3 with c_k twice the segment integral.
class HyperellipticCurve {
public:
    explicit HyperellipticCurve(std::vector<double> branch) : e_(std::move(branch)) {
        if (e_.size() != 5) throw DomainError("HyperellipticCurve: genus 2 needs five branch points");
        std::sort(e_.begin(), e_.end());
        for (int i = 0; i + 1 < 5; ++i)
            if (!(e_[i + 1] - e_[i] > 1e-12 * (1 + std::abs(e_[i]))))
                throw DomainError("HyperellipticCurve: branch points must be distinct");
    }

    static constexpr double beta = 1.1547005383792515290;  // 2/sqrt(3)
    static HyperellipticCurve scaled() { return HyperellipticCurve({-beta, -1, 0, 1, beta}); }
    // Branch points of the Lame spectrum h = lambda/b^2: {-2sqrt3, -3, 0, 3, 2sqrt3}.
    static HyperellipticCurve lame(double scale = 1) {
        return scaled().rescaled(3 * scale);
    }

    const std::vector<double>& branch() const { return e_; }
    HyperellipticCurve rescaled(double c) const {
        std::vector<double> e;
        for (double x : e_) e.push_back(c * x);
        return HyperellipticCurve(e);
    }

    cd poly(cd p) const {
        cd r = 1;
        for (double x : e_) r *= p - x;
        return r;
    }
    double residual(const CurvePoint& P) const { return std::abs(P.mu * P.mu - poly(P.p)); }
    CurvePoint point(cd p) const { return {std::sqrt(poly(p)), p}; }

    // Boundary value of mu on the upper edge of the real axis.
    cd w_plus(double E) const {
        cd r = 1;
        for (double x : e_) {
            double d = E - x;
            r *= d >= 0 ? cd(std::sqrt(d)) : cd(0, std::sqrt(-d));
        }
        return r;
    }

private:
    std::vector<double> e_;
};

// T(mu, p) = (mu (-beta)^{3/2} / p^3, -beta / p), principal branch. T o T = id.
inline CurvePoint automorphism_T(const CurvePoint& P, double beta = HyperellipticCurve::beta) {
    if (std::abs(P.p) == 0) throw DomainError("automorphism_T: p = 0 is mapped to infinity");
    cd c = std::pow(cd(-beta, 0), 1.5);
    return {P.mu * c / (P.p * P.p * P.p), -beta / P.p};
}

// ---- path integrals along the upper edge of the real axis

namespace detail {

// Phase of w_plus on the open interval containing E: i^{#branch points above E}.
inline cd upper_phase(const std::vector<double>& e, double E) {
    int n = 0;
    for (double x : e) n += x > E;
    static const cd I(0, 1);
    cd r = 1;
    for (int k = 0; k < n; ++k) r *= I;
    return r;
}

inline double rest_modulus(const std::vector<double>& e, double E, double skip1, double skip2 = NAN) {
    double r = 1;
    for (double x : e)
        if (x != skip1 && x != skip2) r *= std::sqrt(std::abs(E - x));
    return r;
}

}  // namespace detail

// int f(E)/w_plus dE along the real axis, exact endpoint treatment via substitutions.
class PathIntegrator {
public:
    PathIntegrator(const HyperellipticCurve& c, int panels = 4, int order = 32) : e_(c.branch()), panels_(panels), order_(order) {}

    // full segment [e_k, e_{k+1}], E = mid - half cos(theta)
    template <class F>
    cd segment(F&& f, int k) const {
        double a = e_[k], b = e_[k + 1], mid = (a + b) / 2, half = (b - a) / 2;
        cd ph = detail::upper_phase(e_, mid);
        return gauss_legendre(
            [&](double th) -> cd {
                double E = mid - half * std::cos(th);
                return cd(f(E)) / (ph * detail::rest_modulus(e_, E, a, b));
            },
            0.0, std::numbers::pi, panels_, order_);
    }

    // from branch point a to E within the same interval, E' = a + (E - a) v^2
    template <class F>
    cd partial(F&& f, double a, double E) const {
        if (E == a) return 0;
        double d = E - a, sd = std::sqrt(std::abs(d));
        cd ph = detail::upper_phase(e_, a + d / 2);
        double sgn = d > 0 ? 1 : -1;
        return gauss_legendre(
            [&](double v) -> cd {
                double x = a + d * v * v;
                return 2 * sgn * sd * cd(f(x)) / (ph * detail::rest_modulus(e_, x, a));
            },
            0.0, 1.0, panels_, order_);
    }

    // int_{e0}^{E}
    template <class F>
    cd from_e0(F&& f, double E) const {
        if (E <= e_[0]) return partial(f, e_[0], E);
        cd total = 0;
        int k = 0;
        while (k + 1 < 5 && e_[k + 1] <= E) total += segment(f, k++);
        if (E == e_[k]) return total;
        if (k + 1 < 5 && E - e_[k] > e_[k + 1] - E) return total + segment(f, k) - partial(f, e_[k + 1], E);
        return total + partial(f, e_[k], E);
    }

    // int_{e4}^{inf} (f/w_plus - g): split at E1 = e4 + max(e4, 1), then E = E1 / t^2
    template <class F, class G>
    cd to_infinity(F&& f, G&& g) const {
        double e4 = e_[4], E1 = e4 + std::max(std::abs(e4), 1.0);
        cd near = partial(f, e4, E1) - gauss_legendre([&](double x) { return cd(g(x)); }, e4, E1, panels_, order_);
        cd far = gauss_legendre(
            [&](double t) -> cd {
                if (t == 0) return 0;
                double E = E1 / (t * t);
                return (cd(f(E)) / cd(std::sqrt(std::abs(poly_real(E)))) - cd(g(E))) * (2 * E1 / (t * t * t));
            },
            0.0, 1.0, panels_, order_);
        return near + far;
    }

private:
    double poly_real(double E) const {
        double r = 1;
        for (double x : e_) r *= E - x;
        return r;
    }
    std::vector<double> e_;
    int panels_, order_;
};

// ---- period matrix

struct PeriodMatrix {
    Mat2c tau;
    Mat2c A, B;     // a- and b-periods of (dE/w, E dE/w), rows = differential
    Mat2c normal;   // a-normalization, omega_k = sum_j normal(k,j) E^j dE / w
};

inline PeriodMatrix period_matrix(const HyperellipticCurve& c, const QuadratureSpec& q = {}) {
    PathIntegrator pi(c, q.panels, q.order);
    PeriodMatrix pm;
    for (int j = 0; j < 2; ++j) {
        auto f = [j](double E) { return j == 0 ? 1.0 : E; };
        std::array<cd, 4> s;
        for (int k = 0; k < 4; ++k) s[k] = 2.0 * pi.segment(f, k);
        pm.A(j, 0) = s[0];
        pm.A(j, 1) = s[2];
        pm.B(j, 0) = s[1] + s[3];
        pm.B(j, 1) = s[3];
    }
    pm.normal = pm.A.inverse();
    pm.tau = pm.normal * pm.B;
    return pm;
}

// ---- genus-2 theta function

struct ThetaArgs {
    Vec2c z;
    Mat2c tau;
    int N = 8;
};

struct ThetaValue {
    cd value, d1, d2;   // Theta and its first two derivatives along a direction
    double tail_bound = 0;
};

inline double min_eig_imag(const Mat2c& tau) {
    Eigen::Matrix2d im = tau.imag();
    im = (im + im.transpose()) / 2;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(im);
    return es.eigenvalues()(0);
}

// Bound on the omitted shells |n|_inf > N, with |n|^2 >= k^2 on shell k (8k points).
inline double theta_tail_bound(const ThetaArgs& a, double dir_norm = 0, int derivs = 0) {
    double lam = min_eig_imag(a.tau);
    if (!(lam > 0)) throw DomainError("theta_g2: Im tau is not positive definite");
    double y = a.z.imag().norm() * std::numbers::sqrt2;
    double s = 0;
    for (int k = a.N + 1; k < a.N + 200; ++k) {
        double t = 8.0 * k * std::exp(-std::numbers::pi * lam * k * k + 2 * std::numbers::pi * y * k);
        t *= std::pow(1 + 2 * std::numbers::pi * dir_norm * std::numbers::sqrt2 * k, derivs);
        s += t;
        if (t < 1e-30 * (s + 1e-300) && k > a.N + 3) break;
    }
    return s;
}

// Theta with first and second derivatives along dir, d/dy Theta(z + dir y) at y = 0.
inline ThetaValue theta_g2_directional(const ThetaArgs& a, const Vec2c& dir) {
    if (a.N < 1) throw DomainError("theta_g2: N must be >= 1");
    const double pi = std::numbers::pi;
    const cd I(0, 1);
    ThetaValue r{0, 0, 0, 0};
    for (int n0 = -a.N; n0 <= a.N; ++n0)
        for (int n1 = -a.N; n1 <= a.N; ++n1) {
            cd q = a.tau(0, 0) * double(n0 * n0) + 2.0 * a.tau(0, 1) * double(n0 * n1) + a.tau(1, 1) * double(n1 * n1);
            cd e = std::exp(I * pi * q + 2.0 * pi * I * (double(n0) * a.z(0) + double(n1) * a.z(1)));
            cd k = 2.0 * pi * I * (double(n0) * dir(0) + double(n1) * dir(1));
            r.value += e;
            r.d1 += k * e;
            r.d2 += k * k * e;
        }
    r.tail_bound = theta_tail_bound(a, dir.norm(), 2);
    return r;
}

inline cd theta_g2(const ThetaArgs& a, double tol = 1e-12) {
    auto r = theta_g2_directional(a, Vec2c::Zero());
    if (r.tail_bound > tol * std::max(1.0, std::abs(r.value)))
        throw ConvergenceError("theta_g2: tail bound " + std::to_string(r.tail_bound) + " above tolerance");
    return r.value;
}

// -2 (ln Theta(U y + D))'' along U. Throws PoleError where Theta vanishes.
inline double im_potential(const Vec2c& U, const Vec2c& D, double y, const Mat2c& tau, int N = 8) {
    auto t = theta_g2_directional({U * y + D, tau, N}, U);
    if (std::abs(t.value) < 1e-12) throw PoleError("im_potential: theta vanishes", y);
    cd l2 = t.d2 / t.value - (t.d1 / t.value) * (t.d1 / t.value);
    return (-2.0 * l2).real();
}

inline cd im_potential_complex(const Vec2c& U, const Vec2c& D, double y, const Mat2c& tau, int N = 8) {
    auto t = theta_g2_directional({U * y + D, tau, N}, U);
    if (std::abs(t.value) < 1e-12) throw PoleError("im_potential: theta vanishes", y);
    return -2.0 * (t.d2 / t.value - (t.d1 / t.value) * (t.d1 / t.value));
}

// ---- second-kind differential and U, D recovery

// Omega = (E^2 + c1 E + c0) dE / (2 w), a-normalized, with the Abel map based at infinity.
struct SecondKind {
    double c0 = 0, c1 = 0;
    Vec2c U;             // (1/2pi) b-periods of Omega
    Vec2c A_inf;         // Abel image of infinity from e0
    cd R_inf;            // int_{e0}^{X} Omega - sqrt(X) as X -> inf
};

inline SecondKind second_kind(const HyperellipticCurve& c, const PeriodMatrix& pm, const QuadratureSpec& q = {}) {
    PathIntegrator P(c, q.panels, q.order);
    auto e2 = [](double E) { return E * E / 2; };
    std::array<cd, 4> s;
    for (int k = 0; k < 4; ++k) s[k] = 2.0 * P.segment(e2, k);
    cd a0 = s[0], a1 = s[2], b0 = s[1] + s[3], b1 = s[3];
    Mat2c M;
    M << pm.A(0, 0) / 2.0, pm.A(1, 0) / 2.0, pm.A(0, 1) / 2.0, pm.A(1, 1) / 2.0;
    Vec2c cc = M.fullPivLu().solve(Vec2c(-a0, -a1));
    if (std::abs(cc(0).imag()) > 1e-8 * (1 + std::abs(cc(0))) || std::abs(cc(1).imag()) > 1e-8 * (1 + std::abs(cc(1))))
        throw ConvergenceError("second_kind: normalization constants are not real");
    SecondKind sk;
    sk.c0 = cc(0).real();
    sk.c1 = cc(1).real();
    Vec2c bO(b0 + sk.c0 * pm.B(0, 0) / 2.0 + sk.c1 * pm.B(1, 0) / 2.0,
             b1 + sk.c0 * pm.B(0, 1) / 2.0 + sk.c1 * pm.B(1, 1) / 2.0);
    sk.U = bO / (2 * std::numbers::pi);
    const auto& e = c.branch();
    auto one = [](double) { return 1.0; };
    auto lin = [](double E) { return E; };
    auto zero = [](double) { return 0.0; };
    Vec2c I(P.from_e0(one, e[4]) + P.to_infinity(one, zero), P.from_e0(lin, e[4]) + P.to_infinity(lin, zero));
    sk.A_inf = pm.normal * I;
    auto Om = [&](double E) { return (E * E + sk.c1 * E + sk.c0) / 2; };
    if (!(e[4] > 0)) throw DomainError("second_kind: top branch point must be positive");
    sk.R_inf = P.from_e0(Om, e[4]) + P.to_infinity(Om, [](double E) { return 1 / (2 * std::sqrt(E)); }) -
               std::sqrt(e[4]);
    return sk;
}

struct ThetaRecovery {
    Vec2c U, D;
    double c_star = 0;     // additive constant: im_potential - target
    double mismatch = 0;   // max |im_potential - target - c_star| over the sample grid
    double period = 0;     // smallest P with U P in the period lattice
    Mat2c tau;
    SecondKind omega;
    int evaluations = 0;
};

struct RecoveryError : ConvergenceError {
    ThetaRecovery best;
    RecoveryError(const std::string& w, ThetaRecovery b) : ConvergenceError(w), best(std::move(b)) {}
};

namespace detail {

inline std::pair<double, double> potential_mismatch(const Vec2c& U, const Vec2c& D, const Mat2c& tau,
                                                    const std::vector<double>& ys, const std::vector<double>& target,
                                                    int N) {
    double lo = INFINITY, hi = -INFINITY, im = 0;
    for (size_t i = 0; i < ys.size(); ++i) {
        cd v;
        try {
            v = im_potential_complex(U, D, ys[i], tau, N);
        } catch (const PoleError&) {
            return {INFINITY, 0};
        }
        double d = v.real() - target[i];
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        im = std::max(im, std::abs(v.imag()));
    }
    return {std::max((hi - lo) / 2, im), (hi + lo) / 2};
}

inline double lattice_period(const Vec2c& U, const Mat2c& tau) {
    // U P = tau m + k with integer m, k; for purely imaginary U and tau, m = tau^{-1} U P.
    Eigen::Matrix2d Ti = tau.imag().inverse();
    Eigen::Vector2d v = Ti * U.imag();
    double best = INFINITY;
    for (int k = 0; k < 2; ++k) {
        if (std::abs(v(k)) < 1e-14) continue;
        for (int m = 1; m <= 6; ++m) {
            double P = m / std::abs(v(k));
            Eigen::Vector2d w = v * P;
            if (std::abs(w(0) - std::round(w(0))) < 1e-7 && std::abs(w(1) - std::round(w(1))) < 1e-7 &&
                U.real().norm() * P < 1e-12 + 1e-7 * P)
                best = std::min(best, P);
        }
    }
    return best;
}

}  // namespace detail

// Fits D so that -2 (ln Theta)'' + c* reproduces the Lame potential -6 b^2 sn^2(b y, -1), where b is
// read from the band structure (top edge 2 sqrt3 b^2). The curve is rescaled to the band edges.
inline ThetaRecovery recover_U_D(const HyperellipticCurve& curve, const BandStructure& band,
                                 const QuadratureSpec& q = {}, int grid = 8, int theta_n = 8, double tol = 1e-4) {
    if (band.edges.size() < 5) throw DomainError("recover_U_D: band structure needs five edges");
    const auto& br = curve.branch();
    double scale = band.edges[4] / br[4];
    for (int i = 0; i < 5; ++i)
        if (std::abs(br[i] * scale - band.edges[i]) > 1e-6 * (1 + std::abs(band.edges[i])))
            throw DomainError("recover_U_D: curve branch points do not match the band edges");
    HyperellipticCurve c = curve.rescaled(scale);
    double b = std::sqrt(band.edges[4] / (2 * std::sqrt(3.0)));
    auto pm = period_matrix(c, q);
    auto sk = second_kind(c, pm, q);
    double L = 2 * complete_K(lemniscatic_m) / b;
    std::vector<double> ys, target;
    for (int i = 0; i < 41; ++i) {
        ys.push_back(L * i / 40);
        target.push_back(nahm_potential(ys.back(), b));
    }
    ThetaRecovery r;
    r.U = sk.U;
    r.tau = pm.tau;
    r.omega = sk;
    auto cost = [&](double d0, double d1) {
        ++r.evaluations;
        return detail::potential_mismatch(sk.U, Vec2c(d0, d1), pm.tau, ys, target, theta_n).first;
    };
    double best = INFINITY, bd0 = 0, bd1 = 0;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            double d0 = double(i) / grid, d1 = double(j) / grid;
            double v = cost(d0, d1);
            if (v < best) best = v, bd0 = d0, bd1 = d1;
        }
    const double h = 1.0 / grid;
    for (int sweep = 0; sweep < 6 && best > 1e-12; ++sweep) {
        auto m0 = boost::math::tools::brent_find_minima([&](double x) { return cost(x, bd1); }, bd0 - h, bd0 + h, 40);
        if (m0.second < best) best = m0.second, bd0 = m0.first;
        auto m1 = boost::math::tools::brent_find_minima([&](double x) { return cost(bd0, x); }, bd1 - h, bd1 + h, 40);
        if (m1.second < best) best = m1.second, bd1 = m1.first;
    }
    auto fold = [](double x) {
        double f = x - std::round(x);
        return std::abs(f) < 1e-9 ? 0.0 : f;
    };
    r.D = Vec2c(fold(bd0), fold(bd1));
    auto [mm, cs] = detail::potential_mismatch(sk.U, r.D, pm.tau, ys, target, theta_n);
    r.mismatch = mm;
    r.c_star = cs;
    r.period = detail::lattice_period(sk.U, pm.tau);
    if (!(r.mismatch < tol)) throw RecoveryError("recover_U_D: mismatch " + std::to_string(r.mismatch), r);
    return r;
}

// ---- Baker-Akhiezer function

struct AbelData {
    Vec2c A;    // Abel image of (E, sheet), relative to infinity
    cd kappa;   // exponent rate, sheet * i (int Omega - R_inf)
};

inline AbelData abel_point(const HyperellipticCurve& c, const PeriodMatrix& pm, const SecondKind& sk, double E,
                           int sheet, const QuadratureSpec& q = {}) {
    if (sheet != 1 && sheet != -1) throw DomainError("abel_point: sheet must be +1 or -1");
    PathIntegrator P(c, q.panels, q.order);
    Vec2c I(P.from_e0([](double) { return 1.0; }, E), P.from_e0([](double x) { return x; }, E));
    Vec2c A = pm.normal * I - sk.A_inf;
    cd Om = P.from_e0([&](double x) { return (x * x + sk.c1 * x + sk.c0) / 2; }, E) - sk.R_inf;
    return {double(sheet) * A, double(sheet) * cd(0, 1) * Om};
}

struct PsiSample {
    cd psi, dpsi, d2psi;
};

// Unnormalized psi(y) = e^{kappa y} Theta(A + U y + D) / Theta(U y + D) with y-derivatives.
inline PsiSample baker_akhiezer(const AbelData& a, const ThetaRecovery& r, double y, int N = 8) {
    auto num = theta_g2_directional({a.A + r.U * y + r.D, r.tau, N}, r.U);
    auto den = theta_g2_directional({r.U * y + r.D, r.tau, N}, r.U);
    if (std::abs(den.value) < 1e-300) throw PoleError("baker_akhiezer: theta vanishes", y);
    cd f = num.value / den.value;
    cd f1 = num.d1 / den.value - num.value * den.d1 / (den.value * den.value);
    cd f2 = num.d2 / den.value - 2.0 * num.d1 * den.d1 / (den.value * den.value) -
            num.value * den.d2 / (den.value * den.value) +
            2.0 * num.value * den.d1 * den.d1 / (den.value * den.value * den.value);
    cd ex = std::exp(a.kappa * y);
    return {ex * f, ex * (a.kappa * f + f1), ex * (a.kappa * a.kappa * f + 2.0 * a.kappa * f1 + f2)};
}

struct ImPsi {
    std::vector<double> y;
    std::vector<cd> psi;   // normalized so psi(y_ref) = 1
    double y_ref = 0;
    double residual = 0;   // max |psi'' + (E - u) psi| / max |psi|, with u the Lame potential
    cd multiplier;         // psi(y_ref + L) / psi(y_ref)
};

// psi on [0, L] sampled at n + 1 points; y_ref = 0 unless psi(0) vanishes (odd edge eigenfunctions),
// in which case the reference is the sample of largest modulus.
inline ImPsi im_psi(double E, int sheet, const HyperellipticCurve& c, const ThetaRecovery& r, double b = 1,
                    int n = 64, const QuadratureSpec& q = {}, int theta_n = 8) {
    auto pm = period_matrix(c, q);
    auto a = abel_point(c, pm, r.omega, E, sheet, q);
    double L = 2 * complete_K(lemniscatic_m) / b;
    ImPsi out;
    double mx = 0, worst = 0;
    std::vector<PsiSample> s;
    for (int i = 0; i <= n; ++i) {
        double y = L * i / n;
        s.push_back(baker_akhiezer(a, r, y, theta_n));
        out.y.push_back(y);
        mx = std::max(mx, std::abs(s.back().psi));
        double u = nahm_potential(y, b);
        worst = std::max(worst, std::abs(s.back().d2psi + (E - u) * s.back().psi));
    }
    int ref = 0;
    if (std::abs(s[0].psi) < 1e-8 * mx)
        for (int i = 0; i <= n; ++i)
            if (std::abs(s[i].psi) > std::abs(s[ref].psi)) ref = i;
    out.y_ref = out.y[ref];
    cd norm = s[ref].psi;
    for (auto& v : s) out.psi.push_back(v.psi / norm);
    out.residual = worst / mx;
    out.multiplier = baker_akhiezer(a, r, out.y_ref + L, theta_n).psi / norm;
    return out;
}

}  // namespace nahm
