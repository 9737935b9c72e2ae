#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "nahm/classical.hpp"
#include "nahm/density.hpp"
#include "nahm/errors.hpp"
#include "nahm/hermite.hpp"
#include "nahm/quadrature.hpp"
#include "nahm/spectral.hpp"
#include "nahm/specfun.hpp"

namespace nahm {

enum class Route { hyperelliptic, spectral };
enum class Subtraction { none, vacuum };

inline const char* to_string(Route r) { return r == Route::hyperelliptic ? "hyperelliptic" : "spectral"; }
inline const char* to_string(Subtraction s) { return s == Subtraction::vacuum ? "vacuum" : "none"; }

// M_k = b * int_0^L z^k dx for z = cn^2(bx, -1), L = 2K/b.
inline std::vector<double> cn2_moments(int n) {
    double K = complete_K(lemniscatic_m), E = complete_E(lemniscatic_m);
    std::vector<double> M{2 * K, 2 * (2 * K - E)};
    for (int k = 0; (int)M.size() <= n; ++k)
        M.push_back((3.0 * (k + 1) * M[k + 1] - (2.0 * k + 1) * M[k]) / (k + 1.5));
    M.resize(n + 1);
    return M;
}

// Density of states read off the cut of gamma_hat(p) = N(p) / (2 sqrt Q(p)), with
// N(p) = int_0^L P(p, z(x)) dx; the operator eigenvalue is lambda = -p.
class HyperellipticDensity : public DensityModel {
public:
    HyperellipticDensity(AnsatzSolution sol, double b) : R_(std::move(sol), b), L_(2 * complete_K(lemniscatic_m) / b) {
        const auto& s = R_.solution();
        const int n = s.degree;
        int zmax = 0;
        for (auto& P : s.P) zmax = std::max(zmax, P.degree());
        auto M = cn2_moments(std::max(zmax, 1));
        N_.assign(n + 1, 0.0);
        for (int j = 0; j <= n; ++j) {
            double acc = 0;
            for (auto& [mono, c] : s.P[j].poly().terms())
                acc += to_double(c) * std::pow(b * b, mono[GradedPoly::B]) * M[mono[GradedPoly::Z]] / b;
            N_[n - j] = acc;
        }
        for (double r : R_.roots()) lam_.push_back(-r);
        std::sort(lam_.begin(), lam_.end());
        for (size_t i = 0; i < lam_.size(); i += 2)
            bands_.push_back({lam_[i], i + 1 < lam_.size() ? lam_[i + 1] : INFINITY});
        double scale = b * b;
        for (double e : lam_) scale = std::max(scale, std::abs(e));
        T_ = 4 * scale;
    }

    const Resolvent& resolvent() const { return R_; }
    // Coefficients of N(p), lowest power first; for the Nahm solution N = A p^2 + B p + C.
    const std::vector<double>& numerator() const { return N_; }

    std::complex<double> N(std::complex<double> p) const {
        std::complex<double> s = 0;
        for (int k = (int)N_.size() - 1; k >= 0; --k) s = s * p + N_[k];
        return s;
    }
    std::complex<double> gamma_hat(std::complex<double> p) const { return N(p) / (2.0 * R_.sqrtQ(p)); }
    std::complex<double> gamma_hat_limit(double p, int side) const {
        return N(p) / (2.0 * R_.sqrtQ_boundary(p, side));
    }
    std::complex<double> gamma_hat_quadrature(std::complex<double> p, const QuadratureSpec& q) const {
        QuadratureSpec g = q;
        g.rule = Rule::gauss_legendre;
        g.panels = std::max(q.panels, 4);
        return integrate([&](double x) { return R_.green_diagonal(p, x); }, 0.0, L_, g).value;
    }

    std::string route() const override { return "hyperelliptic"; }
    double period() const override { return L_; }
    std::vector<Band> bands() const override { return bands_; }

    double density(double lambda) const override {
        if (!in_band(lambda)) return 0;
        double prod = 1;
        for (double e : lam_) prod *= lambda - e;
        return std::abs(N(-lambda).real()) / (2 * std::numbers::pi * L_ * std::sqrt(std::abs(prod)));
    }
    bool in_band(double lambda) const {
        for (auto& b : bands_)
            if (lambda > b.lo && lambda < b.hi) return true;
        return false;
    }

    std::vector<double> edge_series(double e, int n) const override {
        int j = -1;
        for (int i = 0; i < (int)lam_.size(); ++i)
            if (std::abs(lam_[i] - e) <= 1e-12 * (1 + std::abs(e))) j = i;
        if (j < 0) throw DomainError("edge_series: not a band edge");
        std::vector<std::pair<double, double>> f;
        for (int i = 0; i < (int)lam_.size(); ++i)
            if (i != j) f.push_back({e - lam_[i], 1.0});
        auto R = series::linear_product(f, n);
        auto Rm = series::pow(R, -0.5, n);
        // N(-(e + mu)) in powers of mu
        series::S Nm(n, 0.0);
        {
            series::S pw{1.0};
            for (size_t k = 0; k < N_.size(); ++k) {
                for (size_t i = 0; i < pw.size() && (int)i < n; ++i) Nm[i] += N_[k] * pw[i];
                pw = series::mul(pw, series::S{-e, -1.0}, (int)pw.size() + 1);
            }
        }
        double sg = Nm[0] >= 0 ? 1 : -1;
        auto out = series::mul(Nm, Rm, n);
        for (auto& x : out) x *= sg / (2 * std::numbers::pi * L_);
        return out;
    }

    double tail_start() const override { return T_; }
    std::vector<double> tail_series(int n) const override {
        const int deg = (int)N_.size() - 1;
        series::S num(n, 0.0);
        for (int j = 0; j <= deg && j < n; ++j) num[j] = N_[deg - j] * ((deg - j) % 2 ? -1 : 1);
        std::vector<std::pair<double, double>> f;
        for (double e : lam_) f.push_back({1.0, -e});
        auto out = series::mul(num, series::pow(series::linear_product(f, n), -0.5, n), n);
        double sg = (deg % 2 ? -1 : 1) / L_;
        for (auto& x : out) x *= sg;
        return out;
    }

private:
    Resolvent R_;
    double L_;
    std::vector<double> N_, lam_;
    std::vector<Band> bands_;
    double T_;
};

// ---- model factories

inline std::shared_ptr<const DensityModel> make_density(const NahmParams& p, Route r, bool free = false,
                                                          int hill_modes = 32) {
    p.validate();
    if (r == Route::hyperelliptic) {
        if (free) return std::make_shared<HyperellipticDensity>(solve_ansatz(GradedPoly(), GradedPoly(), 0), p.b);
        return std::make_shared<HyperellipticDensity>(nahm_solution(), p.b);
    }
    return std::make_shared<FloquetDensity>(free ? PeriodicPotential::free(p.period()) : PeriodicPotential::nahm(p),
                                           hill_modes);
}

// gamma_hat(p) per period: closed form checked against direct x-quadrature of the Green diagonal.
inline std::complex<double> gamma_hat(std::complex<double> p, const NahmParams& params, const QuadratureSpec& q) {
    params.validate();
    HyperellipticDensity h(nahm_solution(), params.b);
    if (p.imag() == 0 && h.resolvent().on_cut(p.real()))
        throw DomainError("gamma_hat: p on a cut; use gamma_hat_limit");
    auto closed = h.gamma_hat(p);
    auto quad = h.gamma_hat_quadrature(p, q);
    if (std::abs(closed - quad) > q.tol * std::max(1.0, std::abs(closed)))
        throw ConvergenceError("gamma_hat: closed form and x-quadrature disagree by " +
                               std::to_string(std::abs(closed - quad)));
    return closed;
}

struct DensitySample {
    double value = 0;
    bool in_gap = false;
};

inline DensitySample spectral_density(double lambda, const NahmParams& params) {
    params.validate();
    HyperellipticDensity h(nahm_solution(), params.b);
    if (!h.in_band(lambda)) return {0.0, true};
    return {h.density(lambda), false};
}

// ---- zeta

struct ZetaResult {
    std::complex<double> value;
    double err_estimate = 0;
    Route route = Route::hyperelliptic;
    Subtraction subtraction = Subtraction::vacuum;
    NahmParams params;
    QuadratureSpec quad;
    std::complex<double> s;
    std::string quantity = "zeta";  // "zeta", "zeta_prime_zero", "mass_correction"
};

inline ZetaResult zeta_s(std::complex<double> s, const DensityModel& m, Route route, const NahmParams& params,
                         const QuadratureSpec& q) {
    auto z = spectral_zeta(m, s, q);
    return {z.value, z.error, route, Subtraction::vacuum, params, q, s, "zeta"};
}

inline ZetaResult zeta_s(std::complex<double> s, const NahmParams& params, Subtraction sub, const QuadratureSpec& q,
                         Route route = Route::hyperelliptic) {
    if (sub == Subtraction::none)
        throw DomainError("zeta_s: the unsubtracted integral diverges for every s (rho ~ lambda^{-1/2} at infinity "
                          "and a negative band); use vacuum subtraction");
    auto m = make_density(params, route);
    return zeta_s(s, *m, route, params, q);
}

inline ZetaResult zeta_oracle(std::complex<double> s, const NahmParams& params, const QuadratureSpec& q = {}) {
    return zeta_s(s, params, Subtraction::vacuum, q, Route::spectral);
}

inline ZetaResult zeta_prime_zero(const DensityModel& m, Route route, const NahmParams& params,
                                  const QuadratureSpec& q) {
    auto c = spectral_zeta(m, 0.0, q), f = spectral_zeta(m, 0.0, q.refined());
    double err = f.error + std::abs(f.derivative - c.derivative);
    return {f.derivative, err, route, Subtraction::vacuum, params, q, 0.0, "zeta_prime_zero"};
}

inline ZetaResult zeta_prime_zero(const NahmParams& params, const QuadratureSpec& q,
                                  Route route = Route::hyperelliptic) {
    auto m = make_density(params, route);
    return zeta_prime_zero(*m, route, params, q);
}

inline double poisson_factor(double t, int d) {
    if (!(t > 0)) throw DomainError("poisson_factor needs t > 0");
    if (d < 1) throw DomainError("poisson_factor needs d >= 1");
    if (d == 1) return 1.0;
    return std::pow(4 * std::numbers::pi * t, -(d - 1) / 2.0);
}

// Heat trace of D (x) transverse Laplacian per unit transverse volume: gamma_1(t) poisson_factor(t, d).
inline double transverse_trace(double gamma1, double t, int d) { return gamma1 * poisson_factor(t, d); }

// zeta_d'(0) for the operator with d - 1 flat transverse dimensions. The transverse factor turns
// zeta_d(s) into (4pi)^{-n} Gamma(s-n)/Gamma(s) zeta_1(s-n), n = (d-1)/2; odd d only.
inline ZetaResult zeta_prime_zero_d(const DensityModel& m, Route route, const NahmParams& params,
                                    const QuadratureSpec& q) {
    if (params.d == 1) return zeta_prime_zero(m, route, params, q);
    if (params.d % 2 == 0)
        throw DomainError("zeta'(0) for even d has a pole (Gamma(s - (d-1)/2) at s = 0); needs renormalization");
    int n = (params.d - 1) / 2;
    auto c = spectral_zeta(m, double(-n), q), f = spectral_zeta(m, double(-n), q.refined());
    double Hn = 0, fact = 1;
    for (int k = 1; k <= n; ++k) {
        Hn += 1.0 / k;
        fact *= k;
    }
    double pref = std::pow(4 * std::numbers::pi, -n) * (n % 2 ? -1 : 1) / fact;
    auto val = pref * (f.derivative + Hn * f.value);
    auto cval = pref * (c.derivative + Hn * c.value);
    return {val, std::abs(pref) * f.error + std::abs(val - cval), route, Subtraction::vacuum, params, q, 0.0,
            "zeta_prime_zero"};
}

struct MassCorrection {
    std::complex<double> value;  // Delta S = (hbar / 2) zeta'(0), per unit length
    double err_estimate = 0;
    ZetaResult zeta_prime;
};

inline MassCorrection mass_correction(const DensityModel& m, Route route, const NahmParams& params,
                                      const QuadratureSpec& q) {
    params.validate();
    auto z = zeta_prime_zero_d(m, route, params, q);
    return {params.hbar / 2 * z.value, params.hbar / 2 * z.err_estimate, z};
}

inline MassCorrection mass_correction(const NahmParams& params, const QuadratureSpec& q,
                                      Route route = Route::hyperelliptic) {
    auto m = make_density(params, route);
    return mass_correction(*m, route, params, q);
}

// ---- heat trace

// gamma(t) per period, L [(4 pi t)^{-1/2} - h(t)].
inline Estimate<double> heat_trace(double t, const DensityModel& m, const QuadratureSpec& q = {}) {
    auto h = subtracted_heat(m, t, q);
    double L = m.period();
    return {L * (1 / std::sqrt(4 * std::numbers::pi * t) - h.value), L * h.error, h.terms};
}

inline Estimate<double> heat_trace(double t, const NahmParams& params, Route route = Route::hyperelliptic,
                                   const QuadratureSpec& q = {}) {
    return heat_trace(t, *make_density(params, route), q);
}

// Trace of exp(t d^2/dx^2) on the circle of length L, theta3(0, exp(-4 pi^2 t / L^2)).
inline Estimate<double> circle_trace(double t, double L) {
    if (!(t > 0)) throw DomainError("circle_trace needs t > 0");
    double qn = std::exp(-4 * std::numbers::pi * std::numbers::pi * t / (L * L));
    int N = 1;
    while (std::pow(qn, double(N + 1) * (N + 1)) > 1e-18 && N < 100000) ++N;
    return theta_g1(0.0, qn, 3, N);
}

// First Weyl correction: gamma sqrt(4 pi t)/L = 1 - c t + O(t^2); c is estimated by
// Richardson extrapolation over t, t/2 and should equal the mean potential.
inline double weyl_coefficient(const DensityModel& m, double t, const QuadratureSpec& q = {}) {
    auto c = [&](double tt) {
        double r = heat_trace(tt, m, q).value * std::sqrt(4 * std::numbers::pi * tt) / m.period();
        return -(r - 1) / tt;
    };
    return 2 * c(t / 2) - c(t);
}

// ---- Mellin validation path: (1/Gamma(s)) int_0^inf t^{s-1} h(t) dt per unit length,
// for models with non-negative spectrum, -1/2 < Re s < 1/2.
inline std::complex<double> mellin_zeta(const DensityModel& m, double s, const QuadratureSpec& q, double t0 = 1e-3,
                                        double t1 = -1) {
    if (!(s > -0.5 && s < 0.5)) throw DomainError("mellin_zeta: s outside the strip (-1/2, 1/2)");
    for (auto& b : m.bands())
        if (b.lo < -1e-12) throw DomainError("mellin_zeta: negative spectrum, the t-integral diverges");
    auto zp = detail::zero_piece(m, 40);
    if (t1 < 0) t1 = 40 / zp.c0;
    const double pi = std::numbers::pi;
    // small t: h = -(1/2pi) sum_k r_k Gamma(1/2-k) t^{k-1/2}
    auto r = m.tail_series(8);
    double head = 0;
    for (size_t k = 1; k < r.size(); ++k) {
        double a = k - 0.5 + s;
        head += -r[k] / (2 * pi) * std::tgamma(0.5 - k) * std::pow(t0, a) / a;
    }
    // large t: h = sum_n g_n Gamma(n+1/2) t^{-n-1/2} up to exp(-c0 t)
    double tail = 0;
    for (size_t n = 0; n < zp.g.size() && n < 12; ++n) {
        double a = n + 0.5 - s;
        tail += zp.g[n] * std::tgamma(n + 0.5) * std::pow(t1, -a) / a;
    }
    QuadratureSpec g = q;
    g.rule = Rule::gauss_legendre;
    g.panels = std::max(8, q.panels);
    g.order = std::min(q.order, 16);
    auto mid = integrate(
        [&](double v) {
            double t = std::exp(v);
            return std::pow(t, s) * subtracted_heat(m, t, q).value;
        },
        std::log(t0), std::log(t1), g);
    return (head + mid.value + tail) / std::tgamma(s);
}

}  // namespace nahm
