#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "nahm/classical.hpp"
#include "nahm/density.hpp"
#include "nahm/errors.hpp"
#include "nahm/ode.hpp"

namespace nahm {

struct PeriodicPotential {
    std::function<double(double)> u;
    double L = 0;
    std::string name;

    static PeriodicPotential nahm(const NahmParams& p) {
        p.validate();
        double b = p.b;
        return {[b](double x) { return nahm_potential(x, b); }, p.period(), "nahm"};
    }
    static PeriodicPotential free(double L) {
        if (!(L > 0)) throw DomainError("free potential needs a positive period");
        return {[](double) { return 0.0; }, L, "free"};
    }
};

// uhat_k = (1/L) int_0^L u e^{-2 pi i k x / L} dx by the trapezoid rule, k = 0..M/2.
inline std::vector<std::complex<double>> fourier_coefficients(const PeriodicPotential& pot, int M) {
    std::vector<double> s(M);
    for (int j = 0; j < M; ++j) s[j] = pot.u(pot.L * j / M);
    std::vector<std::complex<double>> c(M / 2 + 1);
    for (int k = 0; k <= M / 2; ++k) {
        std::complex<double> acc = 0;
        for (int j = 0; j < M; ++j) acc += s[j] * std::polar(1.0, -2 * std::numbers::pi * k * j / M);
        c[k] = acc / double(M);
    }
    return c;
}

struct BandStructure {
    std::vector<double> edges;       // open band edges, ascending
    std::vector<double> all_levels;  // periodic and antiperiodic eigenvalues merged
    std::vector<double> periodic, antiperiodic;
    double convergence = 0;          // max edge change between N and 2N modes
};

namespace detail {

inline std::vector<double> hill_levels(const std::vector<std::complex<double>>& uh, double L, int N, bool anti) {
    using MC = Eigen::MatrixXcd;
    int n = anti ? 2 * N : 2 * N + 1;
    MC H = MC::Zero(n, n);
    auto idx = [&](int i) { return anti ? i - N : i - N; };
    for (int i = 0; i < n; ++i) {
        double k = anti ? (2 * idx(i) + 1) * std::numbers::pi / L : 2 * std::numbers::pi * idx(i) / L;
        H(i, i) = k * k;
        for (int j = 0; j < n; ++j) {
            int d = idx(i) - idx(j);
            if (std::abs(d) >= (int)uh.size()) continue;
            H(i, j) += d >= 0 ? uh[d] : std::conj(uh[-d]);
        }
    }
    Eigen::SelfAdjointEigenSolver<MC> es(H, Eigen::EigenvaluesOnly);
    std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + n);
    v.resize(N);  // the upper half is truncation-dominated
    return v;
}

inline BandStructure hill_once(const PeriodicPotential& pot, int N) {
    auto uh = fourier_coefficients(pot, std::max(256, 8 * N));
    BandStructure bs;
    bs.periodic = hill_levels(uh, pot.L, N, false);
    bs.antiperiodic = hill_levels(uh, pot.L, N, true);
    bs.all_levels = bs.periodic;
    bs.all_levels.insert(bs.all_levels.end(), bs.antiperiodic.begin(), bs.antiperiodic.end());
    std::sort(bs.all_levels.begin(), bs.all_levels.end());
    bs.all_levels.resize(N);
    const auto& l = bs.all_levels;
    bs.edges.push_back(l[0]);
    for (size_t i = 1; i + 1 < l.size(); i += 2) {
        double w = l[i + 1] - l[i];
        if (w > 1e-6 * (1 + std::abs(l[i]))) {
            bs.edges.push_back(l[i]);
            bs.edges.push_back(l[i + 1]);
        }
    }
    return bs;
}

}  // namespace detail

// Band edges from the periodic and antiperiodic Hill matrices with N modes;
// convergence compares against 2N modes.
inline BandStructure hill_band_edges(const PeriodicPotential& pot, int N = 32) {
    if (N < 4) throw DomainError("hill_band_edges needs N >= 4");
    auto a = detail::hill_once(pot, N), b = detail::hill_once(pot, 2 * N);
    if (a.edges.size() != b.edges.size())
        throw ConvergenceError("hill_band_edges: open gap count changes between N and 2N");
    double c = 0;
    for (size_t i = 0; i < a.edges.size(); ++i) c = std::max(c, std::abs(a.edges[i] - b.edges[i]));
    b.convergence = c;
    return b;
}

inline BandStructure hill_band_edges(const NahmParams& p, int N = 32) {
    auto bs = hill_band_edges(PeriodicPotential::nahm(p), N);
    if (bs.edges.size() > 5) bs.edges.resize(5);
    return bs;
}

// ---- Floquet discriminant

class Floquet {
public:
    Floquet(PeriodicPotential pot, int steps = 2000)
        : pot_(std::move(pot)), grid_(pot_.u, 0.0, pot_.L, steps), steps_(steps) {}

    const PeriodicPotential& potential() const { return pot_; }
    double period() const { return pot_.L; }

    Mat2<double> monodromy(double lambda) const { return grid_.transfer(lambda); }
    double discriminant(double lambda) const { return monodromy(lambda).trace(); }
    std::pair<double, double> discriminant_with_derivative(double lambda) const {
        auto [M, dM] = grid_.transfer_with_derivative(lambda);
        return {M.trace(), dM.trace()};
    }
    // Taylor coefficients of Delta in (lambda - lambda0).
    std::vector<double> discriminant_taylor(double lambda0, int K) const {
        auto Y = transfer_taylor(pot_.u, lambda0, 0.0, pot_.L, K, 2 * steps_);
        std::vector<double> d;
        for (auto& m : Y) d.push_back(m.trace());
        return d;
    }

private:
    PeriodicPotential pot_;
    PotentialGrid grid_;
    int steps_;
};

// Integrated density of states per period below Lambda, from the Hill levels and Delta.
inline double counting_function(const Floquet& F, const BandStructure& bs, double Lambda) {
    int n = 0;
    for (double l : bs.all_levels) n += l < Lambda;
    if (n == (int)bs.all_levels.size()) throw DomainError("counting_function: Lambda beyond resolved levels");
    if (n % 2 == 0) return n / 2.0;
    double sgn = ((n - 1) / 2) % 2 == 0 ? 1 : -1;
    double c = std::clamp(sgn * F.discriminant(Lambda) / 2, -1.0, 1.0);
    return (n - 1) / 2.0 + std::acos(c) / std::numbers::pi;
}

// Mean values used by the large-lambda expansion.
struct HeatInvariants {
    double u1, u2, u3, du2;  // <u>, <u^2>, <u^3>, <u'^2>
};

inline HeatInvariants heat_invariants(const PeriodicPotential& pot, int M = 512) {
    HeatInvariants h{0, 0, 0, 0};
    for (int j = 0; j < M; ++j) {
        double u = pot.u(pot.L * j / M);
        h.u1 += u;
        h.u2 += u * u;
        h.u3 += u * u * u;
    }
    h.u1 /= M;
    h.u2 /= M;
    h.u3 /= M;
    auto c = fourier_coefficients(pot, M);
    for (int k = 1; k < M / 2; ++k) h.du2 += 2 * std::norm(c[k]) * std::pow(2 * std::numbers::pi * k / pot.L, 2);
    return h;
}

// Density of states from the Floquet discriminant, rho = |Delta'| / (pi L sqrt(4 - Delta^2)).
class FloquetDensity : public DensityModel {
public:
    FloquetDensity(PeriodicPotential pot, int hill_modes = 32, int steps = 2000, double tail_start = -1)
        : F_(pot, steps), bs_(hill_band_edges(pot, hill_modes)), inv_(heat_invariants(pot)) {
        double scale = 1;
        for (double e : bs_.edges) scale = std::max(scale, std::abs(e));
        T_ = tail_start > 0 ? tail_start : 100 * scale;
        for (size_t i = 0; i < bs_.edges.size(); i += 2)
            bands_.push_back({bs_.edges[i], i + 1 < bs_.edges.size() ? bs_.edges[i + 1] : INFINITY});
    }

    std::string route() const override { return "spectral"; }
    double period() const override { return F_.period(); }
    std::vector<Band> bands() const override { return bands_; }
    const BandStructure& band_structure() const { return bs_; }
    const Floquet& floquet() const { return F_; }

    double density(double lambda) const override {
        bool in = false;
        for (auto& b : bands_) in |= lambda > b.lo && lambda < b.hi;
        if (!in) return 0;
        auto [D, dD] = F_.discriminant_with_derivative(lambda);
        double s = 4 - D * D;
        if (!(s > 0)) return 0;
        return std::abs(dD) / (std::numbers::pi * F_.period() * std::sqrt(s));
    }

    // Coefficients beyond max_edge_terms lose accuracy in the Taylor hierarchy and are dropped.
    static constexpr int max_edge_terms = 20;

    std::vector<double> edge_series(double e, int n) const override {
        n = std::min(n, max_edge_terms);
        auto d = F_.discriminant_taylor(e, n + 1);
        double sigma = d[0] > 0 ? 1 : -1;
        // 1 - sigma Delta/2 = mu S(mu)
        series::S S(n);
        for (int k = 0; k < n; ++k) S[k] = -sigma * d[k + 1] / 2;
        if (!(S[0] > 0)) throw DomainError("edge_series: e is not a lower band edge");
        series::S half(n);
        for (int k = 0; k < n; ++k) half[k] = S[k] / 2;
        auto root = series::pow(half, 0.5, n);
        // A(w) = asin(sqrt w)/sqrt w, w = mu S/2
        series::S w(n, 0.0);
        for (int k = 1; k < n; ++k) w[k] = half[k - 1];
        series::S A(n, 0.0);
        std::vector<double> a(n);
        a[0] = 1;
        for (int k = 1; k < n; ++k) a[k] = a[k - 1] * (2.0 * k - 1) * (2.0 * k - 1) / (2.0 * k * (2.0 * k + 1));
        for (int k = n - 1; k >= 0; --k) {
            A = series::mul(A, w, n);
            A[0] += a[k];
        }
        auto H = series::mul(root, A, n);
        series::S out(n);
        for (int k = 0; k < n; ++k) out[k] = H[k] * (1 + 2 * k) / (std::numbers::pi * F_.period());
        return out;
    }

    double tail_start() const override { return T_; }
    std::vector<double> tail_series(int n) const override {
        std::vector<double> r(std::max(n, 1), 0.0);
        r[0] = 1;
        if (n > 1) r[1] = inv_.u1 / 2;
        if (n > 2) r[2] = 3 * inv_.u2 / 8;
        if (n > 3) {
            double a3 = -inv_.u3 / 6 - inv_.du2 / 12;
            r[3] = -15 * a3 / 8;
        }
        return r;
    }

private:
    Floquet F_;
    BandStructure bs_;
    HeatInvariants inv_;
    std::vector<Band> bands_;
    double T_;
};

// ---- Bloch solutions and the Green function

struct BlochPair {
    std::complex<double> mu_plus, mu_minus;  // Floquet multipliers, |mu_plus| >= |mu_minus|
    std::complex<double> dpsi_plus, dpsi_minus;  // psi'(base) with psi(base) = 1
    double base = 0;
    std::shared_ptr<const PeriodicPotential> pot;
    std::complex<double> lambda;
    int steps = 2000;

    // (psi, psi') at x for the chosen solution
    Vec2<std::complex<double>> evaluate(double x, bool plus) const {
        using cd = std::complex<double>;
        double L = pot->L;
        double n = std::floor((x - base) / L);
        double r = x - base - n * L;
        int m = std::max(1, int(std::ceil(steps * r / L)));
        auto M = transfer<cd>(pot->u, lambda, base, base + r, m);
        Vec2<cd> v{1.0, plus ? dpsi_plus : dpsi_minus};
        auto out = M * v;
        cd f = std::pow(plus ? mu_plus : mu_minus, n);
        return {out.y * f, out.dy * f};
    }

    // W = psi_+ psi_-' - psi_+' psi_-, constant in x; -2 kappa for the free line at lambda = -kappa^2
    std::complex<double> wronskian(double x) const {
        auto p = evaluate(x, true), m = evaluate(x, false);
        return p.y * m.dy - p.dy * m.y;
    }
    std::complex<double> wronskian() const { return dpsi_minus - dpsi_plus; }
};

// Solution with psi(0) = 0, psi'(0) = 1; odd in x when u is even.
inline Vec2<std::complex<double>> odd_solution(std::complex<double> lambda, const PeriodicPotential& pot, double x,
                                               int steps = 2000) {
    using cd = std::complex<double>;
    int m = std::max(1, int(std::ceil(steps * std::abs(x) / pot.L)));
    auto M = transfer<cd>(pot.u, lambda, 0.0, x, m);
    return M * Vec2<cd>{0.0, 1.0};
}

inline BlochPair bloch_solutions(std::complex<double> lambda, const PeriodicPotential& pot, double base = 0,
                                 int steps = 2000) {
    using cd = std::complex<double>;
    auto M = transfer<cd>(pot.u, lambda, base, base + pot.L, steps);
    cd D = M.trace();
    cd disc = std::sqrt(D * D - 4.0);
    if (std::abs(D + disc) < std::abs(D - disc)) disc = -disc;
    // det M = 1; the small multiplier is taken as 1/m1 to avoid cancellation for long periods
    cd m1 = (D + disc) / 2.0, m2 = 1.0 / m1;
    if (std::abs(M.b) < 1e-14 * (std::abs(M.a) + std::abs(M.d) + 1))
        throw BranchPointError("bloch_solutions: monodromy is triangular (Dirichlet eigenvalue at the base point)");
    if (std::abs(D * D - 4.0) < 1e-8)
        throw BranchPointError("bloch_solutions: degenerate multipliers (band edge)");
    BlochPair bp;
    bp.mu_plus = m1;
    bp.mu_minus = m2;
    bp.dpsi_plus = (m1 - M.a) / M.b;
    bp.dpsi_minus = (m2 - M.a) / M.b;
    bp.base = base;
    bp.pot = std::make_shared<PeriodicPotential>(pot);
    bp.lambda = lambda;
    bp.steps = steps;
    return bp;
}

inline BlochPair bloch_solutions(std::complex<double> lambda, const NahmParams& p, int steps = 2000) {
    return bloch_solutions(lambda, PeriodicPotential::nahm(p), 0.0, steps);
}

// g(y, y0) with (-d^2/dy^2 + u - h) g = delta(y - y0), built from the Bloch solutions based at y0;
// psi_minus decays to the right, psi_plus to the left.
inline std::complex<double> green_spectral(std::complex<double> h, double y, double y0, const PeriodicPotential& pot,
                                           int steps = 2000) {
    auto bp = bloch_solutions(h, pot, y0, steps);
    if (std::abs(std::abs(bp.mu_plus) - 1) < 1e-12)
        throw DomainError("green_spectral: h on the spectrum; give it an imaginary part");
    auto R0 = bp.evaluate(y0, false), L0 = bp.evaluate(y0, true);
    auto W = L0.dy * R0.y - L0.y * R0.dy;
    auto R = bp.evaluate(std::max(y, y0), false), Lf = bp.evaluate(std::min(y, y0), true);
    return R.y * Lf.y / W;
}

inline std::complex<double> green_spectral(std::complex<double> h, double y, double y0, const NahmParams& p,
                                           int steps = 2000) {
    return green_spectral(h, y, y0, PeriodicPotential::nahm(p), steps);
}

// g'(y0+) - g'(y0-), which is -1 for a correctly normalized Green function.
inline std::complex<double> green_jump(std::complex<double> h, double y0, const PeriodicPotential& pot,
                                       int steps = 2000) {
    auto bp = bloch_solutions(h, pot, y0, steps);
    auto R0 = bp.evaluate(y0, false), L0 = bp.evaluate(y0, true);
    auto W = L0.dy * R0.y - L0.y * R0.dy;
    return (R0.dy * L0.y - L0.dy * R0.y) / W;
}

}  // namespace nahm
