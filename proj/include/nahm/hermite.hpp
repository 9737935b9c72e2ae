#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "nahm/classical.hpp"
#include "nahm/errors.hpp"
#include "nahm/polynomial.hpp"

namespace nahm {

// P(p,z) = p^n + P_1 p^{n-1} + ... + P_n,  Q(p) = p^{2n+1} + q_{2n} p^{2n} + ... + q_0.
struct AnsatzSolution {
    int degree = 2;
    GradedPoly u, rho;
    std::vector<GradedPoly> P;  // P[0] = 1
    std::vector<GradedPoly> q;  // q[j] multiplies p^j; q[2n+1] = 1

    const GradedPoly& P1() const { return P.at(1); }
    const GradedPoly& P2() const { return P.at(2); }
};

inline GradedPoly nahm_u() { return GradedPoly::term(-6, 0, 1) + GradedPoly::term(6, 1, 1); }
inline GradedPoly nahm_rho() {
    auto z = GradedPoly::z();
    return z * (GradedPoly::constant(1) - z) * (GradedPoly::constant(2) - z);
}

namespace detail {

// Variable layout for the solver: p, z, then q_0 .. q_{2n}; b^2 is set to 1 and restored by weight.
struct AnsatzVars {
    int n;
    int count() const { return 2 + 2 * n + 1; }
    int qv(int j) const { return 2 + j; }
};

inline MPoly lift(const GradedPoly& g, const AnsatzVars& v, int weight) {
    // drop b^2 (homogeneous input), embed z
    MPoly r(v.count());
    for (auto& [m, c] : g.poly().terms()) {
        if (m[GradedPoly::B] != weight) throw DomainError("ansatz input is not homogeneous in b^2");
        MPoly::Monomial mm(v.count(), 0);
        mm[1] = m[GradedPoly::Z];
        r += MPoly::monomial(mm, c);
    }
    return r;
}

inline MPoly link_pq(const MPoly& P, const MPoly& Q, const MPoly& u, const MPoly& rho, int nv) {
    MPoly Pz = P.derivative(1), Pzz = Pz.derivative(1);
    MPoly p = MPoly::var(nv, 0);
    MPoly two = MPoly::constant(nv, 2);
    return rho * (two * P * Pzz - Pz * Pz) + rho.derivative(1) * P * Pz - (p + u) * P * P + Q;
}

struct Constraint {
    int p_power, z_power;
    MPoly expr;
};

inline std::vector<Rational> rational_roots(const MPoly& f, int var) {
    int deg = f.degree(var);
    std::vector<Rational> c(deg + 1);
    for (auto& [m, a] : f.terms()) c[m[var]] = a;
    std::vector<Rational> roots;
    int low = 0;
    while (low <= deg && c[low] == 0) ++low;
    if (low > 0) roots.push_back(0);
    if (low >= deg) return roots;
    Integer l = 1;
    for (int k = low; k <= deg; ++k) l = boost::multiprecision::lcm(l, denominator(c[k]));
    std::vector<Integer> a;
    for (int k = low; k <= deg; ++k) a.push_back(numerator(Rational(c[k] * l)));
    auto divisors = [](Integer x) {
        x = abs(x);
        std::vector<Integer> d;
        for (Integer i = 1; i * i <= x; ++i)
            if (x % i == 0) {
                d.push_back(i);
                if (i * i != x) d.push_back(x / i);
            }
        return d;
    };
    if (abs(a.front()) > Integer(1000000000000LL) || abs(a.back()) > Integer(1000000000000LL))
        throw ConvergenceError("rational root search: coefficients too large");
    for (auto& num : divisors(a.front()))
        for (auto& den : divisors(a.back()))
            for (int s : {1, -1}) {
                Rational r(Integer(s) * num, den);
                Rational val = 0;
                for (int k = deg - low; k >= 0; --k) val = val * r + Rational(a[k]);
                if (val == 0 && std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
            }
    std::sort(roots.begin(), roots.end());
    return roots;
}

class ConstraintSolver {
public:
    ConstraintSolver(std::vector<Constraint> cs, std::vector<int> unknowns, int nv)
        : cs_(std::move(cs)), unknowns_(std::move(unknowns)), nv_(nv) {}

    std::map<int, Rational> solve() {
        std::vector<std::pair<int, MPoly>> subs;
        return run(cs_, subs);
    }

private:
    std::map<int, Rational> run(std::vector<Constraint> cs, std::vector<std::pair<int, MPoly>> subs) {
        for (;;) {
            std::vector<Constraint> live;
            for (auto& c : cs) {
                if (c.expr.is_zero()) continue;
                if (c.expr.is_constant())
                    throw InconsistentSystem(c.p_power, c.z_power, to_string(c.expr.constant_value()));
                live.push_back(std::move(c));
            }
            cs = std::move(live);
            if (cs.empty()) return finish(subs);

            bool progressed = false;
            for (auto& c : cs) {
                for (int v : unknowns_) {
                    if (c.expr.degree(v) != 1) continue;
                    MPoly coef = c.expr.coefficient(v, 1);
                    if (!coef.is_constant()) continue;
                    MPoly rest = c.expr.coefficient(v, 0);
                    MPoly value = rest * (Rational(-1) / coef.constant_value());
                    for (auto& d : cs) d.expr = d.expr.substitute(v, value);
                    for (auto& s : subs) s.second = s.second.substitute(v, value);
                    subs.emplace_back(v, value);
                    progressed = true;
                    break;
                }
                if (progressed) break;
            }
            if (progressed) continue;

            for (auto& c : cs) {
                int var = -1, count = 0;
                for (int v : unknowns_)
                    if (c.expr.depends_on(v)) var = v, ++count;
                if (count != 1) continue;
                auto roots = rational_roots(c.expr, var);
                std::optional<InconsistentSystem> last;
                for (auto& r : roots) {
                    auto cs2 = cs;
                    auto subs2 = subs;
                    MPoly value = MPoly::constant(nv_, r);
                    for (auto& d : cs2) d.expr = d.expr.substitute(var, value);
                    for (auto& s : subs2) s.second = s.second.substitute(var, value);
                    subs2.emplace_back(var, value);
                    try {
                        return run(cs2, subs2);
                    } catch (const InconsistentSystem& e) {
                        last = e;
                    }
                }
                if (last) throw *last;
                throw InconsistentSystem(c.p_power, c.z_power, "no rational root");
            }
            throw ConvergenceError("ansatz constraints are nonlinear beyond the rational-root solver");
        }
    }

    std::map<int, Rational> finish(const std::vector<std::pair<int, MPoly>>& subs) {
        std::map<int, Rational> out;
        for (auto& [v, val] : subs) {
            if (!val.is_constant()) throw DomainError("ansatz solution is not unique (free parameter left)");
            out[v] = val.constant_value();
        }
        for (int v : unknowns_)
            if (!out.count(v)) throw DomainError("ansatz solution is not unique (unconstrained unknown)");
        return out;
    }

    std::vector<Constraint> cs_;
    std::vector<int> unknowns_;
    int nv_;
};

inline GradedPoly restore_weight(const MPoly& m, int weight) {
    GradedPoly g;
    for (auto& [mono, c] : m.terms()) g = g + GradedPoly::term(c, mono[1], weight);
    return g;
}

}  // namespace detail

// Coefficient matching of b^2(rho(2PP'' - P'^2) + rho' P P') - (p + u) P^2 + Q = 0 (z-derivatives),
// with P of degree n and Q of degree 2n+1 in p.
inline AnsatzSolution solve_ansatz(const GradedPoly& u, const GradedPoly& rho, int degree = 2) {
    if (degree < 0) throw DomainError("ansatz degree must be >= 0");
    if (u.degree() > 1) throw DomainError("solve_ansatz: u must be at most linear in z");
    if (rho.degree() > 3) throw DomainError("solve_ansatz: rho must be at most cubic in z");
    using namespace detail;
    const int n = degree;
    AnsatzVars V{n};
    const int nv = V.count();
    MPoly uu = lift(u, V, 1), rr = lift(rho, V, 0);
    MPoly p = MPoly::var(nv, 0);

    MPoly Q = MPoly::var(nv, 0, 2 * n + 1);
    for (int j = 0; j <= 2 * n; ++j) Q += MPoly::var(nv, V.qv(j)) * MPoly::var(nv, 0, j);

    std::vector<MPoly> Pk(n + 1, MPoly(nv));
    Pk[0] = MPoly::constant(nv, 1);
    auto assemble = [&] {
        MPoly P(nv);
        for (int k = 0; k <= n; ++k) P += Pk[k] * MPoly::var(nv, 0, n - k);
        return P;
    };
    for (int k = 1; k <= n; ++k) {
        MPoly L = link_pq(assemble(), Q, uu, rr, nv);
        Pk[k] = L.coefficient(0, 2 * n + 1 - k) * Rational(1, 2);
    }
    MPoly L = link_pq(assemble(), Q, uu, rr, nv);
    for (int j = n + 1; j <= 2 * n + 1; ++j)
        if (!L.coefficient(0, j).is_zero()) throw ConvergenceError("ansatz elimination left a leading residual");

    std::vector<Constraint> cs;
    for (int j = 0; j <= n; ++j) {
        MPoly cj = L.coefficient(0, j);
        for (int i = 0; i <= std::max(0, cj.degree(1)); ++i) cs.push_back({j, i, cj.coefficient(1, i)});
    }
    std::vector<int> unknowns;
    for (int j = 0; j <= 2 * n; ++j) unknowns.push_back(V.qv(j));
    auto values = ConstraintSolver(cs, unknowns, nv).solve();

    AnsatzSolution sol;
    sol.degree = n;
    sol.u = u;
    sol.rho = rho;
    for (int k = 0; k <= n; ++k) {
        MPoly e = Pk[k];
        for (auto& [v, val] : values) e = e.substitute(v, MPoly::constant(nv, val));
        sol.P.push_back(restore_weight(e, k));
    }
    for (int j = 0; j <= 2 * n + 1; ++j) {
        Rational c = j == 2 * n + 1 ? Rational(1) : values.at(V.qv(j));
        sol.q.push_back(GradedPoly::term(c, 0, 2 * n + 1 - j));
    }
    return sol;
}

// Residual of the defining identity, coefficient by coefficient in (p, z, b^2); index = power of p.
inline std::vector<GradedPoly> ansatz_identities(const AnsatzSolution& s) {
    const int nv = 3;  // p, z, B
    auto up = [&](const GradedPoly& g) {
        MPoly r(nv);
        for (auto& [m, c] : g.poly().terms()) r += MPoly::monomial({0, m[0], m[1]}, c);
        return r;
    };
    MPoly p = MPoly::var(nv, 0), B = MPoly::var(nv, 2);
    MPoly P(nv), Q(nv);
    for (int k = 0; k <= s.degree; ++k) P += up(s.P[k]) * MPoly::var(nv, 0, s.degree - k);
    for (int j = 0; j < (int)s.q.size(); ++j) Q += up(s.q[j]) * MPoly::var(nv, 0, j);
    MPoly u = up(s.u), rho = up(s.rho);
    MPoly Pz = P.derivative(1), Pzz = Pz.derivative(1);
    MPoly L = B * (rho * (MPoly::constant(nv, 2) * P * Pzz - Pz * Pz) + rho.derivative(1) * P * Pz) -
              (p + u) * P * P + Q;
    std::vector<GradedPoly> out;
    for (int j = 0; j <= 2 * s.degree + 1; ++j) {
        MPoly c = L.coefficient(0, j);
        MPoly g(2);
        for (auto& [m, v] : c.terms()) g += MPoly::monomial({m[1], m[2]}, v);
        out.push_back(GradedPoly(g));
    }
    return out;
}

// ---- exact roots of an odd Q

// coef * sqrt(radicand) * b^2
struct ExactRoot {
    Rational coef;
    Integer radicand = 1;

    double value(double b = 1) const { return to_double(coef) * std::sqrt(radicand.convert_to<double>()) * b * b; }
    std::string to_string() const {
        if (coef == 0) return "0";
        std::string s = nahm::to_string(coef);
        if (radicand != 1) s += "*sqrt(" + radicand.str() + ")";
        return s + "*b^2";
    }
    friend bool operator==(const ExactRoot& a, const ExactRoot& b) {
        return a.coef == b.coef && (a.coef == 0 || a.radicand == b.radicand);
    }
};

struct SpectralCurveRoots {
    std::vector<ExactRoot> roots;  // ascending
    std::vector<double> values(double b = 1) const {
        std::vector<double> v;
        for (auto& r : roots) v.push_back(r.value(b));
        return v;
    }
};

namespace detail {

// sqrt of a non-negative rational as c * sqrt(k), k squarefree.
inline ExactRoot exact_sqrt(const Rational& w) {
    if (w < 0) throw DomainError("exact_sqrt of a negative number");
    if (w == 0) return {0, 1};
    Integer num = numerator(w), den = denominator(w);
    Integer x = num * den, s = 1, k = 1;
    for (Integer f = 2; f * f <= x; ++f) {
        while (x % (f * f) == 0) {
            x /= f * f;
            s *= f;
        }
    }
    k = x;
    return {Rational(s, den), k};
}

}  // namespace detail

inline SpectralCurveRoots quintic_roots(const AnsatzSolution& sol) {
    const int n = sol.degree;
    std::vector<Rational> q;  // b-free coefficients
    for (auto& g : sol.q) q.push_back(g.coeff(0, 2 * n + 1 - (int)q.size()));
    for (int j = 0; j <= 2 * n; j += 2)
        if (q[j] != 0) throw DomainError("Q is not odd in p: reflection symmetry fails");
    // Q = p R(p^2); R of degree n in t = p^2
    std::vector<Rational> R;
    for (int j = 1; j <= 2 * n + 1; j += 2) R.push_back(q[j]);
    std::vector<Rational> ts;
    if (n == 0) {
    } else if (n == 1) {
        ts.push_back(-R[0]);
    } else if (n == 2) {
        Rational disc = R[1] * R[1] - 4 * R[0];
        auto sd = detail::exact_sqrt(disc);
        if (sd.radicand != 1) throw DomainError("quintic_roots: discriminant is not a rational square");
        ts.push_back((-R[1] - sd.coef) / 2);
        ts.push_back((-R[1] + sd.coef) / 2);
    } else {
        throw DomainError("quintic_roots: exact factorization implemented for degree <= 2");
    }
    SpectralCurveRoots out;
    out.roots.push_back({0, 1});
    for (auto& t : ts) {
        if (t < 0) throw DomainError("quintic_roots: complex roots");
        auto r = detail::exact_sqrt(t);
        if (r.coef == 0) throw DomainError("quintic_roots: repeated root at 0");
        out.roots.push_back(r);
        out.roots.push_back({-r.coef, r.radicand});
    }
    std::sort(out.roots.begin(), out.roots.end(), [](auto& a, auto& b) { return a.value() < b.value(); });
    return out;
}

// ---- numeric evaluation

class Resolvent {
public:
    using cd = std::complex<double>;

    // z_of_x must solve z'^2 = 4 b^2 rho(z); the default is z = cn^2(bx, -1).
    Resolvent(AnsatzSolution sol, double b, std::function<double(double)> z_of_x = {})
        : s_(std::move(sol)), b_(b), z_(std::move(z_of_x)) {
        if (!(b > 0)) throw DomainError("Resolvent: b must be positive");
        if (!z_) z_ = [b](double x) {
            double c = jacobi(b * x, lemniscatic_m).cn;
            return c * c;
        };
        for (auto& g : s_.P) {
            dP_.push_back(g.dz());
            d2P_.push_back(g.dz().dz());
        }
        int deg = 2 * s_.degree + 1;
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(deg, deg);
        for (int j = 0; j < deg; ++j) {
            C(0, j) = -s_.q[deg - 1 - j].evaluate(0.0, b_);
            if (j + 1 < deg) C(j + 1, j) = 1;
        }
        if (deg == 1) {
            roots_ = {-s_.q[0].evaluate(0.0, b_)};
        } else {
            Eigen::EigenSolver<Eigen::MatrixXd> es(C);
            for (int i = 0; i < deg; ++i) {
                auto ev = es.eigenvalues()[i];
                if (std::abs(ev.imag()) > 1e-9 * std::max(1.0, std::abs(ev)))
                    throw DomainError("Resolvent: Q has non-real roots");
                roots_.push_back(ev.real());
            }
        }
        std::sort(roots_.begin(), roots_.end());
        for (auto& r : roots_)
            if (std::abs(r) < 1e-12 * b_ * b_) r = 0;
    }

    const AnsatzSolution& solution() const { return s_; }
    double b() const { return b_; }
    const std::vector<double>& roots() const { return roots_; }
    double z(double x) const { return z_(x); }

    cd P(cd p, double z, int deriv = 0) const {
        const auto& v = deriv == 0 ? s_.P : deriv == 1 ? dP_ : d2P_;
        cd sum = 0;
        for (int k = 0; k <= s_.degree; ++k) sum = sum * p + cd(v[k].evaluate(z, b_));
        return sum;
    }
    cd Q(cd p) const {
        cd sum = 0;
        for (int j = (int)s_.q.size() - 1; j >= 0; --j) sum = sum * p + s_.q[j].evaluate(0.0, b_);
        return sum;
    }

    // Product of principal roots. The cuts cancel in pairs, leaving real p with an odd number
    // of roots above it; positive for p beyond the largest root.
    cd sqrtQ(cd p) const {
        cd r = 1;
        for (double e : roots_) {
            if (std::abs(p - e) < 1e-14 * std::max(1.0, std::abs(e)))
                throw BranchPointError("sqrtQ: p at a root of Q");
            r *= std::sqrt(p - e);
        }
        return r;
    }
    // Boundary value at real p from above (side = +1) or below (side = -1).
    cd sqrtQ_boundary(double p, int side) const {
        cd r = 1;
        for (double e : roots_) {
            double d = p - e;
            if (d == 0) throw BranchPointError("sqrtQ: p at a root of Q");
            r *= d > 0 ? cd(std::sqrt(d)) : cd(0, side * std::sqrt(-d));
        }
        return r;
    }
    // True when real p lies on a cut of sqrtQ.
    bool on_cut(double p) const {
        int above = 0;
        for (double e : roots_)
            if (e > p) ++above;
        return above % 2 == 1;
    }

    cd green_diagonal(cd p, double x) const { return P(p, z_(x)) / (2.0 * sqrtQ(p)); }

    // |2 G G'' - G'^2 - 4 (u + p) G^2 + 1| with G = [(D + p)^{-1}](x, x).
    double bilinear_residual(cd p, double x) const {
        double z = z_(x);
        double b2 = b_ * b_;
        double zx2 = 4 * b2 * s_.rho.evaluate(z, b_);
        double zxx = 2 * b2 * s_.rho.dz().evaluate(z, b_);
        cd S = 2.0 * sqrtQ(p);
        cd G = P(p, z) / S;
        cd Gx2 = P(p, z, 1) * P(p, z, 1) * zx2 / (S * S);  // G'^2
        cd Gxx = (P(p, z, 2) * zx2 + P(p, z, 1) * zxx) / S;
        double u = s_.u.evaluate(z, b_);
        return std::abs(2.0 * G * Gxx - Gx2 - 4.0 * (u + p) * G * G + 1.0);
    }

private:
    AnsatzSolution s_;
    double b_;
    std::function<double(double)> z_;
    std::vector<GradedPoly> dP_, d2P_;
    std::vector<double> roots_;
};

inline const AnsatzSolution& nahm_solution() {
    static const AnsatzSolution s = solve_ansatz(nahm_u(), nahm_rho(), 2);
    return s;
}

inline std::complex<double> green_diagonal(std::complex<double> p, double x, const NahmParams& params) {
    return Resolvent(nahm_solution(), params.b).green_diagonal(p, x);
}

inline double bilinear_residual(std::complex<double> p, double x, const NahmParams& params) {
    return Resolvent(nahm_solution(), params.b).bilinear_residual(p, x);
}

// Adds eps*z to P_1; used as a negative control.
inline AnsatzSolution mutate_P1(AnsatzSolution s, const Rational& eps) {
    s.P.at(1) = s.P.at(1) + GradedPoly::term(eps, 1, 1);
    return s;
}

}  // namespace nahm
