#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <complex>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nahm/errors.hpp"

namespace nahm {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

inline std::string to_string(const Rational& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// Sparse polynomial in a fixed number of variables with exact rational coefficients.
class MPoly {
public:
    using Monomial = std::vector<int>;

    explicit MPoly(int nvars = 0) : n_(nvars) {}

    static MPoly constant(int nvars, const Rational& c) {
        MPoly p(nvars);
        if (c != 0) p.t_[Monomial(nvars, 0)] = c;
        return p;
    }
    static MPoly var(int nvars, int i, int power = 1) {
        MPoly p(nvars);
        Monomial m(nvars, 0);
        m.at(i) = power;
        p.t_[m] = 1;
        return p;
    }
    static MPoly monomial(const Monomial& m, const Rational& c) {
        MPoly p(static_cast<int>(m.size()));
        if (c != 0) p.t_[m] = c;
        return p;
    }

    int nvars() const { return n_; }
    const std::map<Monomial, Rational>& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }
    bool is_constant() const { return t_.empty() || (t_.size() == 1 && total(t_.begin()->first) == 0); }
    Rational constant_value() const {
        auto it = t_.find(Monomial(n_, 0));
        return it == t_.end() ? Rational(0) : it->second;
    }
    Rational coeff(const Monomial& m) const {
        auto it = t_.find(m);
        return it == t_.end() ? Rational(0) : it->second;
    }

    int degree(int i) const {
        int d = -1;
        for (auto& [m, c] : t_) d = std::max(d, m[i]);
        return d;
    }
    bool depends_on(int i) const { return degree(i) > 0; }

    MPoly& operator+=(const MPoly& o) {
        check(o);
        for (auto& [m, c] : o.t_) add_term(m, c);
        return *this;
    }
    MPoly& operator-=(const MPoly& o) {
        check(o);
        for (auto& [m, c] : o.t_) add_term(m, -c);
        return *this;
    }
    MPoly& operator*=(const Rational& s) {
        if (s == 0) {
            t_.clear();
            return *this;
        }
        for (auto& [m, c] : t_) c *= s;
        return *this;
    }
    friend MPoly operator+(MPoly a, const MPoly& b) { return a += b; }
    friend MPoly operator-(MPoly a, const MPoly& b) { return a -= b; }
    friend MPoly operator-(MPoly a) { return a *= Rational(-1); }
    friend MPoly operator*(MPoly a, const Rational& s) { return a *= s; }
    friend MPoly operator*(const Rational& s, MPoly a) { return a *= s; }
    friend MPoly operator*(const MPoly& a, const MPoly& b) {
        a.check(b);
        MPoly r(a.n_);
        Monomial m(a.n_);
        for (auto& [ma, ca] : a.t_)
            for (auto& [mb, cb] : b.t_) {
                for (int i = 0; i < a.n_; ++i) m[i] = ma[i] + mb[i];
                r.add_term(m, ca * cb);
            }
        return r;
    }
    friend bool operator==(const MPoly& a, const MPoly& b) { return a.n_ == b.n_ && a.t_ == b.t_; }

    MPoly pow(int k) const {
        MPoly r = constant(n_, 1);
        for (int i = 0; i < k; ++i) r = r * *this;
        return r;
    }

    MPoly derivative(int i) const {
        MPoly r(n_);
        for (auto& [m0, c] : t_) {
            Monomial m = m0;
            if (m[i] == 0) continue;
            Rational f = c * m[i];
            --m[i];
            r.add_term(m, f);
        }
        return r;
    }

    // Replace variable i by the polynomial v.
    MPoly substitute(int i, const MPoly& v) const {
        check(v);
        MPoly r(n_);
        std::map<int, MPoly> powers;
        for (auto& [m0, c] : t_) {
            Monomial m = m0;
            int k = m[i];
            m[i] = 0;
            if (!powers.count(k)) powers.emplace(k, v.pow(k));
            r += monomial(m, c) * powers.at(k);
        }
        return r;
    }

    // Coefficient of x_i^k, as a polynomial with x_i removed (exponent set to 0).
    MPoly coefficient(int i, int k) const {
        MPoly r(n_);
        for (auto& [m0, c] : t_)
            if (m0[i] == k) {
                Monomial m = m0;
                m[i] = 0;
                r.t_[m] = c;
            }
        return r;
    }

    template <class T>
    T evaluate(const std::vector<T>& x) const {
        T sum{};
        for (auto& [m, c] : t_) {
            T term = T(to_double(c));
            for (int i = 0; i < n_; ++i)
                for (int k = 0; k < m[i]; ++k) term *= x[i];
            sum += term;
        }
        return sum;
    }

    std::string to_string(const std::vector<std::string>& names) const {
        if (t_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (auto it = t_.rbegin(); it != t_.rend(); ++it) {
            Rational c = it->second;
            bool neg = c < 0;
            if (neg) c = -c;
            os << (first ? (neg ? "-" : "") : (neg ? " - " : " + "));
            first = false;
            bool unit = c == 1 && total(it->first) > 0;
            if (!unit) os << c;
            bool need_star = !unit;
            for (int i = 0; i < n_; ++i) {
                if (it->first[i] == 0) continue;
                os << (need_star ? "*" : "") << names.at(i);
                if (it->first[i] > 1) os << "^" << it->first[i];
                need_star = true;
            }
        }
        return os.str();
    }

private:
    static int total(const Monomial& m) {
        int s = 0;
        for (int e : m) s += e;
        return s;
    }
    void check(const MPoly& o) const {
        if (o.n_ != n_) throw DomainError("MPoly: variable count mismatch");
    }
    void add_term(const Monomial& m, const Rational& c) {
        if (c == 0) return;
        auto [it, inserted] = t_.emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) t_.erase(it);
        }
    }

    int n_;
    std::map<Monomial, Rational> t_;
};

// Polynomial in z whose coefficients are rationals times integer powers of b^2.
// Stored as an MPoly in (z, B) with B = b^2.
class GradedPoly {
public:
    static constexpr int Z = 0, B = 1;

    GradedPoly() : p_(2) {}
    explicit GradedPoly(MPoly p) : p_(std::move(p)) {
        if (p_.nvars() != 2) throw DomainError("GradedPoly needs exactly two variables");
    }

    static GradedPoly constant(const Rational& c) { return GradedPoly(MPoly::constant(2, c)); }
    static GradedPoly z() { return GradedPoly(MPoly::var(2, Z)); }
    static GradedPoly b2(int power = 1) { return GradedPoly(MPoly::var(2, B, power)); }
    // c * b^(2 bpow) * z^zpow
    static GradedPoly term(const Rational& c, int zpow, int bpow) {
        return GradedPoly(MPoly::monomial({zpow, bpow}, c));
    }

    const MPoly& poly() const { return p_; }
    Rational coeff(int zpow, int bpow) const { return p_.coeff({zpow, bpow}); }
    int degree() const { return p_.degree(Z); }
    bool is_zero() const { return p_.is_zero(); }

    // Common power of b^2 if every term carries the same one.
    std::optional<int> b2_weight() const {
        std::optional<int> w;
        for (auto& [m, c] : p_.terms()) {
            if (w && *w != m[B]) return std::nullopt;
            w = m[B];
        }
        return w;
    }

    GradedPoly dz() const { return GradedPoly(p_.derivative(Z)); }
    GradedPoly shift_z(const Rational& delta) const {
        return GradedPoly(p_.substitute(Z, MPoly::var(2, Z) + MPoly::constant(2, delta)));
    }

    friend GradedPoly operator+(const GradedPoly& a, const GradedPoly& b) { return GradedPoly(a.p_ + b.p_); }
    friend GradedPoly operator-(const GradedPoly& a, const GradedPoly& b) { return GradedPoly(a.p_ - b.p_); }
    friend GradedPoly operator-(const GradedPoly& a) { return GradedPoly(-a.p_); }
    friend GradedPoly operator*(const GradedPoly& a, const GradedPoly& b) { return GradedPoly(a.p_ * b.p_); }
    friend GradedPoly operator*(const Rational& s, const GradedPoly& a) { return GradedPoly(s * a.p_); }
    friend bool operator==(const GradedPoly& a, const GradedPoly& b) { return a.p_ == b.p_; }

    template <class T>
    T evaluate(T z, double b) const {
        return p_.evaluate<T>({z, T(b * b)});
    }

    std::string to_string() const {
        // print b^2 powers as b^(2k)
        if (p_.is_zero()) return "0";
        std::ostringstream os;
        bool first = true;
        const auto& t = p_.terms();
        // descending z power, then b power
        std::vector<std::pair<MPoly::Monomial, Rational>> v(t.begin(), t.end());
        std::sort(v.begin(), v.end(), [](auto& x, auto& y) {
            return x.first[Z] != y.first[Z] ? x.first[Z] > y.first[Z] : x.first[B] > y.first[B];
        });
        for (auto& [m, c0] : v) {
            Rational c = c0;
            bool neg = c < 0;
            if (neg) c = -c;
            os << (first ? (neg ? "-" : "") : (neg ? " - " : " + "));
            first = false;
            bool unit = c == 1 && (m[Z] > 0 || m[B] > 0);
            if (!unit) os << c;
            bool star = !unit;
            if (m[B] > 0) {
                os << (star ? "*" : "") << "b^" << 2 * m[B];
                star = true;
            }
            if (m[Z] > 0) {
                os << (star ? "*" : "") << "z";
                if (m[Z] > 1) os << "^" << m[Z];
            }
        }
        return os.str();
    }

private:
    MPoly p_;
};

}  // namespace nahm
