#pragma once

#include <cmath>
#include <complex>
#include <type_traits>
#include <vector>

#include "nahm/errors.hpp"

namespace nahm {

template <class T>
struct Mat2 {
    T a{}, b{}, c{}, d{};  // [[a, b], [c, d]]

    static Mat2 identity() { return {T(1), T(0), T(0), T(1)}; }
    T trace() const { return a + d; }
    T det() const { return a * d - b * c; }
    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
    friend Mat2 operator+(const Mat2& x, const Mat2& y) { return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d}; }
    friend Mat2 operator-(const Mat2& x, const Mat2& y) { return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d}; }
    friend Mat2 operator*(T s, const Mat2& x) { return {s * x.a, s * x.b, s * x.c, s * x.d}; }
};

template <class T>
struct Vec2 {
    T y{}, dy{};
};

template <class T>
Vec2<T> operator*(const Mat2<T>& m, const Vec2<T>& v) {
    return {m.a * v.y + m.b * v.dy, m.c * v.y + m.d * v.dy};
}

namespace detail {

// c = cosh(sqrt W), s = sinh(sqrt W)/sqrt W, ds = d s / d W.
template <class T>
void cosh_sinhc(T W, T& c, T& s, T& ds) {
    if (std::abs(W) < 1e-2) {
        c = 1.0 + W * (1.0 / 2 + W * (1.0 / 24 + W * (1.0 / 720 + W / 40320.0)));
        s = 1.0 + W * (1.0 / 6 + W * (1.0 / 120 + W * (1.0 / 5040 + W / 362880.0)));
        ds = 1.0 / 6 + W * (1.0 / 60 + W * (1.0 / 1680 + W / 90720.0));
        return;
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (W > 0) {
            T r = std::sqrt(W);
            c = std::cosh(r);
            s = std::sinh(r) / r;
        } else {
            T r = std::sqrt(-W);
            c = std::cos(r);
            s = std::sin(r) / r;
        }
    } else {
        T r = std::sqrt(W);
        c = std::cosh(r);
        s = std::sinh(r) / r;
    }
    ds = (c - s) / (2.0 * W);
}

}  // namespace detail

// Fourth-order Magnus step for y'' = V(x) y, written as Y' = [[0,1],[V,0]] Y, with V sampled at the
// two Gauss points. Omega is traceless so exp(Omega) = c I + s Omega; dE is the derivative with
// respect to lambda when V = u - lambda.
template <class T>
struct MagnusStep {
    Mat2<T> E, dE;
};

template <class T>
MagnusStep<T> magnus_step(double h, T V1, T V2, bool with_derivative) {
    const double k = std::sqrt(3.0) * h * h / 12;
    Mat2<T> O{T(k) * (V1 - V2), T(h), T(h / 2) * (V1 + V2), -T(k) * (V1 - V2)};
    T W = O.a * O.a + O.b * O.c;
    T c, s, ds;
    detail::cosh_sinhc(W, c, s, ds);
    MagnusStep<T> r;
    r.E = {c + s * O.a, s * O.b, s * O.c, c + s * O.d};
    if (with_derivative) {
        // d Omega / d lambda = [[0,0],[-h,0]]
        T dW = O.b * T(-h);
        T dc = s / T(2) * dW, dsv = ds * dW;
        r.dE = {dc + dsv * O.a, dsv * O.b, dsv * O.c + s * T(-h), dc + dsv * O.d};
    }
    return r;
}

inline constexpr double gauss2_offset = 0.21132486540518711775;  // 1/2 - sqrt(3)/6

// Transfer matrix over [a, b] for y'' = (u(x) - lambda) y.
template <class T, class U>
Mat2<T> transfer(U&& u, T lambda, double a, double b, int steps) {
    if (steps < 1) throw DomainError("transfer: steps must be positive");
    double h = (b - a) / steps;
    Mat2<T> M = Mat2<T>::identity();
    for (int i = 0; i < steps; ++i) {
        double x0 = a + i * h;
        T V1 = T(u(x0 + gauss2_offset * h)) - lambda;
        T V2 = T(u(x0 + (1 - gauss2_offset) * h)) - lambda;
        M = magnus_step<T>(h, V1, V2, false).E * M;
    }
    return M;
}

// Potential sampled at the Gauss points of a uniform grid; reused for many lambda.
struct PotentialGrid {
    double a = 0, b = 0;
    int steps = 0;
    std::vector<double> v1, v2;

    template <class U>
    PotentialGrid(U&& u, double a_, double b_, int steps_) : a(a_), b(b_), steps(steps_) {
        if (steps < 1) throw DomainError("PotentialGrid: steps must be positive");
        double h = (b - a) / steps;
        v1.resize(steps);
        v2.resize(steps);
        for (int i = 0; i < steps; ++i) {
            double x0 = a + i * h;
            v1[i] = u(x0 + gauss2_offset * h);
            v2[i] = u(x0 + (1 - gauss2_offset) * h);
        }
    }

    template <class T>
    Mat2<T> transfer(T lambda) const {
        double h = (b - a) / steps;
        Mat2<T> M = Mat2<T>::identity();
        for (int i = 0; i < steps; ++i) M = magnus_step<T>(h, T(v1[i]) - lambda, T(v2[i]) - lambda, false).E * M;
        return M;
    }

    // Transfer matrix and its lambda-derivative.
    template <class T>
    std::pair<Mat2<T>, Mat2<T>> transfer_with_derivative(T lambda) const {
        double h = (b - a) / steps;
        Mat2<T> M = Mat2<T>::identity(), dM{};
        for (int i = 0; i < steps; ++i) {
            auto st = magnus_step<T>(h, T(v1[i]) - lambda, T(v2[i]) - lambda, true);
            dM = st.dE * M + st.E * dM;
            M = st.E * M;
        }
        return {M, dM};
    }
};

// Taylor coefficients M_k of the transfer matrix in (lambda - lambda0), k = 0..K, from the
// hierarchy Y_k' = A0 Y_k + [[0,0],[-1,0]] Y_{k-1}; classical RK4 on a uniform grid.
template <class U>
std::vector<Mat2<double>> transfer_taylor(U&& u, double lambda0, double a, double b, int K, int steps) {
    if (K < 0 || steps < 1) throw DomainError("transfer_taylor: bad arguments");
    using M2 = Mat2<double>;
    std::vector<M2> Y(K + 1, M2{}), k1(K + 1), k2(K + 1), k3(K + 1), k4(K + 1), tmp(K + 1);
    Y[0] = M2::identity();
    double h = (b - a) / steps;
    auto rhs = [&](double x, const std::vector<M2>& Z, std::vector<M2>& out) {
        double V = u(x) - lambda0;
        for (int k = 0; k <= K; ++k) {
            const M2& z = Z[k];
            M2 r{z.c, z.d, V * z.a, V * z.b};
            if (k > 0) {
                r.c -= Z[k - 1].a;
                r.d -= Z[k - 1].b;
            }
            out[k] = r;
        }
    };
    for (int i = 0; i < steps; ++i) {
        double x = a + i * h;
        rhs(x, Y, k1);
        for (int k = 0; k <= K; ++k) tmp[k] = Y[k] + (h / 2) * k1[k];
        rhs(x + h / 2, tmp, k2);
        for (int k = 0; k <= K; ++k) tmp[k] = Y[k] + (h / 2) * k2[k];
        rhs(x + h / 2, tmp, k3);
        for (int k = 0; k <= K; ++k) tmp[k] = Y[k] + h * k3[k];
        rhs(x + h, tmp, k4);
        for (int k = 0; k <= K; ++k) Y[k] = Y[k] + (h / 6) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    }
    return Y;
}

}  // namespace nahm
