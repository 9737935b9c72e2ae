#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nahm/polynomial.hpp"
#include "nahm/riemann.hpp"

using namespace nahm;

namespace {

const double beta = HyperellipticCurve::beta;

struct Fixture {
    HyperellipticCurve curve = HyperellipticCurve::lame();
    PeriodMatrix pm = period_matrix(curve);
    ThetaRecovery rec = recover_U_D(curve, hill_band_edges(NahmParams{}, 32));
};

const Fixture& fx() {
    static const Fixture f;
    return f;
}

Vec2c random_vec(std::mt19937& rng, double scale) {
    std::uniform_real_distribution<double> U(-scale, scale);
    return Vec2c(cd(U(rng), U(rng)), cd(U(rng), U(rng)));
}

}  // namespace

TEST(Riemann, CurveEquation) {
    auto c = HyperellipticCurve::scaled();
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> U(-2, 2);
    for (int i = 0; i < 50; ++i) {
        cd p(U(rng), U(rng));
        cd want = p * (p * p - 1.0) * (p * p - beta * beta);
        EXPECT_LT(std::abs(c.poly(p) - want), 1e-13 * (1 + std::abs(want)));
        EXPECT_LT(c.residual(c.point(p)), 1e-12 * (1 + std::abs(want)));
    }
    EXPECT_THROW(HyperellipticCurve({0, 0, 1, 2, 3}), DomainError);
    EXPECT_THROW(HyperellipticCurve({0, 1, 2}), DomainError);
}

TEST(Riemann, QuarticFactorsExactly) {
    auto p = GradedPoly::z();
    auto c = [](Rational r) { return GradedPoly::constant(r); };
    auto lhs = c(3) * p * p * p * p - c(7) * p * p + c(4);
    auto rhs = c(3) * (p * p - c(1)) * (p * p - c(Rational(4, 3)));
    EXPECT_EQ(lhs, rhs);
    EXPECT_NEAR(beta * beta, 4.0 / 3, 1e-15);
}

TEST(Riemann, AutomorphismT) {
    auto c = HyperellipticCurve::scaled();
    auto P = c.point(1.0);
    auto T = automorphism_T(P);
    EXPECT_NEAR(std::abs(T.p - cd(-beta)), 0, 1e-15);
    EXPECT_LT(c.residual(T), 1e-12);
    EXPECT_NEAR(std::abs(automorphism_T(c.point(beta)).p - cd(-1)), 0, 1e-15);
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> U(-3, 3);
    for (int i = 0; i < 50; ++i) {
        auto Q = c.point(cd(U(rng), U(rng)));
        auto T1 = automorphism_T(Q), T2 = automorphism_T(T1), T4 = automorphism_T(automorphism_T(T2));
        double s = 1 + std::abs(Q.mu);
        EXPECT_LT(c.residual(T1), 1e-10 * (1 + std::abs(T1.mu * T1.mu)));
        EXPECT_LT(std::abs(T2.p - Q.p) + std::abs(T2.mu - Q.mu), 1e-12 * s);
        EXPECT_LT(std::abs(T4.p - Q.p) + std::abs(T4.mu - Q.mu), 1e-12 * s);
    }
    EXPECT_THROW(automorphism_T(CurvePoint{0, 0}), DomainError);
}

TEST(Riemann, PeriodMatrix) {
    auto& tau = fx().pm.tau;
    EXPECT_LT(std::abs(tau(0, 1) - tau(1, 0)), 1e-10);
    EXPECT_GT(min_eig_imag(tau), 0);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) EXPECT_LT(std::abs(tau(i, j).real()), 1e-12);
    // reference: mpmath tanh-sinh quadrature of the same homology basis
    EXPECT_NEAR(tau(0, 0).imag(), 5.0 / 3, 1e-12);
    EXPECT_NEAR(tau(0, 1).imag(), 1.0 / 3, 1e-12);
    EXPECT_NEAR(tau(1, 1).imag(), 2.0 / 3, 1e-12);
}

TEST(Riemann, PeriodMatrixConvergesAndIsScaleFree) {
    QuadratureSpec q;
    q.order = 32;
    auto a = period_matrix(fx().curve, q).tau, b = period_matrix(fx().curve, q.refined()).tau;
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9);
    auto c = period_matrix(HyperellipticCurve::scaled(), q).tau;
    EXPECT_LT((a - c).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Riemann, ThetaSymmetries) {
    std::mt19937 rng(12);
    auto& tau = fx().pm.tau;
    for (int i = 0; i < 20; ++i) {
        Vec2c z = random_vec(rng, 0.5);
        cd t = theta_g2({z, tau, 10});
        EXPECT_LT(std::abs(theta_g2({-z, tau, 10}) - t), 1e-12 * std::abs(t));
        Vec2c k(cd(std::round(z(0).real() * 4)), cd(-2));
        EXPECT_LT(std::abs(theta_g2({z + k, tau, 10}) - t), 1e-12 * std::abs(t));
        Eigen::Vector2i m(i % 3 - 1, (i / 3) % 3 - 1);
        Vec2c mc(double(m(0)), double(m(1)));
        cd phase = std::exp(cd(0, -1) * std::numbers::pi * mc.dot(tau * mc) -
                            cd(0, 2) * std::numbers::pi * mc.dot(z));
        cd lhs = theta_g2({z + tau * mc, tau, 14});
        EXPECT_LT(std::abs(lhs - phase * t), 1e-9 * std::abs(phase * t)) << i;
    }
}

TEST(Riemann, ThetaTailBound) {
    auto& tau = fx().pm.tau;
    Vec2c z(cd(0.1, 0.2), cd(-0.3, 0.1));
    auto v = theta_g2_directional({z, tau, 8}, Vec2c::Zero());
    EXPECT_LT(v.tail_bound, 1e-12);
    cd ref = theta_g2({z, tau, 20});
    for (int N : {2, 3, 4}) {
        ThetaArgs a{z, tau, N};
        auto r = theta_g2_directional(a, Vec2c::Zero());
        EXPECT_LE(std::abs(r.value - ref), r.tail_bound + 1e-15) << N;
    }
    EXPECT_THROW(theta_g2({Vec2c(cd(0, 3), cd(0, 3)), tau, 1}), ConvergenceError);
    EXPECT_THROW(theta_g2({z, tau, 0}), DomainError);
}

TEST(Riemann, ImPotentialBasics) {
    auto& tau = fx().pm.tau;
    Vec2c D(cd(0.2, 0.1), cd(0.4, 0.0));
    EXPECT_EQ(im_potential(Vec2c::Zero(), D, 0.7, tau), 0.0);
    auto& r = fx().rec;
    for (double y : {0.1, 0.9, 2.0})
        EXPECT_NEAR(im_potential(r.U, r.D, y, tau), im_potential(r.U, r.D + Vec2c(1.0, -2.0), y, tau), 1e-12);
}

TEST(Riemann, RecoveredPotentialMatchesLame) {
    auto& r = fx().rec;
    EXPECT_LT(r.mismatch, 1e-5);
    EXPECT_NEAR(r.period, 2 * complete_K(-1.0), 1e-6);
    EXPECT_NEAR(r.c_star, -6 * mean_sn2(-1.0), 1e-8);
    EXPECT_NEAR(r.U(0).imag(), -0.762759763501813188, 1e-10);
    EXPECT_NEAR(r.U(1).imag(), -0.381379881750906594, 1e-10);
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> Y(-5, 5);
    for (int i = 0; i < 50; ++i) {
        double y = Y(rng);
        EXPECT_NEAR(im_potential(r.U, r.D, y, r.tau) - r.c_star, nahm_potential(y, 1.0), 1e-5) << y;
    }
}

TEST(Riemann, URescalesWithB) {
    double b = 2;
    auto curve = HyperellipticCurve::lame(b * b);
    auto r = recover_U_D(curve, hill_band_edges(NahmParams{b, 1, 1}, 32));
    EXPECT_LT(r.mismatch, 1e-5);
    EXPECT_LT(std::abs(r.U(0) - b * fx().rec.U(0)), 1e-9);
    EXPECT_LT(std::abs(r.U(1) - b * fx().rec.U(1)), 1e-9);
    EXPECT_NEAR(r.period, 2 * complete_K(-1.0) / b, 1e-6);
}

TEST(Riemann, RecoveryFailureCarriesBestCandidate) {
    try {
        recover_U_D(fx().curve, hill_band_edges(NahmParams{}, 32), {}, 8, 8, 1e-30);
        FAIL() << "expected RecoveryError";
    } catch (const RecoveryError& e) {
        EXPECT_LT(e.best.mismatch, 1e-10);
    }
    BandStructure wrong;
    wrong.edges = {-4, -3, 0, 3, 4};
    EXPECT_THROW(recover_U_D(fx().curve, wrong), DomainError);
}

TEST(Riemann, ImPsiSolvesLameAtBandEdges) {
    auto& f = fx();
    Floquet F(PeriodicPotential::nahm(NahmParams{}));
    for (double e : f.curve.branch())
        for (int sheet : {1, -1}) {
            auto psi = im_psi(e, sheet, f.curve, f.rec);
            EXPECT_LT(psi.residual, 1e-4) << e;
            EXPECT_LT(std::abs(psi.multiplier - F.discriminant(e) / 2), 1e-4) << e;
            EXPECT_LT(std::abs(psi.multiplier.imag()), 1e-4);
        }
}

TEST(Riemann, ImPsiNormalizationAndMultipliers) {
    auto& f = fx();
    auto bp = bloch_solutions(-1.0, NahmParams{});
    for (double E : {-1.0, 1.5, 5.0}) {
        auto a = im_psi(E, 1, f.curve, f.rec), b = im_psi(E, -1, f.curve, f.rec);
        EXPECT_EQ(a.y_ref, 0.0);
        EXPECT_EQ(a.psi[0], cd(1.0));
        EXPECT_LT(a.residual, 1e-4);
        EXPECT_LT(std::abs(a.multiplier * b.multiplier - 1.0), 1e-8);
        if (E == -1.0) {
            double m1 = std::abs(a.multiplier), m2 = std::abs(b.multiplier);
            EXPECT_NEAR(std::max(m1, m2), std::abs(bp.mu_plus), 1e-6);
        }
    }
}

TEST(Riemann, InvolutionGivesIndependentSolution) {
    auto& f = fx();
    auto pm = f.pm;
    for (double E : {-1.0, 3.2, -3.3}) {
        auto A = abel_point(f.curve, pm, f.rec.omega, E, 1), B = abel_point(f.curve, pm, f.rec.omega, E, -1);
        auto w = [&](double y) {
            auto p = baker_akhiezer(A, f.rec, y), m = baker_akhiezer(B, f.rec, y);
            return p.psi * m.dpsi - p.dpsi * m.psi;
        };
        cd w0 = w(0.2);
        EXPECT_GT(std::abs(w0), 1e-3) << E;
        EXPECT_LT(std::abs(w(1.7) - w0), 1e-8 * std::abs(w0)) << E;
    }
}
