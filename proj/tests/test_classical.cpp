#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nahm/classical.hpp"

using namespace nahm;

TEST(Classical, MatrixConstraintExact) {
    EXPECT_EQ(check_matrix_constraint(Rational(1, 2)), Rational(0));
    EXPECT_EQ(check_matrix_constraint(Rational(1)), Rational(6));
    EXPECT_EQ(check_matrix_constraint(Rational(0)), Rational(0));
    EXPECT_EQ(check_matrix_constraint(Rational(-1, 2)), Rational(0));
}

TEST(Classical, ParamsValidation) {
    EXPECT_THROW((NahmParams{0.0, 1, 1}.validate()), DomainError);
    EXPECT_THROW((NahmParams{-1.0, 1, 1}.validate()), DomainError);
    EXPECT_THROW((NahmParams{1.0, 1, 0}.validate()), DomainError);
    EXPECT_NO_THROW((NahmParams{2.0, 0.5, 3}.validate()));
}

TEST(Classical, FieldAtSpecialPoints) {
    for (double b : {1.0, 2.0}) {
        NahmParams p{b, 1, 1};
        auto f0 = field(0, p);
        EXPECT_NEAR(f0.z, 1, 1e-15);
        EXPECT_NEAR(f0.u, 0, 1e-15);
        auto fq = field(complete_K(-1.0) / b, p);
        EXPECT_NEAR(fq.z, 0, 1e-14);
        EXPECT_NEAR(fq.u, -6 * b * b, 1e-12);
    }
}

TEST(Classical, MeanPotential) {
    NahmParams p{1.5, 1, 1};
    double L = p.period(), s = 0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) s += field((i + 0.5) * L / n, p).u;
    EXPECT_NEAR(s / n, -6 * p.b * p.b * mean_sn2(-1.0), 1e-10);
    EXPECT_NEAR(s / n, -6 * p.b * p.b * 0.456944, 1e-3 * 6 * p.b * p.b);
}

TEST(Classical, PotentialPeriodicAndCovariant) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> X(-5, 5);
    for (double b : {0.5, 1.0, 3.0}) {
        NahmParams p{b, 1, 1};
        for (int i = 0; i < 50; ++i) {
            double x = X(rng);
            EXPECT_NEAR(nahm_potential(x + p.period(), b), nahm_potential(x, b), 1e-12 * std::max(1.0, b * b));
            EXPECT_NEAR(nahm_potential(x, b), b * b * nahm_potential(b * x, 1.0), 1e-12 * std::max(1.0, b * b));
            auto f = field(x, p);
            EXPECT_GE(f.z, -1e-15);
            EXPECT_LE(f.z, 1 + 1e-15);
            EXPECT_NEAR(f.u, -6 * b * b * (1 - f.z), 1e-12 * b * b);
        }
    }
}

TEST(Classical, FirstIntegralOnPeriodicBranch) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> X(-4, 4);
    for (double b : {0.7, 1.0, 2.0}) {
        NahmParams p{b, 1, 1};
        for (int i = 0; i < 100; ++i) {
            auto r = first_integral_residual(X(rng), p);
            EXPECT_LT(r.first_integral, 1e-9);
            EXPECT_LT(r.equation_of_motion, 1e-9);
            EXPECT_LT(r.derivative_mismatch, 1e-5);
        }
    }
}

TEST(Classical, FirstIntegralOnUnboundedBranchAwayFromPoles) {
    NahmParams p{1, 1, 1};
    for (double x : {0.0, 0.1, 0.3, -0.4}) {
        auto r = first_integral_residual(x, p, Branch::unbounded);
        EXPECT_LT(r.first_integral, 1e-9) << x;
        EXPECT_LT(r.equation_of_motion, 1e-9) << x;
    }
}

TEST(Classical, LagrangianDensity) {
    EXPECT_NEAR(lagrangian_density(0.0, 0.0).matrix, 0, 1e-15);
    EXPECT_NEAR(lagrangian_density(1.0, 0.0).matrix, 24, 1e-13);
    EXPECT_NEAR(lagrangian_density(0.0, 1.0).matrix, 3, 1e-13);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(-2, 2);
    for (int i = 0; i < 1000; ++i) {
        auto l = lagrangian_density(U(rng), U(rng));
        EXPECT_NEAR(l.matrix, l.closed_form, 1e-10 * std::max(1.0, l.closed_form));
    }
}

TEST(Classical, LemniscateInversion) {
    NahmParams p{1, 1, 1};
    EXPECT_NEAR(invert_lemniscate(field(0, p).phi, p), 0, 1e-15);
    EXPECT_NEAR(invert_lemniscate(1.0, p), complete_K(-1.0), 1e-8);
    std::mt19937 rng(17);
    for (double b : {1.0, 2.5}) {
        NahmParams q{b, 1, 1};
        double P = 2 * q.period();
        std::uniform_real_distribution<double> X(0, P);
        for (int i = 0; i < 100; ++i) {
            double x = X(rng);
            auto f = field(x, q);
            double y = invert_lemniscate(f.phi, f.dphi, q);
            EXPECT_NEAR(std::remainder(y - x, P), 0, 1e-8 / b) << x;
        }
    }
    EXPECT_THROW(invert_lemniscate(1.5, p), DomainError);
}
