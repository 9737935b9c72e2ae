#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nahm/hermite.hpp"
#include "nahm/spectral.hpp"

using namespace nahm;
using cd = std::complex<double>;

namespace {

const double s3 = std::sqrt(3.0);

// one-sided second-order derivative of g(., y0) at y0 from the side dir = +1 / -1
cd side_derivative(cd h, double y0, const PeriodicPotential& pot, int dir) {
    const double e = 1e-5;
    auto g = [&](double y) { return green_spectral(h, y, y0, pot); };
    return double(dir) * (-3.0 * g(y0) + 4.0 * g(y0 + dir * e) - g(y0 + 2 * dir * e)) / (2 * e);
}

}  // namespace

TEST(Spectral, HillEdgesMatchExactRoots) {
    for (double b : {1.0, 2.0}) {
        auto bs = hill_band_edges(NahmParams{b, 1, 1}, 64);
        ASSERT_EQ(bs.edges.size(), 5u);
        const double want[] = {-2 * s3, -3, 0, 3, 2 * s3};
        for (int i = 0; i < 5; ++i) EXPECT_NEAR(bs.edges[i], want[i] * b * b, 1e-8 * b * b) << b << " " << i;
        EXPECT_LT(bs.convergence, 1e-10 * b * b);
    }
}

TEST(Spectral, HillEdgesAreNegatedQuinticRoots) {
    auto roots = quintic_roots(nahm_solution()).values(1.5);
    auto bs = hill_band_edges(NahmParams{1.5, 1, 1}, 32);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(bs.edges[i], -roots[4 - i], 1e-8);
}

TEST(Spectral, HillNeedsEnoughModes) { EXPECT_THROW(hill_band_edges(NahmParams{}, 2), DomainError); }

TEST(Spectral, FreeTorusSpectrum) {
    double L = 2.0;
    auto bs = hill_band_edges(PeriodicPotential::free(L), 16);
    ASSERT_FALSE(bs.periodic.empty());
    EXPECT_NEAR(bs.periodic[0], 0, 1e-12);
    for (int n = 1; n <= 4; ++n) {
        double k2 = std::pow(2 * std::numbers::pi * n / L, 2);
        EXPECT_NEAR(bs.periodic[2 * n - 1], k2, 1e-9);
        EXPECT_NEAR(bs.periodic[2 * n], k2, 1e-9);
    }
    EXPECT_EQ(bs.edges.size(), 1u);
}

TEST(Spectral, FloquetDiscriminantAtEdges) {
    NahmParams p{1, 1, 1};
    Floquet F(PeriodicPotential::nahm(p));
    auto bs = hill_band_edges(p, 32);
    for (double e : bs.edges) EXPECT_NEAR(std::abs(F.discriminant(e)), 2, 1e-8) << e;
    for (double l : {-5.0, -1.0, 2.0, 10.0}) {
        auto M = F.monodromy(l);
        EXPECT_NEAR(M.a * M.d - M.b * M.c, 1, 1e-10);
    }
}

TEST(Spectral, FreeBlochPair) {
    auto pot = PeriodicPotential::free(3.0);
    for (double k : {0.5, 1.0, 2.0}) {
        auto bp = bloch_solutions(cd(-k * k), pot);
        EXPECT_NEAR(std::abs(bp.wronskian() - cd(-2 * k)), 0, 1e-10);
        for (double x : {0.3, 1.7, 4.2}) {
            auto up = bp.evaluate(x, true), dn = bp.evaluate(x, false);
            EXPECT_NEAR(std::abs(up.y - std::exp(k * x)), 0, 1e-9 * std::exp(k * x));
            EXPECT_NEAR(std::abs(dn.y - std::exp(-k * x)), 0, 1e-9);
        }
    }
}

TEST(Spectral, WronskianConstantOverPeriod) {
    NahmParams p{1, 1, 1};
    for (cd h : {cd(-1.0, 0.0), cd(1.5, 0.0), cd(5.0, 0.7), cd(-3.2, 0.1)}) {
        auto bp = bloch_solutions(h, p);
        cd W0 = bp.wronskian();
        for (int i = 1; i <= 8; ++i) {
            double x = i * p.period() / 8;
            EXPECT_LT(std::abs(bp.wronskian(x) - W0), 1e-8 * std::abs(W0)) << h << " " << x;
        }
    }
}

TEST(Spectral, GapSolutionsGrowAndDecay) {
    NahmParams p{1, 1, 1};
    // gaps: below -2 sqrt 3, (-3, 0), (3, 2 sqrt 3)
    for (double h : {-5.0, -1.0, 3.2}) {
        auto bp = bloch_solutions(h, p);
        EXPECT_NEAR(bp.mu_plus.imag(), 0, 1e-12);
        EXPECT_GT(std::abs(bp.mu_plus), 1 + 1e-6);
        EXPECT_NEAR(std::abs(bp.mu_plus * bp.mu_minus), 1, 1e-10);
        EXPECT_NEAR(bp.evaluate(0.9, true).y.imag(), 0, 1e-12);
    }
    for (double h : {-3.2, 1.0, 5.0}) EXPECT_NEAR(std::abs(bloch_solutions(h, p).mu_plus), 1, 1e-10) << h;
}

TEST(Spectral, BlochReflectionAndOddSolution) {
    NahmParams p{1, 1, 1};
    auto pot = PeriodicPotential::nahm(p);
    auto bp = bloch_solutions(-1.0, pot);
    for (double x : {0.4, 1.3, 2.9}) {
        EXPECT_NEAR(std::abs(bp.evaluate(x, false).y - bp.evaluate(-x, true).y), 0, 1e-8);
        auto a = odd_solution(-1.0, pot, x), b = odd_solution(-1.0, pot, -x);
        EXPECT_NEAR(std::abs(a.y + b.y), 0, 1e-10);
        EXPECT_NEAR(std::abs(a.dy - b.dy), 0, 1e-10);
    }
}

TEST(Spectral, EdgeIsDegenerate) {
    for (double e : {-3.0, 0.0, 3.0}) EXPECT_THROW(bloch_solutions(e, NahmParams{}), BranchPointError) << e;
}

TEST(Spectral, GreenJumpIsMinusOne) {
    auto pot = PeriodicPotential::nahm(NahmParams{});
    for (cd h : {cd(-1.0, 0.0), cd(2.0, 0.5), cd(-4.0, 0.0)})
        for (double y0 : {0.0, 0.6, 1.9}) {
            cd jump = side_derivative(h, y0, pot, 1) - side_derivative(h, y0, pot, -1);
            EXPECT_NEAR(std::abs(jump + 1.0), 0, 1e-6) << h << " " << y0;
            EXPECT_NEAR(std::abs(green_jump(h, y0, pot) + 1.0), 0, 1e-12);
        }
}

TEST(Spectral, FreeGreenFunction) {
    auto pot = PeriodicPotential::free(40.0);
    EXPECT_NEAR(std::abs(green_spectral(-1.0, 2.0, 2.0, pot) - 0.5), 0, 1e-10);
    EXPECT_NEAR(std::abs(green_spectral(-4.0, 3.0, 2.0, pot) - std::exp(-2.0) / 4), 0, 1e-10);
}

TEST(Spectral, GreenMatchesHermiteDiagonal) {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> re(-8, 8), im(0.05, 3), Y(0, 2.7);
    NahmParams p{1, 1, 1};
    for (int i = 0; i < 20; ++i) {
        cd h(re(rng), im(rng));
        double y = Y(rng);
        cd g = green_spectral(h, y, y, p), G = green_diagonal(-h, y, p);
        EXPECT_LT(std::abs(g - G) / std::abs(G), 1e-6) << h << " " << y;
    }
    // real h in gaps and below the spectrum
    for (double h : {-5.0, -2.0, -1.0, 3.2})
        EXPECT_LT(std::abs(green_spectral(h, 0.8, 0.8, p) - green_diagonal(-h, 0.8, p)), 1e-7);
}

TEST(Spectral, CountingFunctionCountsBands) {
    NahmParams p{1, 1, 1};
    auto pot = PeriodicPotential::nahm(p);
    Floquet F(pot);
    auto bs = hill_band_edges(pot, 32);
    EXPECT_NEAR(counting_function(F, bs, -2 * s3 - 0.01), 0, 1e-12);
    EXPECT_NEAR(counting_function(F, bs, -3.0 + 1e-3), 1, 1e-9);
    EXPECT_NEAR(counting_function(F, bs, -1.0), 1, 1e-12);
    EXPECT_NEAR(counting_function(F, bs, 3.1), 2, 1e-12);
    double n = counting_function(F, bs, 1.5);
    EXPECT_GT(n, 1);
    EXPECT_LT(n, 2);
}

TEST(Spectral, HeatInvariantsMeanPotential) {
    NahmParams p{1, 1, 1};
    auto h = heat_invariants(PeriodicPotential::nahm(p));
    EXPECT_NEAR(h.u1, -6 * mean_sn2(-1.0), 1e-12);
    EXPECT_GT(h.u2, h.u1 * h.u1);
}
