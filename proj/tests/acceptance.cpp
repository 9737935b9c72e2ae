// Acceptance run: one PASS/FAIL line per criterion. Tolerances are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace nahm;
using cd = std::complex<double>;

namespace {

const double pi = std::numbers::pi;
const double s3 = std::sqrt(3.0);

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

double rel(cd a, cd b) { return cli::rel_diff(a, b); }

// Exact reproduction of the published coefficients.
Outcome c1() {
    using G = GradedPoly;
    const auto& s = nahm_solution();
    auto q = [&](int j) { return j < (int)s.q.size() ? s.q[j] : G(); };
    struct Item {
        const char* name;
        G want, got;
    };
    std::vector<Item> items = {{"q4", G(), q(4)},
                               {"q3", G::term(-21, 0, 2), q(3)},
                               {"q2", G::term(108, 0, 4), q(2)},
                               {"q1", G::term(108, 0, 4), q(1)},
                               {"q0", G(), q(0)},
                               {"P1", G::term(-3, 1, 1) + G::term(3, 0, 1), s.P1()},
                               {"P2", G::term(18, 2, 2) + G::term(-36, 1, 2), s.P2()}};
    bool ok = true;
    std::string d;
    for (auto& it : items)
        if (!(it.want == it.got)) {
            ok = false;
            d += std::string(d.empty() ? "" : "; ") + it.name + ": expected " + it.want.to_string() + ", solver " +
                 it.got.to_string();
        }
    return {ok, ok ? "all coefficients equal" : d};
}

Outcome c2() {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> re(-6, 6), im(-3, 3), X(0, 5);
    NahmParams p{1, 1, 1};
    double worst = 0;
    for (int i = 0; i < 200; ++i) worst = std::max(worst, bilinear_residual({re(rng), im(rng)}, X(rng), p));
    return {worst < 1e-9, fmt("max residual %.3e over 200 points (tol 1e-9)", worst)};
}

Outcome c3() {
    const double want[] = {-2 * s3, -3, 0, 3, 2 * s3};
    double worst = 0;
    bool ok = true;
    for (double b : {1.0, 2.0}) {
        auto bs = hill_band_edges(NahmParams{b, 1, 1}, 64);
        if (bs.edges.size() != 5) ok = false;
        for (size_t i = 0; i < 5 && i < bs.edges.size(); ++i)
            worst = std::max(worst, std::abs(bs.edges[i] - want[i] * b * b));
    }
    ok = ok && worst < 1e-8;
    return {ok, fmt("max edge error %.3e for b in {1, 2} (tol 1e-8)", worst)};
}

Outcome c4() {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> re(-8, 8), im(0.05, 3), Y(0, 2.7);
    NahmParams p{1, 1, 1};
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        cd h(re(rng), im(rng));
        double y = Y(rng);
        worst = std::max(worst, rel(green_spectral(h, y, y, p), green_diagonal(-h, y, p)));
    }
    return {worst < 1e-6, fmt("max relative difference %.3e over 20 points (tol 1e-6)", worst)};
}

Outcome c5() {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> re(-10, 10), im(0.1, 5);
    HyperellipticDensity h(nahm_solution(), 1.0);
    QuadratureSpec q;
    q.tol = 1e-10;
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        cd pp(re(rng), im(rng));
        worst = std::max(worst, rel(h.gamma_hat(pp), h.gamma_hat_quadrature(pp, q)));
    }
    return {worst < 1e-10, fmt("max relative difference %.3e over 100 points (tol 1e-10)", worst)};
}

Outcome c6() {
    NahmParams p{};
    QuadratureSpec q;
    auto hyp = make_density(p, Route::hyperelliptic), spec = make_density(p, Route::spectral);
    bool ok = true;
    std::string d;
    for (double s : {1.5, 2.0, 3.0}) {
        std::string part;
        try {
            cd a = spectral_zeta(*hyp, s, q).value, b = spectral_zeta(*spec, s, q).value;
            double r = rel(a, b);
            ok = ok && r < 1e-3;
            part = fmt("s=%g: rel %.3e (|hyp| %.1e, |spec| %.1e)", s, r, std::abs(a), std::abs(b));
        } catch (const PoleError&) {
            ok = false;
            part = fmt("s=%g: pole", s);
        }
        d += (d.empty() ? "" : "; ") + part;
    }
    return {ok, d + " (tol 1e-3)"};
}

Outcome c7() {
    QuadratureSpec q;
    NahmParams p{};
    auto a = zeta_prime_zero(p, q), b = zeta_prime_zero(p, q.refined());
    double stab = rel(a.value, b.value);
    cli::RunConfig c;
    auto f = cli::scaling_fit(c, Route::hyperelliptic);
    bool ok = stab < 1e-4 && f.rel_diff < 1e-5;
    return {ok, fmt("panel doubling %.3e (tol 1e-4); b=4 fit %.3e (tol 1e-5)", stab, f.rel_diff)};
}

Outcome c8() {
    QuadratureSpec q;
    auto m = make_density(NahmParams{}, Route::hyperelliptic);
    double t = 1e-6;
    double ratio = heat_trace(t, *m, q).value * std::sqrt(4 * pi * t) / m->period();
    double c = weyl_coefficient(*m, 1e-4, q);
    double want = -6 * 0.456944;
    bool ok = std::abs(ratio - 1) < 1e-3 && std::abs(c - want) < 1e-3;
    return {ok, fmt("ratio-1 %.3e (tol 1e-3); coefficient %.6f vs %.6f (tol 1e-3)", ratio - 1, c, want)};
}

Outcome c9() {
    cli::RunConfig c;
    auto r = cli::cmd_theta(c);
    auto& body = r.body;
    double asym = body["tau_symmetry"]["value"].get<double>();
    double lam = body["tau_im_min_eigenvalue"]["value"].get<double>();
    double mism = body["recovery"]["mismatch"].get<double>();
    double res = 0;
    if (body.contains("im_psi_band_edges"))
        for (auto& e : body["im_psi_band_edges"]) res = std::max(res, e["residual"].get<double>());
    else
        res = INFINITY;
    bool ok = asym < 1e-10 && lam > 0 && mism < 1e-5 && res < 1e-4;
    return {ok, fmt("tau asymmetry %.1e (tol 1e-10), min eig Im tau %.4f; recovery mismatch %.2e (tol 1e-5); "
                    "im_psi residual %.2e (tol 1e-4)",
                    asym, lam, mism, res)};
}

Outcome c10() {
    bool ok = true;
    for (int d : {1, 2, 4})
        for (double t : {1e-3, 0.37, 2.0, 11.0}) {
            double want = d == 1 ? 1.0 : std::pow(4 * pi * t, -(d - 1) / 2.0);
            ok = ok && poisson_factor(t, d) == want;
        }
    // The regularized zeta is gated on the hyperelliptic route; the Floquet oracle has a ~1e-9 floor and is shown only.
    QuadratureSpec q;
    auto free_max = [&](Route rt) {
        auto m = make_density(NahmParams{}, rt, true);
        double w = 0;
        for (double s : {0.7, 2.25, -1.3}) w = std::max(w, std::abs(spectral_zeta(*m, s, q).value));
        return std::max(w, std::abs(zeta_prime_zero(*m, rt, NahmParams{}, q).value));
    };
    double hyp = free_max(Route::hyperelliptic), spec = free_max(Route::spectral);
    bool zero = hyp < 1e-10;
    return {ok && zero, fmt("poisson_factor %s; max |free zeta| %.3e (tol 1e-10); spectral oracle %.3e (not gated)",
                            ok ? "exact" : "MISMATCH", hyp, spec)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    int only = 0;
    app.add_option("--criterion", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::function<Outcome()>> all = {c1, c2, c3, c4, c5, c6, c7, c8, c9, c10};
    int failed = 0;
    for (int i = 1; i <= 10; ++i) {
        if (only && i != only) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = all[i - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d: %s  %s  [%.2f s]\n", i, o.pass ? "PASS" : "FAIL", o.detail.c_str(), sec);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
