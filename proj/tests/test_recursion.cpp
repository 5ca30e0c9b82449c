#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "compbound/optimize.hpp"
#include "compbound/recursion.hpp"
#include "oracles.hpp"

using namespace compbound;

namespace {

std::vector<FunctionSpec> convex_families() {
    return {FunctionSpec::exponential(0.5), FunctionSpec::exponential(1.0), FunctionSpec::exponential(2.0),
            FunctionSpec::power(1.0),       FunctionSpec::power(2.0),       FunctionSpec::power(3.0),
            FunctionSpec::quad_concave_deriv()};
}

/// Brute-force G(b): 200001-point grid, no refinement.
oracle::Max brute_G(const FunctionSpec& f, double b) {
    return oracle::grid_max([&](double a) { return a * eval(f, a) + (1 - a) * eval(f, a + inverse(f, b)); }, 0.0, 1.0,
                            200001);
}

}  // namespace

TEST(Recursion, GExamples) {
    for (const auto& f : convex_families()) {
        const double b = eval(f, 0.0) + 1.7;
        EXPECT_NEAR(g(f, 0.0, b), b, 1e-12 * b) << to_string(f);
        EXPECT_DOUBLE_EQ(g(f, 1.0, b), eval(f, 1.0)) << to_string(f);
    }
    // e^{0.5}(0.5 + 0.5 * 2); frozen from the closed form.
    EXPECT_NEAR(g(FunctionSpec::exponential(1.0), 0.5, 2.0), 2.4730819060501922, 1e-12);
    EXPECT_THROW(g(FunctionSpec::exponential(1.0), 0.5, 0.5), std::range_error);
    EXPECT_THROW(g(FunctionSpec::exponential(1.0), 1.5, 2.0), std::domain_error);
}

TEST(Recursion, GPrimeExamples) {
    for (const auto& f : convex_families()) {
        for (double b : {eval(f, 0.0), eval(f, 0.0) + 0.5, eval(f, 0.0) + 7.0}) {
            const double expected = eval(f, 0.0) - b + deriv(f, inverse(f, b));
            EXPECT_NEAR(g_prime(f, 0.0, b), expected, 1e-12 * std::max(1.0, b));
        }
    }
    for (double lambda : {0.5, 1.0, 1.5})
        for (double b : {1.0, 2.0, 10.0})
            EXPECT_NEAR(g_prime(FunctionSpec::exponential(lambda), 0.0, b), 1.0 + b * (lambda - 1.0), 1e-12 * b);
    const auto p2 = FunctionSpec::power(2.0);
    const double fd = oracle::central_difference([&](double a) { return g(p2, a, 1.0); }, 0.3);
    EXPECT_NEAR(g_prime(p2, 0.3, 1.0), fd, 1e-5);
}

TEST(Recursion, GPrimeMatchesFiniteDifferencesOnRandomPoints) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(1e-3, 1.0 - 1e-3);
    std::uniform_real_distribution<double> lift(0.0, 20.0);
    auto families = convex_families();
    families.push_back(FunctionSpec::remark2_piecewise());
    for (const auto& f : families) {
        for (int i = 0; i < 1000; ++i) {
            const double a = unit(rng);
            const double b = eval(f, 0.0) + lift(rng);
            const double base = inverse(f, b);
            // Piecewise kink at 1: skip points whose FD stencil straddles it.
            if (f.family() == Family::Remark2Piecewise && (std::abs(a - 1.0) < 1e-5 || std::abs(a + base - 1.0) < 1e-5))
                continue;
            const double fd = oracle::central_difference([&](double t) { return g(f, t, b); }, a);
            const double an = g_prime(f, a, b);
            ASSERT_LE(std::abs(fd - an), 1e-5 * std::max(1.0, std::abs(an))) << to_string(f) << " a=" << a << " b=" << b;
        }
    }
}

TEST(Recursion, GPrimeSplitReproducesDerivative) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& f : convex_families()) {
        for (int i = 0; i < 500; ++i) {
            const double a = unit(rng);
            const double b = eval(f, 0.0) + 10.0 * unit(rng);
            const auto split = g_prime_split(f, a, b);
            const double direct = g_prime(f, a, b);
            ASSERT_NEAR(split.total, direct, 1e-12 * std::max(1.0, std::abs(direct)));
            ASSERT_LE(split.h1, 1e-12);  // f' nondecreasing
        }
    }
}

TEST(Recursion, GMaxExamples) {
    const auto e1 = FunctionSpec::exponential(1.0);
    auto r = G(e1, 1.0);
    EXPECT_NEAR(r.value, std::exp(1.0), 1e-12);
    EXPECT_DOUBLE_EQ(r.arg, 1.0);

    r = G(e1, 3.0);
    // sup = (b-1) e^{1/(b-1)} at a = 1/(b-1); frozen 2 e^{0.5}.
    EXPECT_NEAR(r.value, 3.2974425414002564, 1e-12);
    EXPECT_NEAR(r.arg, 0.5, 1e-6);
    const auto brute = brute_G(e1, 3.0);
    EXPECT_GE(r.value, brute.value - 1e-14);

    r = G(FunctionSpec::power(2.0), 0.0);
    EXPECT_DOUBLE_EQ(r.value, 1.0);
    EXPECT_DOUBLE_EQ(r.arg, 1.0);
}

TEST(Recursion, GAgreesWithBruteForceAndDominatesB) {
    for (const auto& f : convex_families()) {
        for (double lift : {0.0, 0.3, 1.0, 4.0, 25.0}) {
            const double b = eval(f, 0.0) + lift;
            const auto r = G(f, b);
            const auto brute = brute_G(f, b);
            EXPECT_GE(r.value, b * (1.0 - 1e-15)) << to_string(f);
            EXPECT_GE(r.value, brute.value - 1e-12 * std::max(1.0, b)) << to_string(f);
            EXPECT_NEAR(r.value, brute.value, 1e-8 * std::max(1.0, b)) << to_string(f);
        }
    }
}

TEST(Recursion, TieBreaksTowardSmallestAction) {
    // f(x) = x with b = 1: g(a, 1) = 1 for every a, up to rounding.
    const auto r = G(FunctionSpec::power(1.0), 1.0);
    EXPECT_NEAR(r.value, 1.0, 1e-15);

    const auto flat = scan_and_refine_max([](double) { return 1.0; }, 0.0, 1.0, 2048, 60);
    EXPECT_EQ(flat.arg, 0.0);
    const auto plateau = scan_and_refine_max([](double a) { return std::min(a, 0.3); }, 0.0, 1.0, 11, 60);
    EXPECT_DOUBLE_EQ(plateau.value, 0.3);
    EXPECT_NEAR(plateau.arg, 0.3, 1e-9);
}

TEST(Recursion, IterateExponentialHalf) {
    const auto trace = iterate(FunctionSpec::exponential(0.5));
    EXPECT_EQ(trace.status, RecursionStatus::Converged);
    EXPECT_DOUBLE_EQ(trace.b.front(), 1.0);
    EXPECT_NEAR(trace.last(), 2.0, 1e-3);
    for (std::size_t i = 1; i < trace.b.size(); ++i) ASSERT_GE(trace.b[i], trace.b[i - 1]);
    const auto lim = *trace.limit();
    EXPECT_LE(std::abs(G(FunctionSpec::exponential(0.5), lim).value - lim), 10 * SolverConfig{}.b_tolerance);
}

TEST(Recursion, IterateDivergentExponential) {
    const auto trace = iterate(FunctionSpec::exponential(1.5));
    EXPECT_EQ(trace.status, RecursionStatus::Diverged);
    EXPECT_GT(trace.last(), 1e6);
}

TEST(Recursion, IterateExponentialOneFirstStep) {
    // b_1 = f(1) = e. The full run is slow (b_n grows like sqrt(n)); only a few steps here.
    SolverConfig cfg;
    cfg.max_iterations = 50;
    const auto trace = iterate(FunctionSpec::exponential(1.0), cfg);
    EXPECT_NEAR(trace.b[1], std::exp(1.0), 1e-9);
    EXPECT_EQ(trace.status, RecursionStatus::MaxIterations);
    for (std::size_t i = 2; i < trace.b.size(); ++i) {
        // b >= 2: G(b) = (b - 1) e^{1/(b-1)}.
        const double prev = trace.b[i - 1];
        ASSERT_NEAR(trace.b[i], (prev - 1.0) * std::exp(1.0 / (prev - 1.0)), 1e-10 * prev);
        ASSERT_GT(trace.b[i], prev);
    }
}

TEST(Recursion, IterateStepsMatchesIterate) {
    const auto f = FunctionSpec::power(2.0);
    const auto a = iterate_steps(f, 25);
    SolverConfig cfg;
    cfg.max_iterations = 25;
    const auto b = iterate(f, cfg);
    ASSERT_EQ(a.b.size(), 26u);
    for (std::size_t i = 0; i < a.b.size(); ++i) EXPECT_EQ(a.b[i], b.b[i]);
}

TEST(Recursion, SolveBExamples) {
    EXPECT_NEAR(*solve_B(FunctionSpec::exponential(0.5)).B, 2.0, 1e-10);
    EXPECT_NEAR(*solve_B(FunctionSpec::power(2.0)).B, 4.0, 1e-10);
    // Bisection oracle on psi(b) = 1 + f^{-1}(b) - b for x + x^2/2; frozen 1 + sqrt 2.
    const double root = oracle::bisect([](double b) { return 1.0 + (-1.0 + std::sqrt(1.0 + 2.0 * b)) - b; }, 1.0, 10.0);
    EXPECT_NEAR(root, 2.414213562373095, 1e-12);
    const auto quad = solve_B(FunctionSpec::quad_concave_deriv());
    EXPECT_NEAR(*quad.B, root, 1e-10);
    EXPECT_TRUE(quad.cross_check_ok);
}

TEST(Recursion, SolveBUnboundedAndCrossCheck) {
    for (double lambda : {1.0, 1.5, 2.0}) EXPECT_FALSE(solve_B(FunctionSpec::exponential(lambda)).B.has_value());
    for (double m : {1.0, 2.0, 3.0}) {
        const auto r = solve_B(FunctionSpec::power(m));
        ASSERT_TRUE(r.B.has_value());
        EXPECT_NEAR(*r.B, std::pow(m, m), 1e-9);
        EXPECT_TRUE(r.cross_check_ok);
    }
    // remark2 family: psi has a root at 1 but g'(a, 1) > 0 for small a, so the cross-check flags it.
    const auto r2 = solve_B(FunctionSpec::remark2_piecewise());
    ASSERT_TRUE(r2.B.has_value());
    EXPECT_FALSE(r2.cross_check_ok);
}

TEST(Recursion, LimitBelowBoundAndEqualForClosedFormFamilies) {
    for (const auto& f : {FunctionSpec::exponential(0.25), FunctionSpec::exponential(0.5), FunctionSpec::power(1.0)}) {
        const auto trace = iterate(f);
        const double B = *solve_B(f).B;
        EXPECT_LE(trace.last(), B + 1e-6) << to_string(f);
        EXPECT_NEAR(trace.last(), B, 1e-3 * B) << to_string(f);
    }
}

TEST(Recursion, SlowClosedFormFamiliesApproachB) {
    // These approach B like 1/n; 100000 steps get within 1e-3 relative.
    for (const auto& f : {FunctionSpec::exponential(0.75), FunctionSpec::power(2.0), FunctionSpec::power(3.0)}) {
        const auto trace = iterate(f);
        const double B = *solve_B(f).B;
        EXPECT_LE(trace.last(), B + 1e-6) << to_string(f);
        EXPECT_NEAR(trace.last(), B, 1e-3 * B) << to_string(f);
    }
}

TEST(Recursion, ExponentialOneHasNoFixedPoint) {
    // (b - 1) e^{1/(b-1)} - b > 0 on [2, 1e4], shrinking toward 0.
    double prev = INFINITY;
    for (int i = 0; i <= 400; ++i) {
        const double b = 2.0 * std::pow(5000.0, i / 400.0);
        const double gap = (b - 1.0) * std::exp(1.0 / (b - 1.0)) - b;
        ASSERT_GT(gap, 0.0);
        ASSERT_LT(gap, prev);
        prev = gap;
        EXPECT_NEAR(G(FunctionSpec::exponential(1.0), b).value - b, gap, 1e-9 * b);
    }
    EXPECT_LT(prev, 1e-4);
}

TEST(Recursion, DivergenceScanExamples) {
    const auto e2 = divergence_scan(FunctionSpec::exponential(2.0), 0.01, {1, 10, 100, 1000, 10000});
    EXPECT_TRUE(e2.divergence_indicated);
    EXPECT_GE(e2.lower_slope, 1.0);

    const auto e05 = divergence_scan(FunctionSpec::exponential(0.5), 0.01, {1, 2, 5, 10});
    EXPECT_FALSE(e05.divergence_indicated);

    const auto p2 = divergence_scan(FunctionSpec::power(2.0), 0.01, {1, 10});
    EXPECT_FALSE(p2.divergence_indicated);
    EXPECT_LT(p2.rungs[1].min_slope, 0.0);
    EXPECT_LE(p2.rungs[1].min_slope, std::sqrt(10.0) * (2.0 - std::sqrt(10.0)) + 1e-12);

    EXPECT_THROW(divergence_scan(FunctionSpec::power(2.0), 0.0, {1}), std::invalid_argument);
    EXPECT_THROW(divergence_scan(FunctionSpec::power(2.0), 0.1, {2, 1}), std::invalid_argument);
}
