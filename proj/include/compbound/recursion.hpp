/**
 * @file recursion.hpp
 * @brief The bound recursion b_n = G(b_{n-1}), b_0 = f(0), and its fixed-point bound B.
 *
 *   g(a, b) = a f(a) + (1 - a) f(a + f^{-1}(b))
 *   G(b)    = sup_{0 <= a <= 1} g(a, b)
 *
 * B is the root of psi(b) = f(0) + f'(f^{-1}(b)) - b, i.e. g'(0, B) = 0, and
 * is cross-checked against the condition g'(a, B) <= 0 for all a in [0, 1].
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "compbound/function_kit.hpp"
#include "compbound/optimize.hpp"

namespace compbound {

struct SolverConfig {
    std::size_t opt_grid_points = 2048;
    std::size_t refine_iters = 60;
    double b_tolerance = 1e-9;
    double divergence_threshold = 1e6;
    std::size_t max_iterations = 100000;
    double bisection_tolerance = 1e-12;

    void validate() const {
        if (opt_grid_points < 2 || refine_iters == 0 || !(b_tolerance > 0.0) || !(divergence_threshold > 0.0) ||
            max_iterations == 0 || !(bisection_tolerance > 0.0))
            throw std::invalid_argument("SolverConfig: all settings must be positive (opt_grid_points >= 2)");
    }
};

namespace detail {

inline void require_unit(double a, const char* what) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::domain_error(std::string(what) + ": a must lie in [0, 1]");
}

}  // namespace detail

inline double g(const FunctionSpec& f, double a, double b) {
    detail::require_unit(a, "g");
    const double shifted = a + inverse(f, b);
    return a * eval(f, a) + (1.0 - a) * eval(f, shifted);
}

/// dg/da = f(a) + a f'(a) - f(a + f^{-1}(b)) + (1 - a) f'(a + f^{-1}(b)).
inline double g_prime(const FunctionSpec& f, double a, double b) {
    detail::require_unit(a, "g_prime");
    const double shifted = a + inverse(f, b);
    return eval(f, a) + a * deriv(f, a) - eval(f, shifted) + (1.0 - a) * deriv(f, shifted);
}

/// The same derivative split as f(a) + a h1 + h2 with
/// h1 = f'(a) - f'(a + f^{-1}(b)) and h2 = f'(a + f^{-1}(b)) - f(a + f^{-1}(b)).
struct GPrimeSplit {
    double h1;
    double h2;
    double total;
};

inline GPrimeSplit g_prime_split(const FunctionSpec& f, double a, double b) {
    detail::require_unit(a, "g_prime_split");
    const double shifted = a + inverse(f, b);
    const double h1 = deriv(f, a) - deriv(f, shifted);
    const double h2 = deriv(f, shifted) - eval(f, shifted);
    return {h1, h2, eval(f, a) + a * h1 + h2};
}

/// G(b) with its maximizing a (smallest on ties). value >= b since g(0, b) = b.
inline ArgMax G(const FunctionSpec& f, double b, const SolverConfig& cfg = {}) {
    const double f0 = eval(f, 0.0);
    if (!(b >= f0)) throw std::range_error("G: b is below f(0)");
    const double base = inverse(f, b);
    return scan_and_refine_max(
        [&](double a) { return a * eval(f, a) + (1.0 - a) * eval(f, a + base); }, 0.0, 1.0, cfg.opt_grid_points,
        cfg.refine_iters);
}

enum class RecursionStatus { Converged, Diverged, MaxIterations };

inline const char* to_string(RecursionStatus s) {
    switch (s) {
        case RecursionStatus::Converged: return "converged";
        case RecursionStatus::Diverged: return "diverged";
        case RecursionStatus::MaxIterations: return "max_iterations";
    }
    return "";
}

struct RecursionTrace {
    std::vector<double> b;       ///< b_0 = f(0), b_1, ...
    std::vector<double> a_star;  ///< a_star[n-1] is the maximizer producing b_n
    RecursionStatus status = RecursionStatus::MaxIterations;
    std::size_t stop_step = 0;   ///< n at which the status was decided

    double last() const { return b.back(); }
    std::optional<double> limit() const {
        if (status == RecursionStatus::Converged) return b.back();
        return std::nullopt;
    }
};

/**
 * Runs the recursion until |b_n - b_{n-1}| < b_tolerance (Converged),
 * b_n > divergence_threshold (Diverged) or max_iterations steps.
 */
inline RecursionTrace iterate(const FunctionSpec& f, const SolverConfig& cfg = {}) {
    cfg.validate();
    RecursionTrace trace;
    trace.b.push_back(eval(f, 0.0));
    for (std::size_t n = 1; n <= cfg.max_iterations; ++n) {
        const auto step = G(f, trace.b.back(), cfg);
        const double prev = trace.b.back();
        trace.b.push_back(step.value);
        trace.a_star.push_back(step.arg);
        trace.stop_step = n;
        if (step.value > cfg.divergence_threshold) {
            trace.status = RecursionStatus::Diverged;
            return trace;
        }
        if (std::abs(step.value - prev) < cfg.b_tolerance) {
            trace.status = RecursionStatus::Converged;
            return trace;
        }
    }
    trace.status = RecursionStatus::MaxIterations;
    return trace;
}

/// Exactly `steps` terms b_1..b_steps, no stopping rule.
inline RecursionTrace iterate_steps(const FunctionSpec& f, std::size_t steps, const SolverConfig& cfg = {}) {
    RecursionTrace trace;
    trace.b.push_back(eval(f, 0.0));
    for (std::size_t n = 1; n <= steps; ++n) {
        const auto step = G(f, trace.b.back(), cfg);
        trace.b.push_back(step.value);
        trace.a_star.push_back(step.arg);
    }
    trace.stop_step = steps;
    trace.status = RecursionStatus::MaxIterations;
    return trace;
}

/// psi(b) = f(0) + f'(f^{-1}(b)) - b, which equals g'(0, b).
inline double fixed_point_residual(const FunctionSpec& f, double b) {
    return eval(f, 0.0) + deriv(f, inverse(f, b)) - b;
}

struct BoundResult {
    std::optional<double> B;  ///< nullopt = unbounded
    /// Max of g'(a, B) over the 512-point check grid (only meaningful when B is finite).
    double max_slope_at_B = 0.0;
    /// g'(a, B) <= 1e-6 everywhere on the check grid.
    bool cross_check_ok = true;

    static constexpr std::size_t kCheckGridPoints = 512;
    static constexpr double kCheckSlopeTolerance = 1e-6;
};

/**
 * Fixed-point bound: bisection for the sign change of psi. The bracket grows
 * by doubling from f(0) + 1; when psi is still positive past the divergence
 * threshold the bound is reported as unbounded.
 */
inline BoundResult solve_B(const FunctionSpec& f, const SolverConfig& cfg = {}) {
    cfg.validate();
    auto psi = [&](double b) { return fixed_point_residual(f, b); };
    const double f0 = eval(f, 0.0);

    double lo = f0;
    double hi = f0 + 1.0;
    while (psi(hi) >= 0.0) {
        if (hi > cfg.divergence_threshold) return {};
        lo = hi;
        hi = f0 + 2.0 * (hi - f0);
    }

    BoundResult out;
    out.B = bisect_sign_change(psi, lo, hi, cfg.bisection_tolerance);
    out.max_slope_at_B = -INFINITY;
    const auto last = BoundResult::kCheckGridPoints - 1;
    for (std::size_t i = 0; i <= last; ++i) {
        const double a = static_cast<double>(i) / static_cast<double>(last);
        out.max_slope_at_B = std::max(out.max_slope_at_B, g_prime(f, a, *out.B));
    }
    out.cross_check_ok = out.max_slope_at_B <= BoundResult::kCheckSlopeTolerance;
    return out;
}

struct DivergenceRung {
    double b;
    double min_slope;  ///< min of g'(a, b) over a in [0, epsilon]
};

struct DivergenceReport {
    std::vector<DivergenceRung> rungs;
    double lower_slope = INFINITY;  ///< min over the ladder; the c of the sufficient condition
    /// Heuristic witness only: every rung kept g' >= lower_slope > 0 near a = 0.
    bool divergence_indicated = false;
};

/// Samples the sufficient condition for b_n -> infinity (g' >= c > 0 on [0, epsilon) for all b) on a b-ladder.
inline DivergenceReport divergence_scan(const FunctionSpec& f, double epsilon, const std::vector<double>& b_ladder,
                                        std::size_t grid_points = 65) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("divergence_scan: epsilon must lie in (0, 1)");
    if (b_ladder.empty()) throw std::invalid_argument("divergence_scan: empty ladder");
    DivergenceReport report;
    for (std::size_t k = 0; k < b_ladder.size(); ++k) {
        if (k > 0 && !(b_ladder[k] > b_ladder[k - 1]))
            throw std::invalid_argument("divergence_scan: ladder must be increasing");
        DivergenceRung rung{b_ladder[k], INFINITY};
        for (std::size_t i = 0; i < grid_points; ++i) {
            const double a = epsilon * static_cast<double>(i) / static_cast<double>(grid_points - 1);
            rung.min_slope = std::min(rung.min_slope, g_prime(f, a, rung.b));
        }
        report.lower_slope = std::min(report.lower_slope, rung.min_slope);
        report.rungs.push_back(rung);
    }
    report.divergence_indicated = report.lower_slope > 0.0;
    return report;
}

}  // namespace compbound
