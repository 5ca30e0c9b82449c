// Scalar maximization and root bracketing used by the recursion and Bellman solvers.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace compbound {

struct ArgMax {
    double value;
    double arg;
};

/**
 * Maximizes `fn` on [lo, hi]: a uniform scan over `grid_points` nodes
 * (endpoints included) followed by golden-section refinement inside the
 * bracket around the best node. Ties go to the smallest argument, both in the
 * scan and when comparing the refined point against the best node.
 *
 * The objective need not be concave; the scan guards against picking the
 * wrong local maximum at the resolution of the grid.
 */
template <class Fn>
ArgMax scan_and_refine_max(Fn&& fn, double lo, double hi, std::size_t grid_points, std::size_t refine_iters) {
    if (grid_points < 2) throw std::invalid_argument("scan_and_refine_max: grid_points must be >= 2");
    if (!(hi >= lo)) throw std::invalid_argument("scan_and_refine_max: empty interval");
    if (hi == lo) return {fn(lo), lo};

    const double width = hi - lo;
    const auto last = grid_points - 1;
    auto node = [&](std::size_t i) { return i == last ? hi : lo + width * static_cast<double>(i) / static_cast<double>(last); };

    std::size_t best_i = 0;
    double best_v = fn(lo);
    for (std::size_t i = 1; i < grid_points; ++i) {
        const double v = fn(node(i));
        if (v > best_v) {
            best_v = v;
            best_i = i;
        }
    }

    double a = node(best_i == 0 ? 0 : best_i - 1);
    double b = node(best_i == last ? last : best_i + 1);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = fn(c);
    double fd = fn(d);
    for (std::size_t it = 0; it < refine_iters; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = fn(d);
        }
    }
    const double x = fc >= fd ? c : d;
    const double fx = fc >= fd ? fc : fd;
    const double best_x = node(best_i);
    if (fx > best_v || (fx == best_v && x < best_x)) return {fx, x};
    return {best_v, best_x};
}

/**
 * Bisection on [lo, hi] for a sign change of `fn` from >= 0 at `lo` to < 0 at
 * `hi`. Stops once the bracket is narrower than `tol`; returns its midpoint.
 */
template <class Fn>
double bisect_sign_change(Fn&& fn, double lo, double hi, double tol, std::size_t max_iters = 400) {
    if (!(fn(lo) >= 0.0) || !(fn(hi) < 0.0))
        throw std::invalid_argument("bisect_sign_change: bracket does not straddle a sign change");
    for (std::size_t i = 0; i < max_iters && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (fn(mid) >= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace compbound
