/**
 * @file bellman.hpp
 * @brief Finite-horizon value iteration for the compensator-growth control problem.
 *
 * State (n, x, y): n steps remaining, submartingale level x in [0, 1],
 * compensator y >= 0. With the optimal two-point noise the Bellman equation is
 *
 *   F_n(x, y) = sup_{0 <= a <= 1-x} [(x+a) f(y+a) + (1-(x+a)) F_{n-1}(0, y+a)],
 *   F_0(x, y) = F_n(1, y) = f(y),
 *
 * so only V_n(y) = F_n(0, y) has to be tabulated; general x is rebuilt on
 * demand from V_{n-1}. c_n = V_n(0).
 *
 * Layer n is stored on the uniform grid over [0, y_max - n]: reading V_{n-1}
 * at y + a never leaves the previous layer's coverage, so no extrapolation is
 * needed. Off-grid reads use linear interpolation.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "compbound/function_kit.hpp"
#include "compbound/optimize.hpp"
#include "compbound/parallel.hpp"
#include "compbound/recursion.hpp"

namespace compbound {

struct GridConfig {
    double y_max = 0.0;
    double step = 1.0 / 512.0;

    static GridConfig for_horizon(std::size_t horizon, double step = 1.0 / 512.0) {
        return {static_cast<double>(horizon), step};
    }
};

/// Interpolation error allowance per unit of grid step, calibrated by halving-step studies.
inline constexpr double kGridErrorPerStep = 2.56;

/// Tolerance for comparing grid-based values against exact ones: 5e-3 at step 1/512.
inline double grid_error_budget(double step) { return kGridErrorPerStep * step; }

class ValueTable {
public:
    ValueTable(FunctionSpec spec, std::size_t horizon, GridConfig grid)
        : spec_(spec), horizon_(horizon), grid_(grid) {
        if (!(grid.step > 0.0)) throw std::invalid_argument("GridConfig: step must be > 0");
        if (!(grid.y_max >= static_cast<double>(horizon)))
            throw std::invalid_argument("GridConfig: y_max must be >= horizon");
        values_.resize(horizon + 1);
        actions_.resize(horizon + 1);
        for (std::size_t n = 0; n <= horizon; ++n) {
            values_[n].assign(coverage_points(n), 0.0);
            actions_[n].assign(coverage_points(n), 0.0);
        }
    }

    const FunctionSpec& spec() const noexcept { return spec_; }
    std::size_t horizon() const noexcept { return horizon_; }
    const GridConfig& grid() const noexcept { return grid_; }
    double step() const noexcept { return grid_.step; }

    /// Number of grid points stored for layer n (covers [0, y_max - n]).
    std::size_t coverage_points(std::size_t n) const {
        const double span = grid_.y_max - static_cast<double>(n);
        return static_cast<std::size_t>(std::floor(span / grid_.step + 1e-9)) + 1;
    }
    double coverage_end(std::size_t n) const {
        return static_cast<double>(coverage_points(n) - 1) * grid_.step;
    }
    double y_at(std::size_t i) const noexcept { return static_cast<double>(i) * grid_.step; }

    const std::vector<double>& values(std::size_t n) const { return values_.at(n); }
    /// a*_n(y) on the grid; layer 0 holds zeros (no action is taken with no time left).
    const std::vector<double>& actions(std::size_t n) const { return actions_.at(n); }
    std::vector<double>& mutable_values(std::size_t n) { return values_.at(n); }
    std::vector<double>& mutable_actions(std::size_t n) { return actions_.at(n); }

    /// c_n = V_n(0).
    double value_at_origin(std::size_t n) const { return values_.at(n).front(); }

    /**
     * V_n(y) by linear interpolation. Reads past the layer's coverage clamp
     * to the last stored value and raise `clamped`.
     */
    double interpolate(std::size_t n, double y, bool* clamped = nullptr) const {
        const auto& layer = values_.at(n);
        const double t = y / grid_.step;
        const double last = static_cast<double>(layer.size() - 1);
        if (t >= last) {
            if (t > last + 1e-9 && clamped != nullptr) *clamped = true;
            return layer.back();
        }
        if (t <= 0.0) return layer.front();
        const auto i = static_cast<std::size_t>(t);
        const double w = t - static_cast<double>(i);
        if (w == 0.0) return layer[i];
        return (1.0 - w) * layer[i] + w * layer[i + 1];
    }

    bool accuracy_flag = false;  ///< some read fell outside the stored coverage
    std::vector<std::string> warnings;

private:
    FunctionSpec spec_;
    std::size_t horizon_;
    GridConfig grid_;
    std::vector<std::vector<double>> values_;
    std::vector<std::vector<double>> actions_;
};

/**
 * One Bellman backup at (n, x, y) from layer n-1:
 * sup over a in [0, 1-x] of (x+a) f(y+a) + (1-(x+a)) V_{n-1}(y+a).
 * The two-point noise is the only noise considered; it is optimal.
 */
inline ArgMax bellman_backup(const ValueTable& table, std::size_t n, double x, double y, const SolverConfig& opt,
                             bool* clamped = nullptr) {
    const FunctionSpec& f = table.spec();
    return scan_and_refine_max(
        [&](double a) {
            const double jump = x + a;
            return jump * eval(f, y + a) + (1.0 - jump) * table.interpolate(n - 1, y + a, clamped);
        },
        0.0, 1.0 - x, opt.opt_grid_points, opt.refine_iters);
}

/// Backward induction for V_1..V_N from V_0 = f.
inline ValueTable value_iteration(const FunctionSpec& f, std::size_t horizon, GridConfig grid,
                                  const SolverConfig& opt = {}, Parallelism par = {}) {
    opt.validate();
    ValueTable table(f, horizon, grid);
    if (1.0 / static_cast<double>(opt.opt_grid_points - 1) > grid.step)
        table.warnings.push_back("action scan is coarser than the y-grid; maxima may be under-resolved");

    auto& base = table.mutable_values(0);
    for (std::size_t i = 0; i < base.size(); ++i) base[i] = eval(f, table.y_at(i));

    std::atomic<bool> clamped_any{false};
    for (std::size_t n = 1; n <= horizon; ++n) {
        auto& vals = table.mutable_values(n);
        auto& acts = table.mutable_actions(n);
        parallel_for(vals.size(), par, [&](std::size_t i) {
            bool clamped = false;
            const auto best = bellman_backup(table, n, 0.0, table.y_at(i), opt, &clamped);
            vals[i] = best.value;
            acts[i] = best.arg;
            if (clamped) clamped_any = true;
        });
    }
    table.accuracy_flag = clamped_any.load();
    return table;
}

/// F_n(x, y) rebuilt from the table. F_n(1, y) = F_0(x, y) = f(y).
inline double full_value(const ValueTable& table, std::size_t n, double x, double y, const SolverConfig& opt = {}) {
    if (n > table.horizon()) throw std::range_error("full_value: n exceeds the table horizon");
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("full_value: x must lie in [0, 1]");
    if (!(y >= 0.0)) throw std::domain_error("full_value: y must be >= 0");
    if (n == 0 || x == 1.0) return eval(table.spec(), y);
    if (y + (1.0 - x) > table.coverage_end(n - 1) + 1e-12)
        throw std::range_error("full_value: y + (1 - x) is outside the grid coverage");
    return bellman_backup(table, n, x, y, opt).value;
}

/**
 * Optimal compensator increments a*_n(y) for every remaining time n. After
 * acting, the chain jumps to x = 1 (absorbing, payoff f of the final y) with
 * probability x + a and to x = 0 otherwise.
 */
class ExtremalPolicy {
public:
    ExtremalPolicy(FunctionSpec spec, std::size_t horizon, double step, std::vector<std::vector<double>> actions,
                   std::vector<double> origin_values)
        : spec_(spec), horizon_(horizon), step_(step), actions_(std::move(actions)),
          origin_values_(std::move(origin_values)) {
        if (actions_.size() != horizon + 1 || origin_values_.size() != horizon + 1)
            throw std::invalid_argument("ExtremalPolicy: layer count does not match the horizon");
        if (!(step > 0.0)) throw std::invalid_argument("ExtremalPolicy: step must be > 0");
    }

    const FunctionSpec& spec() const noexcept { return spec_; }
    std::size_t horizon() const noexcept { return horizon_; }
    double step() const noexcept { return step_; }
    const std::vector<std::vector<double>>& actions() const noexcept { return actions_; }
    /// V_n(0) for n = 0..horizon.
    const std::vector<double>& origin_values() const noexcept { return origin_values_; }

    /// a*_n(y), linearly interpolated between grid points.
    double action(std::size_t n, double y) const {
        if (n == 0 || n > horizon_) throw std::range_error("ExtremalPolicy: remaining time out of range");
        const auto& layer = actions_[n];
        const double t = y / step_;
        const double last = static_cast<double>(layer.size() - 1);
        if (t < 0.0 || t > last + 1e-9) throw std::range_error("ExtremalPolicy: y outside the policy grid");
        if (t >= last) return layer.back();
        const auto i = static_cast<std::size_t>(t);
        const double w = t - static_cast<double>(i);
        if (w < 1e-9) return layer[i];
        return (1.0 - w) * layer[i] + w * layer[i + 1];
    }

private:
    FunctionSpec spec_;
    std::size_t horizon_;
    double step_;
    std::vector<std::vector<double>> actions_;
    std::vector<double> origin_values_;
};

inline ExtremalPolicy extremal_policy(const ValueTable& table) {
    std::vector<std::vector<double>> actions;
    std::vector<double> origin;
    for (std::size_t n = 0; n <= table.horizon(); ++n) {
        actions.push_back(table.actions(n));
        origin.push_back(table.value_at_origin(n));
    }
    return ExtremalPolicy(table.spec(), table.horizon(), table.step(), std::move(actions), std::move(origin));
}

// ---------------------------------------------------------------------------
// Structural checks

struct Lemma1Sample {
    std::size_t y_per_layer = 5;
    std::vector<double> xs{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    double monotone_tol = 1e-9;
    double convexity_tol = 1e-6;
};

struct Lemma1Violation {
    std::string kind;  ///< "y-monotone", "x-monotone" or "x-convex"
    std::size_t n;
    double y;
    double x1;
    double x2;
    double amount;
};

struct Lemma1Report {
    std::size_t checks = 0;
    std::vector<Lemma1Violation> violations;
};

/**
 * Sampled structure of the value function: V_n nondecreasing in y on every
 * grid point, F_n(., y) nonincreasing in x and midpoint convex in x.
 */
inline Lemma1Report verify_lemma1(const ValueTable& table, const Lemma1Sample& sample = {},
                                  const SolverConfig& opt = {}) {
    Lemma1Report report;
    for (std::size_t n = 0; n <= table.horizon(); ++n) {
        const auto& layer = table.values(n);
        for (std::size_t i = 1; i < layer.size(); ++i) {
            ++report.checks;
            if (layer[i] < layer[i - 1] - sample.monotone_tol)
                report.violations.push_back({"y-monotone", n, table.y_at(i), 0.0, 0.0, layer[i - 1] - layer[i]});
        }

        const std::size_t points = layer.size();
        const std::size_t picks = std::min(sample.y_per_layer, points);
        for (std::size_t k = 0; k < picks; ++k) {
            const std::size_t idx = picks == 1 ? 0 : k * (points - 1) / (picks - 1);
            const double y = table.y_at(idx);
            std::vector<double> fx;
            fx.reserve(sample.xs.size());
            for (double x : sample.xs) fx.push_back(full_value(table, n, x, y, opt));

            for (std::size_t i = 1; i < fx.size(); ++i) {
                ++report.checks;
                if (fx[i] > fx[i - 1] + sample.monotone_tol)
                    report.violations.push_back(
                        {"x-monotone", n, y, sample.xs[i - 1], sample.xs[i], fx[i] - fx[i - 1]});
            }
            for (std::size_t i = 0; i < fx.size(); ++i) {
                for (std::size_t j = i + 2; j < fx.size(); j += 2) {
                    const double mid = full_value(table, n, 0.5 * (sample.xs[i] + sample.xs[j]), y, opt);
                    ++report.checks;
                    const double slack = fx[i] + fx[j] - 2.0 * mid;
                    if (slack < -sample.convexity_tol)
                        report.violations.push_back({"x-convex", n, y, sample.xs[i], sample.xs[j], -slack});
                }
            }
        }
    }
    return report;
}

struct BoundRow {
    std::size_t n;
    double c;    ///< V_n(0)
    double b;    ///< recursion term
    double gap;  ///< c - b
};

struct CompareResult {
    std::vector<BoundRow> rows;
    double budget = 0.0;
    double max_abs_gap = 0.0;
    bool within_budget = true;  ///< c_n <= b_n + budget for every n
    bool class_s = true;        ///< sampled class-S condition; the comparison is only guaranteed when true
};

inline CompareResult compare_bounds(const ValueTable& table, const SolverConfig& opt = {}) {
    const FunctionSpec& f = table.spec();
    const auto trace = iterate_steps(f, table.horizon(), opt);
    CompareResult out;
    out.budget = grid_error_budget(table.step());
    out.class_s = class_s_condition(f, diagnostic_grid()).holds;
    for (std::size_t n = 0; n <= table.horizon(); ++n) {
        const BoundRow row{n, table.value_at_origin(n), trace.b[n], table.value_at_origin(n) - trace.b[n]};
        out.max_abs_gap = std::max(out.max_abs_gap, std::abs(row.gap));
        if (row.gap > out.budget) out.within_budget = false;
        out.rows.push_back(row);
    }
    return out;
}

inline CompareResult compare_bounds(const FunctionSpec& f, std::size_t horizon, GridConfig grid,
                                    const SolverConfig& opt = {}, Parallelism par = {}) {
    return compare_bounds(value_iteration(f, horizon, grid, opt, par), opt);
}

}  // namespace compbound
