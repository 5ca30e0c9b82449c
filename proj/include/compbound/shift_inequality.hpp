/**
 * @file shift_inequality.hpp
 * @brief The shift inequality  E f(a + Y) <= f(a + f^{-1}(E f(Y)))  for finite
 *        nonnegative discrete Y, and a seeded random falsifier for it.
 *
 * Functions satisfying it for every a >= 0 and Y >= 0 form class S. The
 * inequality is an equality for exponentials and at a = 0; the
 * Remark2Piecewise function violates it at a = 1 with Y uniform on {0, 1}.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "compbound/function_kit.hpp"
#include "compbound/parallel.hpp"
#include "compbound/random.hpp"

namespace compbound {

struct Atom {
    double value;
    double prob;
};

/// Finite nonnegative random variable. Values distinct and >= 0, probabilities in (0, 1] summing to 1.
class DiscreteRV {
public:
    explicit DiscreteRV(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw std::invalid_argument("DiscreteRV: no atoms");
        double total = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            const auto& a = atoms_[i];
            if (!(a.value >= 0.0) || !std::isfinite(a.value))
                throw std::invalid_argument("DiscreteRV: values must be finite and >= 0");
            if (!(a.prob > 0.0 && a.prob <= 1.0))
                throw std::invalid_argument("DiscreteRV: probabilities must lie in (0, 1]");
            for (std::size_t j = 0; j < i; ++j)
                if (atoms_[j].value == a.value) throw std::invalid_argument("DiscreteRV: values must be distinct");
            total += a.prob;
        }
        if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("DiscreteRV: probabilities must sum to 1");
    }

    static DiscreteRV point(double value) { return DiscreteRV({{value, 1.0}}); }

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }

private:
    std::vector<Atom> atoms_;
};

/// E f(shift + Y).
inline double expect_f(const FunctionSpec& f, const DiscreteRV& rv, double shift) {
    if (!(shift >= 0.0)) throw std::domain_error("expect_f: shift must be >= 0");
    double sum = 0.0;
    for (const auto& a : rv.atoms()) sum += a.prob * eval(f, shift + a.value);
    return sum;
}

/// f(a + f^{-1}(E f(Y))) - E f(a + Y). Nonnegative iff the instance satisfies the shift inequality.
inline double shift_gap(const FunctionSpec& f, double a, const DiscreteRV& rv) {
    const double lifted = std::max(expect_f(f, rv, 0.0), eval(f, 0.0));
    return eval(f, a + inverse(f, lifted)) - expect_f(f, rv, a);
}

/// The same inequality after applying f^{-1}: a + f^{-1}(E f(Y)) - f^{-1}(E f(a + Y)).
inline double shift_gap_inverse_form(const FunctionSpec& f, double a, const DiscreteRV& rv) {
    const double f0 = eval(f, 0.0);
    return a + inverse(f, std::max(expect_f(f, rv, 0.0), f0)) - inverse(f, std::max(expect_f(f, rv, a), f0));
}

/// a = 1, Y uniform on {0, 1}: the fixed counterexample for Remark2Piecewise.
inline std::pair<double, DiscreteRV> remark2_counterexample() {
    return {1.0, DiscreteRV({{0.0, 0.5}, {1.0, 0.5}})};
}

struct ShiftInstance {
    double shift;
    DiscreteRV rv;
};

struct ScanConfig {
    std::size_t trials = 10000;
    std::uint64_t seed = 0;
    std::size_t max_atoms = 5;
    double value_cap = 2.0;
    double max_shift = 2.0;
};

struct ScanReport {
    std::size_t trials = 0;
    double min_gap = std::numeric_limits<double>::infinity();
    ShiftInstance argmin_instance{0.0, DiscreteRV::point(0.0)};
    std::size_t violations = 0;
    double injected_gap = 0.0;  ///< gap of trial 0, the injected fixed instance

    static constexpr double kViolationThreshold = -1e-9;
};

/// Instance for trial `index` (> 0): drawn from its own (seed, index) stream.
inline ShiftInstance random_shift_instance(const ScanConfig& cfg, std::uint64_t index) {
    StreamRng rng(cfg.seed, index);
    const auto count = static_cast<std::size_t>(rng.integer(2, cfg.max_atoms));
    std::vector<Atom> atoms;
    atoms.reserve(count);
    double total = 0.0;
    while (atoms.size() < count) {
        const double v = rng.uniform(0.0, cfg.value_cap);
        bool dup = false;
        for (const auto& a : atoms) dup = dup || a.value == v;
        if (dup) continue;
        const double w = rng.exponential() + std::numeric_limits<double>::min();
        atoms.push_back({v, w});
        total += w;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
        atoms[i].prob /= total;
        acc += atoms[i].prob;
    }
    atoms.back().prob = 1.0 - acc;
    const double shift = rng.uniform(0.0, cfg.max_shift);
    return {shift, DiscreteRV(std::move(atoms))};
}

/**
 * Random falsifier. Trial 0 is always the fixed a = 1, Y ~ {0, 1} instance;
 * trials 1.. are random with atom count uniform in [2, max_atoms], values
 * uniform in [0, value_cap], weights uniform on the simplex and shift uniform
 * in [0, max_shift]. Deterministic given the seed, for any thread count.
 */
inline ScanReport property_scan(const FunctionSpec& f, const ScanConfig& cfg, Parallelism par = {}) {
    if (cfg.trials < 1) throw std::invalid_argument("property_scan: trials must be >= 1");
    if (cfg.max_atoms < 2) throw std::invalid_argument("property_scan: max_atoms must be >= 2");
    if (!(cfg.value_cap > 0.0)) throw std::invalid_argument("property_scan: value_cap must be > 0");

    std::vector<double> gaps(cfg.trials);
    parallel_for(cfg.trials, par, [&](std::size_t i) {
        if (i == 0) {
            auto [a, rv] = remark2_counterexample();
            gaps[i] = shift_gap(f, a, rv);
        } else {
            const auto inst = random_shift_instance(cfg, i);
            gaps[i] = shift_gap(f, inst.shift, inst.rv);
        }
    });

    ScanReport report;
    report.trials = cfg.trials;
    report.injected_gap = gaps[0];
    std::size_t argmin = 0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        if (gaps[i] < report.min_gap) {
            report.min_gap = gaps[i];
            argmin = i;
        }
        if (gaps[i] < ScanReport::kViolationThreshold) ++report.violations;
    }
    if (argmin == 0) {
        auto [a, rv] = remark2_counterexample();
        report.argmin_instance = {a, rv};
    } else {
        report.argmin_instance = random_shift_instance(cfg, argmin);
    }
    return report;
}

}  // namespace compbound
