/**
 * @file chain_sim.hpp
 * @brief Two-point bounded submartingales: exact laws, Monte Carlo paths and
 *        the pathwise Doob decomposition X = Y + M.
 *
 * Two chains are covered:
 *   - the introductory chain on {0, 1}: from 0 move to 0 or 1 with probability
 *     1/2 each, 1 is absorbing. Its compensator grows by 1/2 while X = 0.
 *   - the extremal chain driven by an ExtremalPolicy: from (0, y) with n steps
 *     left play a = a*_n(y), jump to 1 with probability a, stay at 0
 *     otherwise, y += a in both branches.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "compbound/bellman.hpp"
#include "compbound/function_kit.hpp"
#include "compbound/parallel.hpp"
#include "compbound/random.hpp"

namespace compbound {

struct ChainAtom {
    int x;  ///< 0 or 1
    double y;
    double prob;
};

struct ChainLaw {
    std::size_t time = 0;
    std::vector<ChainAtom> atoms;

    double total_probability() const {
        double s = 0.0;
        for (const auto& a : atoms) s += a.prob;
        return s;
    }

    /// Adds mass to (x, y), merging with an existing atom within 1e-12 in y.
    void add(int x, double y, double prob) {
        for (auto& a : atoms) {
            if (a.x == x && std::abs(a.y - y) <= 1e-12) {
                a.prob += prob;
                return;
            }
        }
        atoms.push_back({x, y, prob});
    }
};

/// Exact law of (X_n, Y_n) for the introductory chain started at X_0 = Y_0 = 0.
inline ChainLaw intro_chain_law(std::size_t n) {
    ChainLaw law;
    law.time = n;
    if (n == 0) {
        law.atoms.push_back({0, 0.0, 1.0});
        return law;
    }
    // First hit of 1 at time k < n freezes Y at k/2.
    for (std::size_t k = 1; k < n; ++k) law.atoms.push_back({1, 0.5 * static_cast<double>(k), std::ldexp(1.0, -static_cast<int>(k))});
    const double tail = std::ldexp(1.0, -static_cast<int>(n));
    law.atoms.push_back({1, 0.5 * static_cast<double>(n), tail});
    law.atoms.push_back({0, 0.5 * static_cast<double>(n), tail});
    return law;
}

template <std::invocable<double> Fn>
double exact_expectation(const ChainLaw& law, Fn&& payoff) {
    double sum = 0.0;
    for (const auto& a : law.atoms) sum += a.prob * payoff(a.y);
    return sum;
}

/// E f(Y_n) under the law.
inline double exact_expectation(const ChainLaw& law, const FunctionSpec& f) {
    return exact_expectation(law, [&](double y) { return eval(f, y); });
}

struct PathSample {
    std::vector<double> X;
    std::vector<double> Y;
    std::vector<double> M;
};

/// Conditional mean increment of the introductory chain: 1/2 at 0, 0 at 1.
struct IntroKernel {
    double operator()(std::size_t /*k*/, double x) const {
        if (x == 0.0) return 0.5;
        if (x == 1.0) return 0.0;
        throw std::domain_error("IntroKernel: state must be 0 or 1");
    }
};

/**
 * Y_0 = y0, Y_{k+1} = Y_k + E(X_{k+1} - X_k | X_k) from the kernel, M = X - Y.
 * A negative conditional mean is rejected: the kernel is not a submartingale.
 */
template <class Kernel>
PathSample doob_decompose(const std::vector<double>& X, Kernel&& kernel, double y0 = 0.0) {
    if (X.empty()) throw std::invalid_argument("doob_decompose: empty path");
    PathSample out;
    out.X = X;
    out.Y.resize(X.size());
    out.M.resize(X.size());
    out.Y[0] = y0;
    for (std::size_t k = 0; k + 1 < X.size(); ++k) {
        const double drift = kernel(k, X[k]);
        if (drift < 0.0) throw std::invalid_argument("doob_decompose: negative conditional increment (not a submartingale)");
        out.Y[k + 1] = out.Y[k] + drift;
    }
    for (std::size_t k = 0; k < X.size(); ++k) out.M[k] = X[k] - out.Y[k];
    return out;
}

/**
 * One path of the introductory chain on its own (seed, index) stream. The
 * compensator increment is fixed from X_k before the coin for X_{k+1} is
 * drawn; M is accumulated from its own increments rather than as X - Y.
 */
inline PathSample sample_intro_path(std::size_t n, std::uint64_t seed, std::uint64_t index) {
    StreamRng rng(seed, index);
    PathSample p;
    p.X.assign(n + 1, 0.0);
    p.Y.assign(n + 1, 0.0);
    p.M.assign(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double dy = p.X[k] == 0.0 ? 0.5 : 0.0;
        p.Y[k + 1] = p.Y[k] + dy;
        p.X[k + 1] = p.X[k] == 0.0 ? (rng.coin(0.5) ? 1.0 : 0.0) : 1.0;
        p.M[k + 1] = p.M[k] + (p.X[k + 1] - p.X[k]) - dy;
    }
    return p;
}

struct IntroSimReport {
    std::size_t n = 0;
    std::size_t paths = 0;
    double mean = 0.0;       ///< empirical E f(Y_n)
    double std_error = 0.0;  ///< sample std / sqrt(paths)
    double max_doob_residual = 0.0;         ///< max |X_k - Y_k - M_k|
    double max_closed_form_residual = 0.0;  ///< max |Y_n - (1/2 + 1/2 sum_{k=1}^{n-1} (1 - X_k))|
    bool bounds_ok = true;                  ///< 0 <= X <= 1 and Y nondecreasing on every path
};

inline IntroSimReport simulate_intro(std::size_t n, std::size_t paths, std::uint64_t seed, const FunctionSpec& f,
                                     Parallelism par = {}) {
    if (paths < 1) throw std::invalid_argument("simulate_intro: paths must be >= 1");
    std::vector<double> payoff(paths), doob(paths), closed(paths);
    std::vector<char> ok(paths, 1);
    parallel_for(paths, par, [&](std::size_t i) {
        const auto p = sample_intro_path(n, seed, i);
        payoff[i] = eval(f, p.Y[n]);
        double r = 0.0;
        bool good = true;
        for (std::size_t k = 0; k <= n; ++k) {
            r = std::max(r, std::abs(p.X[k] - p.Y[k] - p.M[k]));
            good = good && p.X[k] >= 0.0 && p.X[k] <= 1.0 && (k == 0 || p.Y[k] >= p.Y[k - 1]);
        }
        doob[i] = r;
        ok[i] = good ? 1 : 0;
        if (n >= 1) {
            double sum = 0.0;
            for (std::size_t k = 1; k < n; ++k) sum += 1.0 - p.X[k];
            closed[i] = std::abs(p.Y[n] - (0.5 + 0.5 * sum));
        }
    });

    IntroSimReport rep;
    rep.n = n;
    rep.paths = paths;
    double sum = 0.0;
    for (double v : payoff) sum += v;
    rep.mean = sum / static_cast<double>(paths);
    double ss = 0.0;
    for (double v : payoff) ss += (v - rep.mean) * (v - rep.mean);
    const double var = paths > 1 ? ss / static_cast<double>(paths - 1) : 0.0;
    rep.std_error = std::sqrt(var / static_cast<double>(paths));
    for (std::size_t i = 0; i < paths; ++i) {
        rep.max_doob_residual = std::max(rep.max_doob_residual, doob[i]);
        rep.max_closed_form_residual = std::max(rep.max_closed_form_residual, closed[i]);
        rep.bounds_ok = rep.bounds_ok && ok[i] != 0;
    }
    return rep;
}

struct MartingaleStepCheck {
    std::size_t k;        ///< increment M_k - M_{k-1}
    double mean;
    double std_error;
    bool ok;              ///< |mean| <= 4 std_error
};

/// Empirical zero-mean check of the martingale increments of the introductory chain.
inline std::vector<MartingaleStepCheck> intro_martingale_check(std::size_t n, std::size_t paths, std::uint64_t seed,
                                                               Parallelism par = {}) {
    std::vector<std::vector<double>> incs(paths);
    parallel_for(paths, par, [&](std::size_t i) {
        const auto p = sample_intro_path(n, seed, i);
        incs[i].resize(n);
        for (std::size_t k = 1; k <= n; ++k) incs[i][k - 1] = p.M[k] - p.M[k - 1];
    });
    std::vector<MartingaleStepCheck> out;
    for (std::size_t k = 1; k <= n; ++k) {
        double sum = 0.0;
        for (const auto& v : incs) sum += v[k - 1];
        const double mean = sum / static_cast<double>(paths);
        double ss = 0.0;
        for (const auto& v : incs) ss += (v[k - 1] - mean) * (v[k - 1] - mean);
        const double se = std::sqrt(ss / static_cast<double>(paths - 1) / static_cast<double>(paths));
        out.push_back({k, mean, se, std::abs(mean) <= 4.0 * se});
    }
    return out;
}

/**
 * Exact law of the extremal chain over `horizon` steps from (0, 0). Absorbed
 * atoms (x = 1) keep their y; nothing can be gained there since F_n(1, y) = f(y).
 */
inline ChainLaw extremal_chain_law(const ExtremalPolicy& policy, std::size_t horizon) {
    if (policy.horizon() < horizon) throw std::invalid_argument("extremal_chain_law: policy horizon is too short");
    ChainLaw law;
    law.atoms.push_back({0, 0.0, 1.0});
    for (std::size_t k = 0; k < horizon; ++k) {
        const std::size_t remaining = horizon - k;
        ChainLaw next;
        next.time = k + 1;
        for (const auto& atom : law.atoms) {
            if (atom.x == 1) {
                next.add(1, atom.y, atom.prob);
                continue;
            }
            const double a = policy.action(remaining, atom.y);
            if (a > 0.0) next.add(1, atom.y + a, atom.prob * a);
            if (a < 1.0) next.add(0, atom.y + a, atom.prob * (1.0 - a));
        }
        law = std::move(next);
    }
    law.time = horizon;
    return law;
}

/**
 * Compensator increments of the extremal chain along its non-absorbed branch:
 * entry k is Y_{k+1} - Y_k, played with horizon - k steps left.
 */
inline std::vector<double> extremal_increments(const ExtremalPolicy& policy, std::size_t horizon) {
    if (policy.horizon() < horizon) throw std::invalid_argument("extremal_increments: policy horizon is too short");
    std::vector<double> out;
    double y = 0.0;
    for (std::size_t k = 0; k < horizon; ++k) {
        const double a = policy.action(horizon - k, y);
        out.push_back(a);
        y += a;
    }
    return out;
}

}  // namespace compbound
