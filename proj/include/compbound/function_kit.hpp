/**
 * @file function_kit.hpp
 * @brief Increasing test functions f on [0, inf) with f, f', f'', f^{-1}.
 *
 * Four built-in families:
 *   - Exponential  f(x) = exp(lambda x), lambda > 0
 *   - Power        f(x) = x^m, m >= 1
 *   - QuadConcaveDeriv  f(x) = x + x^2/2 (convex, concave derivative)
 *   - Remark2Piecewise  f(x) = x on [0,1], (1 + x^2)/2 on [1, inf)
 *
 * Every bound in the library is computed for one of these. Values are
 * immutable; all operations are pure.
 *
 * Textual form (used by the CLI and in reports):
 *   exp:lambda=0.5   pow:m=2   quad   remark2
 */
#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace compbound {

enum class Family { Exponential, Power, QuadConcaveDeriv, Remark2Piecewise };

class FunctionSpec {
public:
    static FunctionSpec exponential(double lambda) {
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw std::invalid_argument("lambda must be > 0");
        return FunctionSpec(Family::Exponential, lambda);
    }
    static FunctionSpec power(double m) {
        if (!(m >= 1.0) || !std::isfinite(m))
            throw std::invalid_argument("m must be >= 1");
        return FunctionSpec(Family::Power, m);
    }
    static FunctionSpec quad_concave_deriv() { return FunctionSpec(Family::QuadConcaveDeriv, 0.0); }
    static FunctionSpec remark2_piecewise() { return FunctionSpec(Family::Remark2Piecewise, 0.0); }

    Family family() const noexcept { return family_; }
    /// lambda for Exponential, m for Power, 0 otherwise.
    double param() const noexcept { return param_; }

    /// Convex families: Exponential, Power, QuadConcaveDeriv.
    bool is_convex() const noexcept { return family_ != Family::Remark2Piecewise; }

    friend bool operator==(const FunctionSpec&, const FunctionSpec&) = default;

private:
    FunctionSpec(Family family, double param) : family_(family), param_(param) {}

    Family family_;
    double param_;
};

namespace detail {

inline void require_nonnegative(double x, const char* what) {
    if (!(x >= 0.0)) throw std::domain_error(std::string(what) + ": argument must be >= 0");
}

}  // namespace detail

inline double eval(const FunctionSpec& f, double x) {
    detail::require_nonnegative(x, "eval");
    switch (f.family()) {
        case Family::Exponential: return std::exp(f.param() * x);
        case Family::Power: {
            const double m = f.param();
            if (m == 1.0) return x;
            if (m == 2.0) return x * x;
            if (m == 3.0) return x * x * x;
            return std::pow(x, m);
        }
        case Family::QuadConcaveDeriv: return x + 0.5 * x * x;
        case Family::Remark2Piecewise: return x <= 1.0 ? x : 0.5 * (1.0 + x * x);
    }
    return 0.0;
}

/// f'(x). At the Remark2Piecewise kink x = 1 the left derivative (1) is returned.
inline double deriv(const FunctionSpec& f, double x) {
    detail::require_nonnegative(x, "deriv");
    switch (f.family()) {
        case Family::Exponential: return f.param() * std::exp(f.param() * x);
        case Family::Power: {
            const double m = f.param();
            if (m == 1.0) return 1.0;
            if (m == 2.0) return 2.0 * x;
            if (m == 3.0) return 3.0 * x * x;
            return m * std::pow(x, m - 1.0);
        }
        case Family::QuadConcaveDeriv: return 1.0 + x;
        case Family::Remark2Piecewise: return x <= 1.0 ? 1.0 : x;
    }
    return 0.0;
}

/// f''(x), closed form for every family. Power with 1 < m < 2 is +inf at 0.
inline double second_deriv(const FunctionSpec& f, double x) {
    detail::require_nonnegative(x, "second_deriv");
    switch (f.family()) {
        case Family::Exponential: return f.param() * f.param() * std::exp(f.param() * x);
        case Family::Power: {
            const double m = f.param();
            if (m == 1.0) return 0.0;
            if (m == 2.0) return 2.0;
            if (x == 0.0) return m < 2.0 ? INFINITY : 0.0;
            return m * (m - 1.0) * std::pow(x, m - 2.0);
        }
        case Family::QuadConcaveDeriv: return 1.0;
        case Family::Remark2Piecewise: return x <= 1.0 ? 0.0 : 1.0;
    }
    return 0.0;
}

/// The unique x >= 0 with f(x) = y. Requires y >= f(0).
inline double inverse(const FunctionSpec& f, double y) {
    const double f0 = eval(f, 0.0);
    if (!(y >= f0)) throw std::range_error("inverse: y is below f(0)");
    switch (f.family()) {
        case Family::Exponential: return std::log(y) / f.param();
        case Family::Power: {
            const double m = f.param();
            if (m == 1.0) return y;
            if (m == 2.0) return std::sqrt(y);
            if (m == 3.0) return std::cbrt(y);
            return std::pow(y, 1.0 / m);
        }
        // x = -1 + sqrt(1 + 2y), written without cancellation.
        case Family::QuadConcaveDeriv: return 2.0 * y / (1.0 + std::sqrt(1.0 + 2.0 * y));
        case Family::Remark2Piecewise: return y <= 1.0 ? y : std::sqrt(2.0 * y - 1.0);
    }
    return 0.0;
}

struct ClassSCheck {
    bool holds = true;
    std::optional<double> first_violation;  ///< grid point where f''/f' went up
};

/// Sampled test of the class-S condition: f''/f' nonincreasing on `grid`.
inline ClassSCheck class_s_condition(const FunctionSpec& f, const std::vector<double>& grid,
                                     double tol = 1e-9) {
    if (grid.size() < 2) throw std::invalid_argument("class_s_condition: grid needs at least 2 points");
    auto ratio = [&](double x) {
        const double d1 = deriv(f, x);
        const double d2 = second_deriv(f, x);
        // f' = 0 only at the left end of a convex increasing f, where log f' -> -inf.
        if (d1 == 0.0) return f.is_convex() ? INFINITY : (d2 > 0.0 ? INFINITY : 0.0);
        return d2 / d1;
    };
    double prev = ratio(grid.front());
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (grid[i] < grid[i - 1]) throw std::invalid_argument("class_s_condition: grid must be sorted");
        const double cur = ratio(grid[i]);
        if (cur > prev + tol) return {false, grid[i]};
        prev = cur;
    }
    return {};
}

/// 0, 0.05, ..., 20: default sample for class_s_condition.
inline std::vector<double> diagnostic_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 400; ++i) grid.push_back(0.05 * i);
    return grid;
}

// ---------------------------------------------------------------------------
// Text form

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, std::string_view token) {
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw std::invalid_argument("malformed number in function spec token '" + std::string(token) + "'");
    return v;
}

}  // namespace detail

inline std::string to_string(const FunctionSpec& f) {
    switch (f.family()) {
        case Family::Exponential: return "exp:lambda=" + detail::format_double(f.param());
        case Family::Power: return "pow:m=" + detail::format_double(f.param());
        case Family::QuadConcaveDeriv: return "quad";
        case Family::Remark2Piecewise: return "remark2";
    }
    return {};
}

/// Parses `exp:lambda=L`, `pow:m=M`, `quad`, `remark2`. Errors name the offending token.
inline FunctionSpec parse_function_spec(std::string_view text) {
    const auto colon = text.find(':');
    const std::string_view head = text.substr(0, colon);
    const std::string_view tail = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

    auto single_param = [&](std::string_view key) {
        if (tail.empty())
            throw std::invalid_argument("function spec '" + std::string(head) + "' needs parameter '" +
                                        std::string(key) + "='");
        const auto eq = tail.find('=');
        if (eq == std::string_view::npos || tail.substr(0, eq) != key)
            throw std::invalid_argument("unknown parameter token '" + std::string(tail) + "' (expected '" +
                                        std::string(key) + "=<value>')");
        return detail::parse_double(tail.substr(eq + 1), tail);
    };
    auto no_params = [&] {
        if (colon != std::string_view::npos)
            throw std::invalid_argument("unexpected parameter token '" + std::string(tail) + "' for '" +
                                        std::string(head) + "'");
    };

    if (head == "exp") return FunctionSpec::exponential(single_param("lambda"));
    if (head == "pow") return FunctionSpec::power(single_param("m"));
    if (head == "quad") {
        no_params();
        return FunctionSpec::quad_concave_deriv();
    }
    if (head == "remark2") {
        no_params();
        return FunctionSpec::remark2_piecewise();
    }
    throw std::invalid_argument("unknown function family token '" + std::string(head) + "'");
}

}  // namespace compbound
