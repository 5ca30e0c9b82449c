/**
 * @file cli.hpp
 * @brief Argument parsing and subcommand dispatch for the `compbound` tool.
 *
 * Subcommands: bound, solve-recursion, solve-bellman, compare, test-shift,
 * simulate, report. Global flags: --seed, --threads, --json, --csv, -v.
 *
 * Exit codes: 0 ran and every internal check held, 1 runtime failure,
 * 2 usage error, 3 an internal check was breached (e.g. c_n > b_n beyond the
 * grid budget for a class-S function).
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "compbound/bellman.hpp"
#include "compbound/chain_sim.hpp"
#include "compbound/function_kit.hpp"
#include "compbound/io.hpp"
#include "compbound/recursion.hpp"
#include "compbound/shift_inequality.hpp"

namespace compbound::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitBreach = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct HelpRequested {
    std::string text;
};

struct RunConfig {
    std::string command;
    std::optional<FunctionSpec> function;

    std::optional<std::size_t> horizon;
    double step = 1.0 / 512.0;
    std::optional<double> tol;
    std::optional<std::size_t> max_iter;

    std::size_t trials = 10000;
    std::uint64_t seed = 0;
    std::size_t max_atoms = 5;
    double value_cap = 2.0;

    std::string chain = "intro";
    std::size_t n = 10;
    std::size_t paths = 100000;

    std::string json_path;
    std::string csv_path;
    std::string report_path;
    std::string policy_path;
    unsigned threads = 0;
    int verbosity = 0;

    SolverConfig solver() const {
        SolverConfig cfg;
        if (tol) cfg.b_tolerance = *tol;
        if (max_iter) cfg.max_iterations = *max_iter;
        return cfg;
    }
    Parallelism parallelism() const { return {threads}; }
    std::size_t horizon_or(std::size_t fallback) const { return horizon.value_or(fallback); }
};

/// Accepts decimals and fractions such as `1/512`.
inline double parse_step(const std::string& text) {
    auto number = [&](std::string_view part) {
        double v = 0.0;
        auto res = std::from_chars(part.data(), part.data() + part.size(), v);
        if (res.ec != std::errc{} || res.ptr != part.data() + part.size())
            throw UsageError("--step: malformed value '" + text + "'");
        return v;
    };
    const std::string_view sv(text);
    const auto slash = sv.find('/');
    const double v = slash == std::string_view::npos ? number(sv) : number(sv.substr(0, slash)) / number(sv.substr(slash + 1));
    if (!(v > 0.0 && v <= 1.0)) throw UsageError("--step must lie in (0, 1]");
    return v;
}

inline RunConfig parse_args(const std::vector<std::string>& args) {
    RunConfig cfg;
    CLI::App app{"Bounds on the compensator growth of [0,1]-bounded submartingales", "compbound"};
    app.fallthrough();
    app.require_subcommand(1);

    app.add_option("--seed", cfg.seed, "RNG seed");
    app.add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
    app.add_option("--json", cfg.json_path, "also write the JSON document here");
    app.add_option("--csv", cfg.csv_path, "write the tabular trace here");
    app.add_flag("-v,--verbose", cfg.verbosity, "progress on stderr");

    std::string function_text;
    std::string step_text;
    auto add_function = [&](CLI::App* sub) { sub->add_option("--f", function_text, "function spec, e.g. exp:lambda=0.5")->required(); };
    auto add_step = [&](CLI::App* sub) { sub->add_option("--step", step_text, "y-grid step, e.g. 1/512"); };
    std::size_t horizon = 0;
    auto add_horizon = [&](CLI::App* sub, bool required) {
        auto* opt = sub->add_option("--horizon", horizon, "number of steps N");
        if (required) opt->required();
    };

    auto* bound = app.add_subcommand("bound", "fixed-point bound B");
    add_function(bound);

    auto* recursion = app.add_subcommand("solve-recursion", "iterate b_n = G(b_{n-1})");
    add_function(recursion);
    double tol = 0.0;
    std::size_t max_iter = 0;
    recursion->add_option("--tol", tol, "stop when |b_n - b_{n-1}| < tol");
    recursion->add_option("--max-iter", max_iter, "iteration cap");

    auto* bellman = app.add_subcommand("solve-bellman", "value iteration for V_n(y)");
    add_function(bellman);
    add_horizon(bellman, true);
    add_step(bellman);

    auto* compare = app.add_subcommand("compare", "c_n from value iteration against b_n");
    add_function(compare);
    add_horizon(compare, false);
    add_step(compare);

    auto* shift = app.add_subcommand("test-shift", "random falsifier for the shift inequality");
    add_function(shift);
    shift->add_option("--trials", cfg.trials, "number of instances");
    shift->add_option("--max-atoms", cfg.max_atoms, "largest atom count");
    shift->add_option("--value-cap", cfg.value_cap, "atom values drawn from [0, cap]");
    shift->add_option("--report", cfg.report_path, "write the scan report JSON here");

    auto* simulate = app.add_subcommand("simulate", "exact law and Monte Carlo of two-point chains");
    simulate->add_option("--chain", cfg.chain, "intro or extremal")->check(CLI::IsMember({"intro", "extremal"}));
    simulate->add_option("--f", function_text, "function spec")->required();
    simulate->add_option("--n", cfg.n, "time horizon of the intro chain");
    simulate->add_option("--paths", cfg.paths, "Monte Carlo paths");
    add_horizon(simulate, false);
    add_step(simulate);
    simulate->add_option("--policy", cfg.policy_path, "policy JSON written by solve-bellman --json");

    auto* report = app.add_subcommand("report", "combined cross-check report");
    add_function(report);
    add_horizon(report, false);
    add_step(report);
    report->add_option("--trials", cfg.trials, "shift-scan instances");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    auto* chosen = app.get_subcommands().front();
    cfg.command = chosen->get_name();
    try {
        cfg.function = parse_function_spec(function_text);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (!step_text.empty()) cfg.step = parse_step(step_text);
    if (const auto* opt = chosen->get_option_no_throw("--horizon"); opt != nullptr && opt->count() > 0) {
        if (horizon < 1) throw UsageError("--horizon must be >= 1");
        cfg.horizon = horizon;
    }
    if (recursion->count("--tol") > 0) {
        if (!(tol > 0.0)) throw UsageError("--tol must be > 0");
        cfg.tol = tol;
    }
    if (recursion->count("--max-iter") > 0) {
        if (max_iter < 1) throw UsageError("--max-iter must be >= 1");
        cfg.max_iter = max_iter;
    }
    if (cfg.trials < 1) throw UsageError("--trials must be >= 1");
    if (cfg.max_atoms < 2) throw UsageError("--max-atoms must be >= 2");
    if (!(cfg.value_cap > 0.0)) throw UsageError("--value-cap must be > 0");
    if (cfg.paths < 2) throw UsageError("--paths must be >= 2");
    if (cfg.n < 1) throw UsageError("--n must be >= 1");
    return cfg;
}

inline RunConfig parse_args(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return parse_args(args);
}

// ---------------------------------------------------------------------------
// Commands

namespace detail {

inline void log(const RunConfig& cfg, const std::string& msg) {
    if (cfg.verbosity > 0) std::cerr << "[compbound] " << msg << '\n';
}

inline void emit(const RunConfig& cfg, const json& doc, std::ostream& out) {
    out << doc.dump(2) << '\n';
    if (!cfg.json_path.empty()) {
        auto file = open_output(cfg.json_path);
        file << doc.dump(2) << '\n';
    }
}

inline bool nondecreasing(const std::vector<double>& b) {
    for (std::size_t i = 1; i < b.size(); ++i)
        if (b[i] < b[i - 1] - 1e-12 * std::max(1.0, std::abs(b[i - 1]))) return false;
    return true;
}

inline GridConfig grid_for(const RunConfig& cfg, std::size_t horizon) { return GridConfig::for_horizon(horizon, cfg.step); }

inline bool class_s(const FunctionSpec& f) { return class_s_condition(f, diagnostic_grid()).holds; }

}  // namespace detail

inline int run_bound(const RunConfig& cfg, std::ostream& out) {
    const auto& f = *cfg.function;
    json doc{{"command", "bound"}, {"function", to_string(f)}};
    doc.update(to_json(solve_B(f, cfg.solver())));
    detail::emit(cfg, doc, out);
    return kExitOk;
}

inline int run_solve_recursion(const RunConfig& cfg, std::ostream& out) {
    const auto& f = *cfg.function;
    const auto trace = iterate(f, cfg.solver());
    if (!cfg.csv_path.empty()) {
        auto file = open_output(cfg.csv_path);
        CsvWriter csv(file);
        csv.row("n", "b_n", "a_star");
        csv.field(std::size_t{0}).field(trace.b[0]).field("");
        csv.end_row();
        for (std::size_t n = 1; n < trace.b.size(); ++n) csv.row(n, trace.b[n], trace.a_star[n - 1]);
    }
    const bool monotone = detail::nondecreasing(trace.b);
    json doc{{"command", "solve-recursion"}, {"function", to_string(f)}};
    doc.update(summary_json(trace));
    doc["b_1"] = trace.b.size() > 1 ? trace.b[1] : trace.b[0];
    doc["nondecreasing"] = monotone;
    detail::emit(cfg, doc, out);
    return monotone ? kExitOk : kExitBreach;
}

inline int run_solve_bellman(const RunConfig& cfg, std::ostream& out) {
    const auto& f = *cfg.function;
    const std::size_t horizon = *cfg.horizon;
    detail::log(cfg, "value iteration, horizon " + std::to_string(horizon));
    const auto table = value_iteration(f, horizon, detail::grid_for(cfg, horizon), cfg.solver(), cfg.parallelism());
    if (!cfg.csv_path.empty()) {
        auto file = open_output(cfg.csv_path);
        CsvWriter csv(file);
        csv.row("n", "y", "V", "a_star");
        for (std::size_t n = 0; n <= horizon; ++n) {
            const auto& v = table.values(n);
            const auto& a = table.actions(n);
            for (std::size_t i = 0; i < v.size(); ++i) csv.row(n, table.y_at(i), v[i], a[i]);
        }
    }
    json c = json::array();
    for (std::size_t n = 0; n <= horizon; ++n) c.push_back(table.value_at_origin(n));
    json doc{{"command", "solve-bellman"},
             {"function", to_string(f)},
             {"horizon", horizon},
             {"step", table.step()},
             {"y_max", table.grid().y_max},
             {"c", c},
             {"accuracy_flag", table.accuracy_flag},
             {"warnings", table.warnings}};
    out << doc.dump(2) << '\n';
    if (!cfg.json_path.empty()) {
        json artifact = doc;
        artifact["policy"] = to_json(extremal_policy(table));
        auto file = open_output(cfg.json_path);
        file << artifact.dump() << '\n';
    }
    return kExitOk;
}

inline int run_compare(const RunConfig& cfg, std::ostream& out) {
    const auto& f = *cfg.function;
    const std::size_t horizon = cfg.horizon_or(30);
    const auto result = compare_bounds(f, horizon, detail::grid_for(cfg, horizon), cfg.solver(), cfg.parallelism());
    if (!cfg.csv_path.empty()) {
        auto file = open_output(cfg.csv_path);
        CsvWriter csv(file);
        csv.row("n", "c_n", "b_n", "gap");
        for (const auto& row : result.rows) csv.row(row.n, row.c, row.b, row.gap);
    }
    const bool breach = result.class_s && !result.within_budget;
    json doc{{"command", "compare"}, {"function", to_string(f)}, {"horizon", horizon}, {"step", cfg.step}};
    doc.update(to_json(result));
    doc["verdict"] = breach ? "breach" : (result.class_s ? "pass" : "not in class S");
    detail::emit(cfg, doc, out);
    return breach ? kExitBreach : kExitOk;
}

inline int run_test_shift(const RunConfig& cfg, std::ostream& out) {
    const auto& f = *cfg.function;
    ScanConfig scan;
    scan.trials = cfg.trials;
    scan.seed = cfg.seed;
    scan.max_atoms = cfg.max_atoms;
    scan.value_cap = cfg.value_cap;
    const auto report = property_scan(f, scan, cfg.parallelism());
    const bool in_s = detail::class_s(f);
    json doc{{"command", "test-shift"}, {"function", to_string(f)}, {"seed", cfg.seed}};
    doc.update(to_json(report));
    doc["class_s"] = in_s;
    doc["verdict"] = report.violations == 0 ? "no violations" : "violations found";
    if (!cfg.report_path.empty()) {
        auto file = open_output(cfg.report_path);
        file << doc.dump(2) << '\n';
    }
    detail::emit(cfg, doc, out);
    return in_s && report.violations > 0 ? kExitBreach : kExitOk;
}

inline int run_simulate(const RunConfig& cfg, std::ostream& out) {
    const auto& f = *cfg.function;
    if (cfg.chain == "intro") {
        const auto rep = simulate_intro(cfg.n, cfg.paths, cfg.seed, f, cfg.parallelism());
        const double exact = exact_expectation(intro_chain_law(cfg.n), f);
        if (!cfg.csv_path.empty()) {
            auto file = open_output(cfg.csv_path);
            CsvWriter csv(file);
            csv.row("path_id", "k", "X", "Y", "M");
            for (std::size_t i = 0; i < cfg.paths; ++i) {
                const auto p = sample_intro_path(cfg.n, cfg.seed, i);
                for (std::size_t k = 0; k <= cfg.n; ++k) csv.row(i, k, p.X[k], p.Y[k], p.M[k]);
            }
        }
        const double z = rep.std_error > 0.0 ? (rep.mean - exact) / rep.std_error : 0.0;
        const bool ok = rep.max_doob_residual <= 1e-12 && rep.max_closed_form_residual <= 1e-12 && rep.bounds_ok;
        json doc{{"command", "simulate"}, {"chain", "intro"}, {"function", to_string(f)}, {"seed", cfg.seed}};
        doc.update(to_json(rep));
        doc["exact"] = exact;
        doc["z_score"] = z;
        doc["pathwise_ok"] = ok;
        detail::emit(cfg, doc, out);
        return ok ? kExitOk : kExitBreach;
    }

    std::optional<ExtremalPolicy> policy;
    if (!cfg.policy_path.empty()) {
        std::ifstream in(cfg.policy_path);
        if (!in) throw std::runtime_error("cannot read policy '" + cfg.policy_path + "'");
        const json artifact = json::parse(in);
        policy = policy_from_json(artifact.contains("policy") ? artifact.at("policy") : artifact);
        if (!(policy->spec() == f)) throw std::runtime_error("policy was computed for a different function");
    } else {
        const std::size_t h = cfg.horizon_or(30);
        detail::log(cfg, "no --policy given; running value iteration");
        policy = extremal_policy(value_iteration(f, h, detail::grid_for(cfg, h), cfg.solver(), cfg.parallelism()));
    }
    const std::size_t horizon = cfg.horizon_or(policy->horizon());
    if (horizon > policy->horizon()) throw std::runtime_error("--horizon exceeds the policy horizon");
    const auto law = extremal_chain_law(*policy, horizon);
    const double expectation = exact_expectation(law, f);
    const double target = policy->origin_values()[horizon];
    const double budget = grid_error_budget(policy->step());
    const bool ok = std::abs(expectation - target) <= budget;
    json doc{{"command", "simulate"},
             {"chain", "extremal"},
             {"function", to_string(f)},
             {"horizon", horizon},
             {"expectation", expectation},
             {"value_at_origin", target},
             {"difference", expectation - target},
             {"budget", budget},
             {"within_budget", ok},
             {"increments", extremal_increments(*policy, horizon)},
             {"law", to_json(law)}};
    detail::emit(cfg, doc, out);
    return ok ? kExitOk : kExitBreach;
}

/**
 * Combined report: bound, recursion, c_n/b_n comparison, shift scan and the
 * extremal-chain cross-check. all_pass (and exit 0) requires every check that
 * the function's class guarantees; a non-class-S function is reported as a
 * finding, not a failure.
 */
inline json run_report(const FunctionSpec& f, std::size_t horizon, double step, const ScanConfig& scan,
                       const SolverConfig& solver = {}, Parallelism par = {}) {
    const bool in_s = detail::class_s(f);
    json doc{{"command", "report"}, {"function", to_string(f)}, {"class_s", in_s}};
    json findings = json::array();
    bool all_pass = true;

    const auto bound = solve_B(f, solver);
    doc["B"] = bound.B ? json(*bound.B) : json("unbounded");
    doc["bound_cross_check"] = bound.cross_check_ok;

    const auto trace = iterate(f, solver);
    json rec = summary_json(trace);
    const bool monotone = detail::nondecreasing(trace.b);
    rec["nondecreasing"] = monotone;
    all_pass = all_pass && monotone;
    if (bound.B && bound.cross_check_ok) {
        const bool below = trace.last() <= *bound.B + 1e-6;
        rec["below_B"] = below;
        all_pass = all_pass && below;
    }
    doc["recursion"] = rec;

    const auto table = value_iteration(f, horizon, GridConfig::for_horizon(horizon, step), solver, par);
    const auto cmp = compare_bounds(table, solver);
    json cmp_json = to_json(cmp);
    cmp_json["horizon"] = horizon;
    cmp_json["step"] = step;
    doc["compare"] = cmp_json;
    if (in_s) all_pass = all_pass && cmp.within_budget;

    const auto shift = property_scan(f, scan, par);
    json shift_json{{"trials", shift.trials},
                    {"violations", shift.violations},
                    {"min_gap", shift.min_gap},
                    {"injected_gap", shift.injected_gap},
                    {"verdict", shift.violations == 0 ? "no violations" : "violations found"}};
    doc["shift_scan"] = shift_json;
    if (in_s) all_pass = all_pass && shift.violations == 0;

    const auto policy = extremal_policy(table);
    const double expectation = exact_expectation(extremal_chain_law(policy, horizon), f);
    const double target = table.value_at_origin(horizon);
    const bool chain_ok = std::abs(expectation - target) <= grid_error_budget(step);
    doc["chain_sim"] = {{"horizon", horizon},
                        {"extremal_expectation", expectation},
                        {"value_at_origin", target},
                        {"difference", expectation - target},
                        {"within_budget", chain_ok}};
    all_pass = all_pass && chain_ok;

    if (!in_s) findings.push_back("not in class S");
    if (shift.violations > 0) findings.push_back("shift inequality violated");
    if (!bound.B) findings.push_back("B unbounded");
    if (bound.B && !bound.cross_check_ok) findings.push_back("B cross-check failed");
    if (trace.status == RecursionStatus::Diverged) findings.push_back("recursion diverged");
    doc["findings"] = findings;
    doc["all_pass"] = all_pass;
    return doc;
}

inline int run_report_command(const RunConfig& cfg, std::ostream& out) {
    ScanConfig scan;
    scan.trials = cfg.trials;
    scan.seed = cfg.seed;
    scan.max_atoms = cfg.max_atoms;
    scan.value_cap = cfg.value_cap;
    const json doc = run_report(*cfg.function, cfg.horizon_or(20), cfg.step, scan, cfg.solver(), cfg.parallelism());
    detail::emit(cfg, doc, out);
    return doc.at("all_pass").get<bool>() ? kExitOk : kExitBreach;
}

inline int run(const RunConfig& cfg, std::ostream& out) {
    if (cfg.command == "bound") return run_bound(cfg, out);
    if (cfg.command == "solve-recursion") return run_solve_recursion(cfg, out);
    if (cfg.command == "solve-bellman") return run_solve_bellman(cfg, out);
    if (cfg.command == "compare") return run_compare(cfg, out);
    if (cfg.command == "test-shift") return run_test_shift(cfg, out);
    if (cfg.command == "simulate") return run_simulate(cfg, out);
    if (cfg.command == "report") return run_report_command(cfg, out);
    throw UsageError("unknown subcommand '" + cfg.command + "'");
}

/// Whole-program entry: parse, dispatch, map errors to exit codes.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        return run(parse_args(argc, argv), out);
    } catch (const HelpRequested& h) {
        out << h.text;
        return kExitOk;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace compbound::cli
