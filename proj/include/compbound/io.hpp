// JSON and CSV emission for the CLI and for saved artifacts.
#pragma once

#include <charconv>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "compbound/bellman.hpp"
#include "compbound/chain_sim.hpp"
#include "compbound/function_kit.hpp"
#include "compbound/recursion.hpp"
#include "compbound/shift_inequality.hpp"

namespace compbound {

using json = nlohmann::ordered_json;

/// RFC 4180 style writer; numbers use the shortest round-trip form.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    CsvWriter& field(double v) {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof buf, v);
        return raw(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
    }
    CsvWriter& field(std::size_t v) { return raw(std::to_string(v)); }
    CsvWriter& field(int v) { return raw(std::to_string(v)); }
    CsvWriter& field(std::string_view text) {
        if (text.find_first_of(",\"\r\n") == std::string_view::npos) return raw(text);
        std::string quoted = "\"";
        for (char c : text) {
            if (c == '"') quoted += '"';
            quoted += c;
        }
        quoted += '"';
        return raw(quoted);
    }
    CsvWriter& field(const char* text) { return field(std::string_view(text)); }

    template <class... Fields>
    void row(const Fields&... fields) {
        (field(fields), ...);
        end_row();
    }
    void end_row() {
        out_ << "\r\n";
        first_ = true;
    }

private:
    CsvWriter& raw(std::string_view text) {
        if (!first_) out_ << ',';
        out_ << text;
        first_ = false;
        return *this;
    }

    std::ostream& out_;
    bool first_ = true;
};

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

inline json to_json(const DiscreteRV& rv) {
    json atoms = json::array();
    for (const auto& a : rv.atoms()) atoms.push_back({{"value", a.value}, {"prob", a.prob}});
    return atoms;
}

inline json to_json(const ScanReport& r) {
    return {{"trials", r.trials},
            {"min_gap", r.min_gap},
            {"argmin_instance", {{"shift", r.argmin_instance.shift}, {"atoms", to_json(r.argmin_instance.rv)}}},
            {"violations", r.violations},
            {"injected_gap", r.injected_gap}};
}

inline json to_json(const BoundResult& r) {
    json j;
    if (r.B) {
        j["B"] = *r.B;
        j["max_slope_at_B"] = r.max_slope_at_B;
    } else {
        j["B"] = "unbounded";
    }
    j["cross_check_ok"] = r.cross_check_ok;
    return j;
}

inline json summary_json(const RecursionTrace& t) {
    json j{{"status", to_string(t.status)}, {"steps", t.stop_step}, {"last_b", t.last()}};
    if (auto lim = t.limit()) j["limit"] = *lim;
    return j;
}

inline json to_json(const CompareResult& r) {
    json rows = json::array();
    for (const auto& row : r.rows) rows.push_back({{"n", row.n}, {"c", row.c}, {"b", row.b}, {"gap", row.gap}});
    return {{"budget", r.budget},
            {"max_abs_gap", r.max_abs_gap},
            {"within_budget", r.within_budget},
            {"class_s", r.class_s},
            {"rows", rows}};
}

inline json to_json(const ChainLaw& law) {
    json atoms = json::array();
    for (const auto& a : law.atoms) atoms.push_back({{"x", a.x}, {"y", a.y}, {"prob", a.prob}});
    return {{"time", law.time}, {"atoms", atoms}};
}

inline json to_json(const IntroSimReport& r) {
    return {{"n", r.n},
            {"paths", r.paths},
            {"mean", r.mean},
            {"std_error", r.std_error},
            {"max_doob_residual", r.max_doob_residual},
            {"max_closed_form_residual", r.max_closed_form_residual},
            {"bounds_ok", r.bounds_ok}};
}

/// Saved policy: everything extremal_chain_law needs, plus V_n(0).
inline json to_json(const ExtremalPolicy& p) {
    return {{"kind", "extremal_policy"},
            {"function", to_string(p.spec())},
            {"horizon", p.horizon()},
            {"step", p.step()},
            {"origin_values", p.origin_values()},
            {"actions", p.actions()}};
}

inline ExtremalPolicy policy_from_json(const json& j) {
    if (j.value("kind", "") != "extremal_policy") throw std::runtime_error("not an extremal policy artifact");
    return ExtremalPolicy(parse_function_spec(j.at("function").get<std::string>()),
                          j.at("horizon").get<std::size_t>(), j.at("step").get<double>(),
                          j.at("actions").get<std::vector<std::vector<double>>>(),
                          j.at("origin_values").get<std::vector<double>>());
}

}  // namespace compbound
