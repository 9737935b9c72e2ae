#pragma once

// JSON and CSV serialization. Needs nlohmann/json (vendor/json.hpp) on the include path.

#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"
#include "nahm/nahm.hpp"

namespace nahm::io {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

inline json to_json(const QuadratureSpec& q) {
    return {{"rule", to_string(q.rule)}, {"panels", q.panels}, {"order", q.order}, {"tol", q.tol},
            {"endpoint_handling", q.endpoint_handling}};
}

inline json to_json(const NahmParams& p) { return {{"b", p.b}, {"hbar", p.hbar}, {"d", p.d}}; }

inline json to_json(const ZetaResult& z) {
    return {{"quantity", z.quantity},
            {"s_re", z.s.real()},
            {"s_im", z.s.imag()},
            {"value_re", z.value.real()},
            {"value_im", z.value.imag()},
            {"err", z.err_estimate},
            {"route", to_string(z.route)},
            {"subtraction", to_string(z.subtraction)},
            {"b", z.params.b},
            {"hbar", z.params.hbar},
            {"d", z.params.d},
            {"quad", to_json(z.quad)}};
}

inline json to_json(const MassCorrection& m) {
    return {{"quantity", "mass_correction"},
            {"value_re", m.value.real()},
            {"value_im", m.value.imag()},
            {"err", m.err_estimate},
            {"route", to_string(m.zeta_prime.route)},
            {"zeta_prime", to_json(m.zeta_prime)}};
}

inline json to_json(const BandStructure& b) {
    return {{"edges", b.edges},
            {"periodic", b.periodic},
            {"antiperiodic", b.antiperiodic},
            {"err", b.convergence},
            {"route", "hill"}};
}

inline json to_json(std::complex<double> z) { return {{"re", z.real()}, {"im", z.imag()}}; }

inline json to_json(const Mat2c& m) {
    json out = json::array();
    for (int i = 0; i < 2; ++i) {
        json row = json::array();
        for (int j = 0; j < 2; ++j) row.push_back(to_json(m(i, j)));
        out.push_back(row);
    }
    return out;
}

inline json to_json(const Vec2c& v) { return json::array({to_json(v(0)), to_json(v(1))}); }

inline json to_json(const ThetaRecovery& r) {
    return {{"U", to_json(r.U)},         {"D", to_json(r.D)},       {"c_star", r.c_star},
            {"mismatch", r.mismatch},    {"period", r.period},      {"tau", to_json(r.tau)},
            {"omega_c0", r.omega.c0},    {"omega_c1", r.omega.c1},  {"evaluations", r.evaluations},
            {"route", "theta"}};
}

// Value with route and error attached.
inline json measured(double value, double err, const std::string& route) {
    return {{"value", value}, {"err", err}, {"route", route}};
}
inline json measured(std::complex<double> value, double err, const std::string& route) {
    return {{"value_re", value.real()}, {"value_im", value.imag()}, {"err", err}, {"route", route}};
}

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string r = "\"";
    for (char c : s) r += c == '"' ? std::string("\"\"") : std::string(1, c);
    return r + "\"";
}

inline void flatten(const json& j, const std::string& path, std::vector<std::pair<std::string, std::string>>& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), path.empty() ? it.key() : path + "." + it.key(), out);
    } else if (j.is_array()) {
        for (size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "[" + std::to_string(i) + "]", out);
    } else if (j.is_number_float()) {
        out.emplace_back(path, format_number(j.get<double>()));
    } else if (j.is_string()) {
        out.emplace_back(path, j.get<std::string>());
    } else {
        out.emplace_back(path, j.dump());
    }
}

}  // namespace detail

// key,value rows; floats printed with 17 significant digits so they round-trip like the JSON.
inline std::string to_csv(const json& j) {
    std::vector<std::pair<std::string, std::string>> rows;
    detail::flatten(j, "", rows);
    std::string s = "key,value\n";
    for (auto& [k, v] : rows) s += detail::csv_field(k) + "," + detail::csv_field(v) + "\n";
    return s;
}

// Plain table with a header row.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> r) { rows.push_back(std::move(r)); }
    std::string str() const {
        std::string s;
        for (size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + detail::csv_field(columns[i]);
        s += "\n";
        for (auto& r : rows) {
            for (size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + detail::csv_field(r[i]);
            s += "\n";
        }
        return s;
    }
};

}  // namespace nahm::io
