#pragma once
// Target-file parsing, report serialization and CSV formatting.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "qcmap/orbit_realizer.hpp"
#include "qcmap/suites.hpp"

namespace qcmap {

using json = nlohmann::json;

/// Shortest text that round-trips a double (17 significant digits).
inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Non-finite values become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const Vector& v)
{
    json a = json::array();
    for (int i = 0; i < v.size(); ++i)
        a.push_back(number(v(i)));
    return a;
}

/// {"waypoints": [[...], ...], "closed": bool, "C": number}
inline TargetSet parse_target(const json& j)
{
    try {
        if (!j.is_object())
            throw error(errc::parse, "target must be a JSON object");
        if (!j.contains("waypoints") || !j.at("waypoints").is_array())
            throw error(errc::parse, "target needs a \"waypoints\" array");
        TargetSet t;
        for (const auto& w : j.at("waypoints")) {
            if (!w.is_array() || w.empty())
                throw error(errc::parse, "each waypoint must be a non-empty array of numbers");
            Vector v(static_cast<int>(w.size()));
            for (std::size_t i = 0; i < w.size(); ++i) {
                if (!w[i].is_number())
                    throw error(errc::parse, "waypoint coordinates must be numbers");
                v(static_cast<int>(i)) = w[i].get<double>();
            }
            t.waypoints.push_back(v);
        }
        if (j.contains("closed")) {
            if (!j.at("closed").is_boolean())
                throw error(errc::parse, "\"closed\" must be a boolean");
            t.closed = j.at("closed").get<bool>();
        }
        if (j.contains("C")) {
            if (!j.at("C").is_number())
                throw error(errc::parse, "\"C\" must be a number");
            t.c = j.at("C").get<double>();
        }
        t.validate();
        return t;
    } catch (const json::exception& e) {
        throw error(errc::parse, e.what());
    }
}

inline TargetSet load_target(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw error(errc::parse, "cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw error(errc::parse, path + ": " + e.what());
    }
    return parse_target(j);
}

inline json to_json(const Check& c)
{
    json j{{"name", c.name},
           {"relation", to_string(c.relation)},
           {"bound", number(c.bound)},
           {"worst_value", number(c.worst_value)},
           {"worst_margin", number(c.margin())},
           {"worst_point", to_json(c.worst_point)},
           {"evaluated", c.evaluated},
           {"failures", c.failures},
           {"pass", c.pass}};
    if (!c.message.empty())
        j["message"] = c.message;
    return j;
}

inline json to_json(const SuiteReport& r)
{
    json checks = json::array();
    for (const Check& c : r.checks)
        checks.push_back(to_json(c));
    json info = json::object();
    for (const auto& [k, v] : r.info)
        info[k] = number(v);
    return json{{"suite", r.suite}, {"n", r.n}, {"pass", r.pass()}, {"checks", checks}, {"info", info}};
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        throw error(errc::invalid_input, "cannot write " + path);
    out << text;
}

} // namespace qcmap
