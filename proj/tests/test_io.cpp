#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "qcmap/io.hpp"

using namespace qcmap;

namespace {

errc parse_code(const std::string& text)
{
    try {
        parse_target(json::parse(text));
    } catch (const error& e) {
        return e.code();
    }
    FAIL("no error raised for " << text);
    return errc::invalid_input;
}

} // namespace

TEST_CASE("target JSON round trip", "[io]")
{
    const TargetSet t = parse_target(json::parse(R"({"waypoints": [[2, 0, 0], [0, 2, 0]], "closed": true, "C": 4})"));
    REQUIRE(t.waypoints.size() == 2);
    CHECK(t.closed);
    CHECK(t.c == 4.0);
    CHECK(t.waypoints[1](1) == 2.0);
    const TargetSet d = parse_target(json::parse(R"({"waypoints": [[1.5, 0, 0]]})"));
    CHECK_FALSE(d.closed);
    CHECK(d.c == 2.0);
}

TEST_CASE("malformed targets raise parse errors", "[io]")
{
    CHECK(parse_code("[]") == errc::parse);
    CHECK(parse_code(R"({"points": []})") == errc::parse);
    CHECK(parse_code(R"({"waypoints": [[1, "a", 0]]})") == errc::parse);
    CHECK(parse_code(R"({"waypoints": [[]]})") == errc::parse);
    CHECK(parse_code(R"({"waypoints": [[1, 0, 0]], "closed": 1})") == errc::parse);
    CHECK(parse_code(R"({"waypoints": [[1, 0, 0]], "C": "big"})") == errc::parse);
    CHECK(parse_code(R"({"waypoints": [[1, 0, 0], [0, 1]]})") == errc::invalid_input);
    CHECK(parse_code(R"({"waypoints": [[9, 0, 0]]})") == errc::invalid_input);
}

TEST_CASE("target files", "[io]")
{
    const auto dir = std::filesystem::temp_directory_path();
    const auto bad = (dir / "qcmap_bad_target.json").string();
    write_text(bad, "{\"waypoints\": [[1, 0");
    try {
        load_target(bad);
        FAIL("truncated file accepted");
    } catch (const error& e) {
        CHECK(e.code() == errc::parse);
    }
    const auto good = (dir / "qcmap_good_target.json").string();
    write_text(good, R"({"waypoints": [[1, 0, 0], [0, 1, 0]]})");
    CHECK(load_target(good).waypoints.size() == 2);
    std::filesystem::remove(bad);
    std::filesystem::remove(good);
    CHECK_THROWS_AS(load_target((dir / "qcmap_missing_target.json").string()), error);
}

TEST_CASE("number formatting", "[io]")
{
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) {
        const std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(number(std::nan("")).is_null());
    CHECK(number(INFINITY).is_null());
    CHECK(number(1.5).get<double>() == 1.5);
}

TEST_CASE("suite reports serialize every check", "[io]")
{
    SuiteReport r{"demo", 3, {}, {{"K", 2.0}}};
    Check c;
    c.name = "bound";
    c.relation = Relation::ge;
    c.bound = 1.0;
    c.worst_value = 0.5;
    c.worst_point = Vector::Ones(2);
    c.failures = 3;
    c.evaluated = 10;
    r.checks.push_back(c);
    const json j = to_json(r);
    CHECK(j["suite"] == "demo");
    CHECK(j["pass"] == false);
    CHECK(j["checks"][0]["relation"] == ">=");
    CHECK(j["checks"][0]["worst_margin"].get<double>() == -0.5);
    CHECK(j["checks"][0]["worst_point"].size() == 2);
    CHECK(j["info"]["K"].get<double>() == 2.0);
}
