#include <doctest.h>

#include <limits>

#include "intrinsic/suites.hpp"

using namespace intrinsic;
using nlohmann::json;

TEST_CASE("record classification") {
    CHECK(check_leq("a", "x", 1.0, 2.0, 0.0).status == Status::pass);
    CHECK(check_leq("a", "x", 2.0, 1.0, 0.5).status == Status::fail);
    CHECK(check_leq("a", "x", 2.0, 1.0, 1.0).status == Status::pass);
    CHECK(check_leq("a", "x", 1.0, std::numeric_limits<double>::infinity(), 0.0).status == Status::vacuous);
    CHECK(check_equal("a", "x", 1.0, 1.0 + 1e-9, 1e-8).status == Status::pass);
    CHECK(check_equal("a", "x", std::nan(""), 1.0, 1.0).status == Status::fail);
}

TEST_CASE("non-finite numbers are tagged in JSON") {
    Report r("demo", 3);
    r.add(check_leq("inf", "x", 1.0, std::numeric_limits<double>::infinity(), 0.0));
    auto j = r.to_json();
    CHECK(j["records"][0]["rhs"].is_null());
    CHECK(j["records"][0]["rhs_tag"] == "+inf");
    CHECK(j["summary"]["vacuous"] == 1);
    CHECK(r.exit_code() == 0);
    r.add(make_status("u", "x", Status::unsupported, "n/a"));
    r.add(make_status("i", "x", Status::inconclusive, "n/a"));
    CHECK(r.exit_code() == 0);
    r.add(check_leq("f", "x", 2.0, 1.0, 0.0));
    CHECK(r.exit_code() == 1);
}

TEST_CASE("deterministic dump ignores timing") {
    Report a("demo", 1), b("demo", 1);
    a.add_timing("s", 1.0);
    b.add_timing("s", 2.0);
    a.set_wall_seconds(3.0);
    CHECK(deterministic_dump(a.to_json()) == deterministic_dump(b.to_json()));
}

TEST_CASE("config parsing") {
    SuiteConfig d = parse_config(json::object());
    CHECK(d.T == 0.5);
    CHECK(d.h == 1e-3);
    CHECK(d.paths == 100000);
    CHECK(d.quadrature_points == 40);
    CHECK_THROWS_AS(parse_config(json{{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"T", "half"}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"spaces", json::array({json{{"dim", 3}, {"kappa", -1}}})}}), ConfigError);
    SuiteConfig c = parse_config(json{{"seed", 9}, {"radial", json::array({json{{"profile", "gaussian"}, {"rate", 2.0}}})}});
    CHECK(c.seed == 9);
    CHECK(c.radial.at(0).profile == "gaussian");
    // Round trip through the defaults dump.
    SuiteConfig r = parse_config(json::parse(default_config_json().dump()));
    CHECK(r.paths == d.paths);
}

TEST_CASE("empty battery gives an empty report with exit code 0") {
    SuiteConfig cfg;
    cfg.empty_battery = true;
    for (const std::string& s : suite_names()) {
        Report r = run_suite(s, cfg);
        CHECK(r.records().empty());
        CHECK(r.exit_code() == 0);
    }
    CHECK_THROWS(run_suite("nope", cfg));
}

TEST_CASE("small seeded runs are reproducible across worker counts") {
    SuiteConfig cfg;
    cfg.cases = 3;
    cfg.jobs = 1;
    std::string a = deterministic_dump(run_suite("part1", cfg).to_json());
    cfg.jobs = 3;
    std::string b = deterministic_dump(run_suite("part1", cfg).to_json());
    CHECK(a == b);
    cfg.seed = 2;
    CHECK(deterministic_dump(run_suite("part1", cfg).to_json()) != a);
}
