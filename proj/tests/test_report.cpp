#include "osmosis/report.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

using namespace osmosis;

TEST_CASE("evolution report serialization", "[report]") {
    const auto g = make_grid(8, 8);
    const Image v = oracle::random_image(g, 1);
    const Image f = oracle::random_image(g, 2);
    SchemeConfig cfg;
    cfg.max_steps = 5;
    cfg.stop_rule = StopRule::FixedSteps;
    const auto ev = evolve(f, v, canonical_drift(v), cfg);
    const json j = to_json(ev.report);
    CHECK(j.at("steps") == 5);
    CHECK(j.at("status") == "fixed-steps");
    CHECK(j.at("mass").size() == 5);
    CHECK(j.at("residuals").size() == 5);
    for (const char* key : {"wall_ms", "mass_drift_relative", "min_value", "final_relative_change"})
        CHECK(j.contains(key));
    CHECK(j.at("min_value") == ev.report.final_min());
    CHECK(to_json(ev.report, false).at("wall_ms") == 0.0);
    const json round = json::parse(j.dump());
    CHECK(round == j);
}

TEST_CASE("metric and config serialization", "[report]") {
    MetricReport m;
    m.mean = 2.0;
    m.ssim = 0.5;
    const json j = to_json(m);
    CHECK(j.at("ssim") == 0.5);
    CHECK(j.at("energy").is_null());
    const json c = to_json(SchemeConfig{}, SolverConfig{});
    CHECK(c.at("scheme") == "semi-implicit");
    CHECK(c.at("tau") == 1e3);
    CHECK(c.at("epsilon") == 1e-7);
    CHECK(c.at("solver") == "stabilized-krylov");
}

TEST_CASE("shadow spec parsing", "[report]") {
    auto s = shadow_spec_from_json(json::parse(R"({"rect":[1,2,5,7],"c":0.4,"sigma":2,"mask_width":6})"));
    REQUIRE(s.rect.has_value());
    CHECK(s.rect->row0 == 1);
    CHECK(s.rect->col1 == 7);
    CHECK(s.c == 0.4);
    CHECK(s.sigma == 2.0);
    CHECK(s.mask_width == 6);

    s = shadow_spec_from_json(json::parse(R"({"polygon":[[0,0],[0,4],[4,0]],"c":1.8})"));
    CHECK_FALSE(s.rect.has_value());
    CHECK(s.polygon.size() == 3);
    CHECK(s.c == 1.8);
    CHECK(s.mask_width == kThinMaskWidth);

    CHECK_THROWS_AS(shadow_spec_from_json(json::parse(R"({"c":0.5})")), ArgumentError);
    CHECK_THROWS_AS(shadow_spec_from_json(json::parse(R"({"rect":[1,2,3]})")), ArgumentError);
    CHECK_THROWS_AS(shadow_spec_from_json(json::parse(R"({"rect":[1,2,3,4],"c":-1})")), ArgumentError);
    CHECK_THROWS_AS(shadow_spec_from_json(json::parse(R"({"rect":"x"})")), ArgumentError);
}
