#include <catch2/catch_amalgamated.hpp>

#include "exosim/config.hpp"

using namespace exosim;

TEST_CASE("an empty document yields the full default configuration") {
  for (const char* doc : {"", "   \n\t ", "{}"}) {
    const FullConfig c = load_config(doc);
    REQUIRE(c.anthro.height_m == 1.75);
    REQUIRE(c.anthro.mass_kg == 69.4);
    REQUIRE(c.exo.total_mass == 15.0);
    REQUIRE(c.exo.link_mass_sum() == Catch::Approx(15.0).margin(1e-12));
    REQUIRE(c.environment.load_kg == 0.0);
    REQUIRE(c.controller.strategy == Strategy::Blend);
    REQUIRE_FALSE(c.controller.ankle_actuated);
    REQUIRE(c.calibration.speed_kmh == 3.5);
    REQUIRE(c.protocol.slope_rad == Catch::Approx(deg2rad(10.0)));
    REQUIRE(c.seed == 42);
    REQUIRE_FALSE(c.scenario.has_value());
  }
}

TEST_CASE("semantic errors name the offending field path") {
  REQUIRE_THROWS_MATCHES(load_config(R"({"environment": {"load_mass": -1}})"), ConfigError,
                         Catch::Matchers::Predicate<ConfigError>([](const ConfigError& e) {
                           return e.path == "environment.load_mass";
                         }));
  REQUIRE_THROWS_MATCHES(load_config(R"({"anthro": {"height_m": 0}})"), ConfigError,
                         Catch::Matchers::Predicate<ConfigError>([](const ConfigError& e) {
                           return e.path == "anthro.height_m";
                         }));
  REQUIRE_THROWS_MATCHES(load_config(R"({"controller": {"strategy": "pid"}})"), ConfigError,
                         Catch::Matchers::Predicate<ConfigError>([](const ConfigError& e) {
                           return e.path.find("strategy") != std::string::npos;
                         }));
}

TEST_CASE("unknown fields are rejected with their path") {
  REQUIRE_THROWS_MATCHES(load_config(R"({"exoo": {}})"), ConfigError,
                         Catch::Matchers::Predicate<ConfigError>(
                             [](const ConfigError& e) { return e.path == "exoo"; }));
  REQUIRE_THROWS_MATCHES(load_config(R"({"gait": {"cadence": 90}})"), ConfigError,
                         Catch::Matchers::Predicate<ConfigError>(
                             [](const ConfigError& e) { return e.path == "gait.cadence"; }));
}

TEST_CASE("type errors are reported with their path") {
  REQUIRE_THROWS_MATCHES(load_config(R"({"anthro": {"mass_kg": "heavy"}})"), ConfigError,
                         Catch::Matchers::Predicate<ConfigError>([](const ConfigError& e) {
                           return e.path == "anthro.mass_kg";
                         }));
}

TEST_CASE("parse errors report line and column") {
  try {
    load_config("{\n  \"anthro\": {\n  , }");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    REQUIRE(std::string(e.what()).find("line 3") != std::string::npos);
    REQUIRE(std::string(e.what()).find("column") != std::string::npos);
  }
}

TEST_CASE("configuration round-trips through serialization") {
  const char* doc = R"({
    "anthro": {"height_m": 1.8, "mass_kg": 75},
    "environment": {"slope_deg": 5, "load_mass": 10},
    "controller": {"strategy": "fsm", "ankle_actuated": true},
    "gait": {"noise_enabled": true, "noise_sigma": 3.5},
    "scenario": {"ground": "treadmill", "speed_levels_kmh": [0, 4], "duration_s": 60},
    "seed": 1234
  })";
  const FullConfig a = load_config(doc);
  const FullConfig b = load_config(serialize_config(a));
  REQUIRE(full_config_to_json(a) == full_config_to_json(b));
  REQUIRE(b.controller.strategy == Strategy::Fsm);
  REQUIRE(b.scenario->speed_levels_kmh == std::vector<double>{0.0, 4.0});
  REQUIRE(b.seed == 1234);

  SECTION("overridden height rescales the default segments") {
    REQUIRE(a.exo.shank_length == Catch::Approx(0.246 * 1.8));
  }
}

TEST_CASE("partial exo overrides keep derived defaults consistent") {
  const FullConfig c = load_config(R"({"exo": {"shank_length": 0.5}})");
  REQUIRE(c.exo.shank_length == 0.5);
  REQUIRE(c.exo.shank_com == Catch::Approx(0.25));
  REQUIRE(c.exo.shank_inertia == Catch::Approx(1.2 * 0.25 / 12.0));

  SECTION("inconsistent masses are caught by validation") {
    REQUIRE_THROWS_AS(load_config(R"({"exo": {"back_mass": 9}})"), ConfigError);
  }
}
