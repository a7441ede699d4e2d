#include <doctest.h>

#include <string>

#include "medflow/config.hpp"

using namespace medflow;

TEST_CASE("minimal config fills the documented defaults") {
  const std::string text =
      "[domain]\nkind = torus\nd = 2\n"
      "[sampler]\nn = 5000\n"
      "[kernel]\nr = 0.05\n"
      "[evolution]\nT = 0.001\n";
  const auto cfg = parse_config_text(text);
  CHECK(cfg.kernel == "annulus:0.9");
  CHECK(cfg.mode == "levelset");
  CHECK(cfg.seed == 0);
  CHECK(cfg.n == 5000);
}

TEST_CASE("h inconsistent with r^2 names both keys") {
  const std::string text =
      "[kernel]\nr = 0.05\nh = 0.01\n";
  CHECK_THROWS_WITH_AS(parse_config_text(text),
                       doctest::Contains("kernel.h"), ConfigError);
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("kernel.r") != std::string::npos);
  }
  // consistent h parses fine
  const auto ok = parse_config_text("[kernel]\nr = 0.1\nh = 0.010000000000000002\n");
  CHECK(ok.h.has_value());
}

TEST_CASE("young angle demands a box domain") {
  const std::string text = "[evolution]\nmode = youngangle\n";
  CHECK_THROWS_WITH_AS(parse_config_text(text), doctest::Contains("YoungAngle requires Box"),
                       ConfigError);
}

TEST_CASE("unknown keys are hard errors with their line") {
  const std::string text = "[domain]\nkind = torus\ntypo_key = 1\n";
  CHECK_THROWS_WITH_AS(parse_config_text(text), doctest::Contains(":3"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[nonsense]\n"), ConfigError);
}

TEST_CASE("serialize / parse round-trips") {
  RunConfig cfg;
  cfg.kernel = "ball";
  cfg.r = 0.03;
  cfg.mode = "mbo";
  cfg.snapshots = {0.001, 0.002};
  cfg.seed = 99;
  const std::string s1 = serialize_config(cfg);
  const auto back = parse_config_text(s1);
  CHECK(serialize_config(back) == s1);
  CHECK(config_hash(back) == config_hash(cfg));

  RunConfig other = cfg;
  other.seed = 100;
  CHECK(config_hash(other) != config_hash(cfg));
}
