#include "doctest.h"

#include <string>

#include "abrsim/scenario.hpp"

using namespace abrsim;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("empty config gives the default single-switch LAN") {
  const auto s = parse_scenario("");
  REQUIRE(s.sources.size() == 1);
  CHECK(s.sources[0].icr_mbps == 140.0);
  CHECK(s.sources[0].cdf == 1.0 / 16);
  CHECK(s.switches.size() == 1);
  CHECK(s.links.size() == 2);
  REQUIRE(s.vcs.size() == 1);
  CHECK(s.vcs[0].path == std::vector<std::string>{"S1", "sw1", "D1"});
  CHECK(s.run.until == SimTime::from_ms(1200));
  CHECK(s.run.steady_window().start == SimTime::from_ms(600));
}

TEST_CASE("bundled figure configuration") {
  const auto s = load_scenario(std::string(ABRSIM_SCENARIO_DIR) + "/fig3.cfg");
  CHECK(s.vcs.size() == 2);
  CHECK(s.links[1].delay == SimTime::from_ms(275));
  CHECK(s.source("abr").crm == 32);
  CHECK(s.run.windows.size() == 3);
  const auto topo = to_topology(s);
  CHECK(topo.nodes.size() == 4);
  CHECK(topo.vcs[1].path.front() == "D1");
}

TEST_CASE("render then parse is the identity") {
  for (const char* name : {"fig3.cfg", "lan.cfg", "two_hop.cfg"}) {
    const auto s = load_scenario(std::string(ABRSIM_SCENARIO_DIR) + "/" + name);
    CHECK(parse_scenario(render_scenario(s)) == s);
  }
  auto s = parse_scenario("[source.x]\ntbe = 1000\n[run]\nuntil_ms = 3.5\nwindows_ms = 0:1, 1:3\n");
  CHECK(s.sources[0].crm == 32);
  CHECK(parse_scenario(render_scenario(s)) == s);
}

TEST_CASE("fractions and plain numbers") {
  CHECK(parse_real("1/16") == 0.0625);
  CHECK(parse_real(" 0.5 ") == 0.5);
  CHECK_THROWS(parse_real("1/0"));
  CHECK_THROWS(parse_real("abc"));
}

TEST_CASE("parse errors name the line") {
  CHECK(error_of("[run]\nbogus = 1\n").find("line 2") != std::string::npos);
  CHECK_FALSE(error_of("pcr_mbps = 1\n").empty());
  CHECK_FALSE(error_of("[widget.x]\n").empty());
  CHECK_FALSE(error_of("[run]\nuntil_ms = 1\nuntil_ms = 2\n").empty());
  CHECK_FALSE(error_of("[run]\n[run]\n").empty());
  CHECK_FALSE(error_of("[source.a]\ncdf = 0.05\n").empty());
  CHECK_FALSE(error_of("[source.a]\ntbe = 1000\ncrm = 5\n").empty());
  CHECK_FALSE(error_of("[source.a]\n[source.b]\n[vc.v]\npath = S1, sw1, D1\n[switch.sw1]\n"
                       "[link.l1]\nfrom = S1\nto = sw1\n[link.l2]\nfrom = sw1\nto = D1\n")
                  .empty());
  CHECK_FALSE(error_of("[switch.sw1]\n[link.l1]\nfrom = S1\nto = sw1\n[vc.v]\npath = S1, sw1, D1\n").empty());
}

TEST_CASE("overrides") {
  auto s = parse_scenario("[source.a]\ntbe = 1024\n");
  apply_override(s, "crm", "100");
  CHECK(s.sources[0].crm == 100);
  CHECK_FALSE(s.sources[0].tbe.has_value());
  apply_override(s, "cdf", "1/64");
  CHECK(s.sources[0].cdf == 1.0 / 64);
  apply_override(s, "until_ms", "5");
  CHECK(s.run.until == SimTime::from_ms(5));
  CHECK_THROWS_AS(apply_override(s, "cdf", "0.05"), ConfigError);
  CHECK_THROWS_AS(apply_override(s, "mystery", "1"), ConfigError);
}
