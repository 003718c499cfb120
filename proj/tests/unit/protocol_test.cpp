#include "doctest.h"

#include <random>
#include <stdexcept>

#include "abrsim/protocol.hpp"

using namespace abrsim;

namespace {

SourceParams table1() {
  SourceParams p;
  p.pcr = mbps_to_cps(155.52);
  p.mcr = CellRate{};
  p.icr = mbps_to_cps(140.0);
  return p;
}

RmFields backward(CellRate er, bool bn = false) { return {Direction::Backward, bn, er, {}}; }

}  // namespace

TEST_CASE("cdf validity") {
  for (double c : {0.0, 1.0, 0.5, 0.25, 0.125, 1.0 / 16, 1.0 / 32, 1.0 / 64}) CHECK(is_valid_cdf(c));
  for (double c : {0.05, 0.3, 1.0 / 128, 2.0, -0.5, 0.75}) CHECK_FALSE(is_valid_cdf(c));
}

TEST_CASE("parameter validation") {
  auto p = table1();
  CHECK_NOTHROW(p.validate());
  p.cdf = 0.05;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = table1();
  p.icr = mbps_to_cps(200);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = table1();
  p.tbe = 1100;
  p.crm = 32;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.crm = 32;
  p.tbe = 1024;
  CHECK_NOTHROW(p.validate());
  p.tbe = 1025;
  p.crm = 33;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("rule 6 multiplies by 1 - cdf once crm RM cells are unacknowledged") {
  const auto p = table1();
  auto s = initial_source_state(p);
  s.unacked_fwd_rm = 31;
  CHECK(apply_rule6(s, p).acr == s.acr);
  s.unacked_fwd_rm = 32;
  const auto d = apply_rule6(s, p);
  CHECK(d.acr.mbps() == doctest::Approx(131.25).epsilon(1e-12));
  CHECK(d.rule6_firings == 1);

  auto z = p;
  z.cdf = 0.0;
  CHECK(apply_rule6(s, z).acr == s.acr);
  auto one = p;
  one.cdf = 1.0;
  CHECK(apply_rule6(s, one).acr.is_zero());
  one.mcr = mbps_to_cps(10);
  CHECK(apply_rule6(s, one).acr == one.mcr);
}

TEST_CASE("feedback raises ACR up to ER and resets the counter unless BN is set") {
  const auto p = table1();
  auto s = initial_source_state(p);
  s.unacked_fwd_rm = 40;
  s.acr = mbps_to_cps(10);
  auto r = on_backward_rm(s, p, backward(mbps_to_cps(50)));
  CHECK(r.acr.mbps() == doctest::Approx(50.0));
  CHECK(r.unacked_fwd_rm == 0);
  auto bn = on_backward_rm(s, p, backward(mbps_to_cps(50), true));
  CHECK(bn.unacked_fwd_rm == 40);
  CHECK_THROWS_AS(on_backward_rm(s, p, RmFields{}), std::logic_error);

  auto small = p;
  small.rif = 1.0 / 16;
  r = on_backward_rm(s, small, backward(p.pcr));
  CHECK(r.acr.cps() == doctest::Approx(s.acr.cps() + p.pcr.cps() / 16));
}

TEST_CASE("first cell is RM and later RM cells are nrm apart") {
  const auto p = table1();
  auto s = initial_source_state(p);
  SimTime now;
  std::vector<std::uint64_t> rm_at;
  for (std::uint64_t i = 0; i < 32 * 50; ++i) {
    auto e = next_cell(s, p, 0, now);
    if (e.cell.is_rm()) {
      CHECK(e.cell.rm->direction == Direction::Forward);
      CHECK(e.cell.rm->er == p.pcr);
      CHECK(e.cell.rm->ccr == e.state.acr);
      rm_at.push_back(i);
    }
    s = e.state;
    now = e.state.next_departure;
  }
  REQUIRE(rm_at.size() == 50);
  CHECK(rm_at.front() == 0);
  for (std::size_t i = 1; i < rm_at.size(); ++i) CHECK(rm_at[i] - rm_at[i - 1] == 32);
}

TEST_CASE("without feedback rule 6 first fires after crm * nrm cells") {
  const auto p = table1();
  auto s = initial_source_state(p);
  SimTime now;
  while (!s.cells_before_first_rule6) {
    auto e = next_cell(s, p, 0, now);
    s = e.state;
    now = s.next_departure;
  }
  CHECK(*s.cells_before_first_rule6 == 1024);
  CHECK(s.acr.mbps() == doctest::Approx(131.25));
}

TEST_CASE("pacing follows ACR") {
  const auto p = table1();
  auto s = initial_source_state(p);
  auto e = next_cell(s, p, 0, SimTime{});
  CHECK(e.state.next_departure == cell_tx_time(p.icr));
  CHECK(earliest_departure(e.state, SimTime{}) == cell_tx_time(p.icr));
  // a faster ACR pulls the next departure forward
  auto fast = e.state;
  fast.acr = p.pcr;
  CHECK(earliest_departure(fast, SimTime{}) == cell_tx_time(p.pcr));
}

TEST_CASE("zero ACR falls back to 100 ms RM probes") {
  auto p = table1();
  p.cdf = 1.0;
  p.crm = 1;
  auto s = initial_source_state(p);
  auto e = next_cell(s, p, 0, SimTime{});  // RM, unacked 1
  e = next_cell(e.state, p, 0, e.state.next_departure);
  for (int i = 0; i < 40 && !e.state.quiescent; ++i) e = next_cell(e.state, p, 0, e.state.next_departure);
  REQUIRE(e.state.quiescent);
  CHECK(e.state.acr.is_zero());
  CHECK(e.state.quiescent_engagements == 1);
  const auto t = e.state.next_departure;
  CHECK(t - e.state.last_emit == kKeepAlivePeriod);
  auto probe = next_cell(e.state, p, 0, t);
  CHECK(probe.cell.is_rm());
  CHECK(probe.state.quiescent_engagements == 1);
}

TEST_CASE("turnaround flips direction only") {
  const RmFields f{Direction::Forward, false, mbps_to_cps(100), mbps_to_cps(20)};
  const auto b = turnaround(f);
  CHECK(b.direction == Direction::Backward);
  CHECK(b.er == f.er);
  CHECK(b.ccr == f.ccr);
  CHECK_THROWS_AS(turnaround(b), std::logic_error);
}

TEST_CASE("ACR stays within [MCR, PCR] under random events") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mbps(0.0, 200.0);
  std::uniform_int_distribution<int> pick(0, 2);
  const double cdfs[] = {0.0, 1.0, 0.5, 1.0 / 16, 1.0 / 64};
  std::uniform_int_distribution<int> pick_cdf(0, 4);
  auto p = table1();
  p.mcr = mbps_to_cps(1.0);
  p.crm = 2;
  for (int trial = 0; trial < 100; ++trial) {
    p.cdf = cdfs[pick_cdf(rng)];
    auto s = initial_source_state(p);
    SimTime now;
    for (int i = 0; i < 1000; ++i) {
      const int op = pick(rng);
      if (op == 0) {
        s = on_backward_rm(s, p, backward(mbps_to_cps(mbps(rng)), pick(rng) == 0));
      } else {
        auto e = next_cell(s, p, 0, now);
        s = e.state;
        now = earliest_departure(s, now);
      }
      REQUIRE(s.acr >= p.mcr);
      REQUIRE(s.acr <= p.pcr);
    }
  }
}
