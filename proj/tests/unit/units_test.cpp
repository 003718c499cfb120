#include "doctest.h"

#include <random>
#include <stdexcept>

#include "abrsim/units.hpp"

using namespace abrsim;

TEST_CASE("mbps_to_cps converts through the 424-bit cell") {
  CHECK(mbps_to_cps(0.0).cps() == 0.0);
  // 155.52e6 / 424 and 140e6 / 424
  CHECK(mbps_to_cps(155.52).cps() == doctest::Approx(366792.45283).epsilon(1e-10));
  CHECK(mbps_to_cps(140.0).cps() == doctest::Approx(330188.67925).epsilon(1e-10));
  CHECK_THROWS_AS(mbps_to_cps(-1.0), std::domain_error);
  CHECK_THROWS_AS(CellRate::from_cps(-0.5), std::domain_error);
}

TEST_CASE("cell_tx_time rounds to the nearest picosecond") {
  CHECK(cell_tx_time(CellRate::from_cps(366792.45)).ps() == 2'726'337);
  CHECK(cell_tx_time(mbps_to_cps(155.52)).ps() == 2'726'337);
  CHECK(cell_tx_time(CellRate::from_cps(1.0)).ps() == 1'000'000'000'000ULL);
  // round(1e12 / 330188.68) = round(3028571.43)
  CHECK(cell_tx_time(CellRate::from_cps(330188.68)).ps() == 3'028'571);
  CHECK_THROWS_AS(cell_tx_time(CellRate{}), std::domain_error);
}

TEST_CASE("mbps round trip and monotone serialization time") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rate(0.0, 1e4);
  for (int i = 0; i < 1'000'000; ++i) {
    const double x = rate(rng);
    const double back = mbps_to_cps(x).mbps();
    if (x == 0.0) {
      REQUIRE(back == 0.0);
    } else {
      REQUIRE(std::abs(back - x) <= 1e-12 * x);
    }
  }
  std::uniform_real_distribution<double> cps(1.0, 1e7);
  for (int i = 0; i < 10'000; ++i) {
    const double a = cps(rng);
    const double b = a * 1.001;
    REQUIRE(cell_tx_time(CellRate::from_cps(b)) < cell_tx_time(CellRate::from_cps(a)));
  }
}

TEST_CASE("SimTime arithmetic") {
  const auto t = SimTime::from_ms(275) + SimTime::from_us(5);
  CHECK(t.ps() == 275'005'000'000ULL);
  CHECK((t - SimTime::from_ms(275)).ps() == 5'000'000);
  CHECK_THROWS_AS(SimTime::from_ms(1) - SimTime::from_ms(2), std::logic_error);
  CHECK(SimTime::max() + SimTime::from_ps(1) == SimTime::max());
  // the clock covers far more than ten seconds
  CHECK(SimTime::max().seconds() > 10.0);
  CHECK_THROWS_AS(SimTime::from_ms(-1.0), std::domain_error);
}
