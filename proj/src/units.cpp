#include "abrsim/units.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace abrsim {

namespace {

SimTime from_scaled(double value, double ps_per_unit, const char* what) {
  if (!std::isfinite(value) || value < 0.0) {
    throw std::domain_error(std::string("time must be finite and nonnegative: ") + what);
  }
  const double ps = std::round(value * ps_per_unit);
  if (ps >= 18446744073709551615.0) {
    throw std::domain_error(std::string("time out of range: ") + what);
  }
  return SimTime::from_ps(static_cast<std::uint64_t>(ps));
}

}  // namespace

SimTime SimTime::from_us(double us) { return from_scaled(us, 1e6, "us"); }
SimTime SimTime::from_ms(double ms) { return from_scaled(ms, 1e9, "ms"); }
SimTime SimTime::from_seconds(double s) { return from_scaled(s, 1e12, "s"); }

SimTime SimTime::operator-(SimTime other) const {
  if (other.ps_ > ps_) {
    throw std::logic_error("SimTime subtraction would be negative");
  }
  return SimTime(ps_ - other.ps_);
}

CellRate CellRate::from_cps(double cells_per_second) {
  if (!std::isfinite(cells_per_second) || cells_per_second < 0.0) {
    throw std::domain_error("cell rate must be finite and nonnegative");
  }
  return CellRate(cells_per_second);
}

CellRate CellRate::from_mbps(double mbps) { return mbps_to_cps(mbps); }

CellRate mbps_to_cps(double rate_mbps) {
  if (!std::isfinite(rate_mbps) || rate_mbps < 0.0) {
    throw std::domain_error("rate in Mbps must be finite and nonnegative");
  }
  return CellRate::from_cps(rate_mbps * 1e6 / kCellBits);
}

SimTime cell_tx_time(CellRate link_rate) {
  if (link_rate.is_zero()) {
    throw std::domain_error("cell_tx_time: zero link rate");
  }
  const double ps = std::round(1e12 / link_rate.cps());
  if (ps >= 18446744073709551615.0) {
    return SimTime::max();
  }
  return SimTime::from_ps(static_cast<std::uint64_t>(ps));
}

}  // namespace abrsim
