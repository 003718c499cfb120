#pragma once

#include <compare>
#include <cstdint>
#include <limits>

namespace abrsim {

/// Bits in one ATM cell (53 bytes).
inline constexpr double kCellBits = 424.0;

/// Simulation clock. Integer picoseconds so every run is bit-reproducible;
/// the same type is used for absolute instants and for durations.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_ps(std::uint64_t ps) { return SimTime(ps); }
  static SimTime from_us(double us);
  static SimTime from_ms(double ms);
  static SimTime from_seconds(double s);
  static constexpr SimTime max() { return SimTime(std::numeric_limits<std::uint64_t>::max()); }

  constexpr std::uint64_t ps() const { return ps_; }
  constexpr double seconds() const { return static_cast<double>(ps_) * 1e-12; }
  constexpr double ms() const { return static_cast<double>(ps_) * 1e-9; }
  constexpr double us() const { return static_cast<double>(ps_) * 1e-6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  /// Saturates at max() instead of wrapping.
  constexpr SimTime operator+(SimTime d) const {
    return ps_ > std::numeric_limits<std::uint64_t>::max() - d.ps_ ? max() : SimTime(ps_ + d.ps_);
  }
  /// Difference of two instants; the left operand must not be earlier.
  SimTime operator-(SimTime other) const;
  SimTime& operator+=(SimTime d) { return *this = *this + d; }

 private:
  constexpr explicit SimTime(std::uint64_t ps) : ps_(ps) {}
  std::uint64_t ps_ = 0;
};

/// A nonnegative cell rate, stored in cells per second.
class CellRate {
 public:
  constexpr CellRate() = default;

  /// Throws std::domain_error for negative or non-finite input.
  static CellRate from_cps(double cells_per_second);
  static CellRate from_mbps(double mbps);

  constexpr double cps() const { return cps_; }
  constexpr double mbps() const { return cps_ * kCellBits / 1e6; }
  constexpr bool is_zero() const { return cps_ == 0.0; }

  constexpr auto operator<=>(const CellRate&) const = default;

 private:
  constexpr explicit CellRate(double cps) : cps_(cps) {}
  double cps_ = 0.0;
};

CellRate mbps_to_cps(double rate_mbps);

/// Per-cell serialization time at `link_rate`, rounded to the nearest
/// picosecond. Throws std::domain_error for a zero rate.
SimTime cell_tx_time(CellRate link_rate);

}  // namespace abrsim
