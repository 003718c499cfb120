#pragma once

#include <cstdint>
#include <optional>

#include "abrsim/units.hpp"

namespace abrsim {

using VcId = std::uint32_t;

enum class Direction : std::uint8_t { Forward, Backward };

/// Resource-management payload. Sources always originate bn == false.
struct RmFields {
  Direction direction = Direction::Forward;
  bool bn = false;
  CellRate er;
  CellRate ccr;

  bool operator==(const RmFields&) const = default;
};

/// A simulated cell. `rm` is empty for data cells.
struct Cell {
  VcId vc = 0;
  std::optional<RmFields> rm;
  std::uint64_t seq = 0;
  SimTime emitted_at;

  bool is_rm() const { return rm.has_value(); }
  Direction direction() const { return rm ? rm->direction : Direction::Forward; }
};

/// ABR source parameter block. Rates are cell rates; crm counts RM cells and
/// tbe counts cells.
struct SourceParams {
  CellRate pcr;
  CellRate mcr;
  CellRate icr;
  std::uint32_t nrm = 32;
  double rif = 1.0;
  double cdf = 1.0 / 16.0;
  std::uint64_t crm = 32;
  std::optional<std::uint64_t> tbe;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

/// True when `cdf` is 0 or a power of two in [1/64, 1].
bool is_valid_cdf(double cdf);

/// Without feedback a source whose pacing gap would exceed this period
/// stops pacing and emits one forward RM probe per period instead.
inline constexpr SimTime kKeepAlivePeriod = SimTime::from_ps(100'000'000'000ULL);

struct SourceState {
  CellRate acr;
  /// In-rate forward RM cells sent since the last BN=0 backward RM cell.
  std::uint64_t unacked_fwd_rm = 0;
  /// Cells emitted since the last RM cell; an RM cell goes out when this
  /// reaches nrm - 1, so a fresh source opens with an RM cell.
  std::uint32_t cells_since_rm = 0;
  SimTime next_departure;
  SimTime last_emit;
  bool has_emitted = false;
  std::uint64_t cells_sent_total = 0;
  std::uint64_t fwd_rm_sent_total = 0;
  std::uint64_t rule6_firings = 0;
  /// cells_sent_total at the moment rule 6 first reduced ACR.
  std::optional<std::uint64_t> cells_before_first_rule6;
  bool quiescent = false;
  std::uint64_t quiescent_engagements = 0;

  bool operator==(const SourceState&) const = default;
};

SourceState initial_source_state(const SourceParams& params);

/// Cutoff decrease applied before each in-rate forward RM emission.
SourceState apply_rule6(SourceState state, const SourceParams& params);

/// ER feedback: additive increase of rif * pcr capped at the carried ER,
/// clamped to [mcr, pcr]. Only bn == false resets the missing-RM counter.
SourceState on_backward_rm(SourceState state, const SourceParams& params, const RmFields& rm);

/// Earliest instant the next cell may leave after an ACR change at `now`.
SimTime earliest_departure(const SourceState& state, SimTime now);

struct Emission {
  Cell cell;
  SourceState state;
};

/// Emits the next cell of a persistent source at `now`.
Emission next_cell(SourceState state, const SourceParams& params, VcId vc, SimTime now);

/// Destination turnaround. Throws std::logic_error for a backward cell.
RmFields turnaround(const RmFields& rm);

}  // namespace abrsim
