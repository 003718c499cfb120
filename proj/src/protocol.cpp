#include "abrsim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abrsim {

namespace {

// Pacing gap at `acr`, or nullopt when the source has to fall back to
// keep-alive probing.
std::optional<SimTime> pacing_gap(CellRate acr) {
  if (acr.is_zero()) return std::nullopt;
  const SimTime gap = cell_tx_time(acr);
  if (gap > kKeepAlivePeriod) return std::nullopt;
  return gap;
}

}  // namespace

bool is_valid_cdf(double cdf) {
  if (cdf == 0.0) return true;
  if (!(cdf >= 1.0 / 64.0 && cdf <= 1.0)) return false;
  int exponent = 0;
  return std::frexp(cdf, &exponent) == 0.5;
}

void SourceParams::validate() const {
  if (pcr.is_zero()) throw std::invalid_argument("pcr must be positive");
  if (!(mcr <= icr)) throw std::invalid_argument("mcr must not exceed icr");
  if (!(icr <= pcr)) throw std::invalid_argument("icr must not exceed pcr");
  if (nrm == 0) throw std::invalid_argument("nrm must be positive");
  if (!(rif > 0.0 && rif <= 1.0)) throw std::invalid_argument("rif must lie in (0, 1]");
  if (!is_valid_cdf(cdf)) {
    throw std::invalid_argument("cdf must be 0 or a power of two in [1/64, 1]");
  }
  if (crm == 0) throw std::invalid_argument("crm must be positive");
  if (tbe) {
    if (*tbe == 0) throw std::invalid_argument("tbe must be positive");
    const std::uint64_t derived = (*tbe + nrm - 1) / nrm;
    if (derived != crm) {
      throw std::invalid_argument("crm must equal ceil(tbe / nrm)");
    }
  }
}

SourceState initial_source_state(const SourceParams& params) {
  SourceState s;
  s.acr = params.icr;
  s.cells_since_rm = params.nrm - 1;
  return s;
}

SourceState apply_rule6(SourceState state, const SourceParams& params) {
  if (state.unacked_fwd_rm < params.crm) return state;
  state.acr = std::max(params.mcr, CellRate::from_cps(state.acr.cps() - state.acr.cps() * params.cdf));
  ++state.rule6_firings;
  if (!state.cells_before_first_rule6) state.cells_before_first_rule6 = state.cells_sent_total;
  return state;
}

SourceState on_backward_rm(SourceState state, const SourceParams& params, const RmFields& rm) {
  if (rm.direction != Direction::Backward) {
    throw std::logic_error("on_backward_rm: forward RM cell delivered to source");
  }
  const double increased = state.acr.cps() + params.rif * params.pcr.cps();
  const double capped = std::min(increased, rm.er.cps());
  state.acr = CellRate::from_cps(std::clamp(capped, params.mcr.cps(), params.pcr.cps()));
  if (!rm.bn) state.unacked_fwd_rm = 0;
  return state;
}

SimTime earliest_departure(const SourceState& state, SimTime now) {
  if (!state.has_emitted) return std::max(now, state.next_departure);
  const auto gap = pacing_gap(state.acr);
  const SimTime paced = state.last_emit + gap.value_or(kKeepAlivePeriod);
  return std::max(now, std::min(state.next_departure, paced));
}

Emission next_cell(SourceState state, const SourceParams& params, VcId vc, SimTime now) {
  Cell cell;
  cell.vc = vc;
  cell.seq = state.cells_sent_total;
  cell.emitted_at = now;

  if (state.cells_since_rm + 1 >= params.nrm) {
    state = apply_rule6(state, params);
    cell.rm = RmFields{Direction::Forward, false, params.pcr, state.acr};
    ++state.unacked_fwd_rm;
    ++state.fwd_rm_sent_total;
    state.cells_since_rm = 0;
  } else {
    ++state.cells_since_rm;
  }
  ++state.cells_sent_total;
  state.last_emit = now;
  state.has_emitted = true;

  if (const auto gap = pacing_gap(state.acr)) {
    state.quiescent = false;
    state.next_departure = now + *gap;
  } else {
    if (!state.quiescent) ++state.quiescent_engagements;
    state.quiescent = true;
    // next emission is a probe RM cell
    state.cells_since_rm = params.nrm - 1;
    state.next_departure = now + kKeepAlivePeriod;
  }
  return {cell, state};
}

RmFields turnaround(const RmFields& rm) {
  if (rm.direction != Direction::Forward) {
    throw std::logic_error("turnaround: RM cell is already backward");
  }
  RmFields out = rm;
  out.direction = Direction::Backward;
  return out;
}

}  // namespace abrsim
