#pragma once

#include <cstdint>

#include "abrsim/units.hpp"

namespace abrsim::analysis {

/// A (possibly multi-hop) path for buffer/feedback sizing. `rtt` is the round
/// trip of one hop; `hops` multiplies the requirement.
struct PathSpec {
  SimTime rtt;
  CellRate link_rate;
  std::uint32_t nrm = 32;
  std::uint32_t hops = 1;
};

/// ceil(tbe / nrm). Throws std::domain_error for zero inputs.
std::uint64_t crm_from_tbe(std::uint64_t tbe, std::uint64_t nrm);

/// Cells needed to fill one hop both ways: ceil(rtt * link_rate).
std::uint64_t flight_capacity(const PathSpec& path);

/// Smallest Crm that lets a source keep the path full before the first
/// feedback returns: ceil(rtt * link_rate / nrm) * hops.
std::uint64_t min_crm(const PathSpec& path);

/// ACR after rule 6 fires on k + 1 consecutive forward RM cells with no
/// feedback, computed by iterating the per-cell decrement.
CellRate decay_after(CellRate icr, double cdf, CellRate mcr, std::uint64_t k);

/// max(mcr, icr * (1 - cdf)^(k + 1)), evaluated with pow().
CellRate decay_closed_form(CellRate icr, double cdf, CellRate mcr, std::uint64_t k);

/// Rule 6 keeps firing while forward RM cells leave at least crm times faster
/// than backward RM cells return: fwd_rate >= crm * bwd_rate.
bool trigger_predicate(CellRate fwd_rate, CellRate bwd_rate, std::uint64_t crm);

}  // namespace abrsim::analysis
