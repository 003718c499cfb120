#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>

#include "abrsim/protocol.hpp"
#include "abrsim/units.hpp"

namespace abrsim {

/// Load measured over one averaging interval at an output port.
struct Measurement {
  CellRate input_rate;
  std::uint32_t num_active = 0;
  double load_factor = 0.0;
};

/// Explicit-rate parameters of an output port.
struct EricaConfig {
  double target_utilization = 0.9;
  std::uint32_t interval_cell_limit = 30;
  SimTime interval_time_limit = SimTime::from_ps(20'000'000);  // 20 us

  void validate() const;
};

/// One output port of an output-buffered switch: an unbounded FIFO plus the
/// ERICA measurement state for the link it drives.
///
/// An averaging interval closes after `interval_cell_limit` ABR input cells
/// or `interval_time_limit`, whichever comes first. The time limit is driven
/// externally (the engine calls end_interval from a timer); the cell limit is
/// checked in enqueue. Every queued cell counts toward the measured load but
/// only forward-direction cells mark their VC active on the port; backward RM
/// cells belong to VCs whose data leaves through the opposite port.
class PortState {
 public:
  PortState(CellRate link_rate, EricaConfig config, SimTime start = {});

  /// Appends `cell`. Returns the closed interval's measurement when this
  /// arrival reached the cell limit.
  std::optional<Measurement> enqueue(const Cell& cell, SimTime now);

  /// Closes the current interval. A zero-length or empty interval leaves the
  /// measurement used for ER computation unchanged.
  Measurement end_interval(SimTime now);

  /// ERICA explicit rate for `vc` from measurement `m`.
  CellRate compute_er(const Measurement& m, VcId vc) const;

  /// Lowers rm.er to this port's ER for `vc` using the latest measurement.
  RmFields stamp_backward(RmFields rm, VcId vc) const;

  std::optional<Cell> service();

  SimTime service_time() const { return tx_time_; }
  CellRate link_rate() const { return link_rate_; }
  CellRate target_rate() const;
  const EricaConfig& config() const { return config_; }

  std::size_t queue_length() const { return queue_.size(); }
  std::size_t max_queue_length() const { return max_queue_; }
  const std::deque<Cell>& queue() const { return queue_; }
  std::uint64_t enqueued_total() const { return enqueued_; }
  std::uint64_t dequeued_total() const { return dequeued_; }

  std::uint64_t accumulated_cells() const { return accum_cells_; }
  SimTime interval_start() const { return interval_start_; }
  const std::set<VcId>& active_vcs() const { return active_vcs_; }
  std::optional<CellRate> recorded_ccr(VcId vc) const;
  const std::optional<Measurement>& latest_measurement() const { return latest_; }

 private:
  CellRate link_rate_;
  SimTime tx_time_;
  EricaConfig config_;

  std::deque<Cell> queue_;
  std::size_t max_queue_ = 0;
  std::uint64_t enqueued_ = 0;
  std::uint64_t dequeued_ = 0;

  std::uint64_t accum_cells_ = 0;
  SimTime interval_start_;
  std::set<VcId> active_vcs_;
  std::map<VcId, CellRate> ccr_table_;
  std::optional<Measurement> latest_;
};

}  // namespace abrsim
