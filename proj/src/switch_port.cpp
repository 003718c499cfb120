#include "abrsim/switch_port.hpp"

#include <algorithm>
#include <stdexcept>

namespace abrsim {

void EricaConfig::validate() const {
  if (!(target_utilization > 0.0 && target_utilization <= 1.0)) {
    throw std::invalid_argument("target_utilization must lie in (0, 1]");
  }
  if (interval_cell_limit == 0) throw std::invalid_argument("interval cell limit must be positive");
  if (interval_time_limit == SimTime{}) throw std::invalid_argument("interval time limit must be positive");
}

PortState::PortState(CellRate link_rate, EricaConfig config, SimTime start)
    : link_rate_(link_rate), tx_time_(cell_tx_time(link_rate)), config_(config), interval_start_(start) {
  config_.validate();
}

CellRate PortState::target_rate() const {
  return CellRate::from_cps(config_.target_utilization * link_rate_.cps());
}

std::optional<Measurement> PortState::enqueue(const Cell& cell, SimTime now) {
  queue_.push_back(cell);
  ++enqueued_;
  max_queue_ = std::max(max_queue_, queue_.size());

  ++accum_cells_;
  if (cell.direction() == Direction::Forward) {
    active_vcs_.insert(cell.vc);
    if (cell.rm) ccr_table_[cell.vc] = cell.rm->ccr;
  }
  if (accum_cells_ >= config_.interval_cell_limit) return end_interval(now);
  return std::nullopt;
}

Measurement PortState::end_interval(SimTime now) {
  Measurement m;
  const SimTime elapsed = now - interval_start_;
  if (elapsed.ps() > 0) {
    m.input_rate = CellRate::from_cps(static_cast<double>(accum_cells_) / elapsed.seconds());
    m.num_active = static_cast<std::uint32_t>(active_vcs_.size());
    m.load_factor = m.input_rate.cps() / target_rate().cps();
    if (accum_cells_ > 0) latest_ = m;
  } else if (latest_) {
    m = *latest_;
  }
  accum_cells_ = 0;
  active_vcs_.clear();
  interval_start_ = now;
  return m;
}

CellRate PortState::compute_er(const Measurement& m, VcId vc) const {
  const double target = target_rate().cps();
  if (m.num_active == 0) return CellRate::from_cps(target);
  const double fair_share = target / m.num_active;
  double vc_share = 0.0;
  if (m.load_factor > 0.0) {
    if (const auto ccr = recorded_ccr(vc)) vc_share = ccr->cps() / m.load_factor;
  }
  return CellRate::from_cps(std::min(std::max(fair_share, vc_share), target));
}

RmFields PortState::stamp_backward(RmFields rm, VcId vc) const {
  if (rm.direction != Direction::Backward) {
    throw std::logic_error("stamp_backward: forward RM cell");
  }
  const CellRate er = latest_ ? compute_er(*latest_, vc) : target_rate();
  rm.er = std::min(rm.er, er);
  return rm;
}

std::optional<Cell> PortState::service() {
  if (queue_.empty()) return std::nullopt;
  Cell c = queue_.front();
  queue_.pop_front();
  ++dequeued_;
  return c;
}

std::optional<CellRate> PortState::recorded_ccr(VcId vc) const {
  const auto it = ccr_table_.find(vc);
  if (it == ccr_table_.end()) return std::nullopt;
  return it->second;
}

}  // namespace abrsim
