#include "abrsim/metrics.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace abrsim::metrics {

void AcrTrace::record(SimTime t, CellRate acr) {
  if (!samples_.empty() && samples_.back().time == t) {
    samples_.back().acr = acr;
    return;
  }
  if (!samples_.empty() && t < samples_.back().time) {
    throw std::logic_error("AcrTrace: time went backwards");
  }
  samples_.push_back({t, acr});
}

CellRate AcrTrace::at(SimTime t) const {
  if (samples_.empty()) return {};
  auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                             [](SimTime x, const AcrSample& s) { return x < s.time; });
  if (it == samples_.begin()) return it->acr;
  return std::prev(it)->acr;
}

CellRate AcrTrace::min_after(SimTime t) const {
  CellRate lowest = at(t);
  for (const auto& s : samples_) {
    if (s.time > t) lowest = std::min(lowest, s.acr);
  }
  return lowest;
}

void RecvTrace::record(SimTime t, std::uint64_t cumulative) {
  if (!samples_.empty() && (t < samples_.back().time || cumulative < samples_.back().cumulative)) {
    throw std::logic_error("RecvTrace: samples must be non-decreasing");
  }
  samples_.push_back({t, cumulative});
}

std::uint64_t RecvTrace::cells_at(SimTime t) const {
  auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                             [](SimTime x, const RecvSample& s) { return x < s.time; });
  if (it == samples_.begin()) return 0;
  return std::prev(it)->cumulative;
}

double throughput_mbps(const RecvTrace& trace, SimTime t0, SimTime t1) {
  if (t1 <= t0) throw std::domain_error("throughput: window end must follow its start");
  const auto cells = trace.cells_at(t1) - trace.cells_at(t0);
  return static_cast<double>(cells) * kCellBits / (t1 - t0).seconds() / 1e6;
}

std::uint64_t oscillation_count(const AcrTrace& trace, CellRate low, CellRate high, SimTime t0, SimTime t1) {
  if (!(low < high)) throw std::domain_error("oscillation_count: low must be below high");
  enum class Phase { Start, Low, LowThenHigh } phase = Phase::Start;
  std::uint64_t count = 0;
  auto visit = [&](CellRate v) {
    if (v <= low) {
      if (phase == Phase::LowThenHigh) ++count;
      phase = Phase::Low;
    } else if (v >= high && phase == Phase::Low) {
      phase = Phase::LowThenHigh;
    }
  };
  if (trace.samples().empty() || t1 < t0) return 0;
  visit(trace.at(t0));
  for (const auto& s : trace.samples()) {
    if (s.time > t0 && s.time <= t1) visit(s.acr);
  }
  return count;
}

TraceRecorder::TraceRecorder(std::size_t vc_count, std::vector<std::uint32_t> port_group,
                             std::size_t group_count, SimTime queue_resolution)
    : acr_(vc_count),
      recv_(vc_count),
      rm_(vc_count),
      queue_(group_count),
      port_group_(std::move(port_group)),
      port_length_(port_group_.size(), 0),
      group_total_(group_count, 0),
      queue_resolution_(queue_resolution) {}

void TraceRecorder::on_acr(VcId vc, SimTime t, CellRate acr) { acr_.at(vc).record(t, acr); }

void TraceRecorder::on_receive(VcId vc, SimTime t, std::uint64_t cumulative) {
  recv_.at(vc).record(t, cumulative);
}

void TraceRecorder::on_forward_rm(VcId vc, SimTime t, CellRate ccr, std::uint64_t unacked_before) {
  rm_.at(vc).push_back({t, ccr, unacked_before});
}

void TraceRecorder::on_queue(std::uint32_t port, SimTime t, std::size_t length) {
  if (port >= port_group_.size() || port_group_[port] == kNoGroup) return;
  const auto g = port_group_[port];
  group_total_[g] = group_total_[g] - port_length_[port] + length;
  port_length_[port] = length;
  const std::size_t total = group_total_[g];

  auto& q = queue_.at(g);
  const std::uint64_t res = queue_resolution_.ps();
  const bool same_bucket = !q.empty() && (res > 0 ? q.back().time.ps() / res == t.ps() / res : q.back().time == t);
  if (same_bucket) {
    q.back().length = std::max(q.back().length, total);
    return;
  }
  q.push_back({t, total});
}

}  // namespace abrsim::metrics
