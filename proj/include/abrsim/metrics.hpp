#pragma once

#include <cstdint>
#include <vector>

#include "abrsim/engine.hpp"
#include "abrsim/units.hpp"

namespace abrsim::metrics {

struct AcrSample {
  SimTime time;
  CellRate acr;
};

/// ACR of one VC, one sample per change. Several changes at the same instant
/// collapse into the last one, so times are strictly increasing.
class AcrTrace {
 public:
  void record(SimTime t, CellRate acr);
  const std::vector<AcrSample>& samples() const { return samples_; }
  /// Value in force at `t`; the first sample's value before it.
  CellRate at(SimTime t) const;
  CellRate min_after(SimTime t) const;

 private:
  std::vector<AcrSample> samples_;
};

struct RecvSample {
  SimTime time;
  std::uint64_t cumulative = 0;
};

/// Cumulative cells received by one destination, sampled on every delivery.
class RecvTrace {
 public:
  void record(SimTime t, std::uint64_t cumulative);
  const std::vector<RecvSample>& samples() const { return samples_; }
  /// Last cumulative count at or before `t` (0 before the first delivery).
  std::uint64_t cells_at(SimTime t) const;

 private:
  std::vector<RecvSample> samples_;
};

/// Average throughput in Mbps over [t0, t1]: cells received in the window
/// times 424 bits over the window length. Throws std::domain_error if
/// t1 <= t0.
double throughput_mbps(const RecvTrace& trace, SimTime t0, SimTime t1);

/// Completed low -> high -> low excursions of the ACR inside [t0, t1]. A
/// sample counts as low at or below `low` and as high at or above `high`.
/// Throws std::domain_error unless low < high.
std::uint64_t oscillation_count(const AcrTrace& trace, CellRate low, CellRate high, SimTime t0, SimTime t1);

struct RmEmission {
  SimTime time;
  CellRate ccr;
  std::uint64_t unacked_before = 0;
};

struct QueueSample {
  SimTime time;
  std::size_t length = 0;
};

/// Collects every trace the CLI writes out. Switch ports are mapped onto
/// queue groups (one per switch in the CLI); a group's sample is the total
/// queued across its ports, thinned to the largest total seen in each
/// `queue_resolution` bucket.
class TraceRecorder : public Recorder {
 public:
  static constexpr std::uint32_t kNoGroup = 0xffffffffU;

  TraceRecorder(std::size_t vc_count, std::vector<std::uint32_t> port_group, std::size_t group_count,
                SimTime queue_resolution);

  void on_acr(VcId vc, SimTime t, CellRate acr) override;
  void on_receive(VcId vc, SimTime t, std::uint64_t cumulative) override;
  void on_forward_rm(VcId vc, SimTime t, CellRate ccr, std::uint64_t unacked_before) override;
  void on_queue(std::uint32_t port, SimTime t, std::size_t length) override;

  const AcrTrace& acr(VcId vc) const { return acr_.at(vc); }
  const RecvTrace& recv(VcId vc) const { return recv_.at(vc); }
  const std::vector<RmEmission>& forward_rm(VcId vc) const { return rm_.at(vc); }
  const std::vector<QueueSample>& queue(std::uint32_t group) const { return queue_.at(group); }

 private:
  std::vector<AcrTrace> acr_;
  std::vector<RecvTrace> recv_;
  std::vector<std::vector<RmEmission>> rm_;
  std::vector<std::vector<QueueSample>> queue_;
  std::vector<std::uint32_t> port_group_;
  std::vector<std::size_t> port_length_;
  std::vector<std::size_t> group_total_;
  SimTime queue_resolution_;
};

}  // namespace abrsim::metrics
