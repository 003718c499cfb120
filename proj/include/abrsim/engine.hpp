#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "abrsim/protocol.hpp"
#include "abrsim/switch_port.hpp"
#include "abrsim/units.hpp"

namespace abrsim {

/// Invalid topology or scenario.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LinkSpec {
  std::string name;
  CellRate rate;
  SimTime prop_delay;
};

enum class NodeKind : std::uint8_t { EndSystem, Switch };

struct NodeSpec {
  std::string name;
  NodeKind kind = NodeKind::EndSystem;
  EricaConfig erica;  // switches only
};

/// A full-duplex link; both directions share rate and delay.
struct LinkEdge {
  std::string a;
  std::string b;
  LinkSpec spec;
};

/// A VC runs from path.front() (source end system) to path.back()
/// (destination end system); backward RM cells retrace the path.
struct VcSpec {
  std::string name;
  SourceParams params;
  std::vector<std::string> path;
};

struct Topology {
  std::vector<NodeSpec> nodes;
  std::vector<LinkEdge> links;
  std::vector<VcSpec> vcs;
};

/// Observation hooks. Default implementations ignore everything.
class Recorder {
 public:
  virtual ~Recorder() = default;
  virtual void on_acr(VcId, SimTime, CellRate) {}
  /// Forward cell arrived at the VC's destination.
  virtual void on_receive(VcId, SimTime, std::uint64_t /*cumulative*/) {}
  /// Forward RM cell left the source carrying `ccr` (the post-rule-6 ACR).
  virtual void on_forward_rm(VcId, SimTime, CellRate /*ccr*/, std::uint64_t /*unacked_before*/) {}
  virtual void on_feedback(VcId, SimTime, const RmFields&) {}
  /// Queue length change at a switch output port.
  virtual void on_queue(std::uint32_t /*port*/, SimTime, std::size_t) {}
};

/// Per-VC cell accounting, one set for each direction.
struct VcCounters {
  std::uint64_t fwd_emitted = 0;
  std::uint64_t fwd_delivered = 0;
  std::uint64_t bwd_emitted = 0;   // turned around at the destination
  std::uint64_t bwd_delivered = 0; // consumed by the source
};

/// Snapshot of where a VC's cells are, found by walking queues and pending
/// events rather than trusting the running counters.
struct ConservationAudit {
  VcId vc = 0;
  VcCounters counters;
  std::uint64_t fwd_queued = 0;
  std::uint64_t fwd_in_flight = 0;
  std::uint64_t bwd_queued = 0;
  std::uint64_t bwd_in_flight = 0;

  bool balanced() const {
    return counters.fwd_emitted == counters.fwd_delivered + fwd_queued + fwd_in_flight &&
           counters.bwd_emitted == counters.bwd_delivered + bwd_queued + bwd_in_flight;
  }
};

struct PortSummary {
  std::string name;  // "<from>-><to>"
  std::string from;
  std::string to;
  bool switch_port = false;
  std::size_t max_queue = 0;
  std::size_t queue = 0;
};

enum class EventKind : std::uint8_t { SourceEmit, LinkDeliver, PortService, IntervalTimer };

struct Event {
  SimTime time;
  std::uint64_t tiebreak_seq = 0;
  EventKind kind = EventKind::SourceEmit;
  std::uint32_t target = 0;  // VC for SourceEmit, port otherwise
  std::uint32_t generation = 0;
  Cell cell;
};

/// LinkDeliver event for `cell` put on `link` at `depart`: serialization
/// plus propagation. The caller assigns target and tiebreak_seq.
Event deliver(const LinkSpec& link, const Cell& cell, SimTime depart);

/// Deterministic discrete-event core. Events run in (time, tiebreak_seq)
/// order; tiebreak_seq is a global counter assigned at scheduling time.
class Engine {
 public:
  /// Validates `topology` and schedules each source's first emission at t=0.
  /// Throws ConfigError for an invalid topology.
  explicit Engine(Topology topology, Recorder* recorder = nullptr);

  /// Processes every event with time <= t_end.
  void run_until(SimTime t_end);

  /// Attaches `recorder` (may be null) and reports each VC's current ACR to it.
  void set_recorder(Recorder* recorder);

  /// Audits conservation every `period` of simulated time (0 disables).
  void set_audit_period(SimTime period);

  SimTime now() const { return now_; }
  std::uint64_t events_processed() const { return events_processed_; }
  std::size_t vc_count() const { return vcs_.size(); }
  const std::string& vc_name(VcId vc) const { return vcs_.at(vc).spec.name; }
  const SourceParams& source_params(VcId vc) const { return vcs_.at(vc).spec.params; }
  const SourceState& source_state(VcId vc) const { return vcs_.at(vc).source; }
  const VcCounters& counters(VcId vc) const { return vcs_.at(vc).counters; }
  std::optional<SimTime> first_feedback(VcId vc) const { return vcs_.at(vc).first_feedback; }
  ConservationAudit audit(VcId vc) const;
  std::vector<PortSummary> port_summaries() const;
  const PortState& port(std::uint32_t index) const { return ports_.at(index).state; }
  std::size_t port_count() const { return ports_.size(); }

  /// Messages for every internal invariant violation seen so far.
  const std::vector<std::string>& violations() const { return violations_; }
  std::uint64_t audits_performed() const { return audits_; }

 private:
  struct NodeRt {
    NodeSpec spec;
  };
  struct PortRt {
    PortState state;
    LinkSpec link;
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    bool switch_port = false;
    bool busy = false;
    std::deque<Cell> urgent;  // backward RM cells leaving an end system
    std::uint32_t timer_generation = 0;
  };
  struct VcRt {
    VcSpec spec;
    std::vector<std::uint32_t> path;
    std::vector<int> position_of_node;
    std::vector<std::uint32_t> fwd_port;  // port leaving path[i] toward path[i+1]
    std::vector<std::uint32_t> bwd_port;  // port leaving path[i] toward path[i-1]
    SourceState source;
    std::uint32_t emit_generation = 0;
    std::uint64_t bwd_seq = 0;
    VcCounters counters;
    std::optional<SimTime> first_feedback;
  };

  void schedule(SimTime at, EventKind kind, std::uint32_t target, std::uint32_t generation, Cell cell = {});
  Event pop_event();
  void dispatch(const Event& e);

  void on_source_emit(VcId vc, std::uint32_t generation);
  void on_link_deliver(std::uint32_t port, Cell cell);
  void on_port_service(std::uint32_t port);
  void on_interval_timer(std::uint32_t port, std::uint32_t generation);

  void enqueue(std::uint32_t port, const Cell& cell, bool urgent);
  void start_service(std::uint32_t port);
  void restart_interval_timer(std::uint32_t port);
  void record_acr(VcId vc, CellRate before);
  void check_acr(VcId vc);
  void run_audit();
  void violation(std::string message);

  std::vector<NodeRt> nodes_;
  std::vector<PortRt> ports_;
  std::vector<VcRt> vcs_;
  Recorder* recorder_ = nullptr;

  std::vector<Event> heap_;
  std::uint64_t next_seq_ = 0;
  SimTime now_;
  std::uint64_t events_processed_ = 0;

  SimTime audit_period_;
  SimTime next_audit_;
  std::uint64_t audits_ = 0;
  std::vector<std::string> violations_;
};

}  // namespace abrsim
