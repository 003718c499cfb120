#include "abrsim/engine.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

namespace abrsim {

namespace {

// Min-heap on (time, tiebreak_seq).
bool later(const Event& a, const Event& b) {
  if (a.time != b.time) return a.time > b.time;
  return a.tiebreak_seq > b.tiebreak_seq;
}

}  // namespace

Event deliver(const LinkSpec& link, const Cell& cell, SimTime depart) {
  Event e;
  e.time = depart + cell_tx_time(link.rate) + link.prop_delay;
  e.kind = EventKind::LinkDeliver;
  e.cell = cell;
  return e;
}

Engine::Engine(Topology topology, Recorder* recorder) : recorder_(recorder) {
  std::map<std::string, std::uint32_t> node_index;
  for (auto& n : topology.nodes) {
    if (n.name.empty()) throw ConfigError("node with empty name");
    if (!node_index.emplace(n.name, static_cast<std::uint32_t>(nodes_.size())).second) {
      throw ConfigError("duplicate node '" + n.name + "'");
    }
    if (n.kind == NodeKind::Switch) {
      try {
        n.erica.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError("switch '" + n.name + "': " + e.what());
      }
    }
    nodes_.push_back({n});
  }
  if (nodes_.size() < 2 || topology.links.empty()) {
    throw ConfigError("topology needs at least two nodes and one link");
  }
  if (topology.vcs.empty()) throw ConfigError("topology has no VCs");

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> port_of;
  auto lookup = [&](const std::string& name, const std::string& context) {
    const auto it = node_index.find(name);
    if (it == node_index.end()) throw ConfigError(context + ": unknown node '" + name + "'");
    return it->second;
  };
  for (const auto& l : topology.links) {
    const auto a = lookup(l.a, "link '" + l.spec.name + "'");
    const auto b = lookup(l.b, "link '" + l.spec.name + "'");
    if (a == b) throw ConfigError("link '" + l.spec.name + "' connects a node to itself");
    if (l.spec.rate.is_zero()) throw ConfigError("link '" + l.spec.name + "' has zero rate");
    for (const auto& [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
      const auto idx = static_cast<std::uint32_t>(ports_.size());
      if (!port_of.emplace(std::pair{from, to}, idx).second) {
        throw ConfigError("duplicate link between '" + l.a + "' and '" + l.b + "'");
      }
      const bool is_switch = nodes_[from].spec.kind == NodeKind::Switch;
      const EricaConfig erica = is_switch ? nodes_[from].spec.erica : EricaConfig{};
      ports_.push_back(PortRt{PortState(l.spec.rate, erica), l.spec, from, to, is_switch, false, {}, 0});
    }
  }

  std::set<std::string> vc_names;
  for (auto& v : topology.vcs) {
    const std::string ctx = "vc '" + v.name + "'";
    if (!vc_names.insert(v.name).second) throw ConfigError("duplicate " + ctx);
    try {
      v.params.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(ctx + ": " + e.what());
    }
    if (v.path.size() < 2) throw ConfigError(ctx + ": path needs at least two nodes");
    VcRt rt;
    rt.position_of_node.assign(nodes_.size(), -1);
    for (std::size_t i = 0; i < v.path.size(); ++i) {
      const auto n = lookup(v.path[i], ctx);
      const bool endpoint = i == 0 || i + 1 == v.path.size();
      const auto kind = nodes_[n].spec.kind;
      if (endpoint && kind != NodeKind::EndSystem) {
        throw ConfigError(ctx + ": endpoint '" + v.path[i] + "' is not an end system");
      }
      if (!endpoint && kind != NodeKind::Switch) {
        throw ConfigError(ctx + ": intermediate node '" + v.path[i] + "' is not a switch");
      }
      if (rt.position_of_node[n] != -1) throw ConfigError(ctx + ": path revisits '" + v.path[i] + "'");
      rt.position_of_node[n] = static_cast<int>(i);
      rt.path.push_back(n);
    }
    rt.fwd_port.assign(rt.path.size(), 0);
    rt.bwd_port.assign(rt.path.size(), 0);
    for (std::size_t i = 0; i + 1 < rt.path.size(); ++i) {
      const auto it = port_of.find({rt.path[i], rt.path[i + 1]});
      if (it == port_of.end()) {
        throw ConfigError(ctx + ": no link between '" + v.path[i] + "' and '" + v.path[i + 1] + "'");
      }
      rt.fwd_port[i] = it->second;
      rt.bwd_port[i + 1] = port_of.at({rt.path[i + 1], rt.path[i]});
    }
    rt.source = initial_source_state(v.params);
    rt.spec = std::move(v);
    vcs_.push_back(std::move(rt));
  }

  for (VcId vc = 0; vc < vcs_.size(); ++vc) {
    if (recorder_) recorder_->on_acr(vc, now_, vcs_[vc].source.acr);
    schedule(SimTime{}, EventKind::SourceEmit, vc, 0);
  }
  for (std::uint32_t p = 0; p < ports_.size(); ++p) {
    if (ports_[p].switch_port) {
      schedule(ports_[p].state.config().interval_time_limit, EventKind::IntervalTimer, p, 0);
    }
  }
}

void Engine::set_recorder(Recorder* recorder) {
  recorder_ = recorder;
  if (!recorder_) return;
  for (VcId vc = 0; vc < vcs_.size(); ++vc) recorder_->on_acr(vc, now_, vcs_[vc].source.acr);
}

void Engine::set_audit_period(SimTime period) {
  audit_period_ = period;
  next_audit_ = now_ + period;
}

void Engine::schedule(SimTime at, EventKind kind, std::uint32_t target, std::uint32_t generation, Cell cell) {
  if (at < now_) {
    throw std::logic_error("event scheduled in the past");
  }
  heap_.push_back(Event{at, next_seq_++, kind, target, generation, std::move(cell)});
  std::push_heap(heap_.begin(), heap_.end(), later);
}

Event Engine::pop_event() {
  std::pop_heap(heap_.begin(), heap_.end(), later);
  Event e = std::move(heap_.back());
  heap_.pop_back();
  return e;
}

void Engine::run_until(SimTime t_end) {
  if (t_end < now_) throw std::logic_error("run_until: horizon is in the past");
  while (!heap_.empty() && heap_.front().time <= t_end) {
    if (audit_period_.ps() > 0) {
      while (next_audit_ < heap_.front().time) {
        run_audit();
        next_audit_ += audit_period_;
      }
    }
    Event e = pop_event();
    if (e.time < now_) {
      violation("causality: event at " + std::to_string(e.time.ps()) + " ps after " + std::to_string(now_.ps()));
    }
    now_ = e.time;
    ++events_processed_;
    dispatch(e);
  }
  now_ = t_end;
  if (audit_period_.ps() > 0) {
    while (next_audit_ <= t_end) {
      run_audit();
      next_audit_ += audit_period_;
    }
  }
}

void Engine::dispatch(const Event& e) {
  switch (e.kind) {
    case EventKind::SourceEmit:
      on_source_emit(e.target, e.generation);
      break;
    case EventKind::LinkDeliver:
      on_link_deliver(e.target, e.cell);
      break;
    case EventKind::PortService:
      on_port_service(e.target);
      break;
    case EventKind::IntervalTimer:
      on_interval_timer(e.target, e.generation);
      break;
  }
}

void Engine::on_source_emit(VcId vc, std::uint32_t generation) {
  VcRt& v = vcs_[vc];
  if (generation != v.emit_generation) return;
  const CellRate before = v.source.acr;
  const std::uint64_t unacked_before = v.source.unacked_fwd_rm;
  auto [cell, state] = next_cell(v.source, v.spec.params, vc, now_);
  v.source = state;
  check_acr(vc);
  record_acr(vc, before);
  if (cell.rm && recorder_) recorder_->on_forward_rm(vc, now_, cell.rm->ccr, unacked_before);
  ++v.counters.fwd_emitted;
  enqueue(v.fwd_port.front(), cell, false);
  schedule(v.source.next_departure, EventKind::SourceEmit, vc, v.emit_generation);
}

void Engine::on_link_deliver(std::uint32_t port, Cell cell) {
  const std::uint32_t node = ports_[port].to;
  VcRt& v = vcs_[cell.vc];
  const int pos = v.position_of_node[node];
  if (pos < 0) {
    violation("cell of vc '" + v.spec.name + "' delivered off its path");
    return;
  }
  const auto i = static_cast<std::size_t>(pos);
  const bool forward = cell.direction() == Direction::Forward;

  if (nodes_[node].spec.kind == NodeKind::Switch) {
    if (!forward) {
      const CellRate incoming = cell.rm->er;
      cell.rm = ports_[v.fwd_port[i]].state.stamp_backward(*cell.rm, cell.vc);
      if (cell.rm->er > incoming) violation("ER increased along the path");
    }
    enqueue(forward ? v.fwd_port[i] : v.bwd_port[i], cell, false);
    return;
  }

  if (forward && i + 1 == v.path.size()) {
    ++v.counters.fwd_delivered;
    if (recorder_) recorder_->on_receive(cell.vc, now_, v.counters.fwd_delivered);
    if (cell.rm) {
      Cell back;
      back.vc = cell.vc;
      back.rm = turnaround(*cell.rm);
      back.seq = v.bwd_seq++;
      back.emitted_at = now_;
      ++v.counters.bwd_emitted;
      enqueue(v.bwd_port[i], back, true);
    }
    return;
  }
  if (!forward && i == 0) {
    ++v.counters.bwd_delivered;
    if (!v.first_feedback) v.first_feedback = now_;
    if (recorder_) recorder_->on_feedback(cell.vc, now_, *cell.rm);
    const CellRate before = v.source.acr;
    v.source = on_backward_rm(v.source, v.spec.params, *cell.rm);
    check_acr(cell.vc);
    record_acr(cell.vc, before);
    const SimTime earliest = earliest_departure(v.source, now_);
    if (earliest < v.source.next_departure) {
      v.source.next_departure = earliest;
      ++v.emit_generation;
      schedule(earliest, EventKind::SourceEmit, cell.vc, v.emit_generation);
    }
    return;
  }
  violation("cell of vc '" + v.spec.name + "' stranded at end system '" + nodes_[node].spec.name + "'");
}

void Engine::on_port_service(std::uint32_t port) {
  ports_[port].busy = false;
  start_service(port);
}

void Engine::on_interval_timer(std::uint32_t port, std::uint32_t generation) {
  PortRt& p = ports_[port];
  if (generation != p.timer_generation) return;
  p.state.end_interval(now_);
  schedule(now_ + p.state.config().interval_time_limit, EventKind::IntervalTimer, port, generation);
}

void Engine::restart_interval_timer(std::uint32_t port) {
  PortRt& p = ports_[port];
  ++p.timer_generation;
  schedule(now_ + p.state.config().interval_time_limit, EventKind::IntervalTimer, port, p.timer_generation);
}

void Engine::enqueue(std::uint32_t port, const Cell& cell, bool urgent) {
  PortRt& p = ports_[port];
  if (urgent) {
    p.urgent.push_back(cell);
  } else if (p.state.enqueue(cell, now_) && p.switch_port) {
    restart_interval_timer(port);
  }
  if (p.switch_port && recorder_) recorder_->on_queue(port, now_, p.state.queue_length());
  if (!p.busy) start_service(port);
}

void Engine::start_service(std::uint32_t port) {
  PortRt& p = ports_[port];
  std::optional<Cell> cell;
  if (!p.urgent.empty()) {
    cell = p.urgent.front();
    p.urgent.pop_front();
  } else {
    cell = p.state.service();
    if (cell && p.switch_port && recorder_) recorder_->on_queue(port, now_, p.state.queue_length());
  }
  if (!cell) return;
  p.busy = true;
  Event e = deliver(p.link, *cell, now_);
  schedule(e.time, EventKind::LinkDeliver, port, 0, std::move(e.cell));
  schedule(now_ + p.state.service_time(), EventKind::PortService, port, 0);
}

void Engine::record_acr(VcId vc, CellRate before) {
  if (vcs_[vc].source.acr != before && recorder_) recorder_->on_acr(vc, now_, vcs_[vc].source.acr);
}

void Engine::check_acr(VcId vc) {
  const auto& v = vcs_[vc];
  if (v.source.acr < v.spec.params.mcr || v.source.acr > v.spec.params.pcr) {
    violation("acr of vc '" + v.spec.name + "' left [mcr, pcr]");
  }
}

ConservationAudit Engine::audit(VcId vc) const {
  ConservationAudit a;
  a.vc = vc;
  a.counters = vcs_.at(vc).counters;
  auto tally = [&](const Cell& c, std::uint64_t& fwd, std::uint64_t& bwd) {
    if (c.vc != vc) return;
    (c.direction() == Direction::Forward ? fwd : bwd) += 1;
  };
  for (const auto& p : ports_) {
    for (const auto& c : p.state.queue()) tally(c, a.fwd_queued, a.bwd_queued);
    for (const auto& c : p.urgent) tally(c, a.fwd_queued, a.bwd_queued);
  }
  for (const auto& e : heap_) {
    if (e.kind == EventKind::LinkDeliver) tally(e.cell, a.fwd_in_flight, a.bwd_in_flight);
  }
  return a;
}

void Engine::run_audit() {
  ++audits_;
  for (VcId vc = 0; vc < vcs_.size(); ++vc) {
    if (!audit(vc).balanced()) {
      violation("conservation broken for vc '" + vcs_[vc].spec.name + "' at " + std::to_string(now_.ps()) + " ps");
    }
  }
}

std::vector<PortSummary> Engine::port_summaries() const {
  std::vector<PortSummary> out;
  for (const auto& p : ports_) {
    const auto& from = nodes_[p.from].spec.name;
    const auto& to = nodes_[p.to].spec.name;
    out.push_back({from + "->" + to, from, to, p.switch_port, p.state.max_queue_length(),
                   p.state.queue_length() + p.urgent.size()});
  }
  return out;
}

void Engine::violation(std::string message) { violations_.push_back(std::move(message)); }

}  // namespace abrsim
