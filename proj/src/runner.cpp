#include "abrsim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "abrsim/metrics.hpp"

namespace abrsim {

namespace fs = std::filesystem;

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const fs::path& path, std::string_view header) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
    out_ << header << '\n';
  }
  void row(const std::string& line) { out_ << line << '\n'; }
  ~CsvFile() { out_.flush(); }

 private:
  std::ofstream out_;
};

void write_acr(const fs::path& path, const metrics::AcrTrace& trace, SimTime until) {
  CsvFile csv(path, "time_ms,value");
  for (const auto& s : trace.samples()) {
    if (s.time >= until) break;
    csv.row(fixed6(s.time.ms()) + "," + fixed6(s.acr.mbps()));
  }
}

// Last sample of each `resolution` bucket; every sample when resolution is 0.
void write_recv(const fs::path& path, const metrics::RecvTrace& trace, SimTime until, SimTime resolution) {
  CsvFile csv(path, "time_ms,value");
  const auto& samples = trace.samples();
  const std::uint64_t res = resolution.ps();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.time >= until) break;
    if (res > 0 && i + 1 < samples.size() && samples[i + 1].time < until &&
        samples[i + 1].time.ps() / res == s.time.ps() / res) {
      continue;
    }
    csv.row(fixed6(s.time.ms()) + "," + std::to_string(s.cumulative));
  }
}

void write_queue(const fs::path& path, const std::vector<metrics::QueueSample>& samples, SimTime until) {
  CsvFile csv(path, "time_ms,value");
  for (const auto& s : samples) {
    if (s.time >= until) break;
    csv.row(fixed6(s.time.ms()) + "," + std::to_string(s.length));
  }
}

bool window_fits(const TimeWindow& w, SimTime until) { return w.start < w.end && w.end <= until; }

std::string sanitize(std::string_view value) {
  std::string out;
  for (char c : value) {
    const bool keep = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '.' ||
                      c == '-' || c == '_';
    out += keep ? c : '_';
  }
  return out;
}

}  // namespace

RunReport run_scenario(const Scenario& scenario, const fs::path& out_dir, const std::vector<std::string>& overrides) {
  const RunConfig& run = scenario.run;
  Engine engine(to_topology(scenario));

  std::map<std::string, std::uint32_t> switch_group;
  for (std::uint32_t i = 0; i < scenario.switches.size(); ++i) switch_group[scenario.switches[i].name] = i;
  std::vector<std::uint32_t> port_group;
  const auto ports = engine.port_summaries();
  for (const auto& p : ports) {
    const auto it = switch_group.find(p.from);
    port_group.push_back(p.switch_port && it != switch_group.end() ? it->second
                                                                     : metrics::TraceRecorder::kNoGroup);
  }
  metrics::TraceRecorder recorder(engine.vc_count(), port_group, scenario.switches.size(), run.recv_resolution);
  engine.set_recorder(&recorder);
  engine.set_audit_period(run.audit_period);
  engine.run_until(run.until);

  RunReport report;
  report.events = engine.events_processed();
  report.audits = engine.audits_performed();
  report.violations = engine.violations();
  for (VcId vc = 0; vc < engine.vc_count(); ++vc) {
    if (!engine.audit(vc).balanced()) report.violations.push_back("conservation broken at end of run");
  }

  const TimeWindow steady = run.steady_window();
  const CellRate low = mbps_to_cps(run.osc_low_mbps);
  const CellRate high = mbps_to_cps(run.osc_high_mbps);
  for (VcId vc = 0; vc < engine.vc_count(); ++vc) {
    VcReport r;
    r.name = engine.vc_name(vc);
    const auto& st = engine.source_state(vc);
    r.first_rule6_after_cells = st.cells_before_first_rule6;
    r.first_feedback = engine.first_feedback(vc);
    r.quiescent_engagements = st.quiescent_engagements;
    r.fwd_emitted = engine.counters(vc).fwd_emitted;
    r.fwd_delivered = engine.counters(vc).fwd_delivered;
    std::vector<TimeWindow> windows{{SimTime{}, run.until}};
    windows.insert(windows.end(), run.windows.begin(), run.windows.end());
    for (const auto& w : windows) {
      if (window_fits(w, run.until)) {
        r.throughputs.push_back({w, metrics::throughput_mbps(recorder.recv(vc), w.start, w.end)});
      }
    }
    if (window_fits(steady, run.until)) {
      r.steady_mbps = metrics::throughput_mbps(recorder.recv(vc), steady.start, steady.end);
      r.oscillations = metrics::oscillation_count(recorder.acr(vc), low, high, steady.start, steady.end);
    }
    report.vcs.push_back(std::move(r));
  }

  fs::create_directories(out_dir);
  for (VcId vc = 0; vc < engine.vc_count(); ++vc) {
    const auto& name = engine.vc_name(vc);
    write_acr(out_dir / ("acr_" + name + ".csv"), recorder.acr(vc), run.until);
    write_recv(out_dir / ("recv_" + name + ".csv"), recorder.recv(vc), run.until, run.recv_resolution);
  }
  for (std::uint32_t g = 0; g < scenario.switches.size(); ++g) {
    write_queue(out_dir / ("queues_" + scenario.switches[g].name + ".csv"), recorder.queue(g), run.until);
  }

  {
    CsvFile csv(out_dir / "summary.csv", "vc,metric,t0_ms,t1_ms,value");
    for (const auto& r : report.vcs) {
      for (const auto& t : r.throughputs) {
        csv.row(r.name + ",throughput_mbps," + fixed6(t.window.start.ms()) + "," + fixed6(t.window.end.ms()) + "," +
                fixed6(t.mbps));
      }
      if (r.steady_mbps) {
        const auto span = fixed6(steady.start.ms()) + "," + fixed6(steady.end.ms());
        csv.row(r.name + ",steady_throughput_mbps," + span + "," + fixed6(*r.steady_mbps));
        csv.row(r.name + ",oscillations," + span + "," + std::to_string(r.oscillations));
      }
    }
  }

  {
    std::ofstream meta(out_dir / "meta.txt", std::ios::binary | std::ios::trunc);
    if (!meta) throw std::runtime_error("cannot write meta.txt in '" + out_dir.string() + "'");
    meta << "# abrsim run metadata\n";
    std::string joined;
    for (const auto& o : overrides) joined += (joined.empty() ? "" : " ") + o;
    meta << "overrides = " << (joined.empty() ? "none" : joined) << "\n";
    meta << "horizon_ms = " << fixed6(run.until.ms()) << "\n";
    meta << "events_processed = " << report.events << "\n";
    meta << "conservation_audits = " << report.audits << "\n";
    meta << "invariant_violations = " << report.violations.size() << "\n";
    for (const auto& v : report.violations) meta << "violation = " << v << "\n";
    meta << "deviation.turnaround = immediate; backward RM cells leave the destination ahead of its data queue\n";
    meta << "deviation.first_cell = each source opens with a forward RM cell\n";
    for (const auto& r : report.vcs) {
      const std::string p = "vc." + r.name + ".";
      meta << p << "cells_emitted = " << r.fwd_emitted << "\n";
      meta << p << "cells_delivered = " << r.fwd_delivered << "\n";
      meta << p << "first_rule6_after_cells = "
           << (r.first_rule6_after_cells ? std::to_string(*r.first_rule6_after_cells) : "never") << "\n";
      meta << p << "first_feedback_ms = " << (r.first_feedback ? fixed6(r.first_feedback->ms()) : "never") << "\n";
      if (r.quiescent_engagements > 0) {
        meta << "deviation.quiescent_floor." << r.name << " = " << r.quiescent_engagements
             << " engagement(s); ACR reached 0, one forward RM probe per 100 ms until feedback\n";
      }
    }
    for (const auto& p : engine.port_summaries()) {
      if (p.switch_port) meta << "port." << p.name << ".max_queue = " << p.max_queue << "\n";
    }
    meta << "\n[scenario]\n" << render_scenario(scenario);
  }
  return report;
}

std::vector<SweepPoint> sweep(const Scenario& scenario, const std::string& param, const std::vector<std::string>& values,
                              const fs::path& out_root, const std::vector<std::string>& overrides,
                              unsigned max_threads) {
  if (values.empty()) throw ConfigError("sweep: empty value list");
  if (param != "crm" && param != "cdf" && param != "icr" && param != "rif") {
    throw ConfigError("sweep: parameter must be one of crm, cdf, icr, rif");
  }
  std::vector<Scenario> variants;
  std::vector<SweepPoint> points;
  for (const auto& v : values) {
    Scenario s = scenario;
    apply_override(s, param, v);
    variants.push_back(std::move(s));
    points.push_back({v, out_root / (param + "_" + sanitize(v)), {}});
  }

  const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(max_threads ? max_threads : hw, static_cast<unsigned>(values.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
          try {
            auto notes = overrides;
            notes.push_back(param + "=" + points[i].value);
            points[i].report = run_scenario(variants[i], points[i].out_dir, notes);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);

  CsvFile csv(out_root / "sweep_summary.csv", "param,value,vc,steady_throughput_mbps,run_throughput_mbps,oscillations");
  for (const auto& p : points) {
    for (const auto& r : p.report.vcs) {
      const std::string steady = r.steady_mbps ? fixed6(*r.steady_mbps) : "";
      const std::string whole = r.throughputs.empty() ? "" : fixed6(r.throughputs.front().mbps);
      csv.row(param + "," + p.value + "," + r.name + "," + steady + "," + whole + "," + std::to_string(r.oscillations));
    }
  }
  return points;
}

}  // namespace abrsim
