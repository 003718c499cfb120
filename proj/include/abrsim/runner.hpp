#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "abrsim/scenario.hpp"

namespace abrsim {

struct WindowThroughput {
  TimeWindow window;
  double mbps = 0.0;
};

struct VcReport {
  std::string name;
  std::optional<std::uint64_t> first_rule6_after_cells;
  std::optional<SimTime> first_feedback;
  std::vector<WindowThroughput> throughputs;  // whole run first, then run.windows
  std::optional<double> steady_mbps;
  std::uint64_t oscillations = 0;             // over the steady window
  std::uint64_t quiescent_engagements = 0;
  std::uint64_t fwd_emitted = 0;
  std::uint64_t fwd_delivered = 0;
};

struct RunReport {
  std::vector<VcReport> vcs;
  std::vector<std::string> violations;
  std::uint64_t events = 0;
  std::uint64_t audits = 0;

  bool ok() const { return violations.empty(); }
};

/// Runs `scenario` to run.until and writes acr_<vc>.csv, recv_<vc>.csv,
/// queues_<switch>.csv, summary.csv and meta.txt into `out_dir`.
/// `overrides` is echoed into meta.txt.
RunReport run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir,
                       const std::vector<std::string>& overrides = {});

struct SweepPoint {
  std::string value;
  std::filesystem::path out_dir;
  RunReport report;
};

/// One run per value of `param` (crm, cdf, icr or rif), executed
/// concurrently into out_root/<param>_<value>/, followed by
/// out_root/sweep_summary.csv. Throws ConfigError for an empty value list or
/// an unsupported parameter.
std::vector<SweepPoint> sweep(const Scenario& scenario, const std::string& param,
                              const std::vector<std::string>& values, const std::filesystem::path& out_root,
                              const std::vector<std::string>& overrides = {}, unsigned max_threads = 0);

}  // namespace abrsim
