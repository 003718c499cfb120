#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "abrsim/engine.hpp"
#include "abrsim/units.hpp"

namespace abrsim {

/// Scenario files are line-oriented `key = value` text with `[section]`
/// headers and `#` comments:
///
///   [source.<name>]  pcr_mbps mcr_mbps icr_mbps nrm rif cdf crm tbe
///   [switch.<name>]  target_utilization interval_cells interval_us
///   [link.<name>]    from to rate_mbps delay_ms|delay_us
///   [vc.<name>]      source path
///   [run]            until_ms out windows_ms steady_ms osc_low_mbps
///                    osc_high_mbps recv_resolution_us audit_ms
///
/// Missing keys take the defaults below. A file without any switch, link or
/// vc section gets a single-source LAN topology S1 - sw1 - D1.

struct SourceConfig {
  std::string name = "default";
  double pcr_mbps = 155.52;
  double mcr_mbps = 0.0;
  double icr_mbps = 140.0;
  std::uint32_t nrm = 32;
  double rif = 1.0;
  double cdf = 1.0 / 16.0;
  std::uint64_t crm = 32;
  std::optional<std::uint64_t> tbe;

  SourceParams params() const;
  bool operator==(const SourceConfig&) const = default;
};

struct SwitchConfig {
  std::string name;
  double target_utilization = 0.9;
  std::uint32_t interval_cells = 30;
  SimTime interval = SimTime::from_ps(20'000'000);

  bool operator==(const SwitchConfig&) const = default;
};

struct LinkConfig {
  std::string name;
  std::string from;
  std::string to;
  double rate_mbps = 155.52;
  SimTime delay = SimTime::from_ps(5'000'000);

  bool operator==(const LinkConfig&) const = default;
};

struct VcConfig {
  std::string name;
  std::string source;
  std::vector<std::string> path;

  bool operator==(const VcConfig&) const = default;
};

struct TimeWindow {
  SimTime start;
  SimTime end;

  bool operator==(const TimeWindow&) const = default;
};

struct RunConfig {
  SimTime until = SimTime::from_ps(1'200'000'000'000ULL);
  std::string out;
  std::vector<TimeWindow> windows;
  /// Defaults to the second half of the run.
  std::optional<TimeWindow> steady;
  double osc_low_mbps = 10.0;
  double osc_high_mbps = 130.0;
  SimTime recv_resolution = SimTime::from_ps(10'000'000);
  SimTime audit_period = SimTime::from_ps(10'000'000'000ULL);

  TimeWindow steady_window() const;
  bool operator==(const RunConfig&) const = default;
};

struct Scenario {
  std::vector<SourceConfig> sources;
  std::vector<SwitchConfig> switches;
  std::vector<LinkConfig> links;
  std::vector<VcConfig> vcs;
  RunConfig run;

  const SourceConfig& source(std::string_view name) const;
  bool operator==(const Scenario&) const = default;
};

/// Parses and fully validates a scenario. Throws ConfigError; syntax errors
/// carry "line N:" in the message.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

/// Inverse of parse_scenario: parse_scenario(render_scenario(s)) == s.
std::string render_scenario(const Scenario& scenario);

Topology to_topology(const Scenario& scenario);

/// Parses a real number, also accepting a fraction such as "1/16".
double parse_real(std::string_view text);

/// Applies a command-line override to every source (crm, cdf, icr, rif) or
/// to the run horizon (until_ms), then revalidates. Overriding crm drops any
/// tbe so the two stay consistent. Throws ConfigError.
void apply_override(Scenario& scenario, std::string_view param, std::string_view value);

}  // namespace abrsim
