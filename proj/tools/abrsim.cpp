// abrsim: ABR explicit-rate flow control simulator and sizing calculator.

#include <bit>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "abrsim/analysis.hpp"
#include "abrsim/runner.hpp"
#include "abrsim/scenario.hpp"

namespace fs = std::filesystem;
using namespace abrsim;

namespace {

fs::path output_root(const std::optional<std::string>& flag, const Scenario& s, const std::string& cfg) {
  if (flag) return *flag;
  if (!s.run.out.empty()) return s.run.out;
  const fs::path stem = fs::path(cfg).stem();
  if (const char* env = std::getenv("ABRSIM_OUT"); env && *env) return fs::path(env) / stem;
  return fs::path("abrsim_out") / stem;
}

void print_report(const RunReport& report) {
  for (const auto& vc : report.vcs) {
    std::printf("vc %s: emitted %llu delivered %llu", vc.name.c_str(), static_cast<unsigned long long>(vc.fwd_emitted),
                static_cast<unsigned long long>(vc.fwd_delivered));
    if (vc.first_rule6_after_cells) {
      std::printf(", rule 6 first after %llu cells", static_cast<unsigned long long>(*vc.first_rule6_after_cells));
    }
    if (vc.first_feedback) std::printf(", first feedback %.3f ms", vc.first_feedback->ms());
    std::printf("\n");
    for (const auto& t : vc.throughputs) {
      std::printf("  throughput [%.3f, %.3f] ms: %.3f Mbps\n", t.window.start.ms(), t.window.end.ms(), t.mbps);
    }
    if (vc.steady_mbps) {
      std::printf("  steady throughput %.3f Mbps, %llu oscillations\n", *vc.steady_mbps,
                  static_cast<unsigned long long>(vc.oscillations));
    }
  }
  std::printf("events %llu, audits %llu, violations %zu\n", static_cast<unsigned long long>(report.events),
              static_cast<unsigned long long>(report.audits), report.violations.size());
  for (const auto& v : report.violations) std::fprintf(stderr, "violation: %s\n", v.c_str());
}

analysis::PathSpec make_path(double rtt_ms, double mbps, std::uint32_t nrm, std::uint32_t hops) {
  return {SimTime::from_ms(rtt_ms), mbps_to_cps(mbps), nrm, hops};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ABR explicit-rate flow control simulator"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "Simulate one scenario and write CSV traces");
  std::string run_cfg;
  std::optional<std::uint64_t> run_crm;
  std::optional<std::string> run_cdf;
  std::optional<std::string> run_until;
  std::optional<std::string> run_out;
  run_cmd->add_option("config", run_cfg, "Scenario file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--crm", run_crm, "Override Crm for every source");
  run_cmd->add_option("--cdf", run_cdf, "Override CDF for every source (e.g. 0.0625 or 1/16)");
  run_cmd->add_option("--until-ms", run_until, "Simulated horizon in ms");
  run_cmd->add_option("--out", run_out, "Output directory");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run one scenario per parameter value");
  std::string sweep_cfg;
  std::string sweep_param;
  std::vector<std::string> sweep_values;
  std::optional<std::string> sweep_until;
  std::optional<std::string> sweep_out;
  unsigned sweep_jobs = 0;
  sweep_cmd->add_option("config", sweep_cfg, "Scenario file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--param", sweep_param, "crm, cdf, icr or rif")
      ->required()
      ->check(CLI::IsMember({"crm", "cdf", "icr", "rif"}));
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")->required()->delimiter(',');
  sweep_cmd->add_option("--until-ms", sweep_until, "Simulated horizon in ms");
  sweep_cmd->add_option("--out", sweep_out, "Output root");
  sweep_cmd->add_option("--jobs", sweep_jobs, "Concurrent runs (default: hardware threads)");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Closed-form sizing and rule 6 calculators");
  analyze_cmd->require_subcommand(1);

  double rtt_ms = 550.0, link_mbps = 155.52;
  std::uint32_t nrm = 32, hops = 1;
  auto* min_crm_cmd = analyze_cmd->add_subcommand("min-crm", "Smallest Crm that keeps the path full");
  min_crm_cmd->add_option("--rtt-ms", rtt_ms, "Round-trip time per hop")->capture_default_str();
  min_crm_cmd->add_option("--mbps", link_mbps, "Link rate")->capture_default_str();
  min_crm_cmd->add_option("--nrm", nrm, "Cells per RM cell")->capture_default_str();
  min_crm_cmd->add_option("--hops", hops, "Satellite hops in series")->capture_default_str();

  auto* flight_cmd = analyze_cmd->add_subcommand("flight", "Cells needed to fill the path both ways");
  flight_cmd->add_option("--rtt-ms", rtt_ms, "Round-trip time")->capture_default_str();
  flight_cmd->add_option("--mbps", link_mbps, "Link rate")->capture_default_str();

  double icr_mbps = 140.0, mcr_mbps = 0.0;
  std::string cdf_text = "1/16";
  std::uint64_t k = 0;
  auto* decay_cmd = analyze_cmd->add_subcommand("decay", "ACR after Crm + k forward RM cells without feedback");
  decay_cmd->add_option("--icr-mbps", icr_mbps, "Starting ACR")->capture_default_str();
  decay_cmd->add_option("--cdf", cdf_text, "Cutoff decrease factor")->capture_default_str();
  decay_cmd->add_option("--mcr-mbps", mcr_mbps, "Minimum cell rate")->capture_default_str();
  decay_cmd->add_option("--k", k, "RM cells beyond Crm")->capture_default_str();

  double fwd_cps = 0.0, bwd_cps = 0.0;
  std::uint64_t crm = 32;
  auto* trigger_cmd = analyze_cmd->add_subcommand("trigger", "Does rule 6 keep firing at these RM rates?");
  trigger_cmd->add_option("--fwd-cps", fwd_cps, "Forward RM cell rate")->required();
  trigger_cmd->add_option("--bwd-cps", bwd_cps, "Backward RM cell rate")->required();
  trigger_cmd->add_option("--crm", crm, "Crm")->capture_default_str();

  std::uint64_t tbe = 0;
  auto* tbe_cmd = analyze_cmd->add_subcommand("crm-from-tbe", "Crm implied by a TBE");
  tbe_cmd->add_option("--tbe", tbe, "Transient buffer exposure in cells")->required();
  tbe_cmd->add_option("--nrm", nrm, "Cells per RM cell")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      Scenario s = load_scenario(run_cfg);
      std::vector<std::string> notes;
      if (run_crm) {
        apply_override(s, "crm", std::to_string(*run_crm));
        notes.push_back("crm=" + std::to_string(*run_crm));
      }
      if (run_cdf) {
        apply_override(s, "cdf", *run_cdf);
        notes.push_back("cdf=" + *run_cdf);
      }
      if (run_until) {
        apply_override(s, "until_ms", *run_until);
        notes.push_back("until_ms=" + *run_until);
      }
      const fs::path out = output_root(run_out, s, run_cfg);
      if (run_out) notes.push_back("out=" + *run_out);
      const RunReport report = run_scenario(s, out, notes);
      print_report(report);
      std::printf("wrote %s\n", out.string().c_str());
      return report.ok() ? 0 : 1;
    }

    if (*sweep_cmd) {
      Scenario s = load_scenario(sweep_cfg);
      std::vector<std::string> notes;
      if (sweep_until) {
        apply_override(s, "until_ms", *sweep_until);
        notes.push_back("until_ms=" + *sweep_until);
      }
      const fs::path out = output_root(sweep_out, s, sweep_cfg);
      fs::create_directories(out);
      const auto points = sweep(s, sweep_param, sweep_values, out, notes, sweep_jobs);
      bool ok = true;
      std::printf("%-12s %-10s %14s %14s %6s\n", sweep_param.c_str(), "vc", "steady_mbps", "run_mbps", "osc");
      for (const auto& p : points) {
        ok = ok && p.report.ok();
        for (const auto& vc : p.report.vcs) {
          std::printf("%-12s %-10s %14.3f %14.3f %6llu\n", p.value.c_str(), vc.name.c_str(), vc.steady_mbps.value_or(0.0),
                      vc.throughputs.empty() ? 0.0 : vc.throughputs.front().mbps,
                      static_cast<unsigned long long>(vc.oscillations));
        }
      }
      std::printf("wrote %s\n", (out / "sweep_summary.csv").string().c_str());
      return ok ? 0 : 1;
    }

    if (*min_crm_cmd) {
      const auto path = make_path(rtt_ms, link_mbps, nrm, hops);
      const auto per_hop = analysis::min_crm({path.rtt, path.link_rate, path.nrm, 1});
      const auto total = analysis::min_crm(path);
      std::printf("rtt            %.6f ms\n", rtt_ms);
      std::printf("link rate      %.6f Mbps = %.6f cells/s\n", link_mbps, path.link_rate.cps());
      std::printf("nrm            %u cells\n", nrm);
      std::printf("hops           %u\n", hops);
      std::printf("flight         %llu cells per hop\n",
                  static_cast<unsigned long long>(analysis::flight_capacity(path)));
      std::printf("min crm/hop    %llu RM cells\n", static_cast<unsigned long long>(per_hop));
      std::printf("min crm        %llu RM cells (tbe %llu cells, %d bits)\n", static_cast<unsigned long long>(total),
                  static_cast<unsigned long long>(total * nrm), static_cast<int>(std::bit_width(total)));
      return 0;
    }
    if (*flight_cmd) {
      const auto path = make_path(rtt_ms, link_mbps, nrm, 1);
      const auto cells = analysis::flight_capacity(path);
      std::printf("rtt            %.6f ms\n", rtt_ms);
      std::printf("link rate      %.6f Mbps = %.6f cells/s\n", link_mbps, path.link_rate.cps());
      std::printf("flight         %llu cells = %.6f Mbit\n", static_cast<unsigned long long>(cells),
                  static_cast<double>(cells) * kCellBits / 1e6);
      return 0;
    }
    if (*decay_cmd) {
      const double cdf = parse_real(cdf_text);
      const CellRate icr = mbps_to_cps(icr_mbps);
      const CellRate mcr = mbps_to_cps(mcr_mbps);
      const CellRate iterated = analysis::decay_after(icr, cdf, mcr, k);
      const CellRate closed = analysis::decay_closed_form(icr, cdf, mcr, k);
      std::printf("acr after crm+%llu RM cells  %.6f Mbps = %.6f cells/s\n", static_cast<unsigned long long>(k),
                  iterated.mbps(), iterated.cps());
      std::printf("closed form                 %.6f Mbps = %.6f cells/s\n", closed.mbps(), closed.cps());
      return 0;
    }
    if (*trigger_cmd) {
      const bool fires = analysis::trigger_predicate(CellRate::from_cps(fwd_cps), CellRate::from_cps(bwd_cps), crm);
      std::printf("forward RM     %.6f cells/s (%.6f Mbps)\n", fwd_cps, CellRate::from_cps(fwd_cps).mbps());
      std::printf("backward RM    %.6f cells/s (%.6f Mbps)\n", bwd_cps, CellRate::from_cps(bwd_cps).mbps());
      std::printf("crm            %llu\n", static_cast<unsigned long long>(crm));
      std::printf("rule 6 fires   %s\n", fires ? "yes" : "no");
      return 0;
    }
    if (*tbe_cmd) {
      const auto value = analysis::crm_from_tbe(tbe, nrm);
      std::printf("tbe            %llu cells\n", static_cast<unsigned long long>(tbe));
      std::printf("nrm            %u cells\n", nrm);
      std::printf("crm            %llu RM cells (%d bits)\n", static_cast<unsigned long long>(value),
                  static_cast<int>(std::bit_width(value)));
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "abrsim: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "abrsim: %s\n", e.what());
    return 3;
  }
  return 0;
}
