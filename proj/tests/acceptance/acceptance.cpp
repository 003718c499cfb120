// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "abrsim/analysis.hpp"
#include "abrsim/metrics.hpp"
#include "abrsim/runner.hpp"

using namespace abrsim;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const char* id, bool ok, const std::string& what) {
  std::printf("%s %-3s %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Scenario bundled(const std::string& name) { return load_scenario(std::string(ABRSIM_SCENARIO_DIR) + "/" + name); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double window_mbps(const VcReport& r, double t0_ms, double t1_ms) {
  for (const auto& t : r.throughputs) {
    if (t.window.start == SimTime::from_ms(t0_ms) && t.window.end == SimTime::from_ms(t1_ms)) return t.mbps;
  }
  return NAN;
}

bool within(double got, double want, double rel) { return std::abs(got - want) <= rel * want; }

// Same ACR arithmetic, restated: acr <- max(mcr, acr - acr*cdf), k+1 times.
double oracle_decay(double icr, double cdf, double mcr, std::uint64_t k) {
  double acr = icr;
  for (std::uint64_t i = 0; i <= k; ++i) acr = std::max(mcr, acr - acr * cdf);
  return acr;
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "abrsim_acceptance";
  fs::remove_all(root);

  const Scenario fig3 = bundled("fig3.cfg");
  auto with = [&](const Scenario& base, std::vector<std::pair<std::string, std::string>> ov) {
    Scenario s = base;
    for (auto& [k, v] : ov) apply_override(s, k, v);
    return s;
  };

  struct Job {
    std::string key;
    Scenario scenario;
  };
  const std::vector<Job> jobs = {
      {"fig3_a", fig3},
      {"fig3_b", fig3},
      {"crm6144", with(fig3, {{"crm", "6144"}})},
      {"cdf_1_64", with(fig3, {{"cdf", "1/64"}})},
      {"cdf_1", with(fig3, {{"cdf", "1"}})},
      {"lan_a", bundled("lan.cfg")},
      {"lan_b", bundled("lan.cfg")},
      {"two_hop_a", bundled("two_hop.cfg")},
      {"two_hop_b", bundled("two_hop.cfg")},
  };
  std::map<std::string, std::future<RunReport>> pending;
  for (const auto& j : jobs) {
    pending[j.key] = std::async(std::launch::async, [&j, &root] { return run_scenario(j.scenario, root / j.key); });
  }
  std::map<std::string, RunReport> runs;
  for (auto& [k, f] : pending) runs[k] = f.get();

  // 1: Crm = 32
  const auto& base = runs["fig3_a"];
  {
    const auto& v = base.vcs.front();
    const auto n = v.first_rule6_after_cells.value_or(0);
    report("1a", v.first_rule6_after_cells && n == 1024, fmt("first rule 6 firing after %llu cells (want 1024)",
                                                             static_cast<unsigned long long>(n)));
    const double fb = v.first_feedback ? v.first_feedback->ms() : NAN;
    report("1b", std::abs(fb - 550.0) <= 1.0, fmt("first backward RM at %.3f ms (want 550 +- 1)", fb));
    const double w1 = window_mbps(v, 275, 825), w2 = window_mbps(v, 825, 1200);
    report("1c", within(w1, 32, 0.3) && within(w2, 45, 0.3),
           fmt("throughput %.2f Mbps on [275,825] (want 32 +- 30%%), %.2f Mbps on [825,1200] (want 45 +- 30%%)",
               w1, w2));
    report("1d", v.oscillations >= 3, fmt("%llu oscillations 10/130 Mbps on [825,1200] (want >= 3)",
                                          static_cast<unsigned long long>(v.oscillations)));
  }

  // 2: Crm = 6144
  {
    Engine eng(to_topology(jobs[2].scenario));
    metrics::TraceRecorder rec(eng.vc_count(), std::vector<std::uint32_t>(eng.port_count(), metrics::TraceRecorder::kNoGroup),
                               0, SimTime{});
    eng.set_recorder(&rec);
    eng.run_until(jobs[2].scenario.run.until);
    double lowest = 1e300;
    for (VcId vc = 0; vc < eng.vc_count(); ++vc) lowest = std::min(lowest, rec.acr(vc).min_after(SimTime{}).mbps());
    double tput = 1e300;
    for (const auto& v : runs["crm6144"].vcs) tput = std::min(tput, window_mbps(v, 550, 1200));
    report("2", lowest >= 130.0 && tput >= 126.0,
           fmt("min ACR %.3f Mbps (want >= 130), throughput on [550,1200] %.2f Mbps (want >= 126)", lowest, tput));
  }

  // 3: CDF sweep at Crm = 32
  {
    const double a = *runs["cdf_1_64"].vcs.front().steady_mbps;
    const double b = *base.vcs.front().steady_mbps;
    const double c = *runs["cdf_1"].vcs.front().steady_mbps;
    const double hi = std::max({a, b, c}), lo = std::min({a, b, c});
    report("3", hi < 60.0 && hi <= 2.0 * lo,
           fmt("steady throughput cdf 1/64: %.2f, 1/16: %.2f, 1: %.2f Mbps (want all < 60 and within 2x)", a, b, c));
  }

  // 4: sizing
  {
    using namespace analysis;
    const auto oc3 = min_crm({SimTime::from_ms(550), mbps_to_cps(155.52), 32, 1});
    const auto oc12 = min_crm({SimTime::from_ms(550), mbps_to_cps(622.08), 32, 1});
    const auto oc12x3 = min_crm({SimTime::from_ms(550), mbps_to_cps(622.08), 32, 3});
    const bool near = std::abs(static_cast<double>(oc3) - 6144.0) <= 0.05 * 6144.0;
    const bool scaled = oc12 <= 4 * oc3 && 4 * oc3 - oc12 < 4;
    report("4", near && scaled && oc12x3 == 3 * oc12,
           fmt("min crm %llu (6144 +- 5%%), 622.08 Mbps %llu vs 4x %llu, 3 hops %llu",
               static_cast<unsigned long long>(oc3), static_cast<unsigned long long>(oc12),
               static_cast<unsigned long long>(4 * oc3), static_cast<unsigned long long>(oc12x3)));
  }

  // 5: decay closed form vs iteration, and vs the simulated ACR before feedback
  {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> icr(1.0, 155.52);
    std::uniform_int_distribution<int> e(0, 6);
    std::uniform_int_distribution<std::uint64_t> k(0, 400);
    double worst = 0.0;
    for (int i = 0; i < 10'000; ++i) {
      const auto r = mbps_to_cps(icr(rng));
      const double cdf = std::ldexp(1.0, -e(rng));
      const auto n = k(rng);
      const double x = analysis::decay_after(r, cdf, {}, n).cps();
      const double y = analysis::decay_closed_form(r, cdf, {}, n).cps();
      if (x == 0.0 && y == 0.0) continue;
      worst = std::max(worst, std::abs(x - y) / std::max(std::abs(x), std::abs(y)));
    }

    Engine eng(to_topology(fig3));
    metrics::TraceRecorder rec(eng.vc_count(), std::vector<std::uint32_t>(eng.port_count(), metrics::TraceRecorder::kNoGroup),
                               0, SimTime{});
    eng.set_recorder(&rec);
    const SimTime quiet = SimTime::from_ms(549);
    eng.run_until(quiet);
    const auto& p = eng.source_params(0);
    std::size_t checked = 0, mismatched = 0;
    for (const auto& rm : rec.forward_rm(0)) {
      const double want = rm.unacked_before < p.crm
                              ? p.icr.cps()
                              : analysis::decay_after(p.icr, p.cdf, p.mcr, rm.unacked_before - p.crm).cps();
      const double indep = rm.unacked_before < p.crm
                               ? p.icr.cps()
                               : oracle_decay(p.icr.cps(), p.cdf, p.mcr.cps(), rm.unacked_before - p.crm);
      ++checked;
      if (rm.ccr.cps() != want || want != indep) ++mismatched;
    }
    report("5", worst <= 1e-9 && checked > 32 && mismatched == 0,
           fmt("closed form vs iteration worst rel err %.3g over 1e4 triples; %zu RM emissions before feedback, "
               "%zu mismatches",
               worst, checked, mismatched));
  }

  // 6: trigger predicate
  {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<std::uint64_t> crm(1, 1u << 19);
    std::uniform_real_distribution<double> bw(1.0, 4e5);
    std::uniform_int_distribution<int> e(-30, 30);
    std::uniform_real_distribution<double> alpha(1e-3, 1e3);
    int bad = 0;
    for (int i = 0; i < 100'000; ++i) {
      const auto c = crm(rng);
      const double r = bw(rng);
      const double at = static_cast<double>(c) * r;
      const double below = std::nextafter(at, 0.0);
      const double s = std::ldexp(1.0, e(rng));
      const double a = alpha(rng);
      auto T = [&](double f, double b) { return analysis::trigger_predicate(CellRate::from_cps(f), CellRate::from_cps(b), c); };
      if (!T(at, r) || T(below, r)) ++bad;
      if (T(at * s, r * s) != T(at, r) || T(below * s, r * s) != T(below, r)) ++bad;
      // generic alpha away from the boundary
      if (T(2 * at * a, r * a) != true || T(0.5 * at * a, r * a) != false) ++bad;
    }
    report("6", bad == 0, fmt("trigger boundary and scale invariance, %d failures in 1e5 cases", bad));
  }

  // 7: crm from tbe
  {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::uint64_t> tbe(1, (1u << 24) - 1);
    std::uniform_int_distribution<std::uint64_t> nrm(2, 256);
    int bad = 0;
    for (int i = 0; i < 100'000; ++i) {
      const auto t = tbe(rng), n = nrm(rng);
      const auto c = analysis::crm_from_tbe(t, n);
      if (c * n < t || (c - 1) * n >= t) ++bad;
    }
    const auto top = analysis::crm_from_tbe((1u << 24) - 1, 32);
    report("7", bad == 0 && top == (1u << 19),
           fmt("%d ceiling failures in 1e5 pairs; crm(2^24-1, 32) = %llu (want 524288)", bad,
               static_cast<unsigned long long>(top)));
  }

  // 8: determinism
  {
    std::size_t files = 0, differ = 0;
    for (const char* s : {"fig3", "lan", "two_hop"}) {
      const auto a = root / (std::string(s) + "_a"), b = root / (std::string(s) + "_b");
      for (const auto& entry : fs::directory_iterator(a)) {
        if (entry.path().extension() != ".csv") continue;
        ++files;
        if (slurp(entry.path()) != slurp(b / entry.path().filename())) ++differ;
      }
    }
    report("8", files > 0 && differ == 0,
           fmt("%zu CSV files compared across repeated runs of 3 scenarios, %zu differ", files, differ));
  }

  // 9: conservation
  {
    std::uint64_t audits = 0;
    std::size_t violations = 0;
    for (const char* s : {"fig3_a", "lan_a", "two_hop_a"}) {
      audits += runs[s].audits;
      violations += runs[s].violations.size();
    }
    report("9", audits > 0 && violations == 0,
           fmt("%llu conservation audits across bundled scenarios, %zu violations",
               static_cast<unsigned long long>(audits), violations));
  }

  fs::remove_all(root);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
