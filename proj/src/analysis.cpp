#include "abrsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abrsim::analysis {

namespace {

void check_path(const PathSpec& path) {
  if (path.link_rate.is_zero()) throw std::domain_error("path link rate must be positive");
  if (path.nrm == 0) throw std::domain_error("nrm must be positive");
  if (path.hops == 0) throw std::domain_error("hops must be positive");
}

std::uint64_t ceil_to_count(double x) {
  // Products like 0.55 s * rate land a hair above an integer; snap those
  // back before taking the ceiling.
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, nearest)) return static_cast<std::uint64_t>(nearest);
  return static_cast<std::uint64_t>(std::ceil(x));
}

}  // namespace

std::uint64_t crm_from_tbe(std::uint64_t tbe, std::uint64_t nrm) {
  if (tbe == 0 || nrm == 0) throw std::domain_error("crm_from_tbe: tbe and nrm must be positive");
  return tbe / nrm + (tbe % nrm != 0 ? 1 : 0);
}

std::uint64_t flight_capacity(const PathSpec& path) {
  check_path(path);
  return ceil_to_count(path.rtt.seconds() * path.link_rate.cps());
}

std::uint64_t min_crm(const PathSpec& path) {
  check_path(path);
  return ceil_to_count(path.rtt.seconds() * path.link_rate.cps() / path.nrm) * path.hops;
}

CellRate decay_after(CellRate icr, double cdf, CellRate mcr, std::uint64_t k) {
  if (!(cdf >= 0.0 && cdf <= 1.0)) throw std::domain_error("cdf must lie in [0, 1]");
  double acr = icr.cps();
  if (cdf == 0.0) return CellRate::from_cps(std::max(mcr.cps(), acr));
  for (std::uint64_t step = 0; step <= k; ++step) {
    acr = std::max(mcr.cps(), acr - acr * cdf);
    if (acr == mcr.cps()) break;
  }
  return CellRate::from_cps(acr);
}

CellRate decay_closed_form(CellRate icr, double cdf, CellRate mcr, std::uint64_t k) {
  if (!(cdf >= 0.0 && cdf <= 1.0)) throw std::domain_error("cdf must lie in [0, 1]");
  const double rate = icr.cps() * std::pow(1.0 - cdf, static_cast<double>(k) + 1.0);
  return CellRate::from_cps(std::max(mcr.cps(), rate));
}

bool trigger_predicate(CellRate fwd_rate, CellRate bwd_rate, std::uint64_t crm) {
  if (fwd_rate.is_zero()) throw std::domain_error("trigger_predicate: forward rate must be positive");
  return fwd_rate.cps() >= static_cast<double>(crm) * bwd_rate.cps();
}

}  // namespace abrsim::analysis
