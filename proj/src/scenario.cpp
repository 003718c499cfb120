#include "abrsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "abrsim/analysis.hpp"

namespace abrsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool valid_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

double parse_plain_real(std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw ConfigError("expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_count(std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError("expected a nonnegative integer, got '" + std::string(text) + "'");
  }
  return v;
}

std::uint32_t parse_count32(std::string_view text) {
  const auto v = parse_count(text);
  if (v > 0xffffffffULL) throw ConfigError("integer out of range: '" + std::string(text) + "'");
  return static_cast<std::uint32_t>(v);
}

SimTime parse_time(std::string_view text, double ps_per_unit) {
  const double v = parse_real(text);
  if (v < 0.0) throw ConfigError("time must be nonnegative: '" + std::string(text) + "'");
  const double ps = std::round(v * ps_per_unit);
  if (ps >= 1.8e19) throw ConfigError("time out of range: '" + std::string(text) + "'");
  return SimTime::from_ps(static_cast<std::uint64_t>(ps));
}

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  while (true) {
    const auto pos = text.find(sep);
    const auto item = trim(text.substr(0, pos));
    if (!item.empty()) out.emplace_back(item);
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return out;
}

TimeWindow parse_window(std::string_view text) {
  const auto parts = split_list(text, ':');
  if (parts.size() != 2) throw ConfigError("window must be start:end in ms, got '" + std::string(text) + "'");
  TimeWindow w{parse_time(parts[0], 1e9), parse_time(parts[1], 1e9)};
  if (!(w.start < w.end)) throw ConfigError("window end must follow its start: '" + std::string(text) + "'");
  return w;
}

std::string fmt_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt_time(SimTime t, double ps_per_unit) { return fmt_real(static_cast<double>(t.ps()) / ps_per_unit); }

std::string fmt_window(const TimeWindow& w) { return fmt_time(w.start, 1e9) + ":" + fmt_time(w.end, 1e9); }

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

[[noreturn]] void unknown_key(std::string_view key) { throw ConfigError("unknown key '" + std::string(key) + "'"); }

void set_source_key(SourceConfig& s, std::string_view key, std::string_view value, bool& crm_given) {
  if (key == "pcr_mbps") s.pcr_mbps = parse_real(value);
  else if (key == "mcr_mbps") s.mcr_mbps = parse_real(value);
  else if (key == "icr_mbps") s.icr_mbps = parse_real(value);
  else if (key == "nrm") s.nrm = parse_count32(value);
  else if (key == "rif") s.rif = parse_real(value);
  else if (key == "cdf") s.cdf = parse_real(value);
  else if (key == "crm") { s.crm = parse_count(value); crm_given = true; }
  else if (key == "tbe") s.tbe = parse_count(value);
  else unknown_key(key);
}

void set_switch_key(SwitchConfig& s, std::string_view key, std::string_view value) {
  if (key == "target_utilization") s.target_utilization = parse_real(value);
  else if (key == "interval_cells") s.interval_cells = parse_count32(value);
  else if (key == "interval_us") s.interval = parse_time(value, 1e6);
  else if (key == "interval_ms") s.interval = parse_time(value, 1e9);
  else unknown_key(key);
}

void set_link_key(LinkConfig& l, std::string_view key, std::string_view value) {
  if (key == "from") l.from = std::string(trim(value));
  else if (key == "to") l.to = std::string(trim(value));
  else if (key == "rate_mbps") l.rate_mbps = parse_real(value);
  else if (key == "delay_ms") l.delay = parse_time(value, 1e9);
  else if (key == "delay_us") l.delay = parse_time(value, 1e6);
  else unknown_key(key);
}

void set_vc_key(VcConfig& v, std::string_view key, std::string_view value) {
  if (key == "source") v.source = std::string(trim(value));
  else if (key == "path") v.path = split_list(value, ',');
  else unknown_key(key);
}

void set_run_key(RunConfig& r, std::string_view key, std::string_view value) {
  if (key == "until_ms") r.until = parse_time(value, 1e9);
  else if (key == "out") r.out = std::string(trim(value));
  else if (key == "windows_ms") {
    r.windows.clear();
    for (const auto& w : split_list(value, ',')) r.windows.push_back(parse_window(w));
  } else if (key == "steady_ms") r.steady = parse_window(value);
  else if (key == "osc_low_mbps") r.osc_low_mbps = parse_real(value);
  else if (key == "osc_high_mbps") r.osc_high_mbps = parse_real(value);
  else if (key == "recv_resolution_us") r.recv_resolution = parse_time(value, 1e6);
  else if (key == "audit_ms") r.audit_period = parse_time(value, 1e9);
  else unknown_key(key);
}

void add_default_topology(Scenario& s) {
  s.switches.push_back(SwitchConfig{"sw1"});
  s.links.push_back(LinkConfig{"lan1", "S1", "sw1"});
  s.links.push_back(LinkConfig{"lan2", "sw1", "D1"});
  s.vcs.push_back(VcConfig{"vc0", s.sources.front().name, {"S1", "sw1", "D1"}});
}

void validate(const Scenario& s) {
  for (const auto& src : s.sources) {
    try {
      src.params().validate();
    } catch (const std::exception& e) {
      throw ConfigError("source '" + src.name + "': " + e.what());
    }
  }
  for (const auto& l : s.links) {
    if (l.from.empty() || l.to.empty()) throw ConfigError("link '" + l.name + "' needs from and to");
    if (!(l.rate_mbps > 0.0)) throw ConfigError("link '" + l.name + "' needs a positive rate");
  }
  for (const auto& v : s.vcs) {
    if (v.path.empty()) throw ConfigError("vc '" + v.name + "' needs a path");
    for (const auto& n : v.path) {
      if (!valid_name(n)) throw ConfigError("vc '" + v.name + "': bad node name '" + n + "'");
    }
    s.source(v.source);
  }
  if (!(s.run.osc_low_mbps >= 0.0 && s.run.osc_low_mbps < s.run.osc_high_mbps)) {
    throw ConfigError("run: osc_low_mbps must be nonnegative and below osc_high_mbps");
  }
  // Topology checks live in the engine.
  Engine probe(to_topology(s));
}

}  // namespace

double parse_real(std::string_view text) {
  text = trim(text);
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_plain_real(text);
  const double num = parse_plain_real(text.substr(0, slash));
  const double den = parse_plain_real(text.substr(slash + 1));
  if (den == 0.0) throw ConfigError("division by zero in '" + std::string(text) + "'");
  return num / den;
}

SourceParams SourceConfig::params() const {
  SourceParams p;
  p.pcr = mbps_to_cps(pcr_mbps);
  p.mcr = mbps_to_cps(mcr_mbps);
  p.icr = mbps_to_cps(icr_mbps);
  p.nrm = nrm;
  p.rif = rif;
  p.cdf = cdf;
  p.crm = crm;
  p.tbe = tbe;
  return p;
}

TimeWindow RunConfig::steady_window() const {
  if (steady) return *steady;
  return {SimTime::from_ps(until.ps() / 2), until};
}

const SourceConfig& Scenario::source(std::string_view name) const {
  const auto it = std::find_if(sources.begin(), sources.end(), [&](const auto& s) { return s.name == name; });
  if (it == sources.end()) throw ConfigError("unknown source profile '" + std::string(name) + "'");
  return *it;
}

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  enum class Kind { None, Run, Source, Switch, Link, Vc } kind = Kind::None;
  std::size_t index = 0;
  std::set<std::string> sections;
  std::set<std::string> keys_in_section;
  std::vector<bool> crm_given;

  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::string where = "line " + std::to_string(line_no) + ": ";
    try {
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("unterminated section header");
        const auto header = trim(line.substr(1, line.size() - 2));
        if (!sections.insert(std::string(header)).second) {
          throw ConfigError("duplicate section [" + std::string(header) + "]");
        }
        keys_in_section.clear();
        if (header == "run") {
          kind = Kind::Run;
          continue;
        }
        const auto dot = header.find('.');
        if (dot == std::string_view::npos) throw ConfigError("unknown section [" + std::string(header) + "]");
        const auto type = header.substr(0, dot);
        const std::string name(header.substr(dot + 1));
        if (!valid_name(name)) throw ConfigError("bad section name '" + name + "'");
        if (type == "source") {
          kind = Kind::Source;
          index = s.sources.size();
          SourceConfig src;
          src.name = name;
          s.sources.push_back(src);
          crm_given.push_back(false);
        } else if (type == "switch") {
          kind = Kind::Switch;
          index = s.switches.size();
          s.switches.push_back(SwitchConfig{name});
        } else if (type == "link") {
          kind = Kind::Link;
          index = s.links.size();
          LinkConfig l;
          l.name = name;
          s.links.push_back(l);
        } else if (type == "vc") {
          kind = Kind::Vc;
          index = s.vcs.size();
          s.vcs.push_back(VcConfig{name, {}, {}});
        } else {
          throw ConfigError("unknown section type '" + std::string(type) + "'");
        }
        continue;
      }

      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError("expected key = value");
      const auto key = trim(line.substr(0, eq));
      const auto value = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("missing key");
      if (!keys_in_section.insert(std::string(key)).second) {
        throw ConfigError("duplicate key '" + std::string(key) + "'");
      }
      switch (kind) {
        case Kind::None:
          throw ConfigError("key '" + std::string(key) + "' outside of a section");
        case Kind::Run:
          set_run_key(s.run, key, value);
          break;
        case Kind::Source: {
          bool given = crm_given[index];
          set_source_key(s.sources[index], key, value, given);
          crm_given[index] = given;
          break;
        }
        case Kind::Switch:
          set_switch_key(s.switches[index], key, value);
          break;
        case Kind::Link:
          set_link_key(s.links[index], key, value);
          break;
        case Kind::Vc:
          set_vc_key(s.vcs[index], key, value);
          break;
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    } catch (const std::exception& e) {
      throw ConfigError(where + e.what());
    }
  }

  for (std::size_t i = 0; i < s.sources.size(); ++i) {
    auto& src = s.sources[i];
    if (src.tbe && !crm_given[i]) {
      if (*src.tbe == 0 || src.nrm == 0) throw ConfigError("source '" + src.name + "': tbe and nrm must be positive");
      src.crm = analysis::crm_from_tbe(*src.tbe, src.nrm);
    }
  }
  if (s.sources.empty()) s.sources.emplace_back();
  if (s.switches.empty() && s.links.empty() && s.vcs.empty()) add_default_topology(s);
  for (auto& v : s.vcs) {
    if (v.source.empty()) {
      if (s.sources.size() != 1) throw ConfigError("vc '" + v.name + "' must name its source profile");
      v.source = s.sources.front().name;
    }
  }
  validate(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string render_scenario(const Scenario& s) {
  std::ostringstream o;
  o << "[run]\n";
  o << "until_ms = " << fmt_time(s.run.until, 1e9) << "\n";
  if (!s.run.out.empty()) o << "out = " << s.run.out << "\n";
  if (!s.run.windows.empty()) {
    std::vector<std::string> ws;
    for (const auto& w : s.run.windows) ws.push_back(fmt_window(w));
    o << "windows_ms = " << join(ws, ", ") << "\n";
  }
  if (s.run.steady) o << "steady_ms = " << fmt_window(*s.run.steady) << "\n";
  o << "osc_low_mbps = " << fmt_real(s.run.osc_low_mbps) << "\n";
  o << "osc_high_mbps = " << fmt_real(s.run.osc_high_mbps) << "\n";
  o << "recv_resolution_us = " << fmt_time(s.run.recv_resolution, 1e6) << "\n";
  o << "audit_ms = " << fmt_time(s.run.audit_period, 1e9) << "\n";

  for (const auto& src : s.sources) {
    o << "\n[source." << src.name << "]\n";
    o << "pcr_mbps = " << fmt_real(src.pcr_mbps) << "\n";
    o << "mcr_mbps = " << fmt_real(src.mcr_mbps) << "\n";
    o << "icr_mbps = " << fmt_real(src.icr_mbps) << "\n";
    o << "nrm = " << src.nrm << "\n";
    o << "rif = " << fmt_real(src.rif) << "\n";
    o << "cdf = " << fmt_real(src.cdf) << "\n";
    o << "crm = " << src.crm << "\n";
    if (src.tbe) o << "tbe = " << *src.tbe << "\n";
  }
  for (const auto& sw : s.switches) {
    o << "\n[switch." << sw.name << "]\n";
    o << "target_utilization = " << fmt_real(sw.target_utilization) << "\n";
    o << "interval_cells = " << sw.interval_cells << "\n";
    o << "interval_us = " << fmt_time(sw.interval, 1e6) << "\n";
  }
  for (const auto& l : s.links) {
    o << "\n[link." << l.name << "]\n";
    o << "from = " << l.from << "\n";
    o << "to = " << l.to << "\n";
    o << "rate_mbps = " << fmt_real(l.rate_mbps) << "\n";
    o << "delay_ms = " << fmt_time(l.delay, 1e9) << "\n";
  }
  for (const auto& v : s.vcs) {
    o << "\n[vc." << v.name << "]\n";
    o << "source = " << v.source << "\n";
    o << "path = " << join(v.path, ", ") << "\n";
  }
  return o.str();
}

Topology to_topology(const Scenario& s) {
  Topology t;
  std::set<std::string> seen;
  for (const auto& sw : s.switches) {
    NodeSpec n;
    n.name = sw.name;
    n.kind = NodeKind::Switch;
    n.erica.target_utilization = sw.target_utilization;
    n.erica.interval_cell_limit = sw.interval_cells;
    n.erica.interval_time_limit = sw.interval;
    t.nodes.push_back(n);
    seen.insert(sw.name);
  }
  auto add_end_system = [&](const std::string& name) {
    if (seen.insert(name).second) t.nodes.push_back(NodeSpec{name, NodeKind::EndSystem, {}});
  };
  for (const auto& l : s.links) {
    add_end_system(l.from);
    add_end_system(l.to);
    t.links.push_back(LinkEdge{l.from, l.to, LinkSpec{l.name, mbps_to_cps(l.rate_mbps), l.delay}});
  }
  for (const auto& v : s.vcs) {
    for (const auto& n : v.path) add_end_system(n);
    t.vcs.push_back(VcSpec{v.name, s.source(v.source).params(), v.path});
  }
  return t;
}

void apply_override(Scenario& s, std::string_view param, std::string_view value) {
  const std::string ctx = "override " + std::string(param) + "=" + std::string(value) + ": ";
  try {
    if (param == "crm") {
      const auto crm = parse_count(value);
      for (auto& src : s.sources) {
        src.crm = crm;
        src.tbe.reset();
      }
    } else if (param == "cdf") {
      const double cdf = parse_real(value);
      for (auto& src : s.sources) src.cdf = cdf;
    } else if (param == "icr") {
      const double icr = parse_real(value);
      for (auto& src : s.sources) src.icr_mbps = icr;
    } else if (param == "rif") {
      const double rif = parse_real(value);
      for (auto& src : s.sources) src.rif = rif;
    } else if (param == "until_ms") {
      s.run.until = parse_time(value, 1e9);
    } else {
      throw ConfigError("unknown parameter '" + std::string(param) + "'");
    }
    validate(s);
  } catch (const std::exception& e) {
    throw ConfigError(ctx + e.what());
  }
}

}  // namespace abrsim
