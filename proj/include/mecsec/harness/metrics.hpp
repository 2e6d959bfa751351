#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mecsec/harness/config.hpp"

namespace mecsec::harness {

// One slot of one run. Offload rows use the transmission fields, auth rows
// the detection fields; the CSV carries only the columns of its scenario.
struct MetricsRow {
  std::uint64_t run = 0;
  std::uint64_t slot = 0;
  std::size_t edge = 0;
  std::size_t rate_level = 0;
  double sinr = 0.0;
  double ber = 0.0;
  double energy_j = 0.0;
  double delay_s = 0.0;
  double utility = 0.0;
  double epsilon = 0.0;
  std::size_t theta_index = 0;
  double theta = 0.0;
  double statistic = 0.0;
  bool spoof = false;
  bool rejected = false;
  double far = 0.0;
  double mdr = 0.0;

  bool operator==(const MetricsRow&) const = default;
};

inline const char* csv_header(Scenario s) {
  return s == Scenario::offload ? "run,slot,edge,rate_level,sinr,ber,energy_j,delay_s,utility,epsilon"
                                : "run,slot,theta_index,theta,statistic,truth,decision,utility,epsilon,far,mdr";
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& os, Scenario s, const std::vector<MetricsRow>& rows) {
  os << csv_header(s) << '\n';
  for (const auto& r : rows) {
    os << r.run << ',' << r.slot << ',';
    if (s == Scenario::offload) {
      os << r.edge << ',' << r.rate_level << ',' << format_real(r.sinr) << ',' << format_real(r.ber) << ','
         << format_real(r.energy_j) << ',' << format_real(r.delay_s) << ',' << format_real(r.utility) << ','
         << format_real(r.epsilon);
    } else {
      os << r.theta_index << ',' << format_real(r.theta) << ',' << format_real(r.statistic) << ','
         << (r.spoof ? "spoof" : "legit") << ',' << (r.rejected ? "reject" : "accept") << ',' << format_real(r.utility)
         << ',' << format_real(r.epsilon) << ',' << format_real(r.far) << ',' << format_real(r.mdr);
    }
    os << '\n';
  }
}

inline std::vector<MetricsRow> read_csv(std::istream& is, Scenario& scenario_out) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("metrics CSV is empty");
  if (line == csv_header(Scenario::offload)) scenario_out = Scenario::offload;
  else if (line == csv_header(Scenario::auth)) scenario_out = Scenario::auth;
  else throw std::runtime_error("unrecognised metrics CSV header: " + line);
  std::vector<MetricsRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    std::vector<std::string> c;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) c.push_back(cell);
    const std::size_t want = scenario_out == Scenario::offload ? 10 : 11;
    if (c.size() != want) throw std::runtime_error("metrics CSV line " + std::to_string(lineno) + ": wrong column count");
    MetricsRow r;
    r.run = std::stoull(c[0]);
    r.slot = std::stoull(c[1]);
    if (scenario_out == Scenario::offload) {
      r.edge = std::stoull(c[2]);
      r.rate_level = std::stoull(c[3]);
      r.sinr = std::strtod(c[4].c_str(), nullptr);
      r.ber = std::strtod(c[5].c_str(), nullptr);
      r.energy_j = std::strtod(c[6].c_str(), nullptr);
      r.delay_s = std::strtod(c[7].c_str(), nullptr);
      r.utility = std::strtod(c[8].c_str(), nullptr);
      r.epsilon = std::strtod(c[9].c_str(), nullptr);
    } else {
      r.theta_index = std::stoull(c[2]);
      r.theta = std::strtod(c[3].c_str(), nullptr);
      r.statistic = std::strtod(c[4].c_str(), nullptr);
      r.spoof = c[5] == "spoof";
      r.rejected = c[6] == "reject";
      r.utility = std::strtod(c[7].c_str(), nullptr);
      r.epsilon = std::strtod(c[8].c_str(), nullptr);
      r.far = std::strtod(c[9].c_str(), nullptr);
      r.mdr = std::strtod(c[10].c_str(), nullptr);
    }
    rows.push_back(r);
  }
  return rows;
}

struct RunSummary {
  std::uint64_t run = 0;
  std::uint64_t slots = 0;
  double mean_utility = 0.0;
  double asymptote = 0.0;            // mean utility over the last 20% of slots
  std::uint64_t convergence_slot = 0;  // first slot where the smoothed utility is within 10% of the asymptote
  // offload (last 20%)
  double sinr = 0.0;
  double energy_j = 0.0;
  double delay_s = 0.0;
  // auth (whole run)
  double far = 0.0;
  double mdr = 0.0;
  double balanced_error = 0.0;  // (far + mdr) / 2

  bool operator==(const RunSummary&) const = default;
};

struct SummaryReport {
  Scenario scenario = Scenario::offload;
  std::string agent;
  std::uint64_t runs = 0;
  std::uint64_t slots = 0;
  std::vector<RunSummary> per_run;  // empty when slots == 0
  RunSummary median;                // run field unused

  bool has_data() const { return !per_run.empty(); }
  bool operator==(const SummaryReport&) const = default;
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::size_t tail_start(std::size_t n) { return n - std::max<std::size_t>(1, n / 5); }

inline std::size_t smoothing_window(std::size_t n) { return std::max<std::size_t>(1, n / 50); }

// Slots until the trailing moving average (window n/50) first reaches 90% of
// the asymptote, i.e. asymptote - 0.1 * |asymptote|. Returns n if it never does.
inline std::uint64_t convergence_slot(const std::vector<double>& u, double asymptote) {
  const std::size_t n = u.size();
  if (n == 0) return 0;
  const std::size_t w = smoothing_window(n);
  const double target = asymptote - 0.1 * std::abs(asymptote);
  double sum = 0.0;
  for (std::size_t i = 0; i < w; ++i) sum += u[i];
  for (std::size_t t = w - 1;; ++t) {
    if (sum / static_cast<double>(w) >= target) return t + 1;
    if (t + 1 >= n) break;
    sum += u[t + 1] - u[t + 1 - w];
  }
  return n;
}

inline RunSummary summarize_run(Scenario s, std::uint64_t run, const std::vector<const MetricsRow*>& rows) {
  RunSummary r;
  r.run = run;
  r.slots = rows.size();
  const std::size_t n = rows.size();
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = rows[i]->utility;
  double total = 0.0;
  for (double x : u) total += x;
  r.mean_utility = total / static_cast<double>(n);
  const std::size_t t0 = tail_start(n);
  double a = 0, si = 0, en = 0, de = 0;
  for (std::size_t i = t0; i < n; ++i) {
    a += rows[i]->utility;
    si += rows[i]->sinr;
    en += rows[i]->energy_j;
    de += rows[i]->delay_s;
  }
  const double m = static_cast<double>(n - t0);
  r.asymptote = a / m;
  r.convergence_slot = convergence_slot(u, r.asymptote);
  if (s == Scenario::offload) {
    r.sinr = si / m;
    r.energy_j = en / m;
    r.delay_s = de / m;
  } else {
    std::size_t legit = 0, spoof = 0, fa = 0, miss = 0;
    for (const auto* row : rows) {
      if (row->spoof) {
        ++spoof;
        miss += !row->rejected;
      } else {
        ++legit;
        fa += row->rejected;
      }
    }
    r.far = legit ? static_cast<double>(fa) / static_cast<double>(legit) : 0.0;
    r.mdr = spoof ? static_cast<double>(miss) / static_cast<double>(spoof) : 0.0;
    r.balanced_error = 0.5 * (r.far + r.mdr);
  }
  return r;
}

inline SummaryReport summarize(Scenario s, const std::string& agent, std::uint64_t runs, std::uint64_t slots,
                               const std::vector<MetricsRow>& rows) {
  SummaryReport rep;
  rep.scenario = s;
  rep.agent = agent;
  rep.runs = runs;
  rep.slots = slots;
  std::map<std::uint64_t, std::vector<const MetricsRow*>> by_run;
  for (const auto& r : rows) by_run[r.run].push_back(&r);
  for (auto& [run, rs] : by_run) {
    std::sort(rs.begin(), rs.end(), [](const MetricsRow* a, const MetricsRow* b) { return a->slot < b->slot; });
    rep.per_run.push_back(summarize_run(s, run, rs));
  }
  if (rep.per_run.empty()) return rep;
  const auto med = [&](auto proj) {
    std::vector<double> v;
    for (const auto& r : rep.per_run) v.push_back(static_cast<double>(proj(r)));
    return median_of(v);
  };
  rep.median.slots = slots;
  rep.median.mean_utility = med([](const RunSummary& r) { return r.mean_utility; });
  rep.median.asymptote = med([](const RunSummary& r) { return r.asymptote; });
  rep.median.convergence_slot =
      static_cast<std::uint64_t>(std::llround(med([](const RunSummary& r) { return r.convergence_slot; })));
  rep.median.sinr = med([](const RunSummary& r) { return r.sinr; });
  rep.median.energy_j = med([](const RunSummary& r) { return r.energy_j; });
  rep.median.delay_s = med([](const RunSummary& r) { return r.delay_s; });
  rep.median.far = med([](const RunSummary& r) { return r.far; });
  rep.median.mdr = med([](const RunSummary& r) { return r.mdr; });
  rep.median.balanced_error = med([](const RunSummary& r) { return r.balanced_error; });
  return rep;
}

inline void write_summary(std::ostream& os, const SummaryReport& rep) {
  os << "scenario " << to_string(rep.scenario) << ", agent " << rep.agent << ", " << rep.runs << " runs x " << rep.slots
     << " slots\n";
  if (!rep.has_data()) {
    os << "no data\n\n[summary]\nscenario = " << to_string(rep.scenario) << "\nagent = " << rep.agent
       << "\nruns = " << rep.runs << "\nslots = " << rep.slots << "\nstatus = no-data\n";
    return;
  }
  const bool off = rep.scenario == Scenario::offload;
  char buf[256];
  os << (off ? "  run   asymptote  converge      sinr   energy_j   delay_s\n"
             : "  run   asymptote  converge       far       mdr  balanced\n");
  const auto line = [&](const std::string& label, const RunSummary& r) {
    if (off)
      std::snprintf(buf, sizeof buf, "%5s %11.5f %9llu %9.4f %10.5f %9.5f\n", label.c_str(), r.asymptote,
                    static_cast<unsigned long long>(r.convergence_slot), r.sinr, r.energy_j, r.delay_s);
    else
      std::snprintf(buf, sizeof buf, "%5s %11.5f %9llu %9.5f %9.5f %9.5f\n", label.c_str(), r.asymptote,
                    static_cast<unsigned long long>(r.convergence_slot), r.far, r.mdr, r.balanced_error);
    os << buf;
  };
  for (const auto& r : rep.per_run) line(std::to_string(r.run), r);
  line("med", rep.median);

  os << "\n[summary]\nscenario = " << to_string(rep.scenario) << "\nagent = " << rep.agent << "\nruns = " << rep.runs
     << "\nslots = " << rep.slots << "\nstatus = ok\n";
  const auto kv = [&](const std::string& prefix, const RunSummary& r) {
    os << prefix << "mean_utility = " << format_real(r.mean_utility) << '\n'
       << prefix << "asymptote = " << format_real(r.asymptote) << '\n'
       << prefix << "convergence_slot = " << r.convergence_slot << '\n';
    if (off)
      os << prefix << "sinr = " << format_real(r.sinr) << '\n'
         << prefix << "energy_j = " << format_real(r.energy_j) << '\n'
         << prefix << "delay_s = " << format_real(r.delay_s) << '\n';
    else
      os << prefix << "far = " << format_real(r.far) << '\n'
         << prefix << "mdr = " << format_real(r.mdr) << '\n'
         << prefix << "balanced_error = " << format_real(r.balanced_error) << '\n';
  };
  for (const auto& r : rep.per_run) kv("run." + std::to_string(r.run) + ".", r);
  kv("median.", rep.median);
}

}  // namespace mecsec::harness
