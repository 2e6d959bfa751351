#pragma once

// Experiment configuration and its flat `section.key = value` text format.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "mecsec/agents/dqn.hpp"
#include "mecsec/auth/env.hpp"
#include "mecsec/core/error.hpp"
#include "mecsec/core/hyperparams.hpp"
#include "mecsec/offload/config.hpp"

namespace mecsec::harness {

enum class Scenario { offload, auth };
enum class AgentKind { random, fixed, qlearn, dynaq, pds, dqn, dqn_hotboot };

inline const char* to_string(Scenario s) { return s == Scenario::offload ? "offload" : "auth"; }

inline const char* to_string(AgentKind a) {
  switch (a) {
    case AgentKind::random: return "random";
    case AgentKind::fixed: return "fixed";
    case AgentKind::qlearn: return "qlearn";
    case AgentKind::dynaq: return "dynaq";
    case AgentKind::pds: return "pds";
    case AgentKind::dqn: return "dqn";
    case AgentKind::dqn_hotboot: return "dqn-hotboot";
  }
  return "?";
}

inline bool is_learning(AgentKind a) { return a != AgentKind::random && a != AgentKind::fixed; }

struct HotbootParams {
  std::string weights_path;  // empty: pretrain in-process before the runs
  std::size_t pretrain_episodes = 4;
  std::uint64_t pretrain_slots = 2500;
  double perturbation = 0.2;  // relative spread on jam power and channel stay-probabilities
  double epsilon0 = 0.1;      // exploration restart after loading weights

  bool operator==(const HotbootParams&) const = default;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::offload;
  AgentKind agent = AgentKind::qlearn;
  std::uint64_t slots = 10000;
  std::uint64_t runs = 10;
  std::uint64_t base_seed = 1;
  std::size_t threads = 1;
  std::string output_dir = "out";
  AgentHyperparams hp{};
  std::size_t planning_steps = 10;
  long long fixed_action = -1;  // -1: best static action in hindsight
  agents::DqnParams dqn{};
  HotbootParams hotboot{};
  offload::OffloadConfig offload{};
  auth::AuthConfig auth{};

  bool operator==(const ExperimentConfig&) const = default;

  void validate() const {
    require(runs > 0, "experiment.runs", "must be positive");
    require(threads > 0, "experiment.threads", "must be positive");
    hp.validate("agent");
    const auto& d = dqn;
    require(d.history > 0, "dqn.history", "must be positive");
    require(d.conv1_kernel > 0 && d.conv1_kernel <= d.history, "dqn.conv1_kernel", "must lie in [1, history]");
    require(d.conv2_kernel > 0 && d.conv2_kernel <= d.history - d.conv1_kernel + 1, "dqn.conv2_kernel",
            "must fit the first convolution's output length");
    require(d.conv1_filters > 0, "dqn.conv1_filters", "must be positive");
    require(d.conv2_filters > 0, "dqn.conv2_filters", "must be positive");
    require(d.hidden > 0, "dqn.hidden", "must be positive");
    require(d.replay_capacity > 0, "dqn.replay_capacity", "must be positive");
    require(d.batch_size > 0, "dqn.batch_size", "must be positive");
    require(d.target_sync_period > 0, "dqn.target_sync_period", "must be positive");
    require(d.learning_rate > 0, "dqn.learning_rate", "must be > 0");
    require(hotboot.pretrain_episodes > 0, "hotboot.pretrain_episodes", "must be positive");
    require(hotboot.perturbation >= 0 && hotboot.perturbation < 1, "hotboot.perturbation", "must lie in [0, 1)");
    require(hotboot.epsilon0 >= hp.epsilon_min && hotboot.epsilon0 <= 1, "hotboot.epsilon0",
            "must lie in [agent.epsilon_min, 1]");
    if (!hotboot.weights_path.empty())
      require(std::filesystem::exists(hotboot.weights_path), "hotboot.weights", "file does not exist: " + hotboot.weights_path);
    if (scenario == Scenario::offload) {
      offload.validate();
      if (fixed_action >= 0)
        require(static_cast<std::size_t>(fixed_action) < offload.num_actions(), "agent.fixed_action", "out of range");
    } else {
      auth.validate();
      if (fixed_action >= 0)
        require(static_cast<std::size_t>(fixed_action) < auth.threshold_grid.size(), "agent.fixed_action", "out of range");
      require(agent != AgentKind::pds, "experiment.agent", "pds needs a known-dynamics split; the auth scenario has none");
      require(agent != AgentKind::dqn_hotboot, "experiment.agent", "hotbooting is defined for the offload scenario only");
    }
  }
};

class ConfigParseError : public std::runtime_error {
 public:
  ConfigParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Shortest text that parses back to the same double.
inline std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key, "expected a number, got '" + v + "'");
  return out;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  if (v.empty() || v[0] == '-') throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  std::size_t used = 0;
  std::uint64_t out = 0;
  try {
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

inline long long parse_i64(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(v);
  while (std::getline(is, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

inline std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_double(v[i]);
  return s;
}

inline std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& tok : split_list(v)) out.push_back(parse_double(key, tok));
  return out;
}

struct Field {
  std::string key;
  int scope;  // 0 common, 1 offload, 2 auth
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

inline void add_hyperparams(std::vector<Field>& f, const std::string& prefix, int scope,
                            std::function<AgentHyperparams&(ExperimentConfig&)> ref) {
  auto cref = [ref](const ExperimentConfig& c) -> const AgentHyperparams& { return ref(const_cast<ExperimentConfig&>(c)); };
  const auto add_real = [&](const std::string& name, double AgentHyperparams::*m) {
    const std::string key = prefix + name;
    f.push_back({key, scope, [=](const ExperimentConfig& c) { return fmt_double(cref(c).*m); },
                 [=](ExperimentConfig& c, const std::string& v) { ref(c).*m = parse_double(key, v); }});
  };
  add_real("alpha", &AgentHyperparams::alpha);
  add_real("gamma", &AgentHyperparams::gamma);
  add_real("epsilon0", &AgentHyperparams::epsilon0);
  add_real("epsilon_min", &AgentHyperparams::epsilon_min);
  add_real("epsilon_decay", &AgentHyperparams::epsilon_decay);
  const std::string mode_key = prefix + "alpha_mode";
  f.push_back({mode_key, scope, [=](const ExperimentConfig& c) { return std::string(to_string(cref(c).alpha_mode)); },
               [=](ExperimentConfig& c, const std::string& v) {
                 if (v == "fixed") ref(c).alpha_mode = AlphaMode::fixed;
                 else if (v == "visit_decay") ref(c).alpha_mode = AlphaMode::visit_decay;
                 else throw ConfigError(mode_key, "expected fixed or visit_decay, got '" + v + "'");
               }});
  add_real("alpha_decay_exponent", &AgentHyperparams::alpha_decay_exponent);
}

// Every key of the format, in print order.
inline const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f;
    using C = ExperimentConfig;
    const auto u64 = [&f](std::string key, int scope, auto getter) {
      f.push_back({key, scope, [getter](const C& c) { return std::to_string(getter(const_cast<C&>(c))); },
                   [getter, key](C& c, const std::string& v) {
                     getter(c) = static_cast<std::remove_reference_t<decltype(getter(c))>>(parse_u64(key, v));
                   }});
    };
    const auto dbl = [&f](std::string key, int scope, auto getter) {
      f.push_back({key, scope, [getter](const C& c) { return fmt_double(getter(const_cast<C&>(c))); },
                   [getter, key](C& c, const std::string& v) { getter(c) = parse_double(key, v); }});
    };
    const auto dlist = [&f](std::string key, int scope, auto getter) {
      f.push_back({key, scope, [getter](const C& c) { return join_doubles(getter(const_cast<C&>(c))); },
                   [getter, key](C& c, const std::string& v) { getter(c) = parse_doubles(key, v); }});
    };
    const auto boolean = [&f](std::string key, int scope, auto getter) {
      f.push_back({key, scope, [getter](const C& c) { return std::string(getter(const_cast<C&>(c)) ? "true" : "false"); },
                   [getter, key](C& c, const std::string& v) {
                     if (v == "true") getter(c) = true;
                     else if (v == "false") getter(c) = false;
                     else throw ConfigError(key, "expected true or false, got '" + v + "'");
                   }});
    };

    f.push_back({"experiment.scenario", 0, [](const C& c) { return std::string(to_string(c.scenario)); },
                 [](C& c, const std::string& v) {
                   if (v == "offload") c.scenario = Scenario::offload;
                   else if (v == "auth") c.scenario = Scenario::auth;
                   else throw ConfigError("experiment.scenario", "expected offload or auth, got '" + v + "'");
                 }});
    f.push_back({"experiment.agent", 0, [](const C& c) { return std::string(to_string(c.agent)); },
                 [](C& c, const std::string& v) {
                   for (auto k : {AgentKind::random, AgentKind::fixed, AgentKind::qlearn, AgentKind::dynaq, AgentKind::pds,
                                  AgentKind::dqn, AgentKind::dqn_hotboot})
                     if (v == to_string(k)) {
                       c.agent = k;
                       return;
                     }
                   throw ConfigError("experiment.agent",
                                     "expected one of random, fixed, qlearn, dynaq, pds, dqn, dqn-hotboot; got '" + v + "'");
                 }});
    u64("experiment.slots", 0, [](C& c) -> std::uint64_t& { return c.slots; });
    u64("experiment.runs", 0, [](C& c) -> std::uint64_t& { return c.runs; });
    u64("experiment.base_seed", 0, [](C& c) -> std::uint64_t& { return c.base_seed; });
    u64("experiment.threads", 0, [](C& c) -> std::size_t& { return c.threads; });
    f.push_back({"experiment.output_dir", 0, [](const C& c) { return c.output_dir; },
                 [](C& c, const std::string& v) { c.output_dir = v; }});

    add_hyperparams(f, "agent.", 0, [](C& c) -> AgentHyperparams& { return c.hp; });
    u64("agent.planning_steps", 0, [](C& c) -> std::size_t& { return c.planning_steps; });
    f.push_back({"agent.fixed_action", 0, [](const C& c) { return std::to_string(c.fixed_action); },
                 [](C& c, const std::string& v) { c.fixed_action = parse_i64("agent.fixed_action", v); }});

    u64("dqn.history", 0, [](C& c) -> std::size_t& { return c.dqn.history; });
    u64("dqn.conv1_filters", 0, [](C& c) -> std::size_t& { return c.dqn.conv1_filters; });
    u64("dqn.conv1_kernel", 0, [](C& c) -> std::size_t& { return c.dqn.conv1_kernel; });
    u64("dqn.conv2_filters", 0, [](C& c) -> std::size_t& { return c.dqn.conv2_filters; });
    u64("dqn.conv2_kernel", 0, [](C& c) -> std::size_t& { return c.dqn.conv2_kernel; });
    u64("dqn.hidden", 0, [](C& c) -> std::size_t& { return c.dqn.hidden; });
    u64("dqn.replay_capacity", 0, [](C& c) -> std::size_t& { return c.dqn.replay_capacity; });
    u64("dqn.batch_size", 0, [](C& c) -> std::size_t& { return c.dqn.batch_size; });
    u64("dqn.target_sync_period", 0, [](C& c) -> std::size_t& { return c.dqn.target_sync_period; });
    dbl("dqn.learning_rate", 0, [](C& c) -> double& { return c.dqn.learning_rate; });

    f.push_back({"hotboot.weights", 1, [](const C& c) { return c.hotboot.weights_path; },
                 [](C& c, const std::string& v) { c.hotboot.weights_path = v; }});
    u64("hotboot.pretrain_episodes", 1, [](C& c) -> std::size_t& { return c.hotboot.pretrain_episodes; });
    u64("hotboot.pretrain_slots", 1, [](C& c) -> std::uint64_t& { return c.hotboot.pretrain_slots; });
    dbl("hotboot.perturbation", 1, [](C& c) -> double& { return c.hotboot.perturbation; });
    dbl("hotboot.epsilon0", 1, [](C& c) -> double& { return c.hotboot.epsilon0; });

    u64("offload.num_edges", 1, [](C& c) -> std::size_t& { return c.offload.num_edges; });
    u64("offload.num_rate_levels", 1, [](C& c) -> std::size_t& { return c.offload.num_rate_levels; });
    dbl("offload.tx_power_mw", 1, [](C& c) -> double& { return c.offload.tx_power_mw; });
    dbl("offload.noise_mw", 1, [](C& c) -> double& { return c.offload.noise_mw; });
    u64("offload.task_bits", 1, [](C& c) -> std::uint64_t& { return c.offload.task_bits; });
    u64("offload.cpu_cycles_per_bit", 1, [](C& c) -> std::uint64_t& { return c.offload.cpu_cycles_per_bit; });
    dbl("offload.local_cpu_hz", 1, [](C& c) -> double& { return c.offload.local_cpu_hz; });
    dbl("offload.edge_cpu_hz", 1, [](C& c) -> double& { return c.offload.edge_cpu_hz; });
    dbl("offload.link_rate_bps_per_hz", 1, [](C& c) -> double& { return c.offload.link_rate_bps_per_hz; });
    dlist("offload.bandwidth_levels_mhz", 1, [](C& c) -> std::vector<double>& { return c.offload.bandwidth_levels_mhz; });
    dbl("offload.bandwidth_stay_prob", 1, [](C& c) -> double& { return c.offload.bandwidth_stay_prob; });
    dbl("offload.energy_per_cycle_j", 1, [](C& c) -> double& { return c.offload.energy_per_cycle_j; });
    dbl("offload.battery_capacity_j", 1, [](C& c) -> double& { return c.offload.battery_capacity_j; });
    dlist("offload.user_density_levels", 1, [](C& c) -> std::vector<double>& { return c.offload.user_density_levels; });
    dbl("offload.density_stay_prob", 1, [](C& c) -> double& { return c.offload.density_stay_prob; });
    dlist("offload.gain_levels", 1, [](C& c) -> std::vector<double>& { return c.offload.gain_levels; });
    dbl("offload.gain_stay_prob", 1, [](C& c) -> double& { return c.offload.gain_stay_prob; });
    dlist("offload.edge_gain_scale", 1, [](C& c) -> std::vector<double>& { return c.offload.edge_gain_scale; });
    dbl("offload.weights.w_sinr", 1, [](C& c) -> double& { return c.offload.weights.w_sinr; });
    dbl("offload.weights.w_ber", 1, [](C& c) -> double& { return c.offload.weights.w_ber; });
    dbl("offload.weights.w_energy", 1, [](C& c) -> double& { return c.offload.weights.w_energy; });
    dbl("offload.weights.w_delay", 1, [](C& c) -> double& { return c.offload.weights.w_delay; });
    dbl("offload.obs_noise_sigma", 1, [](C& c) -> double& { return c.offload.obs_noise_sigma; });
    u64("offload.obs_delay_slots", 1, [](C& c) -> std::uint64_t& { return c.offload.obs_delay_slots; });
    u64("offload.obs_bins", 1, [](C& c) -> std::size_t& { return c.offload.obs_bins; });
    dbl("offload.timeout_factor", 1, [](C& c) -> double& { return c.offload.timeout_factor; });
    boolean("offload.frozen", 1, [](C& c) -> bool& { return c.offload.frozen; });
    u64("offload.max_enumerated_states", 1, [](C& c) -> std::size_t& { return c.offload.max_enumerated_states; });

    f.push_back({"offload.jammer.kind", 1, [](const C& c) { return std::string(offload::to_string(c.offload.jammer.kind)); },
                 [](C& c, const std::string& v) {
                   using offload::JammerKind;
                   if (v == "none") c.offload.jammer.kind = JammerKind::none;
                   else if (v == "sweep") c.offload.jammer.kind = JammerKind::sweep;
                   else if (v == "smart") c.offload.jammer.kind = JammerKind::smart;
                   else throw ConfigError("offload.jammer.kind", "expected none, sweep or smart, got '" + v + "'");
                 }});
    dbl("offload.jammer.jam_power_mw", 1, [](C& c) -> double& { return c.offload.jammer.jam_power_mw; });
    u64("offload.jammer.sweep_period_slots", 1, [](C& c) -> std::uint64_t& { return c.offload.jammer.sweep_period_slots; });
    dlist("offload.jammer.distance_to_edge", 1, [](C& c) -> std::vector<double>& { return c.offload.jammer.distance_to_edge; });
    dbl("offload.jammer.path_loss_exp", 1, [](C& c) -> double& { return c.offload.jammer.path_loss_exp; });
    dlist("offload.jammer.gain_levels", 1, [](C& c) -> std::vector<double>& { return c.offload.jammer.gain_levels; });
    dbl("offload.jammer.gain_stay_prob", 1, [](C& c) -> double& { return c.offload.jammer.gain_stay_prob; });
    dbl("offload.jammer.jam_cost", 1, [](C& c) -> double& { return c.offload.jammer.jam_cost; });
    add_hyperparams(f, "offload.jammer.smart.", 1, [](C& c) -> AgentHyperparams& { return c.offload.jammer.smart; });

    u64("auth.vec_len", 2, [](C& c) -> std::size_t& { return c.auth.vec_len; });
    dbl("auth.legit_noise_sigma", 2, [](C& c) -> double& { return c.auth.legit_noise_sigma; });
    dbl("auth.spoof_offset", 2, [](C& c) -> double& { return c.auth.spoof_offset; });
    f.push_back({"auth.spoof_prob_schedule", 2,
                 [](const C& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.auth.spoof_prob_schedule.size(); ++i)
                     s += (i ? ", " : "") + std::to_string(c.auth.spoof_prob_schedule[i].start_slot) + ":" +
                          fmt_double(c.auth.spoof_prob_schedule[i].probability);
                   return s;
                 },
                 [](C& c, const std::string& v) {
                   const std::string key = "auth.spoof_prob_schedule";
                   std::vector<auth::SpoofPhase> sched;
                   for (const auto& tok : split_list(v)) {
                     const auto colon = tok.find(':');
                     if (colon == std::string::npos) throw ConfigError(key, "expected start_slot:probability, got '" + tok + "'");
                     sched.push_back({parse_u64(key, trim(tok.substr(0, colon))), parse_double(key, trim(tok.substr(colon + 1)))});
                   }
                   c.auth.spoof_prob_schedule = std::move(sched);
                 }});
    dlist("auth.threshold_grid", 2, [](C& c) -> std::vector<double>& { return c.auth.threshold_grid; });
    u64("auth.window", 2, [](C& c) -> std::size_t& { return c.auth.window; });
    dbl("auth.g_correct", 2, [](C& c) -> double& { return c.auth.g_correct; });
    dbl("auth.c_false_alarm", 2, [](C& c) -> double& { return c.auth.c_false_alarm; });
    dbl("auth.c_miss", 2, [](C& c) -> double& { return c.auth.c_miss; });
    u64("auth.obs_bins", 2, [](C& c) -> std::size_t& { return c.auth.obs_bins; });
    return f;
  }();
  return all;
}

}  // namespace detail

// Applies `key = value` lines on top of the defaults. Unknown keys, duplicate
// keys and malformed lines are errors.
inline ExperimentConfig parse_config(std::istream& is, bool validate = true) {
  ExperimentConfig cfg;
  std::map<std::string, const detail::Field*> index;
  for (const auto& f : detail::fields()) index[f.key] = &f;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigParseError(lineno, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigParseError(lineno, "missing key");
    const auto it = index.find(key);
    if (it == index.end()) throw ConfigParseError(lineno, "unknown key '" + key + "'");
    if (auto [pos, fresh] = seen.emplace(key, lineno); !fresh)
      throw ConfigParseError(lineno, "duplicate key '" + key + "' (first set on line " + std::to_string(pos->second) + ")");
    try {
      it->second->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigParseError(lineno, e.what());
    }
  }
  if (validate) cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& text, bool validate = true) {
  std::istringstream is(text);
  return parse_config(is, validate);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config " + path);
  return parse_config(is);
}

// Writes every key relevant to cfg.scenario.
inline std::string format_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  const int scope = cfg.scenario == Scenario::offload ? 1 : 2;
  std::string section;
  for (const auto& f : detail::fields()) {
    if (f.scope != 0 && f.scope != scope) continue;
    const std::string sec = f.key.substr(0, f.key.find('.'));
    if (sec != section) {
      if (!section.empty()) os << '\n';
      os << "# " << sec << '\n';
      section = sec;
    }
    os << f.key << " = " << f.get(cfg) << '\n';
  }
  return os.str();
}

inline ExperimentConfig default_config(Scenario s) {
  ExperimentConfig cfg;
  cfg.scenario = s;
  if (s == Scenario::auth) cfg.slots = 20000;
  return cfg;
}

inline std::vector<std::string> config_keys() {
  std::vector<std::string> k;
  for (const auto& f : detail::fields()) k.push_back(f.key);
  return k;
}

}  // namespace mecsec::harness
