#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mecsec/agents/policies.hpp"
#include "mecsec/agents/weights_io.hpp"
#include "mecsec/auth/env.hpp"
#include "mecsec/harness/config.hpp"
#include "mecsec/harness/metrics.hpp"
#include "mecsec/offload/env.hpp"
#include "mecsec/offload/mdp.hpp"
#include "mecsec/oracle/value_iteration.hpp"

namespace mecsec::harness {

inline std::uint64_t run_seed(const ExperimentConfig& cfg, std::uint64_t run) { return cfg.base_seed + run; }

// Runs task(i) for i in [0, n) on up to `threads` workers. Results are
// addressed by index, so the thread count never affects them.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& task) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline constexpr std::size_t kOffloadStateDim = 4;
inline constexpr std::size_t kAuthStateDim = 3;

inline std::unique_ptr<agents::Agent> make_agent(const ExperimentConfig& cfg, std::size_t states, std::size_t state_dim,
                                                 std::size_t actions, std::uint64_t seed,
                                                 const std::optional<agents::PdsStructure>& pds,
                                                 const agents::QNetwork* hotboot, std::optional<std::size_t> fixed) {
  SeededRng rng = SeededRng(seed).child(stream::kAgent);
  switch (cfg.agent) {
    case AgentKind::random: return std::make_unique<agents::RandomAgent>(actions, rng);
    case AgentKind::fixed: return std::make_unique<agents::FixedAgent>(fixed.value_or(0));
    case AgentKind::qlearn: return std::make_unique<agents::QLearningAgent>(states, actions, cfg.hp, rng);
    case AgentKind::dynaq: return std::make_unique<agents::DynaQAgent>(states, actions, cfg.hp, cfg.planning_steps, rng);
    case AgentKind::pds:
      if (!pds) throw ConfigError("experiment.agent", "pds needs a known-dynamics split for this environment");
      return std::make_unique<agents::PdsAgent>(*pds, cfg.hp, rng);
    case AgentKind::dqn: return std::make_unique<agents::DqnAgent>(state_dim, actions, cfg.dqn, cfg.hp, rng);
    case AgentKind::dqn_hotboot: {
      if (!hotboot) throw ContractViolation("dqn-hotboot without pretrained weights");
      AgentHyperparams hp = cfg.hp;
      hp.epsilon0 = cfg.hotboot.epsilon0;
      auto agent = std::make_unique<agents::DqnAgent>(state_dim, actions, cfg.dqn, hp, rng);
      agent->learner().load_network(*hotboot);
      return agent;
    }
  }
  throw ContractViolation("unknown agent kind");
}

inline agents::AgentInput offload_input(const offload::OffloadEnv& env, const offload::SlotObservation& o) {
  return {offload::observation_state_index(env.quantizers(), o), offload::observation_features(env.quantizers(), o)};
}

inline agents::AgentInput auth_input(const std::vector<Quantizer>& q, const auth::AuthObservation& o) {
  return {auth::auth_state_index(q, o), {o.recent_false_alarm_rate, o.recent_miss_rate, o.recent_spoof_freq}};
}

inline std::vector<MetricsRow> run_offload_once(const ExperimentConfig& cfg, std::uint64_t run, agents::Agent& agent) {
  offload::OffloadEnv env(cfg.offload, run_seed(cfg, run));
  std::vector<MetricsRow> rows;
  rows.reserve(cfg.slots);
  agent.begin(offload_input(env, env.observation()));
  for (std::uint64_t t = 0; t < cfg.slots; ++t) {
    const std::size_t a = agent.act(t);
    const auto res = env.step(offload::action_at(cfg.offload, a));
    const std::size_t applied = offload::action_index(cfg.offload, res.applied);
    agent.learn(applied, res.reward.utility, offload_input(env, res.observation));
    MetricsRow r;
    r.run = run;
    r.slot = t;
    r.edge = res.applied.edge_index;
    r.rate_level = res.applied.rate_level;
    r.sinr = res.reward.sinr;
    r.ber = res.reward.ber;
    r.energy_j = res.reward.energy_j;
    r.delay_s = res.reward.delay_s;
    r.utility = res.reward.utility;
    r.epsilon = agent.last_epsilon();
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<MetricsRow> run_auth_once(const ExperimentConfig& cfg, std::uint64_t run, agents::Agent& agent) {
  auth::AuthEnv env(cfg.auth, run_seed(cfg, run));
  const auto q = auth::auth_quantizers(cfg.auth);
  std::vector<MetricsRow> rows;
  rows.reserve(cfg.slots);
  agent.begin(auth_input(q, env.observation()));
  for (std::uint64_t t = 0; t < cfg.slots; ++t) {
    const std::size_t a = agent.act(t);
    const auto res = env.step(a);
    agent.learn(a, res.reward, auth_input(q, res.observation));
    MetricsRow r;
    r.run = run;
    r.slot = t;
    r.theta_index = a;
    r.theta = cfg.auth.threshold_grid[a];
    r.statistic = res.outcome.statistic;
    r.spoof = res.outcome.truth == auth::Truth::spoof;
    r.rejected = res.outcome.decision == auth::Decision::reject;
    r.utility = res.reward;
    r.epsilon = agent.last_epsilon();
    r.far = res.observation.recent_false_alarm_rate;
    r.mdr = res.observation.recent_miss_rate;
    rows.push_back(r);
  }
  return rows;
}

// Perturbs jam power and stay-probabilities by a uniform factor in [1 - p, 1 + p].
inline offload::OffloadConfig perturbed_scenario(const offload::OffloadConfig& base, double p, SeededRng& rng) {
  offload::OffloadConfig c = base;
  const auto factor = [&] { return 1.0 + p * (2.0 * rng.uniform() - 1.0); };
  c.jammer.jam_power_mw *= factor();
  c.gain_stay_prob = std::clamp(c.gain_stay_prob * factor(), 0.0, 1.0);
  c.jammer.gain_stay_prob = std::clamp(c.jammer.gain_stay_prob * factor(), 0.0, 1.0);
  return c;
}

// DQN trained over a sequence of perturbed scenarios, one episode each. The
// seeds come from a dedicated stream so they never coincide with evaluation runs.
inline agents::QNetwork pretrain(const ExperimentConfig& cfg) {
  cfg.offload.validate();
  SeededRng rng = SeededRng(cfg.base_seed).child(stream::kPretrain);
  const std::size_t actions = cfg.offload.num_actions();
  agents::DqnAgent agent(kOffloadStateDim, actions, cfg.dqn, cfg.hp, rng.child(stream::kAgent));
  std::uint64_t global = 0;
  for (std::size_t ep = 0; ep < cfg.hotboot.pretrain_episodes; ++ep) {
    const auto scenario = perturbed_scenario(cfg.offload, cfg.hotboot.perturbation, rng);
    offload::OffloadEnv env(scenario, rng.next_u64());
    agent.begin(offload_input(env, env.observation()));
    for (std::uint64_t t = 0; t < cfg.hotboot.pretrain_slots; ++t, ++global) {
      const std::size_t a = agent.act(global);
      const auto res = env.step(offload::action_at(scenario, a));
      agent.learn(offload::action_index(scenario, res.applied), res.reward.utility, offload_input(env, res.observation));
    }
  }
  return agent.learner().network();
}

inline agents::QNetwork hotboot_network(const ExperimentConfig& cfg) {
  if (cfg.hotboot.weights_path.empty()) return pretrain(cfg);
  agents::QNetwork net(cfg.dqn.net_spec(kOffloadStateDim, cfg.offload.num_actions()));
  agents::load_weights(cfg.hotboot.weights_path, net);
  return net;
}

// Score used to pick the best static action in hindsight (higher is better).
inline double hindsight_score(Scenario s, const std::vector<MetricsRow>& rows) {
  if (rows.empty()) return 0.0;
  std::vector<const MetricsRow*> ptrs;
  for (const auto& r : rows) ptrs.push_back(&r);
  const RunSummary rs = summarize_run(s, rows.front().run, ptrs);
  return s == Scenario::offload ? rs.mean_utility : -rs.balanced_error;
}

inline std::vector<MetricsRow> run_single(const ExperimentConfig& cfg, std::uint64_t run,
                                          const agents::QNetwork* hotboot) {
  const bool off = cfg.scenario == Scenario::offload;
  const std::size_t actions = off ? cfg.offload.num_actions() : cfg.auth.threshold_grid.size();
  const std::size_t states = off ? offload::observation_state_count(cfg.offload) : auth::auth_state_count(cfg.auth);
  const std::size_t dim = off ? kOffloadStateDim : kAuthStateDim;
  std::optional<agents::PdsStructure> pds;
  if (off && cfg.agent == AgentKind::pds) pds = offload::observed_pds_structure(cfg.offload);

  const auto once = [&](std::optional<std::size_t> fixed) {
    auto agent = make_agent(cfg, states, dim, actions, run_seed(cfg, run), pds, hotboot, fixed);
    return off ? run_offload_once(cfg, run, *agent) : run_auth_once(cfg, run, *agent);
  };

  if (cfg.agent != AgentKind::fixed) return once(std::nullopt);
  if (cfg.fixed_action >= 0) return once(static_cast<std::size_t>(cfg.fixed_action));
  std::vector<MetricsRow> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < actions; ++a) {
    auto rows = once(a);
    const double score = hindsight_score(cfg.scenario, rows);
    if (score > best_score) {
      best_score = score;
      best = std::move(rows);
    }
  }
  return best;
}

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  SummaryReport summary;
};

inline std::string output_stem(const ExperimentConfig& cfg, const std::string& label) {
  return (std::filesystem::path(cfg.output_dir) / (std::string(to_string(cfg.scenario)) + "_" + label)).string();
}

// Executes runs x slots; writes <out>/<scenario>_<label>.csv and .summary.txt when write_files.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files = true, std::string label = {}) {
  cfg.validate();
  if (label.empty()) label = to_string(cfg.agent);
  std::optional<agents::QNetwork> hotboot;
  if (cfg.agent == AgentKind::dqn_hotboot) hotboot = hotboot_network(cfg);

  std::vector<std::vector<MetricsRow>> per_run(cfg.runs);
  if (cfg.slots > 0)
    parallel_for(cfg.runs, cfg.threads, [&](std::size_t i) { per_run[i] = run_single(cfg, i, hotboot ? &*hotboot : nullptr); });

  ExperimentResult res;
  for (auto& r : per_run) res.rows.insert(res.rows.end(), r.begin(), r.end());
  res.summary = summarize(cfg.scenario, label, cfg.runs, cfg.slots, res.rows);

  if (write_files) {
    std::filesystem::create_directories(cfg.output_dir);
    const std::string stem = output_stem(cfg, label);
    std::ofstream csv(stem + ".csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + stem + ".csv");
    write_csv(csv, cfg.scenario, res.rows);
    std::ofstream sum(stem + ".summary.txt", std::ios::binary);
    if (!sum) throw std::runtime_error("cannot write " + stem + ".summary.txt");
    write_summary(sum, res.summary);
  }
  return res;
}

// ---------------------------------------------------------------------------
// compare

struct OrderingCheck {
  std::string description;
  std::size_t seeds_holding = 0;
  std::size_t seeds_total = 0;
  bool median_holds = false;
  bool holds = false;
};

struct CompareReport {
  std::vector<SummaryReport> summaries;
  std::vector<OrderingCheck> checks;
  bool all_hold() const {
    return std::all_of(checks.begin(), checks.end(), [](const OrderingCheck& c) { return c.holds; });
  }
};

inline std::vector<std::string> unique_labels(const std::vector<ExperimentConfig>& cfgs) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    std::string base = to_string(cfgs[i].agent);
    const auto dup = std::count_if(cfgs.begin(), cfgs.end(), [&](const ExperimentConfig& c) { return c.agent == cfgs[i].agent; });
    labels.push_back(dup > 1 ? base + "#" + std::to_string(i) : base);
  }
  return labels;
}

// Configs are listed in expected rank order: asymptotes should not increase
// along the list, and convergence times should not decrease along the
// learning agents. An ordering holds when it holds in at least min_fraction
// of seeds.
inline CompareReport compare(const std::vector<ExperimentConfig>& cfgs, double min_fraction = 0.8, bool write_files = true) {
  if (cfgs.size() < 2) throw std::invalid_argument("compare needs at least two configs");
  for (const auto& c : cfgs) {
    if (c.scenario != cfgs.front().scenario) throw std::invalid_argument("compare: configs mix scenarios");
    if (c.base_seed != cfgs.front().base_seed || c.runs != cfgs.front().runs)
      throw std::invalid_argument("compare: configs must share base_seed and runs");
  }
  CompareReport rep;
  const auto labels = unique_labels(cfgs);
  for (std::size_t i = 0; i < cfgs.size(); ++i) rep.summaries.push_back(run_experiment(cfgs[i], write_files, labels[i]).summary);

  const auto check = [&](std::size_t hi, std::size_t lo, bool convergence) {
    OrderingCheck c;
    const auto& A = rep.summaries[hi];
    const auto& B = rep.summaries[lo];
    c.description = convergence ? "convergence(" + A.agent + ") <= convergence(" + B.agent + ")"
                                : "asymptote(" + A.agent + ") >= asymptote(" + B.agent + ")";
    c.seeds_total = std::min(A.per_run.size(), B.per_run.size());
    for (std::size_t s = 0; s < c.seeds_total; ++s) {
      const bool ok = convergence ? A.per_run[s].convergence_slot <= B.per_run[s].convergence_slot
                                  : A.per_run[s].asymptote >= B.per_run[s].asymptote;
      c.seeds_holding += ok;
    }
    c.median_holds = convergence ? A.median.convergence_slot <= B.median.convergence_slot
                                 : A.median.asymptote >= B.median.asymptote;
    c.holds = c.seeds_total > 0 &&
              static_cast<double>(c.seeds_holding) >= min_fraction * static_cast<double>(c.seeds_total) - 1e-12;
    rep.checks.push_back(c);
  };
  for (std::size_t i = 0; i + 1 < cfgs.size(); ++i) check(i, i + 1, false);
  std::vector<std::size_t> learners;
  for (std::size_t i = 0; i < cfgs.size(); ++i)
    if (is_learning(cfgs[i].agent)) learners.push_back(i);
  for (std::size_t i = 0; i + 1 < learners.size(); ++i) check(learners[i], learners[i + 1], true);
  return rep;
}

inline void write_compare(std::ostream& os, const CompareReport& rep) {
  for (const auto& s : rep.summaries) {
    write_summary(os, s);
    os << '\n';
  }
  os << "[orderings]\n";
  for (std::size_t i = 0; i < rep.checks.size(); ++i) {
    const auto& c = rep.checks[i];
    os << "ordering." << i << " = " << c.description << " | seeds " << c.seeds_holding << "/" << c.seeds_total
       << " | median " << (c.median_holds ? "holds" : "fails") << " | " << (c.holds ? "PASS" : "FAIL") << '\n';
  }
  os << "all_orderings_hold = " << (rep.all_hold() ? "true" : "false") << '\n';
}

// ---------------------------------------------------------------------------
// oracle check

struct OracleRun {
  std::uint64_t run = 0;
  double match = 0.0;
  double regret = 0.0;  // max over reachable states of V*(s) - V_pi(s), relative to ||V*||_inf
};

struct OracleReport {
  std::size_t states = 0;
  std::size_t actions = 0;
  std::size_t reachable = 0;
  std::size_t iterations = 0;
  double v_star_sup = 0.0;
  std::vector<OracleRun> runs;
};

inline OracleRun evaluate_policy(const oracle::ExplicitMdp& mdp, const oracle::ValueIterationResult& vi,
                                 const std::vector<std::size_t>& reach, const oracle::Policy& learned, double tol) {
  OracleRun r;
  r.match = oracle::policy_match(vi.policy, learned, reach);
  const auto vp = oracle::policy_value(mdp, learned, tol);
  double sup = 0.0, worst = 0.0;
  for (double v : vi.values) sup = std::max(sup, std::abs(v));
  for (auto s : reach) worst = std::max(worst, vi.values[s] - vp[s]);
  r.regret = sup > 0.0 ? worst / sup : worst;
  return r;
}

// Trains the configured tabular agent on ground-truth states of a frozen
// scenario for cfg.slots steps per run and scores its greedy policy against
// value iteration.
inline OracleReport oracle_check(const ExperimentConfig& cfg, double tol = 1e-9) {
  cfg.validate();
  if (cfg.scenario != Scenario::offload) throw ConfigError("experiment.scenario", "oracle-check needs the offload scenario");
  offload::require_frozen(cfg.offload);
  if (cfg.agent == AgentKind::dqn || cfg.agent == AgentKind::dqn_hotboot)
    throw ConfigError("experiment.agent", "oracle-check compares tabular policies; use qlearn, dynaq, pds, random or fixed");

  const auto mdp = offload::enumerate_mdp(cfg.offload, cfg.hp.gamma);
  const auto vi = oracle::value_iteration(mdp, tol);
  const auto reach = oracle::reachable_states(mdp, vi.policy);
  OracleReport rep;
  rep.states = mdp.num_states;
  rep.actions = mdp.num_actions;
  rep.reachable = reach.size();
  rep.iterations = vi.iterations;
  for (double v : vi.values) rep.v_star_sup = std::max(rep.v_star_sup, std::abs(v));
  std::optional<agents::PdsStructure> pds;
  if (cfg.agent == AgentKind::pds) pds = offload::truth_pds_structure(cfg.offload);

  rep.runs.resize(cfg.runs);
  parallel_for(cfg.runs, cfg.threads, [&](std::size_t i) {
    const std::uint64_t seed = run_seed(cfg, i);
    oracle::Policy learned(mdp.num_states, 0);
    if (cfg.agent == AgentKind::random) {
      SeededRng rng = SeededRng(seed).child(stream::kAgent);
      for (auto& a : learned) a = static_cast<std::size_t>(rng.uniform_index(mdp.num_actions));
    } else if (cfg.agent == AgentKind::fixed) {
      std::fill(learned.begin(), learned.end(), static_cast<std::size_t>(std::max<long long>(0, cfg.fixed_action)));
    } else {
      auto agent = make_agent(cfg, mdp.num_states, kOffloadStateDim, mdp.num_actions, seed, pds, nullptr, std::nullopt);
      offload::OffloadEnv env(cfg.offload, seed);
      agent->begin({env.truth_state_index(), {}});
      for (std::uint64_t t = 0; t < cfg.slots; ++t) {
        const std::size_t a = agent->act(t);
        const auto res = env.step(offload::action_at(cfg.offload, a));
        agent->learn(a, res.reward.utility, {env.truth_state_index(), {}});
      }
      learned = *agent->greedy_policy();
    }
    rep.runs[i] = evaluate_policy(mdp, vi, reach, learned, tol);
    rep.runs[i].run = i;
  });
  return rep;
}

inline void write_oracle_report(std::ostream& os, const OracleReport& rep, const std::string& agent) {
  os << "oracle check: " << rep.states << " states, " << rep.actions << " actions, " << rep.reachable
     << " reachable, value iteration " << rep.iterations << " sweeps, ||V*|| = " << format_real(rep.v_star_sup) << "\n";
  os << "\n[oracle]\nagent = " << agent << '\n';
  for (const auto& r : rep.runs)
    os << "run." << r.run << ".match = " << format_real(r.match) << "\nrun." << r.run << ".regret = " << format_real(r.regret)
       << '\n';
}

}  // namespace mecsec::harness
