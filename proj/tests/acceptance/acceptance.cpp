// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mecsec/agents/qnetwork.hpp"
#include "mecsec/agents/qtable.hpp"
#include "mecsec/auth/env.hpp"
#include "mecsec/harness/experiment.hpp"
#include "mecsec/offload/formulas.hpp"
#include "mecsec/offload/mdp.hpp"

using namespace mecsec;
using namespace mecsec::harness;

namespace {

namespace fs = std::filesystem;

// Tolerances and thresholds.
constexpr double kAc1MinMatch = 0.95;
constexpr double kAc1MaxRegret = 0.05;
constexpr std::size_t kAc1MinSeeds = 9;
constexpr std::size_t kAc1MaxSlots = 200000;
constexpr std::size_t kAc2MinSeeds = 8;
constexpr std::uint64_t kAc2Slots = 10000;
constexpr std::size_t kAc4MinSeeds = 8;
constexpr double kAc5RelTol = 1e-12;
constexpr double kAc6RelTol = 1e-4;
constexpr double kAc6Step = 1e-5;
constexpr double kAc6Floor = 1e-6;  // denominator floor for gradients that are exactly zero
constexpr int kAc6Inputs = 10;
constexpr int kAc7Steps = 100000;
constexpr int kAc7MinVisits = 500;
constexpr double kAc7Sigmas = 3.0;
constexpr std::uint64_t kRuns = 10;

std::size_t threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string source(const std::string& rel) { return std::string(MECSEC_SOURCE_DIR) + "/" + rel; }

struct Verdict {
  std::string id;
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double rel_err(double got, double want) {
  return want == 0.0 ? std::abs(got) : std::abs(got - want) / std::abs(want);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// ---------------------------------------------------------------------------

Verdict ac1() {
  auto cfg = load_config(source("configs/offload_frozen_oracle.cfg"));
  cfg.agent = AgentKind::qlearn;
  cfg.runs = kRuns;
  cfg.threads = threads();
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = oracle_check(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::size_t good = 0;
  double worst_match = 1, worst_regret = 0;
  for (const auto& r : rep.runs) {
    good += r.match >= kAc1MinMatch && r.regret <= kAc1MaxRegret;
    worst_match = std::min(worst_match, r.match);
    worst_regret = std::max(worst_regret, r.regret);
  }
  const bool shape_ok = rep.states <= 2000 && rep.actions >= 9 && rep.actions <= 12 && cfg.slots <= kAc1MaxSlots &&
                        cfg.hp.alpha_mode == AlphaMode::visit_decay && cfg.hp.epsilon_min == 0.05;
  std::ostringstream d;
  d << good << "/" << rep.runs.size() << " seeds with match>=" << kAc1MinMatch << " and regret<=" << kAc1MaxRegret
    << "; " << rep.states << " states, " << rep.actions << " actions, " << cfg.slots << " steps; worst match "
    << fmt("%.4f", worst_match) << ", worst regret " << fmt("%.4f", worst_regret) << "; " << fmt("%.1f", secs) << " s";
  return {"AC1", shape_ok && good >= kAc1MinSeeds, d.str()};
}

// Shared default-offload runs for AC2 and AC3.
struct OffloadRuns {
  std::map<AgentKind, SummaryReport> by_agent;
};

OffloadRuns offload_runs() {
  OffloadRuns out;
  for (AgentKind a : {AgentKind::random, AgentKind::qlearn, AgentKind::dynaq, AgentKind::dqn, AgentKind::dqn_hotboot}) {
    auto cfg = load_config(source("configs/offload_default.cfg"));
    cfg.agent = a;
    cfg.slots = kAc2Slots;
    cfg.runs = kRuns;
    cfg.threads = threads();
    out.by_agent[a] = run_experiment(cfg, false).summary;
  }
  return out;
}

Verdict ac2(const OffloadRuns& r) {
  const auto& dqn = r.by_agent.at(AgentKind::dqn).per_run;
  const auto& q = r.by_agent.at(AgentKind::qlearn).per_run;
  const auto& rnd = r.by_agent.at(AgentKind::random).per_run;
  std::size_t sinr = 0, energy = 0, delay = 0;
  for (std::size_t s = 0; s < kRuns; ++s) {
    sinr += dqn[s].sinr >= q[s].sinr && q[s].sinr >= rnd[s].sinr;
    energy += dqn[s].energy_j <= q[s].energy_j && q[s].energy_j <= rnd[s].energy_j;
    delay += dqn[s].delay_s <= q[s].delay_s && q[s].delay_s <= rnd[s].delay_s;
  }
  std::ostringstream d;
  d << "seeds holding dqn>=qlearn>=random: sinr " << sinr << "/" << kRuns << ", energy(reversed) " << energy << "/"
    << kRuns << ", delay(reversed) " << delay << "/" << kRuns;
  return {"AC2", sinr >= kAc2MinSeeds && energy >= kAc2MinSeeds && delay >= kAc2MinSeeds, d.str()};
}

Verdict ac3(const OffloadRuns& r) {
  const auto med = [&](AgentKind a) { return r.by_agent.at(a).median.convergence_slot; };
  const auto hb = med(AgentKind::dqn_hotboot), dqn = med(AgentKind::dqn), q = med(AgentKind::qlearn),
             dy = med(AgentKind::dynaq);
  std::ostringstream d;
  d << "median convergence slots: dqn-hotboot " << hb << ", dqn " << dqn << ", qlearn " << q << ", dynaq " << dy
    << "; hotboot<=dqn " << (hb <= dqn ? "yes" : "no") << ", dqn<=qlearn " << (dqn <= q ? "yes" : "no")
    << ", dynaq<=qlearn " << (dy <= q ? "yes" : "no");
  return {"AC3", hb <= dqn && dqn <= q && dy <= q, d.str()};
}

Verdict ac4() {
  auto cfg = load_config(source("configs/auth_acceptance.cfg"));
  cfg.runs = kRuns;
  cfg.threads = threads();
  const bool schedule_ok = cfg.slots == 20000 && cfg.auth.spoof_probability(0) == 0.1 &&
                           cfg.auth.spoof_probability(9999) == 0.1 && cfg.auth.spoof_probability(10000) == 0.5;
  cfg.agent = AgentKind::qlearn;
  const auto learner = run_experiment(cfg, false).summary.per_run;
  std::vector<double> best_fixed(kRuns, 1e300);
  cfg.agent = AgentKind::fixed;
  for (std::size_t i = 0; i < cfg.auth.threshold_grid.size(); ++i) {
    cfg.fixed_action = static_cast<long long>(i);
    const auto f = run_experiment(cfg, false).summary.per_run;
    for (std::size_t s = 0; s < kRuns; ++s) best_fixed[s] = std::min(best_fixed[s], f[s].balanced_error);
  }
  std::size_t wins = 0;
  double margin = 0;
  for (std::size_t s = 0; s < kRuns; ++s) {
    wins += learner[s].balanced_error < best_fixed[s];
    margin += best_fixed[s] - learner[s].balanced_error;
  }
  std::ostringstream d;
  d << "qlearn below every fixed threshold in " << wins << "/" << kRuns << " seeds over "
    << cfg.auth.threshold_grid.size() << " thresholds; mean margin " << fmt("%.4f", margin / kRuns);
  return {"AC4", schedule_ok && wins >= kAc4MinSeeds, d.str()};
}

Verdict ac5() {
  using namespace offload;
  struct Case {
    const char* name;
    double got, want;
  };
  const std::vector<double> ones{1, 1}, est{1.1, 0.9};
  std::vector<auth::AuthOutcome> window;
  const auto add = [&](auth::Truth t, auth::Decision d, int n) {
    for (int i = 0; i < n; ++i) window.push_back({0.0, d, t, auth::classify(d, t)});
  };
  add(auth::Truth::legit, auth::Decision::reject, 2);
  add(auth::Truth::legit, auth::Decision::accept, 8);
  add(auth::Truth::spoof, auth::Decision::accept, 1);
  add(auth::Truth::spoof, auth::Decision::reject, 4);
  const auto er = auth::rates(window);

  agents::QTable qt(2, 2);
  qt.at(1, 0) = 0.5;
  AgentHyperparams hp;
  const double q1 = agents::q_update(qt, 0, 0, 1.0, 1, hp);
  AgentHyperparams myopic;
  myopic.alpha = 1;
  myopic.gamma = 0;
  agents::QTable qt2(2, 2);
  qt2.at(1, 1) = 7;
  const double q2 = agents::q_update(qt2, 0, 1, 0.3, 1, myopic);

  const std::vector<Case> cases{
      {"sinr(100,0.1,1,0,1)", sinr(100, 0.1, 1, 0, 1), 10.0},
      {"sinr(100,0.1,1,9,1)", sinr(100, 0.1, 1, 9, 1), 1.0},
      {"sinr(0,0.1,1,9,1)", sinr(0, 0.1, 1, 9, 1), 0.0},
      {"ber(0)", ber(0), 0.5},
      {"ber(2)", ber(2), 0.5 * std::exp(-1.0)},
      {"utility(3,0,0.5,0.3;1,0,1,1)", utility(3, 0, 0.5, 0.3, RewardWeights{1, 0, 1, 1}), 1.2},
      {"utility(0,ber(0),0,0;0,1,0,0)", utility(0, ber(0), 0, 0, RewardWeights{0, 1, 0, 0}), -0.5},
      {"q_update(0.7,0.1,u=1,max=0.5)", q1, 0.735},
      {"q_update(alpha=1,gamma=0)", q2, 0.3},
      {"test_statistic(equal)", auth::test_statistic(ones, ones), 0.0},
      {"test_statistic([1.1,0.9],[1,1])", auth::test_statistic(est, ones), 0.01},
      {"rates.far", er.false_alarm_rate, 0.2},
      {"rates.mdr", er.miss_rate, 0.2},
  };
  double worst = 0;
  std::string worst_name = "-";
  for (const auto& c : cases) {
    const double e = rel_err(c.got, c.want);
    if (e > worst) {
      worst = e;
      worst_name = c.name;
    }
  }
  std::ostringstream d;
  d << cases.size() << " hand-computed values; worst relative error " << fmt("%.3g", worst) << " (" << worst_name << ")";
  return {"AC5", worst <= kAc5RelTol, d.str()};
}

Verdict ac6() {
  agents::NetSpec spec;
  spec.window = 6;
  spec.features = 3;
  spec.conv1_filters = 4;
  spec.conv2_filters = 3;
  spec.hidden = 8;
  spec.actions = 4;
  SeededRng rng(606);
  double worst = 0;
  std::size_t checked = 0;
  for (int k = 0; k < kAc6Inputs; ++k) {
    agents::QNetwork net(spec);
    net.initialize(rng);
    for (auto& p : net.parameters()) p += 0.05 * (2 * rng.uniform() - 1);
    std::vector<double> x(spec.input_size()), dout(spec.actions);
    for (auto& v : x) v = rng.uniform();
    for (auto& v : dout) v = 2 * rng.uniform() - 1;
    const auto loss = [&] {
      const auto out = net.forward(x);
      double l = 0;
      for (std::size_t a = 0; a < out.size(); ++a) l += out[a] * dout[a];
      return l;
    };
    agents::QNetwork::Cache c;
    net.forward(x, c);
    std::vector<double> grad;
    net.backward(c, dout, grad);
    for (std::size_t i = 0; i < net.parameter_count(); ++i) {
      const double orig = net.parameters()[i];
      net.parameters()[i] = orig + kAc6Step;
      const double lp = loss();
      net.parameters()[i] = orig - kAc6Step;
      const double lm = loss();
      net.parameters()[i] = orig;
      const double fd = (lp - lm) / (2 * kAc6Step);
      worst = std::max(worst, std::abs(fd - grad[i]) / std::max({std::abs(fd), std::abs(grad[i]), kAc6Floor}));
      ++checked;
    }
  }
  std::ostringstream d;
  d << checked << " parameter gradients over " << kAc6Inputs << " inputs; worst relative error " << fmt("%.3g", worst);
  return {"AC6", worst <= kAc6RelTol, d.str()};
}

// Frozen scenario small enough that 1e5 uniform-random steps visit every
// (state, action) pair well over 500 times: 2 edges, 2 gain levels, 2 rate
// levels, sweep period 1.
Verdict ac7() {
  using namespace offload;
  OffloadConfig c = frozen_offload_config();
  c.num_edges = 2;
  c.num_rate_levels = 2;
  c.gain_levels = {0.05, 0.2};
  c.edge_gain_scale = {1.0, 0.8};
  c.jammer.distance_to_edge = {10, 14};
  c.jammer.sweep_period_slots = 1;
  const auto mdp = enumerate_mdp(c);
  OffloadEnv env(c, 7007);
  SeededRng pick(7008);
  std::vector<std::vector<int>> counts(mdp.num_states * mdp.num_actions, std::vector<int>(mdp.num_states, 0));
  std::vector<int> visits(mdp.num_states * mdp.num_actions, 0);
  for (int t = 0; t < kAc7Steps; ++t) {
    const std::size_t s = env.truth_state_index();
    const std::size_t a = pick.uniform_index(mdp.num_actions);
    env.step(action_at(c, a));
    ++counts[s * mdp.num_actions + a][env.truth_state_index()];
    ++visits[s * mdp.num_actions + a];
  }
  std::size_t pairs = 0, cells = 0, outside = 0;
  double worst_z = 0;
  for (std::size_t s = 0; s < mdp.num_states; ++s)
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      const int n = visits[s * mdp.num_actions + a];
      if (n < kAc7MinVisits) continue;
      ++pairs;
      for (std::size_t sn = 0; sn < mdp.num_states; ++sn) {
        const double p = mdp.p(s, a, sn);
        const double k = counts[s * mdp.num_actions + a][sn];
        ++cells;
        const double sd = std::sqrt(n * p * (1 - p));
        const double dev = std::abs(k - n * p);
        if (sd == 0.0) {
          outside += dev != 0.0;
          continue;
        }
        worst_z = std::max(worst_z, dev / sd);
        outside += dev > kAc7Sigmas * sd;
      }
    }
  std::ostringstream d;
  d << pairs << "/" << mdp.num_states * mdp.num_actions << " pairs with >=" << kAc7MinVisits << " visits, " << cells
    << " cells, " << outside << " outside " << kAc7Sigmas << " sigma; worst z " << fmt("%.2f", worst_z);
  return {"AC7", pairs == mdp.num_states * mdp.num_actions && outside == 0, d.str()};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + MECSEC_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

Verdict ac8() {
  const fs::path root = fs::temp_directory_path() / "mecsec_acceptance_ac8";
  fs::remove_all(root);
  std::size_t compared = 0, identical = 0;
  std::string failure;
  for (const std::string cfg : {"offload_default", "auth_default", "offload_dqn"}) {
    const std::string path = source("configs/" + cfg + ".cfg");
    const auto parsed = load_config(path);
    // The dqn config is shortened so the check stays quick.
    std::string file = path;
    if (parsed.agent == AgentKind::dqn) {
      auto shorter = parsed;
      shorter.slots = 1000;
      shorter.runs = 4;
      file = (root / "dqn_short.cfg").string();
      fs::create_directories(root);
      std::ofstream(file) << format_config(shorter);
    }
    const std::string stem = std::string(to_string(parsed.scenario)) + "_" + to_string(parsed.agent);
    std::vector<std::string> csvs;
    for (const std::string variant : {"a --threads 1", "b --threads 1", "c --threads 4"}) {
      const fs::path out = root / cfg / variant.substr(0, 1);
      const int rc = run_cli("--quiet --seed 42 --out \"" + out.string() + "\"" + variant.substr(1) + " run \"" + file + "\"");
      if (rc != 0) failure = "cli exited " + std::to_string(rc) + " for " + cfg;
      csvs.push_back(slurp(out / (stem + ".csv")));
    }
    for (std::size_t i = 1; i < csvs.size(); ++i) {
      ++compared;
      identical += !csvs[0].empty() && csvs[i] == csvs[0];
    }
  }
  std::ostringstream d;
  d << identical << "/" << compared << " CSV pairs byte-identical (repeat invocation and 1 vs 4 threads)";
  if (!failure.empty()) d << "; " << failure;
  return {"AC8", failure.empty() && identical == compared, d.str()};
}

}  // namespace

int main() {
  OffloadRuns shared;
  bool shared_ready = false;
  const auto get_shared = [&]() -> const OffloadRuns& {
    if (!shared_ready) {
      shared = offload_runs();
      shared_ready = true;
    }
    return shared;
  };
  const std::vector<std::pair<std::string, std::function<Verdict()>>> order{
      {"AC1", ac1},
      {"AC2", [&] { return ac2(get_shared()); }},
      {"AC3", [&] { return ac3(get_shared()); }},
      {"AC4", ac4},
      {"AC5", ac5},
      {"AC6", ac6},
      {"AC7", ac7},
      {"AC8", ac8},
  };

  bool all = true;
  for (const auto& [id, f] : order) {
    Verdict v;
    try {
      v = f();
    } catch (const std::exception& e) {
      v = {id, false, std::string("error: ") + e.what()};
    }
    all = all && v.pass;
    std::printf("%s %s  %s\n", v.id.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
