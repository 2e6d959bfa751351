// Command-line front end for the experiment harness.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mecsec/agents/weights_io.hpp"
#include "mecsec/harness/experiment.hpp"

namespace {

using namespace mecsec;
using namespace mecsec::harness;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  bool quiet = false;
};

ExperimentConfig load_with_overrides(const std::string& path, const Globals& g) {
  ExperimentConfig cfg = load_config(path);
  if (g.seed) cfg.base_seed = *g.seed;
  if (g.out) cfg.output_dir = *g.out;
  if (g.threads) cfg.threads = *g.threads;
  cfg.validate();
  return cfg;
}

int cmd_run(const std::string& path, const Globals& g) {
  const auto cfg = load_with_overrides(path, g);
  const auto res = run_experiment(cfg);
  if (!g.quiet) write_summary(std::cout, res.summary);
  return 0;
}

int cmd_compare(const std::vector<std::string>& paths, const Globals& g) {
  std::vector<ExperimentConfig> cfgs;
  for (const auto& p : paths) cfgs.push_back(load_with_overrides(p, g));
  const auto rep = compare(cfgs);
  if (!g.quiet) write_compare(std::cout, rep);
  if (!cfgs.empty()) {
    std::filesystem::create_directories(cfgs.front().output_dir);
    std::ofstream os(std::filesystem::path(cfgs.front().output_dir) /
                     (std::string(to_string(cfgs.front().scenario)) + "_compare.summary.txt"));
    write_compare(os, rep);
  }
  return rep.all_hold() ? 0 : 1;
}

int cmd_oracle(const std::string& path, const Globals& g) {
  const auto cfg = load_with_overrides(path, g);
  const auto rep = oracle_check(cfg);
  if (!g.quiet) write_oracle_report(std::cout, rep, to_string(cfg.agent));
  return 0;
}

int cmd_pretrain(const std::string& path, const std::string& weights, const Globals& g) {
  auto cfg = load_with_overrides(path, g);
  const auto net = pretrain(cfg);
  agents::save_weights(weights, net);
  if (!g.quiet)
    std::cout << "wrote " << weights << " (" << net.spec().signature() << ", " << cfg.hotboot.pretrain_episodes << " x "
              << cfg.hotboot.pretrain_slots << " slots)\n";
  return 0;
}

int cmd_print_default(const std::string& scenario) {
  if (scenario != "offload" && scenario != "auth") throw ConfigError("scenario", "expected offload or auth");
  std::cout << format_config(default_config(scenario == "offload" ? Scenario::offload : Scenario::auth));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-computing security games: simulation, learning agents and oracle checks"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t threads = 1;
  auto* seed_opt = app.add_option("--seed", seed, "override experiment.base_seed")->type_name("U64");
  auto* out_opt = app.add_option("--out", out, "override experiment.output_dir");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads for independent runs")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "suppress the report on stdout");

  std::string config;
  std::vector<std::string> configs;
  std::string weights;
  std::string scenario;

  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("config", config)->required()->check(CLI::ExistingFile);
  auto* cmp = app.add_subcommand("compare", "run configs listed in expected rank order and check orderings");
  cmp->add_option("configs", configs)->required()->check(CLI::ExistingFile);
  auto* orc = app.add_subcommand("oracle-check", "score a tabular agent against value iteration");
  orc->add_option("config", config)->required()->check(CLI::ExistingFile);
  auto* pre = app.add_subcommand("pretrain", "pretrain hotboot weights");
  pre->add_option("config", config)->required()->check(CLI::ExistingFile);
  pre->add_option("-o,--output", weights, "weights file")->required();
  auto* pdc = app.add_subcommand("print-default-config", "print every config key with its default");
  pdc->add_option("scenario", scenario, "offload or auth")->required();

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;
  if (*out_opt) g.out = out;
  if (*threads_opt) g.threads = threads;

  try {
    if (*run) return cmd_run(config, g);
    if (*cmp) return cmd_compare(configs, g);
    if (*orc) return cmd_oracle(config, g);
    if (*pre) return cmd_pretrain(config, weights, g);
    if (*pdc) return cmd_print_default(scenario);
  } catch (const ConfigParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
