// Command-line front end: train, eval, baseline, sweeps and the oracle.

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "arisppo/arisppo.hpp"

namespace {

struct Flags {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::string out = "out";
  std::optional<int> episodes;
  std::vector<double> power_dbm;
  std::vector<int> elements;
  std::vector<std::string> policies;
  std::optional<bool> deterministic_eval;
  std::optional<int> trajectory_every;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config: {scenario, train, eval, oracle} sections")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seeds, "Seed list, e.g. 1,2,3")->delimiter(',');
  cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
  cmd->add_option("--episodes", f.episodes, "Training episodes per run");
  cmd->add_option("--power-dbm", f.power_dbm, "Per-BS transmit power (list for sweep-power)")->delimiter(',');
  cmd->add_option("--elements", f.elements, "RIS elements (list for sweep-elements)")->delimiter(',');
  cmd->add_option("--policy", f.policies, "moppo, hppo, random-ps or oma (list allowed)")->delimiter(',');
  cmd->add_option("--deterministic-eval", f.deterministic_eval, "Evaluate with argmax/mean actions (true|false)");
  cmd->add_option("--trajectory-every", f.trajectory_every, "Write the mean trajectory every N slots (0: off)");
}

arisppo::ExperimentSpec build_spec(arisppo::Command cmd, const Flags& f) {
  using namespace arisppo;
  ExperimentSpec spec;
  spec.command = cmd;
  if (cmd == Command::sweep_elements) spec.scenario.tx_power_dbm = 10.0;
  if (!f.config.empty()) load_config_file(spec, f.config);
  if (!f.seeds.empty()) spec.seeds = f.seeds;
  spec.out_dir = f.out;
  if (f.episodes) spec.train.episodes = *f.episodes;
  if (f.deterministic_eval) spec.deterministic_eval = *f.deterministic_eval;
  if (f.trajectory_every) spec.trajectory_every = *f.trajectory_every;

  if (cmd == Command::sweep_power) {
    spec.powers_dbm = f.power_dbm.empty() ? std::vector<double>{0.0, 10.0, 20.0} : f.power_dbm;
  } else if (!f.power_dbm.empty()) {
    if (f.power_dbm.size() != 1) throw ConfigError("--power-dbm takes one value outside sweep-power");
    spec.scenario.tx_power_dbm = f.power_dbm.front();
  }
  if (cmd == Command::sweep_elements) {
    spec.elements = f.elements.empty() ? std::vector<int>{8, 16, 32} : f.elements;
  } else if (!f.elements.empty()) {
    if (f.elements.size() != 1) throw ConfigError("--elements takes one value outside sweep-elements");
    spec.scenario.ris_elements = f.elements.front();
  }

  std::vector<std::string> names = f.policies;
  if (names.empty()) {
    switch (cmd) {
      case Command::baseline: names = {"hppo", "random-ps", "oma"}; break;
      case Command::sweep_power: names = {"moppo", "hppo", "oma"}; break;
      default: names = {"moppo"}; break;
    }
  }
  spec.policies.clear();
  for (const auto& n : names) spec.policies.push_back(variant_from_string(n));
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aerial-RIS CoMP-NOMA simulator and MO-PPO trainer"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<const char*, arisppo::Command>> commands{
      {"train", arisppo::Command::train},
      {"eval", arisppo::Command::eval},
      {"baseline", arisppo::Command::baseline},
      {"sweep-power", arisppo::Command::sweep_power},
      {"sweep-elements", arisppo::Command::sweep_elements},
      {"oracle", arisppo::Command::oracle}};
  const std::vector<const char*> help{
      "Train policies and write metrics plus checkpoints",
      "Evaluate checkpoints found in --out",
      "Train and evaluate comparators (hppo, random-ps, oma)",
      "Sum rate versus transmit power",
      "Sum rate versus number of RIS elements",
      "Exhaustive per-slot grid search"};
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    subs.push_back(app.add_subcommand(commands[i].first, help[i]));
    add_common(subs.back(), flags);
  }
  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const auto spec = build_spec(commands[i].second, flags);
      const auto res = arisppo::run_command(spec);
      for (const auto& f : res.files) std::cout << f << "\n";
    }
  } catch (const arisppo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
