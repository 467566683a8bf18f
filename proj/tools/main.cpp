#include <cstdint>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "gridgame/config.hpp"
#include "gridgame/experiments.hpp"

namespace {

using Runner = gridgame::ExperimentResult (*)(const gridgame::SimulationConfig&);

struct Command {
  const char* name;
  const char* help;
  Runner run;
};

const Command kCommands[] = {
    {"best-response", "Optimal policy of one prosumer against a uniform field, per behavior",
     &gridgame::run_best_response},
    {"payoff-vs-n", "Long-run prosumer values as the population grows one spec at a time",
     &gridgame::run_payoff_vs_n},
    {"learn-ne", "Decentralized epsilon-equilibrium search with trace and certificate",
     &gridgame::run_learn_ne},
    {"regret", "Online allocation against the learned game's demand stream, with running regret",
     &gridgame::run_regret},
    {"allocation-trace", "Per-substation allocation trajectories against the hindsight optimum",
     &gridgame::run_allocation_trace},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smart-grid energy trading: prospect-theoretic prosumers, equilibrium learning, "
               "and no-regret allocation"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool seed_given = false;
  bool out_given = false;

  std::map<const CLI::App*, Runner> runners;
  for (const Command& command : kCommands) {
    CLI::App* sub = app.add_subcommand(command.name, command.help);
    sub->add_option("--config", config_path, "Path to the JSON experiment config")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override the config's master seed")
        ->each([&](const std::string&) { seed_given = true; });
    sub->add_option("--out", out_dir, "Override the config's output directory")
        ->each([&](const std::string&) { out_given = true; });
    runners[sub] = command.run;
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const CLI::App* sub = app.get_subcommands().front();
    gridgame::SimulationConfig config = gridgame::load_config(config_path);
    if (!config.experiment.empty() && config.experiment != sub->get_name())
      throw std::invalid_argument("config: experiment: file is for \"" + config.experiment +
                                  "\" but subcommand \"" + sub->get_name() + "\" was invoked");
    if (seed_given) {
      config.seed = seed;
      config.learning.seed = seed;
      config.learning.eval.seed = seed;
    }
    if (out_given) config.out_dir = out_dir;

    const gridgame::ExperimentResult result = runners.at(sub)(config);
    for (const std::string& path : result.outputs) std::cout << "wrote " << path << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
