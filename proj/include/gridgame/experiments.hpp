#pragma once

#include <string>
#include <vector>

#include "gridgame/config.hpp"

namespace gridgame {

// Paths of the CSV files an experiment wrote, in emission order.
struct ExperimentResult {
  std::vector<std::string> outputs;
};

// Optimal stationary policy of the configured target prosumer against a
// uniform field, under each configured behavior scenario.  Emits the policy
// rows and a per-scenario value summary.
ExperimentResult run_best_response(const SimulationConfig& config);

// Long-run values of the tracked prosumers as the population grows one spec
// at a time, everyone playing uniformly, under each configured behavior.
ExperimentResult run_payoff_vs_n(const SimulationConfig& config);

// Decentralized equilibrium search on the configured game: per-period trace,
// final policies, and an exact certificate of the reached profile.
ExperimentResult run_learn_ne(const SimulationConfig& config);

// Online allocation against the demand stream realized by the learning run:
// per-round costs and running regret against the best fixed allocation.
ExperimentResult run_regret(const SimulationConfig& config);

// Same pipeline as run_regret, emitting per-substation demand/allocation
// trajectories against the hindsight-optimal line.
ExperimentResult run_allocation_trace(const SimulationConfig& config);

}  // namespace gridgame
