#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridgame/allocator.hpp"
#include "gridgame/game.hpp"
#include "gridgame/learning.hpp"
#include "gridgame/model.hpp"
#include "gridgame/prospect.hpp"

namespace gridgame {

// A named risk-attitude override used by the scenario-driven experiments.
struct BehaviorScenario {
  std::string name;
  ProspectParams behavior;
};

// Settings for the single-prosumer best-response experiment: which prosumer
// is optimized and under which behaviors, everyone else playing uniformly.
struct BestResponseSection {
  int target = 0;
  std::vector<BehaviorScenario> scenarios;
};

// Settings for the payoff-versus-population experiment: prosumers join one by
// one in spec order, and the tracked prosumers' long-run values are reported
// under each listed behavior (applied to all prosumers).
struct PayoffVsNSection {
  std::vector<int> track{0, 1, 2, 3};
  std::vector<BehaviorScenario> behaviors;
};

// Allocator settings plus the number of market rounds to run it for.
struct AllocatorSection {
  AllocatorConfig config;
  long steps = 10000;
  bool present = false;  // section appeared in the config file
};

/**
 * Everything an experiment run needs: the game instance, learning and
 * allocator settings, experiment-specific sections, and the master seed.
 * A fixed seed makes every emitted CSV byte-identical across reruns.
 */
struct SimulationConfig {
  std::string experiment;  // optional; when set, must match the invoked subcommand
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  PricingRule pricing;
  std::vector<ProsumerSpec> prosumers;
  LearningConfig learning;
  AllocatorSection allocator;
  BestResponseSection best_response;
  PayoffVsNSection payoff_vs_n;

  Game make_game() const { return Game(prosumers, pricing); }

  // Cross-field checks with actionable messages; warns (stderr) when a
  // generation pmf has a zero mixing floor, which voids the learning bounds.
  void validate() const;
};

// Parse a JSON document; `origin` names the source in error messages.
SimulationConfig parse_config_text(const std::string& text, const std::string& origin);

// Read and parse a JSON config file, then validate it.
SimulationConfig load_config(const std::string& path);

}  // namespace gridgame
