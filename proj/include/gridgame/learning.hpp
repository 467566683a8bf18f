#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "gridgame/game.hpp"
#include "gridgame/mdp.hpp"
#include "gridgame/polytope.hpp"

namespace gridgame {

// How sub-interval payoff estimates are produced: exact propagation of every
// prosumer's state marginal, or a seeded sample path whose environment-built
// payoff realizations match the same expectation.
enum class EstimationMode { exact_propagation, trajectory_sampling };

// Distribution used when re-drawing occupation measures between periods.
enum class SamplerKind { hit_and_run, vertex_mixture };

struct LearningConfig {
  double epsilon = 0.01;   // acceptance slack in the q-bit rule
  int horizon = 30;        // steps per sub-interval
  int max_periods = 500;
  std::uint64_t seed = 0;
  EstimationMode estimation = EstimationMode::exact_propagation;
  SamplerKind sampler = SamplerKind::hit_and_run;
  int burn_in = 1000;            // hit-and-run steps per draw
  int initial_state = 0;         // storage level every chain starts from
  bool reset_state_each_slot = false;  // debugging aid; default carries state through
  int post_convergence_periods = 0;    // frozen periods appended to the trace
  bool record_demands = false;         // keep per-step realized demand vectors
  EvalOptions eval;                    // opponent-atom evaluation settings

  void validate() const;
};

/**
 * Slot layout of one period.  With N prosumers and r vertex slots each, slots
 * 0 .. N*r-1 give prosumer i = slot / r its k = slot % r vertex policy while
 * everyone else plays their base policy; the final slot plays the base
 * profile and measures every prosumer at once.
 */
struct PeriodSchedule {
  int num_players = 0;
  int vertex_slots = 0;

  int num_slots() const { return num_players * vertex_slots + 1; }
  int sampling_player(int slot) const {
    return slot == num_players * vertex_slots ? -1 : slot / vertex_slots;
  }
  int vertex_index(int slot) const { return slot % vertex_slots; }
};

struct PeriodOutcome {
  std::vector<double> v_hat;                      // base-profile estimate per prosumer
  std::vector<std::vector<double>> v_hat_vertex;  // [prosumer][vertex slot]
  std::vector<int> q_bits;                        // per-prosumer satisfaction bits
  int q_all = 0;                                  // product of the bits
};

struct PeriodRecord {
  int period = 0;
  bool resampled = false;  // fresh occupation draw at the start of this period
  PeriodOutcome outcome;
};

struct LearnResult {
  bool converged = false;
  int periods_used = 0;   // periods played up to and including the q_all = 1 period
  int vertex_slots = 0;   // r of the schedule
  int horizon_used = 0;   // sub-interval horizon of the final attempt
  std::vector<StationaryPolicy> final_policies;
  std::vector<std::vector<StationaryPolicy>> vertex_policies;
  std::vector<PeriodRecord> trace;
  std::vector<Eigen::VectorXd> demand_history;  // filled when record_demands is set
  long total_steps = 0;           // simulated game steps over the whole run
  long steps_to_convergence = -1; // steps through the terminating period, -1 if none
};

/**
 * The decentralized search loop: every prosumer holds a candidate occupation
 * measure, each period estimates its own base payoff and the payoff of every
 * vertex of its occupation polytope, and all prosumers re-draw candidates
 * until a period in which everyone is within epsilon of their best vertex.
 * Policies freeze at that point.
 */
class Algorithm1Driver {
 public:
  Algorithm1Driver(const Game& game, const LearningConfig& config);
  ~Algorithm1Driver();
  Algorithm1Driver(const Algorithm1Driver&) = delete;
  Algorithm1Driver& operator=(const Algorithm1Driver&) = delete;

  const PeriodSchedule& schedule() const;
  const std::vector<std::vector<StationaryPolicy>>& vertex_policies() const;
  const std::vector<StationaryPolicy>& base_policies() const;

  // Replace the base profile (for tests and warm starts).
  void set_base_policies(std::vector<StationaryPolicy> policies);

  // Draw fresh occupation measures for every prosumer.
  void resample();

  // Play one full period against the current base profile and report the
  // estimates and q-bits.  State carries over from the previous period.
  PeriodOutcome run_period();

  // Advance the realized trajectory without measuring (used to extend demand
  // streams after the policies froze).
  void simulate_frozen(long steps);

  const std::vector<Eigen::VectorXd>& demand_history() const;
  long total_steps() const;

  // Full loop: resample, run periods, stop at the first q_all = 1.
  LearnResult run();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Average per-step prospect payoff of every prosumer over `horizon` steps of
// the profile, starting from the configured initial state.  Exact-propagation
// mode is deterministic; trajectory mode draws its own stream from the seed.
// Long horizons finish early once every marginal reaches its stationary law
// to machine precision, with the remaining steps closed in one term.
std::vector<double> estimate_payoffs(const Game& game,
                                     const std::vector<StationaryPolicy>& profile, long horizon,
                                     const LearningConfig& config);

LearnResult run_algorithm1(const Game& game, const LearningConfig& config);

// Retry wrapper: doubles the sub-interval horizon after every non-converged
// attempt.  Attempt k uses a distinct derived seed.
LearnResult run_algorithm1_doubling(const Game& game, LearningConfig config,
                                    int max_attempts = 6);

struct NeCertificate {
  bool holds = false;
  double worst_gap = 0.0;
  std::vector<double> gaps;  // per prosumer: best vertex deviation minus current value
};

// Exact equilibrium check: no prosumer can gain more than 3 * epsilon by
// deviating to any vertex of its occupation polytope (the best response is
// attained at a vertex, so vertex deviations are exhaustive).
NeCertificate certify_epsilon_ne(const Game& game, const std::vector<StationaryPolicy>& policies,
                                 double epsilon, const EvalOptions& options = {});

// Constructive sub-interval horizon from the mixing floor: long enough that
// payoff estimates are within epsilon of the long-run value, given a
// uniform-continuity modulus delta of the weighting curve at tolerance
// epsilon.  Deliberately conservative; the operational default stays small.
std::int64_t compute_horizon(const Game& game, double epsilon, double delta);

}  // namespace gridgame
