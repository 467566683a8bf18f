#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gridgame/game.hpp"
#include "gridgame/model.hpp"
#include "gridgame/polytope.hpp"
#include "gridgame/random.hpp"

namespace gridgame {

// Stationary randomized policy: probs(s, a) = P{ play a | state s }.
struct StationaryPolicy {
  Eigen::MatrixXd probs;

  int num_states() const { return static_cast<int>(probs.rows()); }
  int num_actions() const { return static_cast<int>(probs.cols()); }

  void validate(double tol = 1e-9) const;

  static StationaryPolicy uniform(int num_states, int num_actions);
  static StationaryPolicy deterministic(const std::vector<int>& action_of_state,
                                        int num_actions);
};

// Stationary state distribution of a single prosumer's chain.
struct StationaryDistribution {
  Eigen::VectorXd probs;

  void validate(double tol = 1e-9) const;
};

// Long-run state-action frequencies; mass(s, a) sums to 1 over all pairs.
struct OccupationMeasure {
  Eigen::MatrixXd mass;

  int num_states() const { return static_cast<int>(mass.rows()); }
  int num_actions() const { return static_cast<int>(mass.cols()); }

  void validate(double tol = 1e-7) const;
};

// Distorted one-step reward of a single prosumer against fixed opponents:
// table(s, a) is the prospect-weighted sum over the opponents' stationary
// joint (state, action) atoms of the value of the resulting payoff.
struct ProspectReward {
  Eigen::MatrixXd table;
};

// State-to-state chain under a policy: entry (next, state).
Eigen::MatrixXd induced_chain(const TransitionKernel& kernel, const StationaryPolicy& policy);

/**
 * Stationary distribution of the induced chain, by direct linear solve with a
 * power-iteration fallback.  Throws std::invalid_argument when the chain does
 * not have a unique stationary distribution (e.g. disconnected or periodic
 * structure), naming the failure.
 */
StationaryDistribution stationary_distribution(const StationaryPolicy& policy,
                                               const TransitionKernel& kernel);
StationaryDistribution stationary_distribution(const Eigen::MatrixXd& chain);

// Occupation measure realized by a policy: mass(s, a) = pi(s) * probs(s, a).
OccupationMeasure occupation_of(const StationaryPolicy& policy, const TransitionKernel& kernel);

// Policy whose conditional action law matches the occupation measure; states
// with no mass get the uniform law (they are never visited, so any choice is
// payoff-equivalent).
StationaryPolicy policy_from_occupation(const OccupationMeasure& occupation);

// The balance-and-normalization polytope containing exactly the occupation
// measures realizable by stationary policies on this kernel, in standard form
// over variables flattened as index = state * num_actions + action.
Polytope occupation_polytope(const TransitionKernel& kernel);

// Vertices of the occupation polytope, as matrices.
std::vector<OccupationMeasure> occupation_vertices(const TransitionKernel& kernel,
                                                   int dim_cap = 16);

// How opponent-atom sums are evaluated.
enum class EvalMode { exact, monte_carlo, automatic };

struct EvalOptions {
  EvalMode mode = EvalMode::automatic;
  std::uint64_t seed = 0;
  std::int64_t samples = 1'000'000;       // Monte Carlo sample count
  std::uint64_t exact_atom_cap = 1'000'000;  // largest joint space enumerated exactly

  // Resolve `automatic` for a given opponent joint-space size.
  EvalMode resolve(std::uint64_t atom_count) const;
};

/**
 * Prospect-distorted reward table of prosumer `me` when every other prosumer
 * j runs `policies[j]` with stationary state law `distributions[j]` (entries
 * at index `me` are ignored).  Exact mode enumerates the opponents' joint
 * atoms; Monte Carlo mode draws atoms from their joint law and reweights by
 * weight(p)/p, which is unbiased for the same sum.  Entries for `me` are
 * ignored in both profile vectors.
 */
ProspectReward prospect_reward(const Game& game, int me,
                               const std::vector<StationaryPolicy>& policies,
                               const std::vector<StationaryDistribution>& distributions,
                               const EvalOptions& options = {});

struct BestResponse {
  OccupationMeasure occupation;
  double objective = 0.0;
};

// Occupation measure maximizing the expected prospect reward, taken over the
// vertices of the occupation polytope (the optimum of a linear objective over
// a bounded polytope is attained at one).  Ties break to the first vertex in
// enumeration order.
BestResponse best_response_lp(const ProspectReward& reward, const TransitionKernel& kernel);

// Stationary distributions for a full policy profile.
std::vector<StationaryDistribution> stationary_profile(const Game& game,
                                                       const std::vector<StationaryPolicy>& policies);

/**
 * Long-run prospect value of every prosumer under a stationary profile:
 * V_i = sum over own (s, a) of occupation_i(s, a) * reward_i(s, a).  The
 * default options evaluate exactly and throw (with a pointer to the Monte
 * Carlo option) when an opponent joint space exceeds the enumeration cap.
 */
std::vector<double> exact_value(const Game& game, const std::vector<StationaryPolicy>& policies,
                                const EvalOptions& options = EvalOptions{EvalMode::exact});

namespace detail {

// Shared internals of the distorted-reward evaluators; the learning loop
// reuses them against time-varying state marginals instead of stationary laws.

struct AtomTable {
  std::vector<double> prob;
  std::vector<int> demand;
};

AtomTable atom_table(const Game& game, int j, const Eigen::VectorXd& state_probs,
                     const StationaryPolicy& policy);

std::vector<AtomTable> opponent_tables(const Game& game, int me,
                                       const std::vector<StationaryPolicy>& policies,
                                       const std::vector<StationaryDistribution>& distributions);

std::vector<double> opponent_demand_coefficients(const Game& game, int me,
                                                 const std::vector<AtomTable>& opponents,
                                                 const ProspectParams& params,
                                                 const EvalOptions& options, Rng* rng);

Eigen::MatrixXd reward_table(const Game& game, int me, const std::vector<double>& coeff);

}  // namespace detail

}  // namespace gridgame
