#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gridgame {

/**
 * Utility-side configuration: the substation partition of prosumers, the
 * total allocation budget e_max, the per-unit supply cost beta, the imbalance
 * penalty gamma, and the pricing coefficient alpha shared with the game.
 */
struct AllocatorConfig {
  std::vector<std::vector<int>> substations;  // partition of prosumer indices
  double e_max = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double alpha = 1.0;

  int num_substations() const { return static_cast<int>(substations.size()); }

  // Checks positivity and that the substations exactly partition 0..N-1.
  void validate(int num_prosumers) const;

  // Per-substation totals of a per-prosumer demand vector.
  Eigen::VectorXd aggregate(const Eigen::VectorXd& demands) const;
};

// Round cost to the utility: supply cost of the allocation, minus the revenue
// collected under fairness pricing, plus the quadratic mismatch between each
// substation's aggregate demand and its allocation.
double allocation_cost(const Eigen::VectorXd& demands, const Eigen::VectorXd& allocation,
                       const AllocatorConfig& config);

// Gradient of the round cost in the allocation: beta - 2 gamma (agg_l - e_l).
Eigen::VectorXd allocation_cost_gradient(const Eigen::VectorXd& demands,
                                         const Eigen::VectorXd& allocation,
                                         const AllocatorConfig& config);

// Euclidean projection onto {x >= 0, sum x <= e_max}: clip negatives, and if
// the budget still overflows project onto the scaled simplex by sorting and
// thresholding.
Eigen::VectorXd project_allocation(const Eigen::VectorXd& v, double e_max);

// Gradient step of round t (t >= 2): project(previous allocation minus the
// 1/sqrt(t-1)-scaled gradient at the previous round's demands).
Eigen::VectorXd allocator_step(const Eigen::VectorXd& prev_allocation,
                               const Eigen::VectorXd& prev_demands, int t,
                               const AllocatorConfig& config);

struct HindsightOptimum {
  Eigen::VectorXd allocation;
  double total_cost = 0.0;
};

// Best fixed allocation for a whole demand history: the quadratic part is
// isotropic, so the constrained optimum is the projection of the unconstrained
// per-substation optimum (mean aggregate demand minus beta / (2 gamma)).
HindsightOptimum best_fixed_in_hindsight(const std::vector<Eigen::VectorXd>& demand_history,
                                         const AllocatorConfig& config);

// Per-round record of an online run.
struct RegretLedger {
  std::vector<Eigen::VectorXd> demand_history;      // per prosumer
  std::vector<Eigen::VectorXd> allocation_history;  // per substation
  std::vector<double> cost_history;
  double cumulative_cost = 0.0;

  int rounds() const { return static_cast<int>(cost_history.size()); }
};

// Cumulative cost of the played allocations minus the best fixed allocation's
// total cost over the same demands.
double regret(const RegretLedger& ledger, const AllocatorConfig& config);

// Upper bound on the gradient norm over the feasible region, for demands
// whose per-substation aggregate never exceeds demand_cap.
double gradient_norm_bound(const AllocatorConfig& config, double demand_cap);

// Sublinear guarantee (e_max^2 / 2 + H^2) sqrt(T) for the gradient stepper.
double regret_bound(const AllocatorConfig& config, double demand_cap, long horizon);

/**
 * The online allocator: starts from the uniform half-budget split, observes
 * each round's demands after committing its allocation, and descends the
 * observed gradient with a 1/sqrt(t) step onto the budget region.
 */
class OnlineAllocator {
 public:
  OnlineAllocator(const AllocatorConfig& config, int num_prosumers);
  // Same, but with a caller-chosen feasible first-round allocation.
  OnlineAllocator(const AllocatorConfig& config, int num_prosumers,
                  const Eigen::VectorXd& initial_allocation);

  // Allocation committed for the upcoming round.
  const Eigen::VectorXd& allocation() const { return allocation_; }

  // Settle the current round against realized demands and step.
  void observe(const Eigen::VectorXd& demands);

  const RegretLedger& ledger() const { return ledger_; }
  const AllocatorConfig& config() const { return config_; }

 private:
  AllocatorConfig config_;
  int num_prosumers_;
  Eigen::VectorXd allocation_;
  RegretLedger ledger_;
  int round_ = 1;
};

}  // namespace gridgame
