#pragma once

#include <Eigen/Dense>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "gridgame/prospect.hpp"

namespace gridgame {

// Finite integer-valued distribution: offset -> probability mass.  Used for
// the per-period net renewable generation of a prosumer (negative offsets model
// consumption by appliances exceeding what the panel produced).
using Pmf = std::map<int, double>;

// Throws std::invalid_argument unless the masses are nonnegative and sum to 1
// within tolerance.
void validate_pmf(const Pmf& pmf, double tol = 1e-9);

// Smallest mass the distribution places on any offset k with |k| <= radius
// (missing offsets count as 0).  A positive floor makes every storage chain
// uniformly mixing, which the learning horizon bounds rely on.
double assumption_lambda(const Pmf& pmf, int radius);

/**
 * Integer pmf for a Gaussian with mean `mu` and variance `sigma2`: each integer
 * k in (-support_bound, support_bound) receives the density mass of the bin
 * [k - 1/2, k + 1/2], and the two end points absorb their entire tails, so the
 * result always sums to exactly 1.
 */
Pmf discretize_gaussian(double mu, double sigma2, int support_bound);

// Per-period satisfaction from consuming x units.  Tagged so configurations
// can name the curve; all curves are increasing with f(0) = 0.
struct Satisfaction {
  enum class Kind { log1p, linear, sqrt };
  Kind kind = Kind::log1p;

  double operator()(double consume) const;

  static Satisfaction from_tag(const std::string& tag);
  std::string tag() const;
};

// Proportional-fairness pricing: prosumer i pays alpha * D_i / sum_j D_j per
// unit bought.  alpha must be positive.
struct PricingRule {
  double alpha = 1.0;

  void validate() const;
};

// One period's decision: units consumed from storage and units demanded from
// the utility.
struct Action {
  int consume = 0;
  int demand = 0;
};

// Storage update for one period: surplus demand and generation charge the
// battery, consumption drains it, and the level is clamped to [0, s_max].
int step_storage(int state, int gen, int demand, int consume, int s_max);

// Demand that tops the battery back up to the target level tau after the
// planned consumption: [tau + consume - state]^+, clipped to d_max.
int demand_threshold(int tau, int consume, int state,
                     int d_max = std::numeric_limits<int>::max());

// Per-prosumer unit prices alpha * D_i / sum_j D_j; all zeros when total
// demand is zero (nobody buys, nobody pays).
std::vector<double> price_fairness(const std::vector<double>& demands, double alpha);

// Total payment collected under fairness pricing, alpha * sum_i D_i^2 / sum_j D_j.
// Accepts real-valued demands so allocation streams can reuse it.
double fairness_income(const Eigen::VectorXd& demands, double alpha);

// Satisfaction from consumption minus the payment for demanded units.  The
// caller's own demand must appear in `all_demands`; its price is derived from
// the demand value itself, so no index is needed.
double instantaneous_payoff(const Action& own, const std::vector<double>& all_demands,
                            const PricingRule& pricing, const Satisfaction& satisfaction);

// Whether demand is a free action coordinate or derived from the top-up rule.
enum class DemandMode { threshold, free_demand };

/**
 * Static description of one prosumer: storage size, consumption range, demand
 * rule, generation distribution, and its risk attitude.
 *
 * Action indexing depends on the demand mode.  In threshold mode an action is
 * just the consumption level (demand follows from the current storage level);
 * in free mode actions enumerate all (consume, demand) pairs.
 */
struct ProsumerSpec {
  int s_max = 0;                     // storage holds 0..s_max units
  int l_max = 0;                     // consumption per period is 0..l_max
  int d_max = -1;                    // demand cap; defaults to tau + l_max
  int tau = 0;                       // storage top-up target in threshold mode
  Pmf gen_pmf;                       // net generation distribution
  Satisfaction satisfaction;
  ProspectParams behavior;
  DemandMode demand_mode = DemandMode::threshold;

  void validate() const;

  int num_states() const { return s_max + 1; }
  int num_actions() const;
  int demand_cap() const { return d_max >= 0 ? d_max : tau + l_max; }

  // The (consume, demand) pair realized by action index `a` in state `s`.
  Action action(int s, int a) const;

  // Mixing floor of the storage chain this spec induces.
  double lambda() const { return assumption_lambda(gen_pmf, s_max); }
};

/**
 * Per-prosumer storage transition probabilities, indexed as
 * prob(next, action, state) = P{ S(t+1) = next | S(t) = state, action }.
 * Every (action, state) column is a distribution over next states.
 */
class TransitionKernel {
 public:
  TransitionKernel(int num_states, int num_actions);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  double prob(int next, int action, int state) const {
    return w_[index(next, action, state)];
  }
  double& prob(int next, int action, int state) { return w_[index(next, action, state)]; }

  // Throws std::invalid_argument unless every column is a distribution.
  void validate(double tol = 1e-9) const;

 private:
  std::size_t index(int next, int action, int state) const {
    return (static_cast<std::size_t>(action) * num_states_ + state) * num_states_ + next;
  }

  int num_states_;
  int num_actions_;
  std::vector<double> w_;  // contiguous over `next` for fixed (action, state)
};

// Kernel induced by the storage update under the spec's generation pmf:
// prob(x, a, s) = P{ step_storage(s, G, d(s,a), l(a), s_max) = x }.
TransitionKernel build_kernel(const ProsumerSpec& spec);

}  // namespace gridgame
