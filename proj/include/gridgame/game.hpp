#pragma once

#include <cstdint>
#include <vector>

#include "gridgame/model.hpp"

namespace gridgame {

/**
 * The N-prosumer trading game: per-prosumer specs and kernels plus the shared
 * pricing rule.  Storage chains are independent across prosumers; coupling
 * enters only through the demand-dependent prices, so a prosumer's payoff
 * needs just its own action and the total demand of the round.
 */
class Game {
 public:
  Game(std::vector<ProsumerSpec> specs, PricingRule pricing);

  int num_players() const { return static_cast<int>(specs_.size()); }
  const ProsumerSpec& spec(int i) const { return specs_.at(i); }
  const PricingRule& pricing() const { return pricing_; }
  const TransitionKernel& kernel(int i) const { return kernels_.at(i); }

  int num_states(int i) const { return specs_.at(i).num_states(); }
  int num_actions(int i) const { return specs_.at(i).num_actions(); }
  Action action(int i, int s, int a) const { return specs_.at(i).action(s, a); }

  // Payoff of prosumer i whose round resolved to `own` while all prosumers
  // together (i included) demanded `total_demand` units.
  double payoff(int i, const Action& own, double total_demand) const;

  // Number of joint (state, action) atoms of everyone but `me`, saturating at
  // 2^63-1.  Decides between exact enumeration and Monte Carlo evaluation.
  std::uint64_t opponent_atom_count(int me) const;

  // Uniform bound on |value(payoff)| for prosumer i over all joint actions.
  double payoff_value_bound(int i) const;

  // Smallest mixing floor across all prosumers' chains.
  double min_lambda() const;

 private:
  std::vector<ProsumerSpec> specs_;
  PricingRule pricing_;
  std::vector<TransitionKernel> kernels_;
};

}  // namespace gridgame
