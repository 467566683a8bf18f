#include "gridgame/game.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridgame {

Game::Game(std::vector<ProsumerSpec> specs, PricingRule pricing)
    : specs_(std::move(specs)), pricing_(pricing) {
  if (specs_.empty()) throw std::invalid_argument("game: needs at least one prosumer");
  pricing_.validate();
  kernels_.reserve(specs_.size());
  for (const auto& spec : specs_) kernels_.push_back(build_kernel(spec));
}

double Game::payoff(int i, const Action& own, double total_demand) const {
  const ProsumerSpec& spec = specs_.at(i);
  const double price =
      total_demand > 0.0 ? pricing_.alpha * own.demand / total_demand : 0.0;
  return spec.satisfaction(own.consume) - own.demand * price;
}

std::uint64_t Game::opponent_atom_count(int me) const {
  const std::uint64_t cap = std::numeric_limits<std::int64_t>::max();
  std::uint64_t count = 1;
  for (int j = 0; j < num_players(); ++j) {
    if (j == me) continue;
    const std::uint64_t atoms =
        static_cast<std::uint64_t>(num_states(j)) * static_cast<std::uint64_t>(num_actions(j));
    if (count > cap / atoms) return cap;
    count *= atoms;
  }
  return count;
}

double Game::payoff_value_bound(int i) const {
  const ProsumerSpec& spec = specs_.at(i);
  // Payoffs live in [f(0) - alpha * d_max, f(l_max)]: the unit price never
  // exceeds alpha, and satisfaction is increasing.
  const double hi = spec.satisfaction(spec.l_max);
  const double lo = spec.satisfaction(0.0) - pricing_.alpha * spec.demand_cap();
  return std::max(std::abs(value(hi, spec.behavior)), std::abs(value(lo, spec.behavior)));
}

double Game::min_lambda() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& spec : specs_) lo = std::min(lo, spec.lambda());
  return lo;
}

}  // namespace gridgame
