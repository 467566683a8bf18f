#include "gridgame/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gridgame/model.hpp"

namespace gridgame {

void AllocatorConfig::validate(int num_prosumers) const {
  if (substations.empty()) throw std::invalid_argument("allocator: no substations configured");
  if (!(e_max > 0.0)) throw std::invalid_argument("allocator: e_max must be positive");
  if (!(beta >= 0.0)) throw std::invalid_argument("allocator: beta must be nonnegative");
  if (!(gamma > 0.0)) throw std::invalid_argument("allocator: gamma must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("allocator: alpha must be positive");
  std::vector<int> seen(num_prosumers, 0);
  for (std::size_t l = 0; l < substations.size(); ++l) {
    for (int j : substations[l]) {
      if (j < 0 || j >= num_prosumers)
        throw std::invalid_argument("allocator: substation " + std::to_string(l) +
                                    " references prosumer " + std::to_string(j) + " but only " +
                                    std::to_string(num_prosumers) + " prosumers exist");
      if (seen[j]++)
        throw std::invalid_argument("allocator: prosumer " + std::to_string(j) +
                                    " appears in more than one substation");
    }
  }
  for (int j = 0; j < num_prosumers; ++j)
    if (!seen[j])
      throw std::invalid_argument("allocator: prosumer " + std::to_string(j) +
                                  " is not assigned to any substation");
}

Eigen::VectorXd AllocatorConfig::aggregate(const Eigen::VectorXd& demands) const {
  Eigen::VectorXd agg = Eigen::VectorXd::Zero(num_substations());
  for (int l = 0; l < num_substations(); ++l)
    for (int j : substations[l]) agg(l) += demands(j);
  return agg;
}

double allocation_cost(const Eigen::VectorXd& demands, const Eigen::VectorXd& allocation,
                       const AllocatorConfig& config) {
  if (allocation.size() != config.num_substations())
    throw std::invalid_argument("allocation_cost: allocation size mismatch");
  const Eigen::VectorXd agg = config.aggregate(demands);
  const double supply = config.beta * allocation.sum();
  const double revenue = fairness_income(demands, config.alpha);
  const double imbalance = config.gamma * (agg - allocation).squaredNorm();
  return supply - revenue + imbalance;
}

Eigen::VectorXd allocation_cost_gradient(const Eigen::VectorXd& demands,
                                         const Eigen::VectorXd& allocation,
                                         const AllocatorConfig& config) {
  if (allocation.size() != config.num_substations())
    throw std::invalid_argument("allocation_cost_gradient: allocation size mismatch");
  const Eigen::VectorXd agg = config.aggregate(demands);
  return Eigen::VectorXd::Constant(config.num_substations(), config.beta) -
         2.0 * config.gamma * (agg - allocation);
}

Eigen::VectorXd project_allocation(const Eigen::VectorXd& v, double e_max) {
  if (!(e_max > 0.0)) throw std::invalid_argument("project_allocation: e_max must be positive");
  Eigen::VectorXd clipped = v.cwiseMax(0.0);
  if (clipped.sum() <= e_max) return clipped;

  // Projection lands on the face {sum = e_max}; find the threshold theta with
  // sum_i max(v_i - theta, 0) = e_max by scanning the sorted entries.
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double running = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    running += sorted[k];
    const double candidate = (running - e_max) / static_cast<double>(k + 1);
    if (k + 1 == sorted.size() || sorted[k + 1] <= candidate) {
      theta = candidate;
      break;
    }
  }
  return (v.array() - theta).cwiseMax(0.0);
}

Eigen::VectorXd allocator_step(const Eigen::VectorXd& prev_allocation,
                               const Eigen::VectorXd& prev_demands, int t,
                               const AllocatorConfig& config) {
  if (t < 2) throw std::invalid_argument("allocator_step: defined for rounds t >= 2");
  const Eigen::VectorXd grad = allocation_cost_gradient(prev_demands, prev_allocation, config);
  const double step = 1.0 / std::sqrt(static_cast<double>(t - 1));
  return project_allocation(prev_allocation - step * grad, config.e_max);
}

HindsightOptimum best_fixed_in_hindsight(const std::vector<Eigen::VectorXd>& demand_history,
                                         const AllocatorConfig& config) {
  if (demand_history.empty())
    throw std::invalid_argument("best_fixed_in_hindsight: empty demand history");
  const int k = config.num_substations();
  Eigen::VectorXd mean_agg = Eigen::VectorXd::Zero(k);
  for (const auto& demands : demand_history) mean_agg += config.aggregate(demands);
  mean_agg /= static_cast<double>(demand_history.size());

  HindsightOptimum best;
  best.allocation = project_allocation(
      mean_agg.array() - config.beta / (2.0 * config.gamma), config.e_max);
  best.total_cost = 0.0;
  for (const auto& demands : demand_history)
    best.total_cost += allocation_cost(demands, best.allocation, config);
  return best;
}

double regret(const RegretLedger& ledger, const AllocatorConfig& config) {
  if (ledger.rounds() == 0) throw std::invalid_argument("regret: empty ledger");
  return ledger.cumulative_cost - best_fixed_in_hindsight(ledger.demand_history, config).total_cost;
}

double gradient_norm_bound(const AllocatorConfig& config, double demand_cap) {
  const double k = static_cast<double>(config.num_substations());
  return std::sqrt(k) *
         (config.beta + 2.0 * config.gamma * k * demand_cap + 2.0 * config.gamma * config.e_max);
}

double regret_bound(const AllocatorConfig& config, double demand_cap, long horizon) {
  const double h = gradient_norm_bound(config, demand_cap);
  return (config.e_max * config.e_max / 2.0 + h * h) * std::sqrt(static_cast<double>(horizon));
}

OnlineAllocator::OnlineAllocator(const AllocatorConfig& config, int num_prosumers)
    : config_(config), num_prosumers_(num_prosumers) {
  config_.validate(num_prosumers);
  allocation_ = Eigen::VectorXd::Constant(config_.num_substations(),
                                          config_.e_max / (2.0 * config_.num_substations()));
}

OnlineAllocator::OnlineAllocator(const AllocatorConfig& config, int num_prosumers,
                                 const Eigen::VectorXd& initial_allocation)
    : OnlineAllocator(config, num_prosumers) {
  if (initial_allocation.size() != config_.num_substations())
    throw std::invalid_argument("allocator: initial allocation size mismatch");
  if (initial_allocation.minCoeff() < 0.0 || initial_allocation.sum() > config_.e_max + 1e-9)
    throw std::invalid_argument("allocator: initial allocation outside the budget region");
  allocation_ = initial_allocation;
}

void OnlineAllocator::observe(const Eigen::VectorXd& demands) {
  if (demands.size() != num_prosumers_)
    throw std::invalid_argument("allocator: demand vector size mismatch");
  if (demands.minCoeff() < 0.0) throw std::invalid_argument("allocator: negative demand");
  const double cost = allocation_cost(demands, allocation_, config_);
  ledger_.demand_history.push_back(demands);
  ledger_.allocation_history.push_back(allocation_);
  ledger_.cost_history.push_back(cost);
  ledger_.cumulative_cost += cost;
  ++round_;
  allocation_ = allocator_step(allocation_, demands, round_, config_);
}

}  // namespace gridgame
