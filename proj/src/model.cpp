#include "gridgame/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridgame {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

void validate_pmf(const Pmf& pmf, double tol) {
  if (pmf.empty()) throw std::invalid_argument("pmf: empty support");
  double total = 0.0;
  for (const auto& [k, p] : pmf) {
    if (p < 0.0) throw std::invalid_argument("pmf: negative mass at offset " + std::to_string(k));
    total += p;
  }
  if (std::abs(total - 1.0) > tol)
    throw std::invalid_argument("pmf: masses sum to " + std::to_string(total) + ", expected 1");
}

double assumption_lambda(const Pmf& pmf, int radius) {
  double lo = std::numeric_limits<double>::infinity();
  for (int k = -radius; k <= radius; ++k) {
    auto it = pmf.find(k);
    lo = std::min(lo, it == pmf.end() ? 0.0 : it->second);
  }
  return std::isfinite(lo) ? lo : 0.0;
}

Pmf discretize_gaussian(double mu, double sigma2, int support_bound) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("discretize_gaussian: sigma2 must be positive");
  if (support_bound < 0) throw std::invalid_argument("discretize_gaussian: negative support bound");
  const double sigma = std::sqrt(sigma2);
  Pmf pmf;
  if (support_bound == 0) {
    pmf[0] = 1.0;
    return pmf;
  }
  // Interior bins take [k - 1/2, k + 1/2]; the end bins fold in their tails so
  // the masses sum to 1 by construction.
  pmf[-support_bound] = normal_cdf((-support_bound + 0.5 - mu) / sigma);
  for (int k = -support_bound + 1; k < support_bound; ++k)
    pmf[k] = normal_cdf((k + 0.5 - mu) / sigma) - normal_cdf((k - 0.5 - mu) / sigma);
  pmf[support_bound] = 1.0 - normal_cdf((support_bound - 0.5 - mu) / sigma);
  return pmf;
}

double Satisfaction::operator()(double consume) const {
  switch (kind) {
    case Kind::log1p:
      return std::log1p(consume);
    case Kind::linear:
      return consume;
    case Kind::sqrt:
      return std::sqrt(consume);
  }
  throw std::logic_error("satisfaction: unknown kind");
}

Satisfaction Satisfaction::from_tag(const std::string& tag) {
  if (tag == "log1p") return {Kind::log1p};
  if (tag == "linear") return {Kind::linear};
  if (tag == "sqrt") return {Kind::sqrt};
  throw std::invalid_argument("satisfaction: unknown tag '" + tag + "'");
}

std::string Satisfaction::tag() const {
  switch (kind) {
    case Kind::log1p:
      return "log1p";
    case Kind::linear:
      return "linear";
    case Kind::sqrt:
      return "sqrt";
  }
  throw std::logic_error("satisfaction: unknown kind");
}

void PricingRule::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("pricing: alpha must be positive");
}

int step_storage(int state, int gen, int demand, int consume, int s_max) {
  const int unclamped = state + gen + demand - consume;
  return std::min(std::max(unclamped, 0), s_max);
}

int demand_threshold(int tau, int consume, int state, int d_max) {
  return std::min(std::max(tau + consume - state, 0), d_max);
}

std::vector<double> price_fairness(const std::vector<double>& demands, double alpha) {
  double total = 0.0;
  for (double d : demands) {
    if (d < 0.0) throw std::invalid_argument("price_fairness: negative demand");
    total += d;
  }
  std::vector<double> prices(demands.size(), 0.0);
  if (total <= 0.0) return prices;  // nobody buys, nobody pays
  for (std::size_t i = 0; i < demands.size(); ++i) prices[i] = alpha * demands[i] / total;
  return prices;
}

double fairness_income(const Eigen::VectorXd& demands, double alpha) {
  const double total = demands.sum();
  if (total <= 0.0) return 0.0;
  return alpha * demands.squaredNorm() / total;
}

double instantaneous_payoff(const Action& own, const std::vector<double>& all_demands,
                            const PricingRule& pricing, const Satisfaction& satisfaction) {
  pricing.validate();
  double total = 0.0;
  for (double d : all_demands) {
    if (d < 0.0) throw std::invalid_argument("instantaneous_payoff: negative demand");
    total += d;
  }
  const double price = total > 0.0 ? pricing.alpha * own.demand / total : 0.0;
  return satisfaction(own.consume) - own.demand * price;
}

void ProsumerSpec::validate() const {
  if (s_max < 0) throw std::invalid_argument("prosumer: s_max must be nonnegative");
  if (l_max < 0) throw std::invalid_argument("prosumer: l_max must be nonnegative");
  if (tau < 0 || tau > s_max)
    throw std::invalid_argument("prosumer: tau must lie in [0, s_max]");
  validate_pmf(gen_pmf);
  behavior.validate();
}

int ProsumerSpec::num_actions() const {
  if (demand_mode == DemandMode::threshold) return l_max + 1;
  return (l_max + 1) * (demand_cap() + 1);
}

Action ProsumerSpec::action(int s, int a) const {
  if (a < 0 || a >= num_actions()) throw std::out_of_range("prosumer: action index");
  if (demand_mode == DemandMode::threshold) {
    if (s < 0 || s > s_max) throw std::out_of_range("prosumer: state index");
    return {a, demand_threshold(tau, a, s, demand_cap())};
  }
  const int span = demand_cap() + 1;
  return {a / span, a % span};
}

TransitionKernel::TransitionKernel(int num_states, int num_actions)
    : num_states_(num_states),
      num_actions_(num_actions),
      w_(static_cast<std::size_t>(num_states) * num_actions * num_states, 0.0) {
  if (num_states <= 0 || num_actions <= 0)
    throw std::invalid_argument("kernel: dimensions must be positive");
}

void TransitionKernel::validate(double tol) const {
  for (int a = 0; a < num_actions_; ++a)
    for (int s = 0; s < num_states_; ++s) {
      double total = 0.0;
      for (int x = 0; x < num_states_; ++x) {
        const double p = prob(x, a, s);
        if (p < -tol) throw std::invalid_argument("kernel: negative transition probability");
        total += p;
      }
      if (std::abs(total - 1.0) > tol)
        throw std::invalid_argument("kernel: column (" + std::to_string(a) + ", " +
                                    std::to_string(s) + ") sums to " + std::to_string(total));
    }
}

TransitionKernel build_kernel(const ProsumerSpec& spec) {
  spec.validate();
  TransitionKernel kernel(spec.num_states(), spec.num_actions());
  for (int a = 0; a < spec.num_actions(); ++a)
    for (int s = 0; s <= spec.s_max; ++s) {
      const Action act = spec.action(s, a);
      for (const auto& [gen, p] : spec.gen_pmf) {
        const int next = step_storage(s, gen, act.demand, act.consume, spec.s_max);
        kernel.prob(next, a, s) += p;
      }
    }
  kernel.validate();
  return kernel;
}

}  // namespace gridgame
