#include "gridgame/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gridgame/random.hpp"

namespace gridgame {

void StationaryPolicy::validate(double tol) const {
  if (probs.rows() == 0 || probs.cols() == 0)
    throw std::invalid_argument("policy: empty matrix");
  for (int s = 0; s < probs.rows(); ++s) {
    double total = 0.0;
    for (int a = 0; a < probs.cols(); ++a) {
      if (probs(s, a) < -tol) throw std::invalid_argument("policy: negative probability");
      total += probs(s, a);
    }
    if (std::abs(total - 1.0) > tol)
      throw std::invalid_argument("policy: row " + std::to_string(s) + " sums to " +
                                  std::to_string(total));
  }
}

StationaryPolicy StationaryPolicy::uniform(int num_states, int num_actions) {
  StationaryPolicy p;
  p.probs = Eigen::MatrixXd::Constant(num_states, num_actions, 1.0 / num_actions);
  return p;
}

StationaryPolicy StationaryPolicy::deterministic(const std::vector<int>& action_of_state,
                                                 int num_actions) {
  StationaryPolicy p;
  p.probs = Eigen::MatrixXd::Zero(static_cast<int>(action_of_state.size()), num_actions);
  for (std::size_t s = 0; s < action_of_state.size(); ++s)
    p.probs(static_cast<int>(s), action_of_state[s]) = 1.0;
  return p;
}

void StationaryDistribution::validate(double tol) const {
  double total = 0.0;
  for (int s = 0; s < probs.size(); ++s) {
    if (probs(s) < -tol) throw std::invalid_argument("distribution: negative probability");
    total += probs(s);
  }
  if (std::abs(total - 1.0) > tol)
    throw std::invalid_argument("distribution: sums to " + std::to_string(total));
}

void OccupationMeasure::validate(double tol) const {
  double total = 0.0;
  for (int s = 0; s < mass.rows(); ++s)
    for (int a = 0; a < mass.cols(); ++a) {
      if (mass(s, a) < -tol) throw std::invalid_argument("occupation: negative mass");
      total += mass(s, a);
    }
  if (std::abs(total - 1.0) > tol)
    throw std::invalid_argument("occupation: total mass " + std::to_string(total));
}

Eigen::MatrixXd induced_chain(const TransitionKernel& kernel, const StationaryPolicy& policy) {
  const int S = kernel.num_states();
  const int A = kernel.num_actions();
  if (policy.num_states() != S || policy.num_actions() != A)
    throw std::invalid_argument("induced_chain: policy and kernel dimensions differ");
  Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(S, S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      const double p = policy.probs(s, a);
      if (p == 0.0) continue;
      for (int x = 0; x < S; ++x) chain(x, s) += p * kernel.prob(x, a, s);
    }
  return chain;
}

StationaryDistribution stationary_distribution(const Eigen::MatrixXd& chain) {
  const int S = static_cast<int>(chain.rows());
  if (chain.cols() != S) throw std::invalid_argument("stationary_distribution: square matrix expected");
  for (int s = 0; s < S; ++s) {
    if (std::abs(chain.col(s).sum() - 1.0) > 1e-9)
      throw std::invalid_argument("stationary_distribution: column " + std::to_string(s) +
                                  " is not a distribution");
  }

  // A unique stationary law requires rank(Q - I) = S - 1; disconnected chains
  // (several recurrent classes) are rank deficient.
  Eigen::MatrixXd shifted = chain - Eigen::MatrixXd::Identity(S, S);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(shifted);
  lu.setThreshold(1e-10);
  if (static_cast<int>(lu.rank()) < S - 1)
    throw std::invalid_argument(
        "stationary_distribution: chain admits multiple stationary distributions "
        "(rank of Q - I below S - 1)");

  // Direct solve: replace one balance row (any is redundant) by normalization.
  Eigen::MatrixXd system = shifted;
  system.row(S - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(S);
  rhs(S - 1) = 1.0;
  Eigen::VectorXd pi = system.colPivHouseholderQr().solve(rhs);

  const bool direct_ok = (chain * pi - pi).lpNorm<Eigen::Infinity>() <= 1e-8 &&
                         pi.minCoeff() >= -1e-8 && std::abs(pi.sum() - 1.0) <= 1e-8;
  if (!direct_ok) {
    // Power-iteration fallback for numerically awkward chains.
    pi = Eigen::VectorXd::Constant(S, 1.0 / S);
    bool converged = false;
    for (long it = 0; it < 1'000'000; ++it) {
      Eigen::VectorXd next = chain * pi;
      next /= next.sum();
      const double delta = (next - pi).lpNorm<Eigen::Infinity>();
      pi = next;
      if (delta < 1e-13) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw std::runtime_error(
          "stationary_distribution: power iteration did not converge (periodic chain?)");
  }

  StationaryDistribution result;
  result.probs = pi.cwiseMax(0.0);
  result.probs /= result.probs.sum();
  return result;
}

StationaryDistribution stationary_distribution(const StationaryPolicy& policy,
                                               const TransitionKernel& kernel) {
  policy.validate();
  return stationary_distribution(induced_chain(kernel, policy));
}

OccupationMeasure occupation_of(const StationaryPolicy& policy, const TransitionKernel& kernel) {
  const StationaryDistribution pi = stationary_distribution(policy, kernel);
  OccupationMeasure occ;
  occ.mass = pi.probs.asDiagonal() * policy.probs;
  return occ;
}

StationaryPolicy policy_from_occupation(const OccupationMeasure& occupation) {
  const int S = occupation.num_states();
  const int A = occupation.num_actions();
  StationaryPolicy policy;
  policy.probs.resize(S, A);
  for (int s = 0; s < S; ++s) {
    const double row_mass = occupation.mass.row(s).sum();
    if (row_mass <= 1e-12) {
      // Never-visited state: any conditional law is payoff-equivalent.
      policy.probs.row(s).setConstant(1.0 / A);
    } else {
      policy.probs.row(s) = occupation.mass.row(s).cwiseMax(0.0) / row_mass;
      policy.probs.row(s) /= policy.probs.row(s).sum();
    }
  }
  return policy;
}

Polytope occupation_polytope(const TransitionKernel& kernel) {
  const int S = kernel.num_states();
  const int A = kernel.num_actions();
  const int n = S * A;
  Polytope poly;
  poly.eq_lhs = Eigen::MatrixXd::Zero(S + 1, n);
  poly.eq_rhs = Eigen::VectorXd::Zero(S + 1);
  for (int x = 0; x < S; ++x)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a)
        poly.eq_lhs(x, s * A + a) = (x == s ? 1.0 : 0.0) - kernel.prob(x, a, s);
  poly.eq_lhs.row(S).setOnes();
  poly.eq_rhs(S) = 1.0;
  return poly;
}

std::vector<OccupationMeasure> occupation_vertices(const TransitionKernel& kernel, int dim_cap) {
  const int S = kernel.num_states();
  const int A = kernel.num_actions();
  const std::vector<Eigen::VectorXd> flat =
      enumerate_vertices(occupation_polytope(kernel), 1e-9, 1e-9, dim_cap);
  std::vector<OccupationMeasure> vertices;
  vertices.reserve(flat.size());
  for (const auto& v : flat) {
    OccupationMeasure occ;
    occ.mass.resize(S, A);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) occ.mass(s, a) = v(s * A + a);
    vertices.push_back(std::move(occ));
  }
  return vertices;
}

EvalMode EvalOptions::resolve(std::uint64_t atom_count) const {
  if (mode != EvalMode::automatic) return mode;
  return atom_count <= exact_atom_cap ? EvalMode::exact : EvalMode::monte_carlo;
}

namespace detail {

// Flattened per-(state, action) atom list of one prosumer under a given state
// law: atom probability and the integer demand it realizes.
AtomTable atom_table(const Game& game, int j, const Eigen::VectorXd& state_probs,
                     const StationaryPolicy& policy) {
  const int S = game.num_states(j);
  const int A = game.num_actions(j);
  AtomTable table;
  table.prob.reserve(static_cast<std::size_t>(S) * A);
  table.demand.reserve(static_cast<std::size_t>(S) * A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      table.prob.push_back(state_probs(s) * policy.probs(s, a));
      table.demand.push_back(game.action(j, s, a).demand);
    }
  return table;
}

namespace {

// Depth-first product over opponents' atoms, skipping zero-probability
// branches (their prospect weight is 0 and contributes nothing).
template <typename Fn>
void for_each_joint_atom(const std::vector<AtomTable>& tables, std::size_t level, double prob,
                         int demand, Fn&& fn) {
  if (level == tables.size()) {
    fn(prob, demand);
    return;
  }
  const AtomTable& t = tables[level];
  for (std::size_t i = 0; i < t.prob.size(); ++i) {
    if (t.prob[i] <= 0.0) continue;
    for_each_joint_atom(tables, level + 1, prob * t.prob[i], demand + t.demand[i],
                        std::forward<Fn>(fn));
  }
}

}  // namespace

// Prospect weight accumulated per integer total opponent demand.  All atoms
// are weighted individually (Prelec distortion applies per atom, not to
// merged outcome classes); grouping by the demand total afterwards is pure
// re-association of the sum, since the payoff depends on opponents only
// through their demand total.
std::vector<double> opponent_demand_coefficients(const Game& game, int me,
                                                 const std::vector<AtomTable>& opponents,
                                                 const ProspectParams& params,
                                                 const EvalOptions& options, Rng* rng) {
  int max_demand = 0;
  for (int j = 0; j < game.num_players(); ++j)
    if (j != me) max_demand += game.spec(j).demand_cap();
  std::vector<double> coeff(static_cast<std::size_t>(max_demand) + 1, 0.0);

  const EvalMode mode = options.resolve(game.opponent_atom_count(me));
  if (mode == EvalMode::exact) {
    if (game.opponent_atom_count(me) > options.exact_atom_cap)
      throw std::domain_error(
          "prospect reward: opponents' joint space exceeds the exact-enumeration cap; "
          "evaluate with EvalMode::monte_carlo instead");
    for_each_joint_atom(opponents, 0, 1.0, 0, [&](double p, int d) {
      coeff[static_cast<std::size_t>(d)] += weight(p, params);
    });
    return coeff;
  }

  // Monte Carlo: draw opponents' atoms from their joint law and reweight by
  // weight(p)/p, an unbiased estimate of the per-atom weight sum (atoms of
  // probability zero are never drawn and carry weight zero anyway).
  if (options.samples <= 0)
    throw std::invalid_argument("prospect reward: Monte Carlo needs a positive sample count");
  Rng local_rng(options.seed);
  Rng* r = rng ? rng : &local_rng;
  const double inv_samples = 1.0 / static_cast<double>(options.samples);
  for (std::int64_t n = 0; n < options.samples; ++n) {
    double p = 1.0;
    int d = 0;
    for (const AtomTable& t : opponents) {
      const int idx = r->categorical(t.prob.data(), static_cast<int>(t.prob.size()));
      p *= t.prob[idx];
      d += t.demand[idx];
    }
    coeff[static_cast<std::size_t>(d)] += weight(p, params) / p * inv_samples;
  }
  return coeff;
}

Eigen::MatrixXd reward_table(const Game& game, int me, const std::vector<double>& coeff) {
  const ProspectParams& params = game.spec(me).behavior;
  const int S = game.num_states(me);
  const int A = game.num_actions(me);
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      const Action own = game.action(me, s, a);
      double sum = 0.0;
      for (std::size_t d = 0; d < coeff.size(); ++d) {
        if (coeff[d] == 0.0) continue;
        const double payoff = game.payoff(me, own, own.demand + static_cast<double>(d));
        sum += coeff[d] * value(payoff, params);
      }
      table(s, a) = sum;
    }
  return table;
}

std::vector<AtomTable> opponent_tables(const Game& game, int me,
                                       const std::vector<StationaryPolicy>& policies,
                                       const std::vector<StationaryDistribution>& distributions) {
  std::vector<AtomTable> tables;
  tables.reserve(game.num_players() - 1);
  for (int j = 0; j < game.num_players(); ++j) {
    if (j == me) continue;
    tables.push_back(atom_table(game, j, distributions[j].probs, policies[j]));
  }
  return tables;
}

}  // namespace detail

ProspectReward prospect_reward(const Game& game, int me,
                               const std::vector<StationaryPolicy>& policies,
                               const std::vector<StationaryDistribution>& distributions,
                               const EvalOptions& options) {
  if (static_cast<int>(policies.size()) != game.num_players() ||
      static_cast<int>(distributions.size()) != game.num_players())
    throw std::invalid_argument("prospect_reward: profile size does not match the game");
  const std::vector<detail::AtomTable> tables =
      detail::opponent_tables(game, me, policies, distributions);
  const std::vector<double> coeff = detail::opponent_demand_coefficients(
      game, me, tables, game.spec(me).behavior, options, nullptr);
  ProspectReward reward;
  reward.table = detail::reward_table(game, me, coeff);
  return reward;
}

BestResponse best_response_lp(const ProspectReward& reward, const TransitionKernel& kernel) {
  const int S = kernel.num_states();
  const int A = kernel.num_actions();
  if (reward.table.rows() != S || reward.table.cols() != A)
    throw std::invalid_argument("best_response_lp: reward and kernel dimensions differ");
  const std::vector<OccupationMeasure> vertices = occupation_vertices(kernel);
  if (vertices.empty())
    throw std::logic_error("best_response_lp: occupation polytope has no vertices (internal error)");
  BestResponse best;
  bool first = true;
  for (const auto& vertex : vertices) {
    const double objective = vertex.mass.cwiseProduct(reward.table).sum();
    if (first || objective > best.objective) {
      best.occupation = vertex;
      best.objective = objective;
      first = false;
    }
  }
  return best;
}

std::vector<StationaryDistribution> stationary_profile(
    const Game& game, const std::vector<StationaryPolicy>& policies) {
  if (static_cast<int>(policies.size()) != game.num_players())
    throw std::invalid_argument("stationary_profile: profile size does not match the game");
  std::vector<StationaryDistribution> distributions;
  distributions.reserve(policies.size());
  for (int i = 0; i < game.num_players(); ++i)
    distributions.push_back(stationary_distribution(policies[i], game.kernel(i)));
  return distributions;
}

std::vector<double> exact_value(const Game& game, const std::vector<StationaryPolicy>& policies,
                                const EvalOptions& options) {
  const std::vector<StationaryDistribution> distributions = stationary_profile(game, policies);
  std::vector<double> values(game.num_players(), 0.0);
  for (int i = 0; i < game.num_players(); ++i) {
    EvalOptions per_player = options;
    per_player.seed = derive_seed(options.seed, "value/" + std::to_string(i));
    const ProspectReward reward = prospect_reward(game, i, policies, distributions, per_player);
    const OccupationMeasure occ = occupation_of(policies[i], game.kernel(i));
    values[i] = occ.mass.cwiseProduct(reward.table).sum();
  }
  return values;
}

}  // namespace gridgame
