#include "gridgame/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gridgame/random.hpp"

namespace gridgame {

void LearningConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("learning: epsilon must be positive");
  if (horizon < 1) throw std::invalid_argument("learning: horizon must be at least 1");
  if (max_periods < 1) throw std::invalid_argument("learning: max_periods must be at least 1");
  if (burn_in < 0) throw std::invalid_argument("learning: burn_in must be nonnegative");
  if (initial_state < 0) throw std::invalid_argument("learning: initial_state must be nonnegative");
  if (post_convergence_periods < 0)
    throw std::invalid_argument("learning: post_convergence_periods must be nonnegative");
}

namespace {

// Occupation-measure sampler for one prosumer: hit-and-run over the polytope,
// or a Dirichlet mixture of its vertices.  Hit-and-run needs an interior
// start; when the inscribed radius degenerates to 0 the polytope is lower
// dimensional than its equality system suggests and the walk cannot move, so
// the mixture (which only needs the vertex list) takes over.
class OccupationSampler {
 public:
  OccupationSampler(const Polytope& poly, const std::vector<OccupationMeasure>& vertices,
                    SamplerKind kind, int burn_in, std::uint64_t seed)
      : vertices_(vertices), rng_(seed) {
    if (kind == SamplerKind::hit_and_run) {
      auto walk = std::make_unique<HitAndRunSampler>(poly, seed, burn_in);
      if (walk->walk_dim() == 0 || walk->start_radius() > 1e-10) walk_ = std::move(walk);
    }
  }

  OccupationMeasure draw(int num_states, int num_actions) {
    OccupationMeasure occ;
    occ.mass.resize(num_states, num_actions);
    if (walk_) {
      const Eigen::VectorXd flat = walk_->sample();
      for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a) occ.mass(s, a) = flat(s * num_actions + a);
      return occ;
    }
    // Dirichlet(1, ..., 1) mixture of vertices via normalized exponentials.
    std::vector<double> w(vertices_.size());
    double total = 0.0;
    for (double& wi : w) {
      wi = -std::log(1.0 - rng_.uniform());
      total += wi;
    }
    occ.mass.setZero();
    for (std::size_t k = 0; k < vertices_.size(); ++k)
      occ.mass += (w[k] / total) * vertices_[k].mass;
    return occ;
  }

 private:
  std::unique_ptr<HitAndRunSampler> walk_;
  const std::vector<OccupationMeasure>& vertices_;
  Rng rng_;
};

}  // namespace

struct Algorithm1Driver::Impl {
  Game game;
  LearningConfig config;
  PeriodSchedule schedule;

  std::vector<Polytope> polytopes;
  std::vector<std::vector<OccupationMeasure>> vertices;
  std::vector<std::vector<StationaryPolicy>> vertex_policies;
  std::vector<StationaryPolicy> base;
  std::vector<std::unique_ptr<OccupationSampler>> samplers;

  // Per-prosumer chain state: exact marginal plus (optionally) a realized path.
  std::vector<Eigen::VectorXd> marginals;
  std::vector<int> realized;
  bool simulate_path = false;

  Rng trajectory_rng;
  Rng estimation_rng;

  std::vector<Eigen::VectorXd> demands;
  long steps = 0;
  int period_count = 0;

  Impl(const Game& g, const LearningConfig& cfg)
      : game(g),
        config(cfg),
        trajectory_rng(derive_seed(cfg.seed, "trajectory")),
        estimation_rng(derive_seed(cfg.seed, "estimation")) {
    config.validate();
    const int n = game.num_players();
    for (int i = 0; i < n; ++i)
      if (config.initial_state > game.spec(i).s_max)
        throw std::invalid_argument("learning: initial_state exceeds a prosumer's storage range");

    simulate_path =
        config.estimation == EstimationMode::trajectory_sampling || config.record_demands;

    int r = 0;
    polytopes.reserve(n);
    vertices.reserve(n);
    vertex_policies.reserve(n);
    for (int i = 0; i < n; ++i) {
      polytopes.push_back(occupation_polytope(game.kernel(i)));
      vertices.push_back(occupation_vertices(game.kernel(i)));
      if (vertices.back().empty())
        throw std::logic_error("learning: occupation polytope has no vertices");
      std::vector<StationaryPolicy> policies;
      policies.reserve(vertices.back().size());
      for (const auto& v : vertices.back()) policies.push_back(policy_from_occupation(v));
      vertex_policies.push_back(std::move(policies));
      r = std::max(r, static_cast<int>(vertices.back().size()));
      base.push_back(StationaryPolicy::uniform(game.num_states(i), game.num_actions(i)));
    }
    schedule = PeriodSchedule{n, r};

    for (int i = 0; i < n; ++i)
      samplers.push_back(std::make_unique<OccupationSampler>(
          polytopes[i], vertices[i], config.sampler, config.burn_in,
          derive_seed(config.seed, "occupation/" + std::to_string(i))));

    reset_chains();
  }

  void reset_chains() {
    const int n = game.num_players();
    marginals.assign(n, Eigen::VectorXd());
    realized.assign(n, config.initial_state);
    for (int i = 0; i < n; ++i) {
      marginals[i] = Eigen::VectorXd::Zero(game.num_states(i));
      marginals[i](config.initial_state) = 1.0;
    }
  }

  void resample() {
    for (int i = 0; i < game.num_players(); ++i) {
      const OccupationMeasure occ = samplers[i]->draw(game.num_states(i), game.num_actions(i));
      base[i] = policy_from_occupation(occ);
    }
  }

  // Value of prosumer `me` at the current marginals under `profile`.
  double exact_step_value(int me, const std::vector<const StationaryPolicy*>& profile) {
    std::vector<detail::AtomTable> tables;
    tables.reserve(game.num_players() - 1);
    for (int j = 0; j < game.num_players(); ++j) {
      if (j == me) continue;
      tables.push_back(detail::atom_table(game, j, marginals[j], *profile[j]));
    }
    EvalOptions options = config.eval;
    options.mode = options.resolve(game.opponent_atom_count(me));
    const std::vector<double> coeff = detail::opponent_demand_coefficients(
        game, me, tables, game.spec(me).behavior, options, &estimation_rng);
    const Eigen::MatrixXd reward = detail::reward_table(game, me, coeff);
    double value_sum = 0.0;
    for (int s = 0; s < game.num_states(me); ++s) {
      if (marginals[me](s) == 0.0) continue;
      for (int a = 0; a < game.num_actions(me); ++a)
        value_sum += marginals[me](s) * profile[me]->probs(s, a) * reward(s, a);
    }
    return value_sum;
  }

  // Importance-weighted realization for prosumer `me` given this step's
  // realized actions; matches the exact step value in expectation.
  double sampled_step_value(int me, const std::vector<const StationaryPolicy*>& profile,
                            const std::vector<int>& actions, double total_demand) {
    double atom_prob = 1.0;
    for (int j = 0; j < game.num_players(); ++j) {
      if (j == me) continue;
      atom_prob *= marginals[j](realized[j]) * profile[j]->probs(realized[j], actions[j]);
    }
    if (atom_prob <= 0.0) return 0.0;  // zero-probability atom carries zero weight
    const ProspectParams& params = game.spec(me).behavior;
    const Action own = game.action(me, realized[me], actions[me]);
    const double payoff = game.payoff(me, own, total_demand);
    return weight(atom_prob, params) / atom_prob * value(payoff, params);
  }

  // One simulated game step under `profile`: optionally realize actions and
  // transitions, accumulate measurements, then push the marginals forward.
  void advance_step(const std::vector<const StationaryPolicy*>& profile,
                    const std::vector<int>& measured, std::vector<double>& accum) {
    const int n = game.num_players();
    std::vector<int> actions(n, -1);
    double total_demand = 0.0;
    if (simulate_path) {
      Eigen::VectorXd demand_vec(n);
      for (int j = 0; j < n; ++j) {
        const auto& probs = profile[j]->probs;
        std::vector<double> row(probs.cols());
        for (int a = 0; a < probs.cols(); ++a) row[a] = probs(realized[j], a);
        actions[j] = trajectory_rng.categorical(row.data(), static_cast<int>(row.size()));
        const int d = game.action(j, realized[j], actions[j]).demand;
        demand_vec(j) = d;
        total_demand += d;
      }
      if (config.record_demands) demands.push_back(std::move(demand_vec));
    }

    for (std::size_t m = 0; m < measured.size(); ++m) {
      const int i = measured[m];
      if (config.estimation == EstimationMode::exact_propagation)
        accum[m] += exact_step_value(i, profile);
      else
        accum[m] += sampled_step_value(i, profile, actions, total_demand);
    }

    // Transitions: realized path first (it needs this step's marginal-free
    // kernel only), then the marginals.
    if (simulate_path) {
      for (int j = 0; j < n; ++j) {
        const int S = game.num_states(j);
        std::vector<double> col(S);
        for (int x = 0; x < S; ++x) col[x] = game.kernel(j).prob(x, actions[j], realized[j]);
        realized[j] = trajectory_rng.categorical(col.data(), S);
      }
    }
    for (int j = 0; j < n; ++j)
      marginals[j] = induced_chain(game.kernel(j), *profile[j]) * marginals[j];
    ++steps;
  }

  PeriodOutcome run_period() {
    const int n = game.num_players();
    const int r = schedule.vertex_slots;
    PeriodOutcome outcome;
    outcome.v_hat.assign(n, 0.0);
    outcome.v_hat_vertex.assign(n, std::vector<double>(r, 0.0));
    outcome.q_bits.assign(n, 0);

    for (int slot = 0; slot < schedule.num_slots(); ++slot) {
      if (config.reset_state_each_slot) reset_chains();
      const int sampler_player = schedule.sampling_player(slot);

      std::vector<const StationaryPolicy*> profile(n);
      for (int j = 0; j < n; ++j) profile[j] = &base[j];
      if (sampler_player >= 0) {
        const int k = schedule.vertex_index(slot);
        // Prosumers with fewer vertices than r keep their base policy in the
        // surplus slots; the measurement then just re-estimates the base value.
        if (k < static_cast<int>(vertex_policies[sampler_player].size()))
          profile[sampler_player] = &vertex_policies[sampler_player][k];
      }

      std::vector<int> measured;
      if (sampler_player >= 0) {
        measured.push_back(sampler_player);
      } else {
        for (int i = 0; i < n; ++i) measured.push_back(i);
      }

      std::vector<double> accum(measured.size(), 0.0);
      for (int t = 0; t < config.horizon; ++t) advance_step(profile, measured, accum);
      for (double& v : accum) v /= config.horizon;

      if (sampler_player >= 0) {
        outcome.v_hat_vertex[sampler_player][schedule.vertex_index(slot)] = accum[0];
      } else {
        for (int i = 0; i < n; ++i) outcome.v_hat[i] = accum[i];
      }
    }

    outcome.q_all = 1;
    for (int i = 0; i < n; ++i) {
      const double best_vertex =
          *std::max_element(outcome.v_hat_vertex[i].begin(), outcome.v_hat_vertex[i].end());
      outcome.q_bits[i] = outcome.v_hat[i] > best_vertex - config.epsilon ? 1 : 0;
      outcome.q_all &= outcome.q_bits[i];
    }
    ++period_count;
    return outcome;
  }

  void simulate_frozen(long extra_steps) {
    std::vector<const StationaryPolicy*> profile(game.num_players());
    for (int j = 0; j < game.num_players(); ++j) profile[j] = &base[j];
    std::vector<int> measured;
    std::vector<double> accum;
    for (long t = 0; t < extra_steps; ++t) advance_step(profile, measured, accum);
  }

  LearnResult run() {
    LearnResult result;
    result.vertex_slots = schedule.vertex_slots;
    result.horizon_used = config.horizon;

    resample();
    bool fresh_draw = true;
    for (int m = 1; m <= config.max_periods; ++m) {
      PeriodOutcome outcome = run_period();
      const int q_all = outcome.q_all;
      result.trace.push_back(PeriodRecord{m, fresh_draw, std::move(outcome)});
      if (q_all) {
        result.converged = true;
        result.periods_used = m;
        result.steps_to_convergence = steps;
        break;
      }
      resample();
      fresh_draw = true;
    }
    if (!result.converged) result.periods_used = config.max_periods;

    // Frozen tail: policies are never modified after the terminating period.
    if (result.converged) {
      for (int p = 1; p <= config.post_convergence_periods; ++p) {
        PeriodOutcome outcome = run_period();
        result.trace.push_back(
            PeriodRecord{result.periods_used + p, false, std::move(outcome)});
      }
    }

    result.final_policies = base;
    result.vertex_policies = vertex_policies;
    result.demand_history = demands;
    result.total_steps = steps;
    return result;
  }
};

Algorithm1Driver::Algorithm1Driver(const Game& game, const LearningConfig& config)
    : impl_(std::make_unique<Impl>(game, config)) {}

Algorithm1Driver::~Algorithm1Driver() = default;

const PeriodSchedule& Algorithm1Driver::schedule() const { return impl_->schedule; }

const std::vector<std::vector<StationaryPolicy>>& Algorithm1Driver::vertex_policies() const {
  return impl_->vertex_policies;
}

const std::vector<StationaryPolicy>& Algorithm1Driver::base_policies() const {
  return impl_->base;
}

void Algorithm1Driver::set_base_policies(std::vector<StationaryPolicy> policies) {
  if (static_cast<int>(policies.size()) != impl_->game.num_players())
    throw std::invalid_argument("learning: profile size does not match the game");
  for (int i = 0; i < impl_->game.num_players(); ++i) policies[i].validate();
  impl_->base = std::move(policies);
}

void Algorithm1Driver::resample() { impl_->resample(); }

PeriodOutcome Algorithm1Driver::run_period() { return impl_->run_period(); }

void Algorithm1Driver::simulate_frozen(long steps) { impl_->simulate_frozen(steps); }

const std::vector<Eigen::VectorXd>& Algorithm1Driver::demand_history() const {
  return impl_->demands;
}

long Algorithm1Driver::total_steps() const { return impl_->steps; }

LearnResult Algorithm1Driver::run() { return impl_->run(); }

LearnResult run_algorithm1(const Game& game, const LearningConfig& config) {
  return Algorithm1Driver(game, config).run();
}

LearnResult run_algorithm1_doubling(const Game& game, LearningConfig config, int max_attempts) {
  if (max_attempts < 1) throw std::invalid_argument("learning: max_attempts must be at least 1");
  LearnResult result;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    LearningConfig attempt_config = config;
    attempt_config.horizon = config.horizon << attempt;
    if (attempt > 0)
      attempt_config.seed = derive_seed(config.seed, "attempt/" + std::to_string(attempt));
    result = run_algorithm1(game, attempt_config);
    if (result.converged &&
        certify_epsilon_ne(game, result.final_policies, attempt_config.epsilon).holds)
      return result;
  }
  return result;
}

std::vector<double> estimate_payoffs(const Game& game,
                                     const std::vector<StationaryPolicy>& profile, long horizon,
                                     const LearningConfig& config) {
  config.validate();
  if (horizon < 1) throw std::invalid_argument("estimate_payoffs: horizon must be at least 1");
  const int n = game.num_players();
  if (static_cast<int>(profile.size()) != n)
    throw std::invalid_argument("estimate_payoffs: profile size does not match the game");
  for (int i = 0; i < n; ++i) {
    profile[i].validate();
    if (config.initial_state > game.spec(i).s_max)
      throw std::invalid_argument("estimate_payoffs: initial_state exceeds a storage range");
  }

  // Exact propagation with a steady-state fast path for very long horizons.
  std::vector<Eigen::VectorXd> marginals(n);
  std::vector<int> realized(n, config.initial_state);
  for (int i = 0; i < n; ++i) {
    marginals[i] = Eigen::VectorXd::Zero(game.num_states(i));
    marginals[i](config.initial_state) = 1.0;
  }
  std::vector<Eigen::MatrixXd> chains(n);
  for (int i = 0; i < n; ++i) chains[i] = induced_chain(game.kernel(i), profile[i]);

  std::vector<Eigen::VectorXd> stationary(n);
  bool have_stationary = true;
  try {
    for (int i = 0; i < n; ++i) stationary[i] = stationary_distribution(chains[i]).probs;
  } catch (const std::exception&) {
    have_stationary = false;  // no unique limit; propagate the whole horizon
  }

  Rng rng(derive_seed(config.seed, "estimate"));
  std::vector<double> accum(n, 0.0);

  const bool trajectory = config.estimation == EstimationMode::trajectory_sampling;

  auto exact_value_at = [&](int me) {
    std::vector<detail::AtomTable> tables;
    tables.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j == me) continue;
      tables.push_back(detail::atom_table(game, j, marginals[j], profile[j]));
    }
    EvalOptions options = config.eval;
    options.mode = options.resolve(game.opponent_atom_count(me));
    options.seed = derive_seed(config.seed, "estimate-mc/" + std::to_string(me));
    const std::vector<double> coeff = detail::opponent_demand_coefficients(
        game, me, tables, game.spec(me).behavior, options, nullptr);
    const Eigen::MatrixXd reward = detail::reward_table(game, me, coeff);
    double total = 0.0;
    for (int s = 0; s < game.num_states(me); ++s)
      for (int a = 0; a < game.num_actions(me); ++a)
        total += marginals[me](s) * profile[me].probs(s, a) * reward(s, a);
    return total;
  };

  double recent_change = std::numeric_limits<double>::infinity();
  for (long t = 1; t <= horizon; ++t) {
    if (!trajectory) {
      // Settled either against the known stationary law or, failing that,
      // once propagation stalls at its numerical fixed point.
      bool settled = recent_change < 1e-15;
      if (!settled && have_stationary) {
        settled = true;
        for (int i = 0; i < n && settled; ++i)
          settled = (marginals[i] - stationary[i]).lpNorm<Eigen::Infinity>() < 1e-13;
      }
      if (settled) {
        // Every remaining step contributes the same per-step value.
        if (have_stationary)
          for (int i = 0; i < n; ++i) marginals[i] = stationary[i];
        for (int i = 0; i < n; ++i)
          accum[i] += static_cast<double>(horizon - t + 1) * exact_value_at(i);
        break;
      }
    }

    std::vector<int> actions(n);
    double total_demand = 0.0;
    if (trajectory) {
      for (int j = 0; j < n; ++j) {
        std::vector<double> row(game.num_actions(j));
        for (int a = 0; a < game.num_actions(j); ++a) row[a] = profile[j].probs(realized[j], a);
        actions[j] = rng.categorical(row.data(), static_cast<int>(row.size()));
        total_demand += game.action(j, realized[j], actions[j]).demand;
      }
    }

    for (int i = 0; i < n; ++i) {
      if (!trajectory) {
        accum[i] += exact_value_at(i);
        continue;
      }
      double atom_prob = 1.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        atom_prob *= marginals[j](realized[j]) * profile[j].probs(realized[j], actions[j]);
      }
      if (atom_prob <= 0.0) continue;
      const ProspectParams& params = game.spec(i).behavior;
      const Action own = game.action(i, realized[i], actions[i]);
      accum[i] += weight(atom_prob, params) / atom_prob *
                  value(game.payoff(i, own, total_demand), params);
    }

    if (trajectory) {
      for (int j = 0; j < n; ++j) {
        const int S = game.num_states(j);
        std::vector<double> col(S);
        for (int x = 0; x < S; ++x) col[x] = game.kernel(j).prob(x, actions[j], realized[j]);
        realized[j] = rng.categorical(col.data(), S);
      }
    }
    recent_change = 0.0;
    for (int j = 0; j < n; ++j) {
      const Eigen::VectorXd next = chains[j] * marginals[j];
      recent_change = std::max(recent_change, (next - marginals[j]).lpNorm<Eigen::Infinity>());
      marginals[j] = next;
    }
  }

  for (double& v : accum) v /= static_cast<double>(horizon);
  return accum;
}

NeCertificate certify_epsilon_ne(const Game& game, const std::vector<StationaryPolicy>& policies,
                                 double epsilon, const EvalOptions& options) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("certify: epsilon must be nonnegative");
  const std::vector<StationaryDistribution> distributions = stationary_profile(game, policies);
  NeCertificate certificate;
  certificate.gaps.reserve(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) {
    EvalOptions per_player = options;
    per_player.seed = derive_seed(options.seed, "certify/" + std::to_string(i));
    const ProspectReward reward = prospect_reward(game, i, policies, distributions, per_player);
    const OccupationMeasure occ = occupation_of(policies[i], game.kernel(i));
    const double current = occ.mass.cwiseProduct(reward.table).sum();
    const double best = best_response_lp(reward, game.kernel(i)).objective;
    certificate.gaps.push_back(best - current);
  }
  certificate.worst_gap =
      *std::max_element(certificate.gaps.begin(), certificate.gaps.end());
  certificate.holds = certificate.worst_gap <= 3.0 * epsilon + 1e-12;
  return certificate;
}

std::int64_t compute_horizon(const Game& game, double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("compute_horizon: epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("compute_horizon: delta must lie in (0, 1)");
  const double lambda = game.min_lambda();
  if (!(lambda > 0.0))
    throw std::domain_error(
        "compute_horizon: a generation pmf places no mass on some offset within the storage "
        "range, so the chains have no uniform mixing floor");

  const int n = game.num_players();
  const double tolerance = std::min(epsilon, delta / (static_cast<double>(n) * n));
  const double mixing_time = std::ceil(std::log(tolerance) / std::log1p(-lambda));

  double value_bound = 0.0;
  for (int i = 0; i < n; ++i) value_bound = std::max(value_bound, game.payoff_value_bound(i));
  const double weight_bound = 1.0;  // both weighting curves peak at w(1) = 1

  double joint_atoms = 1.0;
  for (int i = 0; i < n; ++i)
    joint_atoms *= static_cast<double>(game.num_states(i)) * game.num_actions(i);

  const double horizon =
      std::ceil(3.0 * mixing_time * value_bound * weight_bound * joint_atoms / epsilon);
  if (!(horizon < 9e18)) throw std::overflow_error("compute_horizon: horizon exceeds 64-bit range");
  return static_cast<std::int64_t>(horizon);
}

}  // namespace gridgame
