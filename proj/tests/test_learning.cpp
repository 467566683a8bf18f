#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "gridgame/learning.hpp"
#include "gridgame/mdp.hpp"
#include "gridgame/model.hpp"

using namespace gridgame;

namespace {

ProsumerSpec gaussian_spec(int s_max, int l_max, int tau, double mu, double sigma2) {
  ProsumerSpec spec;
  spec.s_max = s_max;
  spec.l_max = l_max;
  spec.tau = tau;
  spec.gen_pmf = discretize_gaussian(mu, sigma2, 10);
  return spec;
}

Game learning_game(bool pt) {
  std::vector<ProsumerSpec> specs{gaussian_spec(2, 1, 1, 0.5, 2.0),
                                  gaussian_spec(2, 1, 0, 0.5, 1.0),
                                  gaussian_spec(2, 1, 1, 1.0, 1.0)};
  if (pt)
    for (ProsumerSpec& spec : specs) spec.behavior = ProspectParams::pt(0.8, 0.5, 1.0, 0.3);
  return Game(std::move(specs), PricingRule{1.0});
}

StationaryPolicy random_policy(std::mt19937_64& rng, int states, int actions) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  StationaryPolicy policy;
  policy.probs.resize(states, actions);
  for (int s = 0; s < states; ++s) {
    double total = 0.0;
    for (int a = 0; a < actions; ++a) {
      policy.probs(s, a) = unit(rng);
      total += policy.probs(s, a);
    }
    policy.probs.row(s) /= total;
  }
  return policy;
}

std::vector<StationaryPolicy> random_profile(std::mt19937_64& rng, const Game& game) {
  std::vector<StationaryPolicy> profile;
  for (int i = 0; i < game.num_players(); ++i)
    profile.push_back(random_policy(rng, game.num_states(i), game.num_actions(i)));
  return profile;
}

// Largest estimation error observed over random profiles at the given horizon.
double measured_slack(const Game& game, int horizon, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LearningConfig config;
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const std::vector<StationaryPolicy> profile = random_profile(rng, game);
    const std::vector<double> estimate = estimate_payoffs(game, profile, horizon, config);
    const std::vector<double> exact = exact_value(game, profile);
    for (int i = 0; i < game.num_players(); ++i)
      worst = std::max(worst, std::abs(estimate[i] - exact[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("learning config validation") {
  LearningConfig config;
  CHECK_NOTHROW(config.validate());
  config.epsilon = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = LearningConfig{};
  config.horizon = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = LearningConfig{};
  config.max_periods = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = LearningConfig{};
  config.initial_state = -1;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("period schedule partitions the slots") {
  const PeriodSchedule schedule{3, 4};
  CHECK(schedule.num_slots() == 13);
  std::vector<int> samples_per_player(3, 0);
  for (int slot = 0; slot < schedule.num_slots(); ++slot) {
    const int player = schedule.sampling_player(slot);
    if (slot == 12) {
      CHECK(player == -1);
    } else {
      CHECK(player == slot / 4);
      CHECK(schedule.vertex_index(slot) == slot % 4);
      ++samples_per_player[player];
    }
  }
  for (int i = 0; i < 3; ++i) CHECK(samples_per_player[i] == 4);
}

TEST_CASE("single prosumer with constant payoff estimates value(u) at every horizon") {
  // One state, one effective action stream: consume 1, demand 1, price alpha.
  ProsumerSpec spec;
  spec.s_max = 0;
  spec.l_max = 1;
  spec.tau = 0;
  spec.gen_pmf = Pmf{{0, 1.0}};
  spec.satisfaction = Satisfaction{Satisfaction::Kind::linear};
  spec.behavior = ProspectParams::pt(0.8, 0.5, 1.0, 0.3);
  const Game game({spec}, PricingRule{0.5});
  StationaryPolicy always;
  always.probs.resize(1, 2);
  always.probs << 0.0, 1.0;

  const double u = 1.0 - 1.0 * 0.5;  // consume 1, sole buyer at alpha = 0.5
  const double expected = value(u, spec.behavior);
  for (int horizon : {1, 7, 30}) {
    for (EstimationMode mode :
         {EstimationMode::exact_propagation, EstimationMode::trajectory_sampling}) {
      LearningConfig config;
      config.estimation = mode;
      config.horizon = horizon;
      const std::vector<double> est = estimate_payoffs(game, {always}, horizon, config);
      CHECK(est[0] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact-propagation estimates approach the stationary value") {
  const Game game = learning_game(true);
  std::mt19937_64 rng(51);
  const std::vector<StationaryPolicy> profile = random_profile(rng, game);
  const std::vector<double> exact = exact_value(game, profile);
  LearningConfig config;

  double err30 = 0.0;
  double err3000 = 0.0;
  const std::vector<double> est30 = estimate_payoffs(game, profile, 30, config);
  const std::vector<double> est3000 = estimate_payoffs(game, profile, 3000, config);
  for (int i = 0; i < 3; ++i) {
    err30 = std::max(err30, std::abs(est30[i] - exact[i]));
    err3000 = std::max(err3000, std::abs(est3000[i] - exact[i]));
  }
  CHECK(err30 < 0.5);
  CHECK(err3000 < 5e-3);
  CHECK(err3000 < err30 + 1e-9);

  // At the constructive horizon the error clears the target tolerance.
  const double epsilon = 0.01;
  const std::int64_t horizon = compute_horizon(game, epsilon, epsilon);
  const std::vector<double> est_full = estimate_payoffs(game, profile, horizon, config);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(est_full[i] - exact[i]) < epsilon);
}

TEST_CASE("trajectory sampling matches exact propagation in the long run") {
  const Game game = learning_game(false);  // risk-neutral keeps the variance low
  std::mt19937_64 rng(53);
  const std::vector<StationaryPolicy> profile = random_profile(rng, game);
  const std::vector<double> exact = exact_value(game, profile);
  LearningConfig config;
  config.estimation = EstimationMode::trajectory_sampling;
  config.seed = 77;
  const std::vector<double> sampled = estimate_payoffs(game, profile, 60'000, config);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(sampled[i] - exact[i]) < 0.05);

  // Seeded determinism: the same draw stream reproduces bit-identical output.
  const std::vector<double> again = estimate_payoffs(game, profile, 60'000, config);
  for (int i = 0; i < 3; ++i) CHECK(sampled[i] == again[i]);
}

TEST_CASE("period estimates track the exact slot values") {
  const Game game = learning_game(true);
  LearningConfig config;
  config.seed = 5;
  Algorithm1Driver driver(game, config);
  driver.resample();
  const std::vector<StationaryPolicy> base = driver.base_policies();
  const PeriodOutcome outcome = driver.run_period();

  const std::vector<double> base_exact = exact_value(game, base);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(outcome.v_hat[i] - base_exact[i]) < 0.5);

  for (int i = 0; i < 3; ++i) {
    const auto& vertices = driver.vertex_policies()[i];
    for (std::size_t k = 0; k < vertices.size(); ++k) {
      std::vector<StationaryPolicy> deviated = base;
      deviated[i] = vertices[k];
      const std::vector<double> slot_exact = exact_value(game, deviated);
      CHECK(std::abs(outcome.v_hat_vertex[i][k] - slot_exact[i]) < 0.5);
    }
  }
}

TEST_CASE("q bits fire exactly the threshold rule on a single-prosumer game") {
  const Game game({gaussian_spec(2, 1, 1, 1.0, 1.0)}, PricingRule{1.0});
  const std::vector<StationaryPolicy> nobody;
  const std::vector<StationaryDistribution> no_dists;

  // Exact vertex values, best and worst.
  std::vector<StationaryPolicy> dummy{StationaryPolicy::uniform(3, 2)};
  const std::vector<StationaryDistribution> dists = stationary_profile(game, dummy);
  const ProspectReward reward = prospect_reward(game, 0, dummy, dists);
  const std::vector<OccupationMeasure> vertices = occupation_vertices(game.kernel(0));
  double best = -1e300;
  double worst = 1e300;
  std::size_t best_k = 0;
  std::size_t worst_k = 0;
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    const double v = vertices[k].mass.cwiseProduct(reward.table).sum();
    if (v > best) best = v, best_k = k;
    if (v < worst) worst = v, worst_k = k;
  }
  REQUIRE(best - worst > 0.3);  // the deviation must dwarf epsilon + noise

  SUBCASE("base at the optimum is satisfied") {
    LearningConfig config;
    config.epsilon = 0.2;
    Algorithm1Driver driver(game, config);
    driver.set_base_policies({policy_from_occupation(vertices[best_k])});
    const PeriodOutcome outcome = driver.run_period();
    CHECK(outcome.q_bits[0] == 1);
    CHECK(outcome.q_all == 1);
  }
  SUBCASE("base at the bottom is dissatisfied") {
    LearningConfig config;
    config.epsilon = 0.05;
    Algorithm1Driver driver(game, config);
    driver.set_base_policies({policy_from_occupation(vertices[worst_k])});
    const PeriodOutcome outcome = driver.run_period();
    CHECK(outcome.q_bits[0] == 0);
    CHECK(outcome.q_all == 0);
  }
}

TEST_CASE("the full loop reaches a certified equilibrium on the reference instance") {
  const Game game = learning_game(true);
  LearningConfig config;
  config.epsilon = 0.01;
  config.horizon = 30;
  config.max_periods = 500;
  config.seed = 1;
  config.post_convergence_periods = 5;

  const LearnResult result = run_algorithm1(game, config);
  CHECK(result.converged);
  CHECK(result.periods_used <= 500);
  CHECK(result.horizon_used == 30);
  REQUIRE(static_cast<int>(result.trace.size()) == result.periods_used + 5);

  // Frozen tail: no resampling after the terminating period.
  for (std::size_t k = 0; k < result.trace.size(); ++k) {
    const bool frozen = static_cast<int>(k) >= result.periods_used;
    CHECK(result.trace[k].resampled == !frozen);
    CHECK(result.trace[k].period == static_cast<int>(k) + 1);
  }
  CHECK(result.trace[result.periods_used - 1].outcome.q_all == 1);

  // Certificate at 3 epsilon plus twice the measured estimation slack.
  const double slack = measured_slack(game, config.horizon, 20, 61);
  const NeCertificate certificate =
      certify_epsilon_ne(game, result.final_policies, config.epsilon);
  CHECK(certificate.worst_gap <= 3.0 * config.epsilon + 2.0 * slack + 1e-12);

  // Total-step accounting: every period is (N r + 1) * horizon steps.
  const long per_period =
      static_cast<long>(game.num_players() * result.vertex_slots + 1) * config.horizon;
  CHECK(result.total_steps == per_period * static_cast<long>(result.trace.size()));
  CHECK(result.steps_to_convergence == per_period * result.periods_used);
}

TEST_CASE("runs are reproducible bit for bit") {
  const Game game = learning_game(true);
  LearningConfig config;
  config.seed = 9;
  config.max_periods = 40;
  const LearnResult a = run_algorithm1(game, config);
  const LearnResult b = run_algorithm1(game, config);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    for (int i = 0; i < 3; ++i) {
      CHECK(a.trace[k].outcome.v_hat[i] == b.trace[k].outcome.v_hat[i]);
      CHECK(a.trace[k].outcome.q_bits[i] == b.trace[k].outcome.q_bits[i]);
    }
  }
  CHECK(a.converged == b.converged);
  for (int i = 0; i < 3; ++i)
    CHECK((a.final_policies[i].probs - b.final_policies[i].probs).norm() == 0.0);
}

TEST_CASE("vertex-mixture sampling also converges") {
  const Game game = learning_game(true);
  LearningConfig config;
  config.seed = 3;
  config.sampler = SamplerKind::vertex_mixture;
  const LearnResult result = run_algorithm1(game, config);
  CHECK(result.converged);
  const NeCertificate certificate =
      certify_epsilon_ne(game, result.final_policies, config.epsilon);
  CHECK(certificate.worst_gap <= 3.0 * config.epsilon + 0.1);
}

TEST_CASE("single-prosumer run degenerates to a vertex comparison") {
  const Game game({gaussian_spec(2, 1, 1, 0.5, 2.0)}, PricingRule{1.0});
  LearningConfig config;
  config.seed = 2;
  config.epsilon = 0.05;
  const LearnResult result = run_algorithm1(game, config);
  CHECK(result.converged);
  const NeCertificate certificate =
      certify_epsilon_ne(game, result.final_policies, config.epsilon);
  CHECK(certificate.holds);
}

TEST_CASE("recorded demand stream is integral, bounded, and step-aligned") {
  const Game game = learning_game(true);
  LearningConfig config;
  config.seed = 4;
  config.record_demands = true;
  config.max_periods = 50;
  Algorithm1Driver driver(game, config);
  LearnResult result = driver.run();
  CHECK(static_cast<long>(driver.demand_history().size()) == driver.total_steps());
  driver.simulate_frozen(123);
  CHECK(static_cast<long>(driver.demand_history().size()) == result.total_steps + 123);
  for (const Eigen::VectorXd& d : driver.demand_history()) {
    REQUIRE(d.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(d(i) >= 0.0);
      CHECK(d(i) <= game.spec(i).demand_cap());
      CHECK(d(i) == std::floor(d(i)));
    }
  }
}

TEST_CASE("doubling wrapper returns a certified result") {
  const Game game = learning_game(false);
  LearningConfig config;
  config.seed = 6;
  config.horizon = 30;
  config.max_periods = 300;
  const LearnResult result = run_algorithm1_doubling(game, config);
  CHECK(result.converged);
  CHECK(result.horizon_used >= 30);
  CHECK(result.horizon_used % 30 == 0);
  const NeCertificate certificate =
      certify_epsilon_ne(game, result.final_policies, config.epsilon);
  CHECK(certificate.holds);
}

TEST_CASE("risk-neutral learning converges at least as fast in aggregate") {
  // Soft qualitative property: over matched seeds, the undistorted variant
  // needs no more periods on average.  Logged, not load-bearing.
  long pt_total = 0;
  long eut_total = 0;
  int pt_converged = 0;
  int eut_converged = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    LearningConfig config;
    config.seed = seed;
    const LearnResult pt = run_algorithm1(learning_game(true), config);
    const LearnResult eut = run_algorithm1(learning_game(false), config);
    pt_total += pt.periods_used;
    eut_total += eut.periods_used;
    pt_converged += pt.converged ? 1 : 0;
    eut_converged += eut.converged ? 1 : 0;
  }
  CHECK(pt_converged >= 9);
  CHECK(eut_converged >= 9);
  WARN_MESSAGE(eut_total <= pt_total,
               "aggregate periods: risk-neutral ", eut_total, " vs distorted ", pt_total,
               " (soft expectation: risk-neutral converges at least as fast)");
}

TEST_CASE("certificate flags a profile far from equilibrium") {
  const Game game = learning_game(true);
  std::vector<StationaryPolicy> uniform;
  for (int i = 0; i < 3; ++i)
    uniform.push_back(StationaryPolicy::uniform(game.num_states(i), game.num_actions(i)));
  const NeCertificate certificate = certify_epsilon_ne(game, uniform, 0.01);
  CHECK(certificate.worst_gap > 0.0);
  CHECK(certificate.gaps.size() == 3);
  for (double gap : certificate.gaps) CHECK(gap >= -1e-10);
}

TEST_CASE("constructive horizon: monotone in epsilon and guarded") {
  const Game game = learning_game(true);
  const std::int64_t loose = compute_horizon(game, 0.02, 0.02);
  const std::int64_t tight = compute_horizon(game, 0.01, 0.01);
  CHECK(loose > 0);
  CHECK(tight >= loose);
  CHECK_THROWS_AS(compute_horizon(game, 0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(compute_horizon(game, 1.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(compute_horizon(game, 0.01, 0.0), std::invalid_argument);

  // A chain without a uniform mixing floor has no finite guarantee.
  ProsumerSpec rigid;
  rigid.s_max = 1;
  rigid.l_max = 1;
  rigid.tau = 0;
  rigid.gen_pmf = Pmf{{0, 1.0}};
  const Game degenerate({rigid}, PricingRule{1.0});
  CHECK_THROWS_AS(compute_horizon(degenerate, 0.01, 0.01), std::domain_error);
}

TEST_CASE("reset-per-slot debugging mode still converges") {
  const Game game = learning_game(true);
  LearningConfig config;
  config.seed = 8;
  config.reset_state_each_slot = true;
  const LearnResult result = run_algorithm1(game, config);
  CHECK(result.converged);
}
