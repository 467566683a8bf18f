#include "gridgame/experiments.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>

#include "gridgame/csv.hpp"
#include "gridgame/learning.hpp"
#include "gridgame/mdp.hpp"
#include "gridgame/random.hpp"

namespace gridgame {

namespace {

std::string out_path(const SimulationConfig& config, const std::string& name) {
  std::filesystem::create_directories(config.out_dir);
  return (std::filesystem::path(config.out_dir) / name).string();
}

// Long-run value of one prosumer under a full stationary profile.
double prosumer_value(const Game& game, int me, const std::vector<StationaryPolicy>& policies,
                      const std::vector<StationaryDistribution>& distributions,
                      const EvalOptions& options) {
  const ProspectReward reward = prospect_reward(game, me, policies, distributions, options);
  const OccupationMeasure occupation = occupation_of(policies[me], game.kernel(me));
  return (occupation.mass.array() * reward.table.array()).sum();
}

std::vector<StationaryPolicy> uniform_profile(const Game& game) {
  std::vector<StationaryPolicy> policies;
  for (int i = 0; i < game.num_players(); ++i)
    policies.push_back(StationaryPolicy::uniform(game.num_states(i), game.num_actions(i)));
  return policies;
}

void write_policy_rows(CsvWriter& csv, const std::string& label, const Game& game, int i,
                       const StationaryPolicy& policy) {
  for (int s = 0; s < policy.num_states(); ++s)
    for (int a = 0; a < policy.num_actions(); ++a) {
      const Action act = game.action(i, s, a);
      csv.write_row({label, CsvWriter::format(s), CsvWriter::format(a),
                     CsvWriter::format(act.consume), CsvWriter::format(act.demand),
                     CsvWriter::format(policy.probs(s, a))});
    }
}

// Key/value summary file, one fact per row.
class SummaryWriter {
 public:
  explicit SummaryWriter(const std::string& path) : csv_(path, {"key", "value"}) {}
  void put(const std::string& key, const std::string& value) { csv_.write_row({key, value}); }
  void put(const std::string& key, double value) { put(key, CsvWriter::format(value)); }
  void put(const std::string& key, long value) { put(key, CsvWriter::format(value)); }
  void put(const std::string& key, int value) { put(key, CsvWriter::format(value)); }

 private:
  CsvWriter csv_;
};

// The game stream pipeline shared by run_regret and run_allocation_trace:
// learn (recording realized demands), extend the frozen profile until the
// requested number of rounds exists, then replay the stream into the online
// allocator.
struct AllocationRun {
  LearnResult learn;
  std::vector<Eigen::VectorXd> demands;  // exactly `steps` rounds
  RegretLedger ledger;
  HindsightOptimum hindsight;
  AllocatorConfig allocator;
  double demand_cap = 0.0;  // largest per-substation aggregate demand possible
};

AllocationRun run_allocation_pipeline(const SimulationConfig& config) {
  if (!config.allocator.present)
    throw std::invalid_argument("config: allocator: section required for this experiment");
  const Game game = config.make_game();
  LearningConfig learn_config = config.learning;
  learn_config.record_demands = true;

  Algorithm1Driver driver(game, learn_config);
  AllocationRun run;
  run.learn = driver.run();
  const long steps = config.allocator.steps;
  if (static_cast<long>(driver.demand_history().size()) < steps)
    driver.simulate_frozen(steps - static_cast<long>(driver.demand_history().size()));
  run.demands.assign(driver.demand_history().begin(),
                     driver.demand_history().begin() + steps);

  run.allocator = config.allocator.config;
  OnlineAllocator allocator(run.allocator, game.num_players());
  for (const Eigen::VectorXd& d : run.demands) allocator.observe(d);
  run.ledger = allocator.ledger();
  run.hindsight = best_fixed_in_hindsight(run.ledger.demand_history, run.allocator);

  for (const auto& members : run.allocator.substations) {
    double cap = 0.0;
    for (int j : members) cap += game.spec(j).demand_cap();
    run.demand_cap = std::max(run.demand_cap, cap);
  }
  return run;
}

void write_learning_summary(SummaryWriter& summary, const LearnResult& result,
                            const LearningConfig& config) {
  summary.put("converged", result.converged ? 1 : 0);
  summary.put("periods_used", result.periods_used);
  summary.put("vertex_slots", result.vertex_slots);
  summary.put("horizon", result.horizon_used);
  summary.put("epsilon", config.epsilon);
  summary.put("total_steps", result.total_steps);
  summary.put("steps_to_convergence", result.steps_to_convergence);
}

void write_allocation_summary(const std::string& path, const AllocationRun& run,
                              const LearningConfig& learn_config) {
  SummaryWriter summary(path);
  write_learning_summary(summary, run.learn, learn_config);
  summary.put("rounds", static_cast<long>(run.ledger.rounds()));
  summary.put("online_total_cost", run.ledger.cumulative_cost);
  summary.put("hindsight_total_cost", run.hindsight.total_cost);
  summary.put("regret", run.ledger.cumulative_cost - run.hindsight.total_cost);
  summary.put("gradient_bound", gradient_norm_bound(run.allocator, run.demand_cap));
  summary.put("regret_bound", regret_bound(run.allocator, run.demand_cap, run.ledger.rounds()));
  for (int l = 0; l < run.allocator.num_substations(); ++l)
    summary.put("hindsight_allocation_" + std::to_string(l), run.hindsight.allocation(l));
}

// Running regret needs the best fixed allocation of every prefix; with the
// quadratic round cost this is closed-form in running sums, so each prefix
// costs O(K log K) instead of a fresh pass over its history.
class PrefixRegret {
 public:
  explicit PrefixRegret(const AllocatorConfig& config)
      : config_(config),
        sum_aggregate_(Eigen::VectorXd::Zero(config.num_substations())) {}

  void add_round(const Eigen::VectorXd& demands) {
    const Eigen::VectorXd agg = config_.aggregate(demands);
    sum_aggregate_ += agg;
    sum_aggregate_sq_ += agg.squaredNorm();
    sum_income_ += fairness_income(demands, config_.alpha);
    ++rounds_;
  }

  double hindsight_cost() const {
    const double t = static_cast<double>(rounds_);
    const Eigen::VectorXd mean = sum_aggregate_ / t;
    const Eigen::VectorXd x = project_allocation(
        mean.array() - config_.beta / (2.0 * config_.gamma), config_.e_max);
    return t * config_.beta * x.sum() - sum_income_ +
           config_.gamma *
               (sum_aggregate_sq_ - 2.0 * x.dot(sum_aggregate_) + t * x.squaredNorm());
  }

 private:
  AllocatorConfig config_;
  Eigen::VectorXd sum_aggregate_;
  double sum_aggregate_sq_ = 0.0;
  double sum_income_ = 0.0;
  long rounds_ = 0;
};

}  // namespace

ExperimentResult run_best_response(const SimulationConfig& config) {
  const Game game = config.make_game();
  const int target = config.best_response.target;
  const std::vector<StationaryPolicy> uniform = uniform_profile(game);
  const std::vector<StationaryDistribution> distributions = stationary_profile(game, uniform);

  ExperimentResult result;
  const std::string policy_path = out_path(config, "best_response.csv");
  const std::string summary_path = out_path(config, "best_response_values.csv");
  CsvWriter policy_csv(policy_path,
                       {"scenario", "state", "action", "consume", "demand", "probability"});
  CsvWriter value_csv(summary_path, {"scenario", "value"});

  for (const BehaviorScenario& scenario : config.best_response.scenarios) {
    std::vector<ProsumerSpec> specs = config.prosumers;
    specs[target].behavior = scenario.behavior;
    const Game variant(specs, config.pricing);

    EvalOptions options = config.learning.eval;
    options.seed = derive_seed(config.seed, "best_response/" + scenario.name);
    const ProspectReward reward =
        prospect_reward(variant, target, uniform, distributions, options);
    const BestResponse best = best_response_lp(reward, variant.kernel(target));
    const StationaryPolicy policy = policy_from_occupation(best.occupation);

    write_policy_rows(policy_csv, scenario.name, variant, target, policy);
    value_csv.write_row({scenario.name, CsvWriter::format(best.objective)});
  }
  result.outputs = {policy_path, summary_path};
  return result;
}

ExperimentResult run_payoff_vs_n(const SimulationConfig& config) {
  ExperimentResult result;
  const std::string path = out_path(config, "payoff_vs_n.csv");
  CsvWriter csv(path, {"behavior", "n", "prosumer", "value"});

  const int total = static_cast<int>(config.prosumers.size());
  for (const BehaviorScenario& scenario : config.payoff_vs_n.behaviors) {
    for (int n = 1; n <= total; ++n) {
      std::vector<ProsumerSpec> specs(config.prosumers.begin(), config.prosumers.begin() + n);
      for (ProsumerSpec& spec : specs) spec.behavior = scenario.behavior;
      const Game game(specs, config.pricing);
      const std::vector<StationaryPolicy> uniform = uniform_profile(game);
      const std::vector<StationaryDistribution> distributions =
          stationary_profile(game, uniform);
      for (int i : config.payoff_vs_n.track) {
        if (i >= n) continue;
        EvalOptions options = config.learning.eval;
        options.seed = derive_seed(config.seed, "payoff_vs_n/" + scenario.name + "/" +
                                                    std::to_string(n) + "/" + std::to_string(i));
        const double value = prosumer_value(game, i, uniform, distributions, options);
        csv.write_row({scenario.name, CsvWriter::format(n), CsvWriter::format(i),
                       CsvWriter::format(value)});
      }
    }
  }
  result.outputs = {path};
  return result;
}

ExperimentResult run_learn_ne(const SimulationConfig& config) {
  const Game game = config.make_game();
  const LearnResult learn = run_algorithm1(game, config.learning);
  const int n = game.num_players();

  ExperimentResult result;
  const std::string trace_path = out_path(config, "learning_trace.csv");
  {
    std::vector<std::string> header{"period", "resampled"};
    for (int i = 0; i < n; ++i) header.push_back("v_hat_" + std::to_string(i));
    for (int i = 0; i < n; ++i) header.push_back("q_" + std::to_string(i));
    header.push_back("q_all");
    CsvWriter csv(trace_path, header);
    for (const PeriodRecord& record : learn.trace) {
      std::vector<std::string> row{CsvWriter::format(record.period),
                                   CsvWriter::format(record.resampled ? 1 : 0)};
      for (int i = 0; i < n; ++i) row.push_back(CsvWriter::format(record.outcome.v_hat[i]));
      for (int i = 0; i < n; ++i) row.push_back(CsvWriter::format(record.outcome.q_bits[i]));
      row.push_back(CsvWriter::format(record.outcome.q_all));
      csv.write_row(row);
    }
  }

  const std::string policy_path = out_path(config, "ne_policies.csv");
  {
    CsvWriter csv(policy_path,
                  {"prosumer", "state", "action", "consume", "demand", "probability"});
    for (int i = 0; i < n; ++i)
      write_policy_rows(csv, std::to_string(i), game, i, learn.final_policies[i]);
  }

  const std::string certificate_path = out_path(config, "certificate.csv");
  {
    EvalOptions options = config.learning.eval;
    options.seed = derive_seed(config.seed, "certificate");
    const NeCertificate certificate =
        certify_epsilon_ne(game, learn.final_policies, config.learning.epsilon, options);
    const std::vector<double> values = exact_value(game, learn.final_policies, options);
    CsvWriter csv(certificate_path,
                  {"prosumer", "value", "best_deviation_gain", "epsilon", "holds"});
    for (int i = 0; i < n; ++i)
      csv.write_row({CsvWriter::format(i), CsvWriter::format(values[i]),
                     CsvWriter::format(certificate.gaps[i]),
                     CsvWriter::format(config.learning.epsilon),
                     CsvWriter::format(certificate.holds ? 1 : 0)});
  }

  const std::string summary_path = out_path(config, "learning_summary.csv");
  {
    SummaryWriter summary(summary_path);
    write_learning_summary(summary, learn, config.learning);
  }
  result.outputs = {trace_path, policy_path, certificate_path, summary_path};
  return result;
}

ExperimentResult run_regret(const SimulationConfig& config) {
  const AllocationRun run = run_allocation_pipeline(config);
  const int k = run.allocator.num_substations();

  ExperimentResult result;
  const std::string regret_path = out_path(config, "regret.csv");
  {
    std::vector<std::string> header{"t"};
    for (int l = 0; l < k; ++l) header.push_back("demand_agg_" + std::to_string(l));
    for (int l = 0; l < k; ++l) header.push_back("allocation_" + std::to_string(l));
    header.insert(header.end(), {"cost", "cumulative_cost", "regret", "avg_regret"});
    CsvWriter csv(regret_path, header);

    PrefixRegret prefix(run.allocator);
    double cumulative = 0.0;
    for (int t = 0; t < run.ledger.rounds(); ++t) {
      prefix.add_round(run.ledger.demand_history[t]);
      cumulative += run.ledger.cost_history[t];
      const double r = cumulative - prefix.hindsight_cost();
      const Eigen::VectorXd agg = run.allocator.aggregate(run.ledger.demand_history[t]);
      std::vector<std::string> row{CsvWriter::format(t + 1)};
      for (int l = 0; l < k; ++l) row.push_back(CsvWriter::format(agg(l)));
      for (int l = 0; l < k; ++l)
        row.push_back(CsvWriter::format(run.ledger.allocation_history[t](l)));
      row.push_back(CsvWriter::format(run.ledger.cost_history[t]));
      row.push_back(CsvWriter::format(cumulative));
      row.push_back(CsvWriter::format(r));
      row.push_back(CsvWriter::format(r / static_cast<double>(t + 1)));
      csv.write_row(row);
    }
  }

  const std::string summary_path = out_path(config, "allocation_summary.csv");
  write_allocation_summary(summary_path, run, config.learning);
  result.outputs = {regret_path, summary_path};
  return result;
}

ExperimentResult run_allocation_trace(const SimulationConfig& config) {
  const AllocationRun run = run_allocation_pipeline(config);
  const int k = run.allocator.num_substations();

  ExperimentResult result;
  const std::string trace_path = out_path(config, "allocation_trace.csv");
  {
    CsvWriter csv(trace_path,
                  {"t", "substation", "demand_agg", "allocation", "hindsight_allocation"});
    for (int t = 0; t < run.ledger.rounds(); ++t) {
      const Eigen::VectorXd agg = run.allocator.aggregate(run.ledger.demand_history[t]);
      for (int l = 0; l < k; ++l)
        csv.write_row({CsvWriter::format(t + 1), CsvWriter::format(l), CsvWriter::format(agg(l)),
                       CsvWriter::format(run.ledger.allocation_history[t](l)),
                       CsvWriter::format(run.hindsight.allocation(l))});
    }
  }

  const std::string summary_path = out_path(config, "allocation_summary.csv");
  write_allocation_summary(summary_path, run, config.learning);
  result.outputs = {trace_path, summary_path};
  return result;
}

}  // namespace gridgame
