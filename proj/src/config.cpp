#include "gridgame/config.hpp"

#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gridgame {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument("config: " + where + ": " + what);
}

// Typo guard: every object must only carry keys we know how to interpret.
void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known) fail(where, "unknown key \"" + item.key() + "\"");
  }
}

const json& require(const json& obj, const std::string& where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing required key \"") + key + "\"");
  return *it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

ProspectParams parse_behavior(const json& v, const std::string& where) {
  if (!v.is_object()) fail(where, "expected an object with a \"mode\" key");
  check_keys(v, where, {"mode", "c", "c1", "c2", "c3"});
  const std::string mode = as_string(require(v, where, "mode"), where + ".mode");
  if (mode == "eut") {
    if (v.size() != 1) fail(where, "eut mode takes no distortion parameters");
    return ProspectParams::eut();
  }
  if (mode != "pt") fail(where + ".mode", "expected \"eut\" or \"pt\", got \"" + mode + "\"");
  ProspectParams params = ProspectParams::pt(
      as_number(require(v, where, "c"), where + ".c"),
      as_number(require(v, where, "c1"), where + ".c1"),
      as_number(require(v, where, "c2"), where + ".c2"),
      as_number(require(v, where, "c3"), where + ".c3"));
  try {
    params.validate();
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
  return params;
}

Pmf parse_pmf(const json& v, const std::string& where) {
  if (!v.is_object() || v.empty()) fail(where, "expected a nonempty {\"offset\": mass} object");
  Pmf pmf;
  for (const auto& item : v.items()) {
    int offset = 0;
    try {
      std::size_t used = 0;
      offset = std::stoi(item.key(), &used);
      if (used != item.key().size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      fail(where, "key \"" + item.key() + "\" is not an integer offset");
    }
    pmf[offset] = as_number(item.value(), where + "[\"" + item.key() + "\"]");
  }
  try {
    validate_pmf(pmf);
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
  return pmf;
}

Pmf parse_generation(const json& v, const std::string& where) {
  if (!v.is_object()) fail(where, "expected {\"gaussian\": {...}} or {\"pmf\": {...}}");
  check_keys(v, where, {"gaussian", "pmf"});
  if (v.size() != 1) fail(where, "give exactly one of \"gaussian\" or \"pmf\"");
  if (v.contains("pmf")) return parse_pmf(v["pmf"], where + ".pmf");
  const json& g = v["gaussian"];
  const std::string gw = where + ".gaussian";
  if (!g.is_object()) fail(gw, "expected an object");
  check_keys(g, gw, {"mu", "sigma2", "support_bound"});
  const double mu = as_number(require(g, gw, "mu"), gw + ".mu");
  const double sigma2 = as_number(require(g, gw, "sigma2"), gw + ".sigma2");
  int support_bound = 10;
  if (g.contains("support_bound")) support_bound = as_int(g["support_bound"], gw + ".support_bound");
  if (!(sigma2 > 0.0)) fail(gw + ".sigma2", "variance must be positive");
  if (support_bound < 0) fail(gw + ".support_bound", "must be nonnegative");
  return discretize_gaussian(mu, sigma2, support_bound);
}

ProsumerSpec parse_prosumer(const json& v, const std::string& where) {
  if (!v.is_object()) fail(where, "expected an object");
  check_keys(v, where,
             {"s_max", "l_max", "d_max", "tau", "generation", "behavior", "satisfaction",
              "demand_mode"});
  ProsumerSpec spec;
  spec.s_max = as_int(require(v, where, "s_max"), where + ".s_max");
  spec.l_max = as_int(require(v, where, "l_max"), where + ".l_max");
  spec.tau = as_int(require(v, where, "tau"), where + ".tau");
  if (v.contains("d_max")) spec.d_max = as_int(v["d_max"], where + ".d_max");
  spec.gen_pmf = parse_generation(require(v, where, "generation"), where + ".generation");
  if (v.contains("behavior")) spec.behavior = parse_behavior(v["behavior"], where + ".behavior");
  if (v.contains("satisfaction")) {
    const std::string tag = as_string(v["satisfaction"], where + ".satisfaction");
    try {
      spec.satisfaction = Satisfaction::from_tag(tag);
    } catch (const std::exception& e) {
      fail(where + ".satisfaction", e.what());
    }
  }
  if (v.contains("demand_mode")) {
    const std::string mode = as_string(v["demand_mode"], where + ".demand_mode");
    if (mode == "threshold")
      spec.demand_mode = DemandMode::threshold;
    else if (mode == "free")
      spec.demand_mode = DemandMode::free_demand;
    else
      fail(where + ".demand_mode", "expected \"threshold\" or \"free\", got \"" + mode + "\"");
  }
  try {
    spec.validate();
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
  return spec;
}

void parse_learning(const json& v, const std::string& where, LearningConfig& out) {
  if (!v.is_object()) fail(where, "expected an object");
  check_keys(v, where,
             {"epsilon", "horizon", "max_periods", "estimation", "sampler", "burn_in",
              "initial_state", "post_convergence_periods", "eval"});
  if (v.contains("epsilon")) out.epsilon = as_number(v["epsilon"], where + ".epsilon");
  if (v.contains("horizon")) out.horizon = as_int(v["horizon"], where + ".horizon");
  if (v.contains("max_periods")) out.max_periods = as_int(v["max_periods"], where + ".max_periods");
  if (v.contains("estimation")) {
    const std::string mode = as_string(v["estimation"], where + ".estimation");
    if (mode == "exact_propagation")
      out.estimation = EstimationMode::exact_propagation;
    else if (mode == "trajectory_sampling")
      out.estimation = EstimationMode::trajectory_sampling;
    else
      fail(where + ".estimation",
           "expected \"exact_propagation\" or \"trajectory_sampling\", got \"" + mode + "\"");
  }
  if (v.contains("sampler")) {
    const std::string kind = as_string(v["sampler"], where + ".sampler");
    if (kind == "hit_and_run")
      out.sampler = SamplerKind::hit_and_run;
    else if (kind == "vertex_mixture")
      out.sampler = SamplerKind::vertex_mixture;
    else
      fail(where + ".sampler",
           "expected \"hit_and_run\" or \"vertex_mixture\", got \"" + kind + "\"");
  }
  if (v.contains("burn_in")) out.burn_in = as_int(v["burn_in"], where + ".burn_in");
  if (v.contains("initial_state"))
    out.initial_state = as_int(v["initial_state"], where + ".initial_state");
  if (v.contains("post_convergence_periods"))
    out.post_convergence_periods =
        as_int(v["post_convergence_periods"], where + ".post_convergence_periods");
  if (v.contains("eval")) {
    const json& e = v["eval"];
    const std::string ew = where + ".eval";
    if (!e.is_object()) fail(ew, "expected an object");
    check_keys(e, ew, {"mode", "samples", "exact_atom_cap"});
    if (e.contains("mode")) {
      const std::string mode = as_string(e["mode"], ew + ".mode");
      if (mode == "exact")
        out.eval.mode = EvalMode::exact;
      else if (mode == "monte_carlo")
        out.eval.mode = EvalMode::monte_carlo;
      else if (mode == "automatic")
        out.eval.mode = EvalMode::automatic;
      else
        fail(ew + ".mode", "expected \"exact\", \"monte_carlo\" or \"automatic\", got \"" + mode +
                               "\"");
    }
    if (e.contains("samples")) {
      out.eval.samples = e["samples"].is_number_integer() ? e["samples"].get<std::int64_t>() : -1;
      if (out.eval.samples <= 0) fail(ew + ".samples", "expected a positive integer");
    }
    if (e.contains("exact_atom_cap")) {
      if (!e["exact_atom_cap"].is_number_integer() || e["exact_atom_cap"].get<std::int64_t>() <= 0)
        fail(ew + ".exact_atom_cap", "expected a positive integer");
      out.eval.exact_atom_cap = e["exact_atom_cap"].get<std::uint64_t>();
    }
  }
}

void parse_allocator(const json& v, const std::string& where, AllocatorSection& out) {
  if (!v.is_object()) fail(where, "expected an object");
  check_keys(v, where, {"substations", "e_max", "beta", "gamma", "steps"});
  const json& subs = require(v, where, "substations");
  if (!subs.is_array() || subs.empty()) fail(where + ".substations", "expected a nonempty array");
  for (std::size_t l = 0; l < subs.size(); ++l) {
    const std::string sw = where + ".substations[" + std::to_string(l) + "]";
    if (!subs[l].is_array()) fail(sw, "expected an array of prosumer indices");
    std::vector<int> members;
    for (std::size_t j = 0; j < subs[l].size(); ++j)
      members.push_back(as_int(subs[l][j], sw + "[" + std::to_string(j) + "]"));
    out.config.substations.push_back(std::move(members));
  }
  out.config.e_max = as_number(require(v, where, "e_max"), where + ".e_max");
  out.config.beta = as_number(require(v, where, "beta"), where + ".beta");
  out.config.gamma = as_number(require(v, where, "gamma"), where + ".gamma");
  if (v.contains("steps")) {
    if (!v["steps"].is_number_integer() || v["steps"].get<long>() <= 0)
      fail(where + ".steps", "expected a positive integer");
    out.steps = v["steps"].get<long>();
  }
  out.present = true;
}

std::vector<BehaviorScenario> parse_scenarios(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where, "expected a nonempty array");
  std::vector<BehaviorScenario> scenarios;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string sw = where + "[" + std::to_string(k) + "]";
    if (!v[k].is_object()) fail(sw, "expected an object");
    check_keys(v[k], sw, {"name", "behavior"});
    BehaviorScenario s;
    s.name = as_string(require(v[k], sw, "name"), sw + ".name");
    if (s.name.empty()) fail(sw + ".name", "must not be empty");
    for (char ch : s.name)
      if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-')
        fail(sw + ".name", "only letters, digits, '_' and '-' are allowed (used in filenames)");
    s.behavior = parse_behavior(require(v[k], sw, "behavior"), sw + ".behavior");
    scenarios.push_back(std::move(s));
  }
  for (std::size_t a = 0; a < scenarios.size(); ++a)
    for (std::size_t b = a + 1; b < scenarios.size(); ++b)
      if (scenarios[a].name == scenarios[b].name)
        fail(where, "duplicate scenario name \"" + scenarios[a].name + "\"");
  return scenarios;
}

}  // namespace

void SimulationConfig::validate() const {
  if (prosumers.empty()) throw std::invalid_argument("config: prosumers: must not be empty");
  pricing.validate();
  for (std::size_t i = 0; i < prosumers.size(); ++i) {
    prosumers[i].validate();
    if (learning.initial_state > prosumers[i].s_max)
      throw std::invalid_argument(
          "config: learning.initial_state " + std::to_string(learning.initial_state) +
          " exceeds prosumers[" + std::to_string(i) + "].s_max " +
          std::to_string(prosumers[i].s_max));
    if (prosumers[i].lambda() <= 0.0)
      std::cerr << "warning: prosumers[" << i
                << "] has a zero mixing floor (generation pmf does not cover every offset in "
                   "[-s_max, s_max]); learning-horizon guarantees do not apply\n";
  }
  learning.validate();
  if (allocator.present) {
    allocator.config.validate(static_cast<int>(prosumers.size()));
    if (allocator.steps <= 0)
      throw std::invalid_argument("config: allocator.steps: must be positive");
  }
  const int n = static_cast<int>(prosumers.size());
  if (best_response.target < 0 || best_response.target >= n)
    throw std::invalid_argument("config: best_response.target " +
                                std::to_string(best_response.target) + " out of range [0, " +
                                std::to_string(n - 1) + "]");
  for (int i : payoff_vs_n.track)
    if (i < 0 || i >= n)
      throw std::invalid_argument("config: payoff_vs_n.track index " + std::to_string(i) +
                                  " out of range [0, " + std::to_string(n - 1) + "]");
}

SimulationConfig parse_config_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: " + origin + ": " + e.what());
  }
  if (!root.is_object()) fail(origin, "top level must be an object");
  check_keys(root, origin,
             {"experiment", "notes", "seed", "out_dir", "pricing", "prosumers", "learning",
              "allocator", "best_response", "payoff_vs_n"});

  SimulationConfig config;
  if (root.contains("experiment")) {
    config.experiment = as_string(root["experiment"], "experiment");
    static const char* known[] = {"best-response", "payoff-vs-n", "learn-ne", "regret",
                                  "allocation-trace"};
    bool ok = false;
    for (const char* name : known) ok = ok || config.experiment == name;
    if (!ok)
      fail("experiment", "unknown experiment \"" + config.experiment +
                             "\" (expected best-response, payoff-vs-n, learn-ne, regret or "
                             "allocation-trace)");
  }
  if (root.contains("seed")) {
    if (!root["seed"].is_number_integer() || root["seed"].get<std::int64_t>() < 0)
      fail("seed", "expected a nonnegative integer");
    config.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("out_dir")) config.out_dir = as_string(root["out_dir"], "out_dir");
  if (root.contains("pricing")) {
    const json& p = root["pricing"];
    if (!p.is_object()) fail("pricing", "expected an object");
    check_keys(p, "pricing", {"alpha"});
    if (p.contains("alpha")) config.pricing.alpha = as_number(p["alpha"], "pricing.alpha");
  }
  const json& prosumers = require(root, origin, "prosumers");
  if (!prosumers.is_array() || prosumers.empty())
    fail("prosumers", "expected a nonempty array");
  for (std::size_t i = 0; i < prosumers.size(); ++i)
    config.prosumers.push_back(
        parse_prosumer(prosumers[i], "prosumers[" + std::to_string(i) + "]"));
  if (root.contains("learning")) parse_learning(root["learning"], "learning", config.learning);
  config.learning.seed = config.seed;
  config.learning.eval.seed = config.seed;
  if (root.contains("allocator")) parse_allocator(root["allocator"], "allocator", config.allocator);
  config.allocator.config.alpha = config.pricing.alpha;  // pricing scale is shared

  // Scenario defaults mirror the reference instance: risk-neutral evaluation
  // against two distortion strengths.
  config.best_response.scenarios = {
      {"eut", ProspectParams::eut()},
      {"pt_c08", ProspectParams::pt(0.8, 0.5, 1.0, 0.3)},
      {"pt_c06", ProspectParams::pt(0.6, 0.5, 3.0, 0.3)},
  };
  if (root.contains("best_response")) {
    const json& b = root["best_response"];
    if (!b.is_object()) fail("best_response", "expected an object");
    check_keys(b, "best_response", {"target", "scenarios"});
    if (b.contains("target")) config.best_response.target = as_int(b["target"], "best_response.target");
    if (b.contains("scenarios"))
      config.best_response.scenarios = parse_scenarios(b["scenarios"], "best_response.scenarios");
  }
  config.payoff_vs_n.behaviors = {
      {"eut", ProspectParams::eut()},
      {"pt", ProspectParams::pt(0.8, 0.5, 1.0, 0.3)},
  };
  if (root.contains("payoff_vs_n")) {
    const json& p = root["payoff_vs_n"];
    if (!p.is_object()) fail("payoff_vs_n", "expected an object");
    check_keys(p, "payoff_vs_n", {"track", "behaviors"});
    if (p.contains("track")) {
      if (!p["track"].is_array() || p["track"].empty())
        fail("payoff_vs_n.track", "expected a nonempty array of prosumer indices");
      config.payoff_vs_n.track.clear();
      for (std::size_t i = 0; i < p["track"].size(); ++i)
        config.payoff_vs_n.track.push_back(
            as_int(p["track"][i], "payoff_vs_n.track[" + std::to_string(i) + "]"));
    }
    if (p.contains("behaviors"))
      config.payoff_vs_n.behaviors = parse_scenarios(p["behaviors"], "payoff_vs_n.behaviors");
  }
  return config;
}

SimulationConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  SimulationConfig config = parse_config_text(buffer.str(), path);
  config.validate();
  return config;
}

}  // namespace gridgame
