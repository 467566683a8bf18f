#include "gridgame/prospect.hpp"

#include <cmath>
#include <stdexcept>

namespace gridgame {

namespace {
constexpr double kProbSlack = 1e-12;  // tolerated floating-point overshoot
}

ProspectParams ProspectParams::eut() { return ProspectParams{}; }

ProspectParams ProspectParams::pt(double c, double c1, double c2, double c3) {
  ProspectParams p;
  p.mode = BehaviorMode::pt;
  p.c = c;
  p.c1 = c1;
  p.c2 = c2;
  p.c3 = c3;
  p.validate();
  return p;
}

void ProspectParams::validate() const {
  if (mode == BehaviorMode::eut) return;
  if (!(c > 0.0 && c <= 1.0))
    throw std::invalid_argument("prospect weighting exponent c must lie in (0, 1]");
  if (!(c1 > 0.0 && c1 <= 1.0))
    throw std::invalid_argument("gain curvature c1 must lie in (0, 1]");
  if (!(c2 > 0.0)) throw std::invalid_argument("loss aversion scale c2 must be positive");
  if (!(c3 > 0.0 && c3 <= 1.0))
    throw std::invalid_argument("loss curvature c3 must lie in (0, 1]");
}

double weight(double p, const ProspectParams& params) {
  if (p < -kProbSlack || p > 1.0 + kProbSlack)
    throw std::domain_error("weight: probability outside [0, 1]");
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  if (params.mode == BehaviorMode::eut) return p;
  return std::exp(-std::pow(-std::log(p), params.c));
}

double value(double x, const ProspectParams& params) {
  if (params.mode == BehaviorMode::eut) return x;
  if (x >= 0.0) return std::pow(x, params.c1);
  return -params.c2 * std::pow(-x, params.c3);
}

void Lottery::validate() const {
  if (outcomes.size() != probabilities.size())
    throw std::invalid_argument("lottery: outcomes and probabilities differ in length");
  double total = 0.0;
  for (double p : probabilities) {
    if (p < 0.0) throw std::invalid_argument("lottery: negative probability");
    total += p;
  }
  if (total > 1.0 + kProbSlack)
    throw std::invalid_argument("lottery: probabilities sum to more than 1");
}

double expected_prospect(const Lottery& lottery, const ProspectParams& params) {
  lottery.validate();
  double total = 0.0;
  for (std::size_t i = 0; i < lottery.outcomes.size(); ++i)
    total += weight(lottery.probabilities[i], params) * value(lottery.outcomes[i], params);
  return total;
}

}  // namespace gridgame
