#pragma once

#include <string>
#include <vector>

namespace gridgame {

enum class BehaviorMode { eut, pt };

/**
 * Probability-weighting and value-distortion parameters for one agent.
 *
 * In `eut` mode both maps are the identity, so expected prospects reduce to
 * plain expectations.  In `pt` mode the weighting is the Prelec one-parameter
 * curve and the value map is the two-piece power curve:
 *
 *   w(p) = exp(-(-ln p)^c)                        0 < c <= 1
 *   v(x) = x^c1          for x >= 0               0 < c1 <= 1
 *   v(x) = -c2 (-x)^c3   for x < 0                c2 > 0, 0 < c3 <= 1
 *
 * w(0) is taken to be 0 (the continuity limit), w(1) is 1.
 */
struct ProspectParams {
  BehaviorMode mode = BehaviorMode::eut;
  double c = 1.0;   // weighting curvature
  double c1 = 1.0;  // gain curvature
  double c2 = 1.0;  // loss aversion scale
  double c3 = 1.0;  // loss curvature

  static ProspectParams eut();
  static ProspectParams pt(double c, double c1, double c2, double c3);

  // Throws std::invalid_argument when a parameter leaves its admissible range.
  void validate() const;
};

// Distorted probability of a single outcome.  Throws std::domain_error when p
// is outside [0, 1] beyond floating-point slack.
double weight(double p, const ProspectParams& params);

// Distorted outcome value (gains and losses treated asymmetrically in pt mode).
double value(double x, const ProspectParams& params);

/**
 * A finite lottery: outcome values with their probabilities.  Probabilities
 * must be nonnegative and sum to at most 1; sub-lotteries are allowed because
 * callers may split an outcome distribution across several partial sums.
 */
struct Lottery {
  std::vector<double> outcomes;
  std::vector<double> probabilities;

  void validate() const;
};

// Sum of weight(p) * value(x) over the lottery's outcomes.  Each outcome atom
// is weighted on its own: atoms with equal values are deliberately not merged
// before weighting, so the result depends on how the lottery is enumerated.
double expected_prospect(const Lottery& lottery, const ProspectParams& params);

}  // namespace gridgame
