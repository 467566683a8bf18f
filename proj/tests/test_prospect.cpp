#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "gridgame/prospect.hpp"

using namespace gridgame;

// Reference values computed with a 40-digit arbitrary-precision evaluation of
// w(p) = exp(-(-ln p)^c) and v(x) = x^c1 / -c2 (-x)^c3.
namespace oracle {
constexpr double w_half_c08 = 0.474323717755861345;
constexpr double w_03_c06 = 0.3269934338779614649;
constexpr double w_0123456_c088 = 0.1474056168347565894;
constexpr double w_1e9_c065 = 0.0007670562534854355484;
constexpr double v_neg2_c2_3_c3_03 = -3.693433240034748853;
constexpr double ep_two_point = 0.1964713168497058047;     // (2,-1) each w.p. 1/2, c=0.8 set
constexpr double ep_three_point = 0.07397813998208153221;  // (0.7,-0.2,1.4) at (0.2,0.3,0.4)
constexpr double ep_split_atoms = 0.5458125747978741936;   // value 1 twice at p=0.25 each
}  // namespace oracle

TEST_CASE("weighting fixed points and reference values") {
  const ProspectParams pt = ProspectParams::pt(0.8, 0.5, 1.0, 0.3);
  CHECK(weight(0.0, pt) == 0.0);
  CHECK(weight(1.0, pt) == 1.0);
  CHECK(weight(0.5, pt) == doctest::Approx(oracle::w_half_c08).epsilon(1e-15));
  CHECK(weight(0.3, ProspectParams::pt(0.6, 0.5, 3.0, 0.3)) ==
        doctest::Approx(oracle::w_03_c06).epsilon(1e-15));
  CHECK(weight(0.123456, ProspectParams::pt(0.88, 1.0, 1.0, 1.0)) ==
        doctest::Approx(oracle::w_0123456_c088).epsilon(1e-15));
  CHECK(weight(1e-9, ProspectParams::pt(0.65, 1.0, 1.0, 1.0)) ==
        doctest::Approx(oracle::w_1e9_c065).epsilon(1e-15));
}

TEST_CASE("weighting tolerates floating-point slack at the endpoints") {
  const ProspectParams pt = ProspectParams::pt(0.8, 0.5, 1.0, 0.3);
  CHECK(weight(-1e-13, pt) == 0.0);
  CHECK(weight(1.0 + 1e-13, pt) == 1.0);
  CHECK_THROWS_AS(weight(-0.01, pt), std::domain_error);
  CHECK_THROWS_AS(weight(1.01, pt), std::domain_error);
}

TEST_CASE("value fixed points and reference values") {
  const ProspectParams pt = ProspectParams::pt(0.8, 0.5, 3.0, 0.3);
  CHECK(value(0.0, pt) == 0.0);
  CHECK(value(4.0, pt) == doctest::Approx(2.0).epsilon(1e-15));   // 4^0.5
  CHECK(value(2.25, ProspectParams::pt(0.8, 0.5, 1.0, 1.0)) == doctest::Approx(1.5));
  CHECK(value(-1.0, pt) == doctest::Approx(-3.0).epsilon(1e-15));  // -c2 * 1^c3
  CHECK(value(-2.0, pt) == doctest::Approx(oracle::v_neg2_c2_3_c3_03).epsilon(1e-15));
}

TEST_CASE("eut mode is the identity on both maps") {
  const ProspectParams eut = ProspectParams::eut();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> wide(-10.0, 10.0);
  for (int k = 0; k < 1000; ++k) {
    const double p = unit(rng);
    const double x = wide(rng);
    CHECK(weight(p, eut) == p);
    CHECK(value(x, eut) == x);
  }
}

TEST_CASE("pt with all parameters 1 matches eut on random lotteries") {
  const ProspectParams eut = ProspectParams::eut();
  const ProspectParams identity = ProspectParams::pt(1.0, 1.0, 1.0, 1.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> wide(-5.0, 5.0);
  for (int k = 0; k < 1000; ++k) {
    Lottery lottery;
    double remaining = 1.0;
    for (int j = 0; j < 4; ++j) {
      const double p = unit(rng) * remaining;
      remaining -= p;
      lottery.outcomes.push_back(wide(rng));
      lottery.probabilities.push_back(p);
    }
    const double a = expected_prospect(lottery, eut);
    const double b = expected_prospect(lottery, identity);
    CHECK(std::abs(a - b) <= 1e-12);
  }
}

TEST_CASE("expected prospect reference lotteries") {
  const ProspectParams c08 = ProspectParams::pt(0.8, 0.5, 1.0, 0.3);
  SUBCASE("two-outcome gain/loss pair cancels") {
    const Lottery lottery{{1.0, -1.0}, {0.5, 0.5}};
    CHECK(expected_prospect(lottery, c08) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("asymmetric pair") {
    const Lottery lottery{{2.0, -1.0}, {0.5, 0.5}};
    CHECK(expected_prospect(lottery, c08) ==
          doctest::Approx(oracle::ep_two_point).epsilon(1e-14));
  }
  SUBCASE("three outcomes, sub-unit mass") {
    const Lottery lottery{{0.7, -0.2, 1.4}, {0.2, 0.3, 0.4}};
    CHECK(expected_prospect(lottery, ProspectParams::pt(0.6, 0.5, 3.0, 0.3)) ==
          doctest::Approx(oracle::ep_three_point).epsilon(1e-14));
  }
}

TEST_CASE("equal-valued atoms are weighted separately, not merged") {
  // Subadditive weighting makes the split enumeration strictly larger, so the
  // enumeration granularity is part of the contract.
  const ProspectParams c08 = ProspectParams::pt(0.8, 0.5, 1.0, 0.3);
  const Lottery split{{1.0, 1.0}, {0.25, 0.25}};
  const Lottery merged{{1.0}, {0.5}};
  CHECK(expected_prospect(split, c08) ==
        doctest::Approx(oracle::ep_split_atoms).epsilon(1e-14));
  CHECK(expected_prospect(split, c08) > expected_prospect(merged, c08) + 0.05);
}

TEST_CASE("weighting is monotone and subadditive in pt mode") {
  const ProspectParams pt = ProspectParams::pt(0.7, 0.5, 1.0, 0.3);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(1e-12, 1.0);
  for (int k = 0; k < 1000; ++k) {
    double p = unit(rng);
    double q = unit(rng);
    if (p > q) std::swap(p, q);
    CHECK(weight(p, pt) <= weight(q, pt) + 1e-15);
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(ProspectParams::pt(0.0, 0.5, 1.0, 0.3).validate(), std::invalid_argument);
  CHECK_THROWS_AS(ProspectParams::pt(1.2, 0.5, 1.0, 0.3).validate(), std::invalid_argument);
  CHECK_THROWS_AS(ProspectParams::pt(0.8, 0.0, 1.0, 0.3).validate(), std::invalid_argument);
  CHECK_THROWS_AS(ProspectParams::pt(0.8, 0.5, 0.0, 0.3).validate(), std::invalid_argument);
  CHECK_THROWS_AS(ProspectParams::pt(0.8, 0.5, 1.0, 0.0).validate(), std::invalid_argument);
  CHECK_NOTHROW(ProspectParams::pt(1.0, 1.0, 5.0, 1.0).validate());
  CHECK_NOTHROW(ProspectParams::eut().validate());
}

TEST_CASE("lottery validation") {
  CHECK_THROWS_AS(Lottery({{1.0}, {-0.1}}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(Lottery({{1.0, 2.0}, {0.7, 0.7}}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(Lottery({{1.0, 2.0}, {0.5}}).validate(), std::invalid_argument);
  CHECK_NOTHROW(Lottery({{1.0, 2.0}, {0.25, 0.25}}).validate());
}
