#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "prefgame/game.hpp"
#include "prefgame/serialization.hpp"
#include "test_support.hpp"

using namespace prefgame;
using namespace prefgame::testing;

TEST(ValidateGame, AcceptsSkewComplementaryMatrix) {
  const auto g = two_by_two();
  EXPECT_EQ(g.size(), 2u);
  EXPECT_DOUBLE_EQ(g(0, 1), 0.8);
  EXPECT_DOUBLE_EQ(g(1, 0), 0.2);
}

TEST(ValidateGame, NamesComplementViolation) {
  try {
    validate_game({{0.5, 0.8}, {0.3, 0.5}});
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("p[0][1]+p[1][0]"), std::string::npos) << e.what();
  }
}

TEST(ValidateGame, NamesDiagonalViolation) {
  try {
    validate_game({{0.4, 0.8}, {0.2, 0.5}});
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("diagonal p[0][0]"), std::string::npos) << e.what();
  }
}

TEST(ValidateGame, RejectsOutOfRangeAndBadShapes) {
  EXPECT_THROW(validate_game({{0.5, 1.2}, {-0.2, 0.5}}), std::invalid_argument);
  EXPECT_THROW(validate_game({{0.5}}), std::invalid_argument);
  EXPECT_THROW(validate_game({{0.5, 0.5}, {0.5}}), std::invalid_argument);
  EXPECT_THROW(validate_game({{0.5, NAN}, {0.5, 0.5}}), std::invalid_argument);
}

TEST(Policy, ValidatesDistribution) {
  EXPECT_THROW(Policy({0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(Policy({-0.1, 1.1}), std::invalid_argument);
  EXPECT_THROW(Policy(std::vector<double>{}), std::invalid_argument);
  EXPECT_TRUE(Policy::uniform(4).is_interior());
  EXPECT_FALSE(Policy::point_mass(3, 1).is_interior());
  EXPECT_THROW(Policy::from_weights({0.0, 0.0}), std::invalid_argument);
}

TEST(WinRate, MatrixVectorProduct) {
  const auto g = two_by_two();
  const auto r = win_rate_vector(g, Policy::uniform(2));
  EXPECT_NEAR(r[0], 0.65, 1e-15);
  EXPECT_NEAR(r[1], 0.35, 1e-15);
  const auto r2 = win_rate_vector(g, Policy::point_mass(2, 1));
  EXPECT_DOUBLE_EQ(r2[0], 0.8);
  EXPECT_DOUBLE_EQ(r2[1], 0.5);
  const auto rps = win_rate_vector(rock_paper_scissors(), Policy::uniform(3));
  for (double v : rps.values) EXPECT_NEAR(v, 0.5, 1e-15);
  EXPECT_THROW(win_rate_vector(g, Policy::uniform(3)), std::invalid_argument);
}

TEST(WinRate, LinearInOpponent) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const auto g = random_game(n, gen);
    const auto mu = random_policy(n, gen), nu = random_policy(n, gen);
    const double a = std::uniform_real_distribution<double>(0, 1)(gen);
    std::vector<double> mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = a * mu[i] + (1 - a) * nu[i];
    const auto rm = win_rate_vector(g, Policy::from_weights(mix));
    const auto r1 = win_rate_vector(g, mu), r2 = win_rate_vector(g, nu);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(rm[i], a * r1[i] + (1 - a) * r2[i], 1e-12);
  }
}

TEST(WinRate, StabilityInequality) {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + trial % 9;
    const auto g = random_game(n, gen);
    const auto mu = random_policy(n, gen), nu = random_policy(n, gen);
    const auto rm = win_rate_vector(g, mu), rn = win_rate_vector(g, nu);
    const double l1 = l1_distance(mu.probs(), nu.probs());
    for (std::size_t i = 0; i < n; ++i) EXPECT_LE(std::abs(rm[i] - rn[i]), l1 + 1e-12);
  }
}

TEST(GameValue, Examples) {
  const auto g = two_by_two();
  EXPECT_DOUBLE_EQ(game_value(g, Policy::point_mass(2, 0), Policy::point_mass(2, 1)), 0.8);
  EXPECT_NEAR(game_value(g, Policy::uniform(2), Policy::point_mass(2, 1)), 0.65, 1e-15);
}

TEST(GameValue, SkewSymmetryOnRandomPairs) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 10;
    const auto g = random_game(n, gen);
    const auto a = random_policy(n, gen), b = random_policy(n, gen);
    EXPECT_NEAR(game_value(g, a, a), 0.5, 1e-12);
    EXPECT_NEAR(game_value(g, a, b) + game_value(g, b, a), 1.0, 1e-12);
  }
}

TEST(DualityGap, Examples) {
  EXPECT_NEAR(duality_gap(rock_paper_scissors(), Policy::uniform(3)), 0.0, 1e-15);
  EXPECT_NEAR(duality_gap(two_by_two(), Policy::point_mass(2, 0)), 0.0, 1e-15);
  EXPECT_NEAR(duality_gap(two_by_two(), Policy::point_mass(2, 1)), 0.6, 1e-15);
}

TEST(DualityGap, TwoMaxWinRateMinusOneAndVertexBruteForce) {
  std::mt19937_64 gen(14);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + trial % 5;  // n <= 6
    const auto g = random_game(n, gen);
    const auto pi = random_policy(n, gen);
    const auto r = win_rate_vector(g, pi);
    const double max_r = *std::max_element(r.values.begin(), r.values.end());
    double best = -1.0, worst = 2.0;
    for (std::size_t k = 0; k < n; ++k) {
      best = std::max(best, game_value(g, Policy::point_mass(n, k), pi));
      worst = std::min(worst, game_value(g, pi, Policy::point_mass(n, k)));
    }
    const double gap = duality_gap(g, pi);
    EXPECT_GE(gap, 0.0);
    EXPECT_NEAR(gap, 2.0 * max_r - 1.0, 1e-10);
    EXPECT_NEAR(gap, best - worst, 1e-10);
    const auto terms = duality_gap_terms(g, pi);
    EXPECT_GE(terms.term_a(), -1e-12);
    EXPECT_GE(terms.term_b(), -1e-12);
    EXPECT_NEAR(terms.term_a() + terms.term_b(), gap, 1e-12);
  }
}

TEST(DualityGap, RandomPoliciesNeverBeatVertices) {
  std::mt19937_64 gen(15);
  const auto g = random_game(4, gen);
  const auto pi = random_policy(4, gen);
  const double gap = duality_gap(g, pi);
  for (int k = 0; k < 2000; ++k) {
    const auto a = random_policy(4, gen), b = random_policy(4, gen);
    EXPECT_LE(game_value(g, a, pi) - game_value(g, pi, b), gap + 1e-12);
  }
}

TEST(KlDivergence, Examples) {
  EXPECT_DOUBLE_EQ(kl_divergence(Policy::uniform(4), Policy::uniform(4)), 0.0);
  for (std::size_t n : {2u, 3u, 7u}) EXPECT_NEAR(kl_divergence(Policy::point_mass(n, 0), Policy::uniform(n)), std::log(n), 1e-14);
  EXPECT_NEAR(kl_divergence(Policy({0.7, 0.3}), Policy({0.3, 0.7})), 0.7 * std::log(7.0 / 3.0) + 0.3 * std::log(3.0 / 7.0),
              1e-15);
  EXPECT_THROW(kl_divergence(Policy::uniform(2), Policy::point_mass(2, 0)), std::domain_error);
}

TEST(KlDivergence, NonNegativeOnRandomPairs) {
  std::mt19937_64 gen(16);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_policy(5, gen), q = random_policy(5, gen);
    EXPECT_GE(kl_divergence(p, q), 0.0);
    EXPECT_NEAR(kl_divergence(p, p), 0.0, 1e-15);
  }
}

TEST(TotalVariation, HalfL1) {
  EXPECT_DOUBLE_EQ(total_variation(Policy({1.0, 0.0}), Policy({0.0, 1.0})), 1.0);
  EXPECT_NEAR(total_variation(Policy({0.7, 0.3}), Policy({0.5, 0.5})), 0.2, 1e-15);
}

TEST(MakeGame, BradleyTerryEqualRewardsIsAllHalf) {
  const auto g = make_game({GameKind::bradley_terry, 3, 0, {0.0, 0.0, 0.0}});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(g(i, j), 0.5);
}

TEST(MakeGame, BradleyTerryIsLogistic) {
  const std::vector<double> r{0.3, -1.0, 2.0, 0.0};
  const auto g = make_game({GameKind::bradley_terry, 4, 0, r});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(g(i, j), 1.0 / (1.0 + std::exp(r[j] - r[i])), 1e-15);
  EXPECT_THROW(make_game({GameKind::bradley_terry, 3, 0, {0.0, 1.0}}), std::invalid_argument);
}

TEST(MakeGame, CycleThreeIsRockPaperScissors) {
  GameGenSpec spec{GameKind::cycle, 3, 0, {}, 0.5};
  EXPECT_EQ(make_game(spec), rock_paper_scissors());
  spec.margin = 0.0;
  EXPECT_THROW(make_game(spec), std::invalid_argument);
  spec.margin = 0.6;
  EXPECT_THROW(make_game(spec), std::invalid_argument);
}

TEST(MakeGame, CycleOffCycleEntriesAreTies) {
  const auto g = make_game({GameKind::cycle, 5, 0, {}, 0.3});
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_DOUBLE_EQ(g(i, (i + 1) % 5), 0.8);
    EXPECT_DOUBLE_EQ(g(i, (i + 2) % 5), 0.5);
  }
}

TEST(MakeGame, RandomSkewDeterministicPerSeed) {
  const GameGenSpec spec{GameKind::random_skew, 5, 7, {}};
  EXPECT_EQ(make_game(spec), make_game(spec));
  EXPECT_EQ(make_game(spec).fingerprint(), make_game(spec).fingerprint());
  auto other = spec;
  other.seed = 8;
  EXPECT_NE(make_game(spec), make_game(other));
  EXPECT_THROW(make_game({GameKind::random_skew, 1, 0, {}}), std::invalid_argument);
}

TEST(MakeGame, RandomSkewUpperTriangleLooksUniform) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto g = make_game({GameKind::random_skew, 8, seed, {}});
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = i + 1; j < 8; ++j) sum += g(i, j), ++count;
  }
  const double mean = sum / static_cast<double>(count);
  EXPECT_NEAR(mean, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / static_cast<double>(count)));
}

TEST(GameJson, RoundTrip) {
  const auto g = make_game({GameKind::random_skew, 6, 3, {}});
  EXPECT_EQ(game_from_json(game_to_json(g)), g);
  const auto j = nlohmann::json::parse(R"({"n": 3, "p": [[0.5, 0.5], [0.5, 0.5]]})");
  EXPECT_THROW(game_from_json(j), std::invalid_argument);
  const GameGenSpec spec{GameKind::bradley_terry, 2, 9, {1.0, 2.0}};
  EXPECT_EQ(gen_spec_from_json(gen_spec_to_json(spec)), spec);
}
