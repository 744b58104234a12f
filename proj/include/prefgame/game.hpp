#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace prefgame {

// Validation tolerance for probability identities (p + p^T = 1, sum of a policy = 1).
inline constexpr double kProbTolerance = 1e-12;
// Smallest entry an interior policy may carry.
inline constexpr double kInteriorFloor = 1e-300;

// A distribution over the n responses of a game.
class Policy {
 public:
  Policy() = default;
  // Throws std::invalid_argument unless probs is a distribution (nonnegative, sums to 1).
  explicit Policy(std::vector<double> probs);

  static Policy uniform(std::size_t n);
  static Policy point_mass(std::size_t n, std::size_t index);
  // Normalizes nonnegative weights; throws if all are zero.
  static Policy from_weights(std::vector<double> weights);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  const std::vector<double>& vec() const { return probs_; }

  bool is_interior() const;

  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  std::vector<double> probs_;
};

// r(y) = P(y > opponent). Only win_rate_vector produces these; the zero vector is the
// optimistic predictor at the first iteration.
struct RewardVector {
  std::vector<double> values;

  static RewardVector zeros(std::size_t n) { return {std::vector<double>(n, 0.0)}; }
  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

// Skew-complementary win-probability matrix, p(i, j) = P(y_i > y_j).
class PreferenceGame {
 public:
  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return p_[i * n_ + j]; }
  std::vector<std::vector<double>> rows() const;
  // Stable 64-bit FNV-1a hash of the matrix bits, used to tie run logs to their game.
  std::uint64_t fingerprint() const;

  friend bool operator==(const PreferenceGame&, const PreferenceGame&) = default;

 private:
  friend PreferenceGame validate_game(const std::vector<std::vector<double>>& matrix);
  PreferenceGame(std::size_t n, std::vector<double> p) : n_(n), p_(std::move(p)) {}

  std::size_t n_ = 0;
  std::vector<double> p_;
};

// Throws std::invalid_argument naming the first offending cell (row-major scan).
PreferenceGame validate_game(const std::vector<std::vector<double>>& matrix);

RewardVector win_rate_vector(const PreferenceGame& game, const Policy& opponent);

// J(max, min) = max^T p min.
double game_value(const PreferenceGame& game, const Policy& max_player, const Policy& min_player);

struct GapTerms {
  double best_response_value;   // max_i J(e_i, pi)
  double worst_response_value;  // min_j J(pi, e_j)
  double term_a() const { return best_response_value - 0.5; }
  double term_b() const { return 0.5 - worst_response_value; }
  double gap() const { return best_response_value - worst_response_value; }
};

// Both best responses against `policy`, each evaluated on its own side of the matrix.
GapTerms duality_gap_terms(const PreferenceGame& game, const Policy& policy);

// max_pi1 J(pi1, policy) - min_pi2 J(policy, pi2); clamped at zero against rounding.
double duality_gap(const PreferenceGame& game, const Policy& policy);

// KL(p || q) with 0 log 0 = 0. Throws std::domain_error if p_i > 0 where q_i = 0.
double kl_divergence(const Policy& p, const Policy& q);

// Total variation distance 0.5 * ||p - q||_1.
double total_variation(const Policy& p, const Policy& q);
double l1_distance(std::span<const double> a, std::span<const double> b);

enum class GameKind { random_skew, bradley_terry, cycle };

std::string to_string(GameKind kind);
GameKind game_kind_from_string(const std::string& name);

struct GameGenSpec {
  GameKind kind = GameKind::random_skew;
  std::size_t n = 3;
  std::uint64_t seed = 0;
  std::vector<double> rewards;  // bradley_terry: one reward per response
  double margin = 0.5;          // cycle: p[i][i+1 mod n] = 0.5 + margin

  friend bool operator==(const GameGenSpec&, const GameGenSpec&) = default;
};

// Deterministic per seed. Throws std::invalid_argument on bad parameters.
PreferenceGame make_game(const GameGenSpec& spec);

}  // namespace prefgame
