#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prefgame/game.hpp"
#include "prefgame/optimize.hpp"
#include "prefgame/rng.hpp"
#include "prefgame/run_log.hpp"

namespace prefgame {

struct PreferencePair {
  std::size_t winner = 0;
  std::size_t loser = 0;
  friend bool operator==(const PreferencePair&, const PreferencePair&) = default;
};

struct DatasetMode {
  enum class Kind { pair, tournament } kind = Kind::pair;
  std::size_t tournament_size = 8;  // K, a power of two

  static DatasetMode pairs() { return {}; }
  static DatasetMode tournament(std::size_t k) { return {Kind::tournament, k}; }
  std::string name() const;
  friend bool operator==(const DatasetMode&, const DatasetMode&) = default;
};

struct PreferenceDataset {
  std::vector<PreferencePair> pairs;
  std::string source_policy_id;
  std::uint64_t seed = 0;
  DatasetMode mode;
  friend bool operator==(const PreferenceDataset&, const PreferenceDataset&) = default;
};

// Logits gauge-fixed to sum to zero.
class LogitPolicy {
 public:
  explicit LogitPolicy(std::vector<double> logits);
  static LogitPolicy from_policy(const Policy& policy);

  std::span<const double> logits() const { return logits_; }
  std::size_t size() const { return logits_.size(); }
  Policy to_policy() const;

 private:
  std::vector<double> logits_;
};

// One Bernoulli draw: true with probability p[i][j].
bool oracle_prefers(const PreferenceGame& game, std::size_t i, std::size_t j, CounterRng& rng);

// (i, j) with probability p[i][j], else (j, i). Consumes exactly one draw.
PreferencePair oracle_label(const PreferenceGame& game, std::size_t i, std::size_t j, CounterRng& rng);

// Inverse-CDF draw from a policy; one uniform per call.
std::size_t sample_response(const Policy& policy, CounterRng& rng);

// Pair mode: per datum two responses then one label. Tournament mode: K responses, a
// single-elimination bracket advancing winners, then the same bracket shape advancing
// losers (K-1 fresh oracle calls each).
PreferenceDataset build_dataset(const PreferenceGame& game, const Policy& policy, std::size_t count,
                                DatasetMode mode, CounterRng& rng, std::string source_policy_id = "");

struct PairLoss {
  double loss = 0.0;
  std::vector<double> gradient;
};

// mean over pairs of (g - eta/2)^2 with g = log(pi(w)/pi(l)) - log(anchor(w)/anchor(l)).
PairLoss pair_loss(const LogitPolicy& candidate, const Policy& anchor, const PreferenceDataset& dataset, double eta);

struct FitResult {
  Policy policy;
  double loss = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
};

// argmin of pair_loss; the minimum-norm correction from the anchor is taken along
// directions the dataset does not constrain.
FitResult fit_policy(const Policy& anchor, const PreferenceDataset& dataset, double eta, const FitConfig& fit);

struct StochasticConfig {
  Policy start;
  std::size_t iterations = 1;  // T
  double eta = 1.0;
  std::size_t pairs_per_iteration = 1024;
  DatasetMode mode;
  FitConfig fit;
  std::uint64_t seed = 0;
};

// Algorithm loop: sample from pi_t, label, fit pi'_{t+1} against anchor pi'_t, then
// pi_{t+1} against anchor pi'_{t+1}. Duality gaps use the true matrix.
RunLog onpo_stochastic_run(const PreferenceGame& game, const StochasticConfig& config);

// Mean of M oracle outcomes of response i against opponents drawn from `policy`.
double estimate_win_rate(const PreferenceGame& game, std::size_t i, const Policy& policy, std::size_t queries,
                         CounterRng& rng);

}  // namespace prefgame
