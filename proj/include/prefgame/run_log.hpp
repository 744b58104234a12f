#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prefgame/game.hpp"
#include "prefgame/optimize.hpp"

namespace prefgame {

enum class Algorithm { omd, onpo, nash_md, sppo, online_ipo };

std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

struct SolverConfig {
  Algorithm algorithm = Algorithm::onpo;
  std::size_t iterations = 1;  // T
  bool theorem_eta = false;    // omd: sqrt(D/T), onpo: min(1/2, sqrt(D))
  double eta = 0.5;
  std::optional<double> tau;  // nash_md, online_ipo
  std::optional<Policy> ref_policy;
  std::optional<Policy> initial_policy;  // uniform when absent
  FitConfig inner_opt{FitMethod::gradient_descent};

  // Throws std::invalid_argument naming the offending field.
  void validate(std::size_t n) const;
  Policy start(std::size_t n) const;
  // The constant step size used by the run.
  double resolved_eta(std::size_t n) const;
};

struct IterationRecord {
  std::size_t t = 0;
  Policy policy;                         // pi_t
  std::optional<Policy> aux;             // pi'_t (onpo, nash_md, stochastic onpo)
  RewardVector reward;                   // r_t
  std::optional<RewardVector> predictor; // m_t (onpo)
  double gap_last = 0.0;                 // DualGap(pi_t)
  double gap_avg = 0.0;                  // DualGap(mean of pi_1..pi_t)
  double l1_step = 0.0;                  // ||pi_t - pi_{t-1}||_1, 0 at t = 1
  double eta = 0.0;
  bool fit_converged = true;
  double fit_gradient_norm = 0.0;
};

struct RunLog {
  std::string label;  // algorithm name, or e.g. "onpo_stochastic"
  SolverConfig config;
  std::size_t n = 0;
  std::uint64_t game_fingerprint = 0;
  std::vector<IterationRecord> records;
  Policy average;  // mean of logged pi_t
  double wall_time_seconds = 0.0;

  const Policy& output_policy() const { return records.back().policy; }
  std::size_t nonconverged_fits() const;
};

// Accumulates records while a run progresses; maintains the running mean.
class RunRecorder {
 public:
  RunRecorder(const PreferenceGame& game, std::string label, SolverConfig config);

  IterationRecord& add(Policy policy, RewardVector reward, double eta, std::optional<Policy> aux = std::nullopt,
                       std::optional<RewardVector> predictor = std::nullopt);
  RunLog finish();

 private:
  const PreferenceGame& game_;
  RunLog log_;
  std::vector<double> sum_;
  double start_time_;
};

// Arithmetic mean of pi_1..pi_T.
Policy average_policy(const RunLog& log);

// sum_t <comparator - pi_t, r_t> over the logged rewards. Throws if the log came from another game.
double regret_against(const RunLog& log, const PreferenceGame& game, const Policy& comparator);

// max over vertex comparators of the regret above.
double max_vertex_regret(const RunLog& log, const PreferenceGame& game);

}  // namespace prefgame
