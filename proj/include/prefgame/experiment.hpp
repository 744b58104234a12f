#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "prefgame/cmdp.hpp"
#include "prefgame/game.hpp"
#include "prefgame/optimize.hpp"
#include "prefgame/stochastic.hpp"

namespace prefgame {

// 1/eta grid searched in the original large-scale experiments.
inline const std::vector<double> kDefaultInverseEtaGrid{0.1, 0.05, 0.02, 0.01, 0.005};

struct EtaSpec {
  enum class Kind { value, theorem, inverse_grid } kind = Kind::theorem;
  double value = 0.5;
  std::vector<double> inverse_grid;

  // The concrete settings a run loops over: {theorem} or the eta values.
  std::size_t count() const;
  std::string label(std::size_t index) const;
};

struct StochasticOptions {
  std::size_t pairs_per_iteration = 4096;
  DatasetMode mode;
  FitConfig fit;
};

// Algorithms: omd, onpo, nash_md, sppo, online_ipo, onpo_stochastic (need a game), and
// multi_turn_omd, multi_turn_onpo (need a CMDP).
struct ExperimentConfig {
  std::optional<GameGenSpec> game_spec;  // seed s of the run regenerates the game with seed s
  std::optional<std::filesystem::path> game_file;
  std::optional<std::filesystem::path> cmdp_file;
  std::optional<CmdpGenSpec> cmdp_spec;  // seed s of the run regenerates the CMDP with seed s
  std::vector<std::string> algorithms;
  std::vector<std::size_t> iterations;  // T list
  EtaSpec eta;
  std::optional<double> tau;
  std::optional<Policy> ref_policy;  // uniform when absent (nash_md, online_ipo)
  FitConfig inner_opt{FitMethod::gradient_descent};
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir = "out";
  StochasticOptions stochastic;
  bool parallel = true;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Relative paths inside the document resolve against `base_dir`.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

struct ExperimentReport {
  nlohmann::json summary;  // deterministic: no timestamps or wall times
  std::size_t runs = 0;
  std::size_t bound_checks = 0;
  std::size_t bound_violations = 0;
};

// Runs every (algorithm, T, eta, seed) combination, writes runs/*.json, runs/*.csv,
// games/*.json, summary.json and timings.json below output_dir. Everything except
// timings.json is byte-identical across repeated runs of the same config.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Same grid, but emits only the eta table (CSV text, also written to output_dir/sweep.csv).
std::string sweep_eta(const ExperimentConfig& config);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double tail_fraction = 0.5;
  std::size_t points_used = 0;
  std::size_t zero_gaps_excluded = 0;
};

// Least squares of log(gap) on log(T) over the last max(3, ceil(tail * m)) of the m
// positive-gap points. Throws std::invalid_argument with fewer than 3 usable points.
RateFit fit_rate(std::vector<std::pair<double, double>> curve, double tail_fraction = 0.5);

struct VerifyReport {
  std::size_t checked = 0;
  std::size_t bound_failures = 0;
  std::size_t mismatches = 0;
  std::vector<std::string> messages;
  bool ok() const { return bound_failures == 0 && mismatches == 0; }
};

// Re-derives every bound flag in output_dir/summary.json from the raw run logs and games.
VerifyReport verify_reports(const std::filesystem::path& output_dir);

}  // namespace prefgame
