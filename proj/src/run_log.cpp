#include "prefgame/run_log.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <stdexcept>

#include "prefgame/mirror.hpp"

namespace prefgame {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::omd:
      return "omd";
    case Algorithm::onpo:
      return "onpo";
    case Algorithm::nash_md:
      return "nash_md";
    case Algorithm::sppo:
      return "sppo";
    case Algorithm::online_ipo:
      return "online_ipo";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "omd") return Algorithm::omd;
  if (name == "onpo") return Algorithm::onpo;
  if (name == "nash_md") return Algorithm::nash_md;
  if (name == "sppo") return Algorithm::sppo;
  if (name == "online_ipo") return Algorithm::online_ipo;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

void SolverConfig::validate(std::size_t n) const {
  const bool regularized = algorithm == Algorithm::nash_md || algorithm == Algorithm::online_ipo;
  if (iterations == 0) throw std::invalid_argument("config.T must be >= 1");
  if (theorem_eta && algorithm != Algorithm::omd && algorithm != Algorithm::onpo)
    throw std::invalid_argument("config.eta = \"theorem\" is only defined for omd and onpo");
  if (!theorem_eta && !(eta > 0.0)) throw std::invalid_argument("config.eta must be positive");
  if (regularized && !tau) throw std::invalid_argument("config.tau is required for " + to_string(algorithm));
  if (!regularized && tau) throw std::invalid_argument("config.tau is only used by nash_md and online_ipo");
  if (tau && !(*tau > 0.0)) throw std::invalid_argument("config.tau must be positive");
  if (regularized) {
    if (!ref_policy) throw std::invalid_argument("config.ref_policy is required for " + to_string(algorithm));
    if (ref_policy->size() != n) throw std::invalid_argument("config.ref_policy has the wrong size");
    if (!ref_policy->is_interior()) throw std::invalid_argument("config.ref_policy must be interior");
  }
  if (algorithm == Algorithm::nash_md && eta * *tau > 1.0)
    throw std::invalid_argument("config: nash_md requires eta * tau <= 1");
  if (initial_policy) {
    if (initial_policy->size() != n) throw std::invalid_argument("config.initial_policy has the wrong size");
    if (!initial_policy->is_interior()) throw std::invalid_argument("config.initial_policy must be interior");
  }
  inner_opt.validate();
}

Policy SolverConfig::start(std::size_t n) const { return initial_policy ? *initial_policy : Policy::uniform(n); }

double SolverConfig::resolved_eta(std::size_t n) const {
  if (!theorem_eta) return eta;
  const double radius = kl_radius(start(n));
  return algorithm == Algorithm::omd ? omd_theorem_eta(radius, iterations) : onpo_theorem_eta(radius);
}

std::size_t RunLog::nonconverged_fits() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const IterationRecord& r) { return !r.fit_converged; }));
}

RunRecorder::RunRecorder(const PreferenceGame& game, std::string label, SolverConfig config)
    : game_(game), sum_(game.size(), 0.0), start_time_(now_seconds()) {
  log_.label = std::move(label);
  log_.config = std::move(config);
  log_.n = game.size();
  log_.game_fingerprint = game.fingerprint();
  log_.records.reserve(log_.config.iterations);
}

IterationRecord& RunRecorder::add(Policy policy, RewardVector reward, double eta, std::optional<Policy> aux,
                                  std::optional<RewardVector> predictor) {
  IterationRecord rec;
  rec.t = log_.records.size() + 1;
  rec.l1_step = log_.records.empty() ? 0.0 : l1_distance(policy.probs(), log_.records.back().policy.probs());
  rec.gap_last = duality_gap(game_, policy);
  for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += policy[i];
  std::vector<double> mean(sum_);
  for (double& v : mean) v /= static_cast<double>(rec.t);
  rec.gap_avg = duality_gap(game_, Policy::from_weights(std::move(mean)));
  rec.policy = std::move(policy);
  rec.reward = std::move(reward);
  rec.eta = eta;
  rec.aux = std::move(aux);
  rec.predictor = std::move(predictor);
  log_.records.push_back(std::move(rec));
  return log_.records.back();
}

RunLog RunRecorder::finish() {
  if (log_.records.empty()) throw std::logic_error("run produced no iterations");
  log_.average = average_policy(log_);
  log_.wall_time_seconds = now_seconds() - start_time_;
  return std::move(log_);
}

Policy average_policy(const RunLog& log) {
  if (log.records.empty()) throw std::invalid_argument("average_policy: empty log");
  std::vector<double> mean(log.records.front().policy.size(), 0.0);
  for (const auto& rec : log.records)
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += rec.policy[i];
  for (double& v : mean) v /= static_cast<double>(log.records.size());
  return Policy::from_weights(std::move(mean));
}

double regret_against(const RunLog& log, const PreferenceGame& game, const Policy& comparator) {
  if (log.game_fingerprint != game.fingerprint() || log.n != game.size()) {
    std::ostringstream msg;
    msg << "regret_against: log was produced on a different game (fingerprint " << log.game_fingerprint << " vs "
        << game.fingerprint() << ")";
    throw std::invalid_argument(msg.str());
  }
  if (comparator.size() != game.size()) throw std::invalid_argument("regret_against: comparator size mismatch");
  double regret = 0.0;
  for (const auto& rec : log.records)
    for (std::size_t i = 0; i < comparator.size(); ++i) regret += (comparator[i] - rec.policy[i]) * rec.reward[i];
  return regret;
}

double max_vertex_regret(const RunLog& log, const PreferenceGame& game) {
  double best = -1e300;
  for (std::size_t i = 0; i < game.size(); ++i)
    best = std::max(best, regret_against(log, game, Policy::point_mass(game.size(), i)));
  return best;
}

}  // namespace prefgame
