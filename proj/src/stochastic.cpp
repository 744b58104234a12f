#include "prefgame/stochastic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "prefgame/solvers.hpp"

namespace prefgame {

std::string DatasetMode::name() const {
  return kind == Kind::pair ? "pair" : "tournament" + std::to_string(tournament_size);
}

LogitPolicy::LogitPolicy(std::vector<double> logits) : logits_(std::move(logits)) {
  if (logits_.empty()) throw std::invalid_argument("logit policy needs at least one entry");
  for (double v : logits_)
    if (!std::isfinite(v)) throw std::invalid_argument("logits must be finite");
  center(logits_);
}

LogitPolicy LogitPolicy::from_policy(const Policy& policy) {
  if (!policy.is_interior()) throw std::invalid_argument("logit form needs an interior policy");
  return LogitPolicy(policy_logits(policy));
}

Policy LogitPolicy::to_policy() const { return softmax(logits_); }

bool oracle_prefers(const PreferenceGame& game, std::size_t i, std::size_t j, CounterRng& rng) {
  return rng.uniform() < game(i, j);
}

PreferencePair oracle_label(const PreferenceGame& game, std::size_t i, std::size_t j, CounterRng& rng) {
  if (i >= game.size() || j >= game.size()) throw std::out_of_range("oracle_label: response index out of range");
  return oracle_prefers(game, i, j, rng) ? PreferencePair{i, j} : PreferencePair{j, i};
}

std::size_t sample_response(const Policy& policy, CounterRng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < policy.size(); ++i) {
    if (policy[i] <= 0.0) continue;
    last_positive = i;
    cumulative += policy[i];
    if (u < cumulative) return i;
  }
  return last_positive;
}

PreferenceDataset build_dataset(const PreferenceGame& game, const Policy& policy, std::size_t count,
                                DatasetMode mode, CounterRng& rng, std::string source_policy_id) {
  if (count == 0) throw std::invalid_argument("build_dataset: pair count must be positive");
  if (policy.size() != game.size()) throw std::invalid_argument("build_dataset: policy size mismatch");
  const std::size_t k = mode.tournament_size;
  if (mode.kind == DatasetMode::Kind::tournament && (k < 2 || !std::has_single_bit(k)))
    throw std::invalid_argument("build_dataset: tournament size K must be a power of two >= 2");

  PreferenceDataset data;
  data.seed = rng.seed();
  data.mode = mode;
  data.source_policy_id = std::move(source_policy_id);
  data.pairs.reserve(count);

  std::vector<std::size_t> responses, winners, losers;
  for (std::size_t d = 0; d < count; ++d) {
    if (mode.kind == DatasetMode::Kind::pair) {
      const std::size_t y = sample_response(policy, rng);
      const std::size_t y_prime = sample_response(policy, rng);
      data.pairs.push_back(oracle_label(game, y, y_prime, rng));
      continue;
    }
    responses.resize(k);
    for (auto& y : responses) y = sample_response(policy, rng);
    winners = responses;
    while (winners.size() > 1) {
      std::vector<std::size_t> next;
      for (std::size_t a = 0; a + 1 < winners.size(); a += 2)
        next.push_back(oracle_label(game, winners[a], winners[a + 1], rng).winner);
      winners = std::move(next);
    }
    losers = responses;
    while (losers.size() > 1) {
      std::vector<std::size_t> next;
      for (std::size_t a = 0; a + 1 < losers.size(); a += 2)
        next.push_back(oracle_label(game, losers[a], losers[a + 1], rng).loser);
      losers = std::move(next);
    }
    data.pairs.push_back({winners.front(), losers.front()});
  }
  return data;
}

namespace {

void check_anchor(const Policy& anchor, const PreferenceDataset& dataset) {
  if (dataset.pairs.empty()) throw std::invalid_argument("preference dataset is empty");
  for (const auto& pr : dataset.pairs) {
    if (pr.winner >= anchor.size() || pr.loser >= anchor.size())
      throw std::out_of_range("dataset references a response outside the anchor policy");
    for (std::size_t idx : {pr.winner, pr.loser}) {
      if (anchor[idx] == 0.0) {
        std::ostringstream msg;
        msg << "anchor has a zero entry on referenced response " << idx;
        throw std::invalid_argument(msg.str());
      }
    }
  }
  if (!anchor.is_interior()) throw std::invalid_argument("anchor policy must be interior");
}

std::vector<DifferenceTerm> pair_terms(const PreferenceDataset& dataset, double eta) {
  std::vector<DifferenceTerm> terms;
  terms.reserve(dataset.pairs.size());
  const double w = 1.0 / static_cast<double>(dataset.pairs.size());
  for (const auto& pr : dataset.pairs) terms.push_back({pr.winner, pr.loser, eta / 2.0, w});
  return terms;
}

// Loss in the logit coordinates: the difference residuals live on logits - log(anchor).
LossAndGradient logit_pair_loss(std::span<const double> logits, const std::vector<double>& log_anchor,
                                const std::vector<DifferenceTerm>& terms) {
  std::vector<double> delta(logits.begin(), logits.end());
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] -= log_anchor[i];
  return difference_loss(delta, terms, 1.0);
}

}  // namespace

PairLoss pair_loss(const LogitPolicy& candidate, const Policy& anchor, const PreferenceDataset& dataset, double eta) {
  check_anchor(anchor, dataset);
  if (candidate.size() != anchor.size()) throw std::invalid_argument("pair_loss: candidate size mismatch");
  auto res = logit_pair_loss(candidate.logits(), policy_logits(anchor), pair_terms(dataset, eta));
  return {res.loss, std::move(res.gradient)};
}

FitResult fit_policy(const Policy& anchor, const PreferenceDataset& dataset, double eta, const FitConfig& fit) {
  check_anchor(anchor, dataset);
  fit.validate();
  const auto log_anchor = policy_logits(anchor);
  const auto terms = pair_terms(dataset, eta);
  const std::size_t n = anchor.size();

  if (fit.method == FitMethod::direct_least_squares) {
    auto logits = solve_difference_least_squares(n, terms);
    for (std::size_t i = 0; i < n; ++i) logits[i] += log_anchor[i];
    center(logits);
    const auto eval = logit_pair_loss(logits, log_anchor, terms);
    double gnorm = 0.0;
    for (double g : eval.gradient) gnorm = std::max(gnorm, std::abs(g));
    return {softmax(logits), eval.loss, gnorm, 0, true};
  }

  auto res = minimize_gradient_descent(
      [&](std::span<const double> x) { return logit_pair_loss(x, log_anchor, terms); }, log_anchor, fit);
  return {softmax(res.point), res.loss, res.gradient_norm, res.iterations, res.converged};
}

RunLog onpo_stochastic_run(const PreferenceGame& game, const StochasticConfig& config) {
  if (config.start.size() != game.size()) throw std::invalid_argument("stochastic run: start policy size mismatch");
  if (!config.start.is_interior()) throw std::invalid_argument("stochastic run: start policy must be interior");
  if (config.iterations == 0) throw std::invalid_argument("stochastic run: T must be >= 1");
  if (!(config.eta > 0.0)) throw std::invalid_argument("stochastic run: eta must be positive");

  SolverConfig echo;
  echo.algorithm = Algorithm::onpo;
  echo.iterations = config.iterations;
  echo.eta = config.eta;
  echo.initial_policy = config.start;
  echo.inner_opt = config.fit;
  RunRecorder rec(game, "onpo_stochastic", echo);

  CounterRng rng(config.seed);
  Policy aux = config.start;
  FitResult current{config.start};
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    auto& entry = rec.add(current.policy, win_rate_vector(game, current.policy), config.eta, aux);
    entry.fit_converged = current.converged;
    entry.fit_gradient_norm = current.gradient_norm;
    if (t == config.iterations) break;
    const auto data =
        build_dataset(game, current.policy, config.pairs_per_iteration, config.mode, rng, "pi_" + std::to_string(t));
    FitResult next_aux = fit_policy(aux, data, config.eta, config.fit);
    FitResult next = fit_policy(next_aux.policy, data, config.eta, config.fit);
    next.converged = next.converged && next_aux.converged;
    next.gradient_norm = std::max(next.gradient_norm, next_aux.gradient_norm);
    aux = std::move(next_aux.policy);
    current = std::move(next);
  }
  return rec.finish();
}

double estimate_win_rate(const PreferenceGame& game, std::size_t i, const Policy& policy, std::size_t queries,
                         CounterRng& rng) {
  if (queries == 0) throw std::invalid_argument("estimate_win_rate: M must be >= 1");
  if (i >= game.size()) throw std::out_of_range("estimate_win_rate: response index out of range");
  std::size_t wins = 0;
  for (std::size_t m = 0; m < queries; ++m) {
    const std::size_t opponent = sample_response(policy, rng);
    wins += oracle_prefers(game, i, opponent, rng) ? 1 : 0;
  }
  return static_cast<double>(wins) / static_cast<double>(queries);
}

}  // namespace prefgame
