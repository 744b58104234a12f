#include "prefgame/solvers.hpp"

#include <boost/math/special_functions/lambert_w.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prefgame/mirror.hpp"

namespace prefgame {

namespace {

void require_algorithm(const SolverConfig& config, Algorithm expected) {
  if (config.algorithm != expected)
    throw std::invalid_argument("config mismatch: expected algorithm " + to_string(expected) + ", got " +
                                to_string(config.algorithm));
}

double log_sum_exp(std::span<const double> x) {
  const double top = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x) s += std::exp(v - top);
  return top + std::log(s);
}

// W(x)/x for x >= 0, with the series near zero.
double lambert_ratio(double x) {
  if (x < 1e-8) return 1.0 - x + 1.5 * x * x;
  return boost::math::lambert_w0(x) / x;
}

void record_fit(IterationRecord& rec, const StepResult& step) {
  rec.fit_converged = step.converged;
  rec.fit_gradient_norm = step.gradient_norm;
}

}  // namespace

std::vector<double> policy_logits(const Policy& policy) {
  std::vector<double> logits(policy.size());
  for (std::size_t i = 0; i < policy.size(); ++i) logits[i] = std::log(policy[i]);
  center(logits);
  return logits;
}

Policy softmax(std::span<const double> logits) {
  const double lse = log_sum_exp(logits);
  std::vector<double> p(logits.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(logits[i] - lse);
  return Policy::from_weights(std::move(p));
}

RunLog omd_selfplay(const PreferenceGame& game, const SolverConfig& config) {
  require_algorithm(config, Algorithm::omd);
  config.validate(game.size());
  const double eta = config.resolved_eta(game.size());
  RunRecorder rec(game, "omd", config);
  Policy current = config.start(game.size());
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    RewardVector r = win_rate_vector(game, current);
    Policy next = t < config.iterations ? md_step(current, r, eta) : current;
    rec.add(std::move(current), std::move(r), eta);
    current = std::move(next);
  }
  return rec.finish();
}

RunLog onpo_run(const PreferenceGame& game, const SolverConfig& config) {
  require_algorithm(config, Algorithm::onpo);
  config.validate(game.size());
  const double eta = config.resolved_eta(game.size());
  RunRecorder rec(game, "onpo", config);
  Policy aux = config.start(game.size());
  RewardVector predictor = RewardVector::zeros(game.size());
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    Policy current = md_step(aux, predictor, eta);
    RewardVector r = win_rate_vector(game, current);
    Policy next_aux = md_step(aux, r, eta);
    rec.add(std::move(current), r, eta, aux, predictor);
    aux = std::move(next_aux);
    predictor = std::move(r);
  }
  return rec.finish();
}

RunLog nash_md_run(const PreferenceGame& game, const SolverConfig& config) {
  require_algorithm(config, Algorithm::nash_md);
  config.validate(game.size());
  const double eta = config.eta;
  const double weight = eta * *config.tau;
  RunRecorder rec(game, "nash_md", config);
  Policy current = config.start(game.size());
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    Policy mixture = geometric_mixture(current, *config.ref_policy, weight);
    RewardVector r = win_rate_vector(game, mixture);
    Policy next = t < config.iterations ? md_step(mixture, r, eta) : current;
    rec.add(std::move(current), std::move(r), eta, std::move(mixture));
    current = std::move(next);
  }
  return rec.finish();
}

LossAndGradient sppo_loss(std::span<const double> logits, const Policy& base, const RewardVector& reward,
                          double eta) {
  const std::size_t n = base.size();
  const double lse = log_sum_exp(logits);
  LossAndGradient out;
  out.gradient.assign(n, 0.0);
  std::vector<double> resid(n);
  double resid_sum = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    const double target = std::log(base[y]) + eta * (reward[y] - 0.5);
    resid[y] = 2.0 * base[y] * ((logits[y] - lse) - target);
    out.loss += base[y] * ((logits[y] - lse) - target) * ((logits[y] - lse) - target);
    resid_sum += resid[y];
  }
  for (std::size_t k = 0; k < n; ++k) out.gradient[k] = resid[k] - std::exp(logits[k] - lse) * resid_sum;
  return out;
}

Policy sppo_exact_step(const Policy& base, const RewardVector& reward, double eta) {
  if (!base.is_interior()) throw std::invalid_argument("sppo: base policy must be interior");
  const std::size_t n = base.size();
  std::vector<double> a(n);
  double at_zero = 0.0;  // sum base * a >= 1 by Jensen when sum base * r = 1/2
  for (std::size_t y = 0; y < n; ++y) {
    a[y] = std::exp(eta * (reward[y] - 0.5));
    at_zero += base[y] * a[y];
  }
  auto mass = [&](double mu) {
    double s = 0.0;
    for (std::size_t y = 0; y < n; ++y) s += base[y] * a[y] * lambert_ratio(mu * a[y]);
    return s;
  };
  std::vector<double> weights(n);
  if (at_zero <= 1.0) {
    // The unconstrained minimizer is already feasible (up to normalization rounding).
    for (std::size_t y = 0; y < n; ++y) weights[y] = base[y] * a[y];
    return Policy::from_weights(std::move(weights));
  }
  double hi = 1.0;
  while (mass(hi) > 1.0) hi *= 2.0;
  boost::uintmax_t max_iter = 400;
  auto tol = boost::math::tools::eps_tolerance<double>(52);
  const auto bracket =
      boost::math::tools::toms748_solve([&](double mu) { return mass(mu) - 1.0; }, 0.0, hi, at_zero - 1.0,
                                        mass(hi) - 1.0, tol, max_iter);
  const double mu = 0.5 * (bracket.first + bracket.second);
  for (std::size_t y = 0; y < n; ++y) weights[y] = base[y] * a[y] * lambert_ratio(mu * a[y]);
  return Policy::from_weights(std::move(weights));
}

StepResult sppo_step(const Policy& base, const RewardVector& reward, double eta, const FitConfig& fit) {
  if (fit.method == FitMethod::direct_least_squares) return {sppo_exact_step(base, reward, eta)};
  // Warm start at the multiplicative-weights candidate.
  std::vector<double> start(base.size());
  for (std::size_t y = 0; y < base.size(); ++y) start[y] = std::log(base[y]) + eta * (reward[y] - 0.5);
  auto res = minimize_gradient_descent(
      [&](std::span<const double> x) { return sppo_loss(x, base, reward, eta); }, std::move(start), fit);
  return {softmax(res.point), res.converged, res.gradient_norm, res.iterations};
}

RunLog sppo_run(const PreferenceGame& game, const SolverConfig& config) {
  require_algorithm(config, Algorithm::sppo);
  config.validate(game.size());
  const double eta = config.eta;
  RunRecorder rec(game, "sppo", config);
  StepResult current{config.start(game.size())};
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    RewardVector r = win_rate_vector(game, current.policy);
    StepResult next = t < config.iterations ? sppo_step(current.policy, r, eta, config.inner_opt) : current;
    auto& entry = rec.add(current.policy, std::move(r), eta);
    record_fit(entry, current);
    current = std::move(next);
  }
  return rec.finish();
}

namespace {

std::vector<DifferenceTerm> ipo_terms(const Policy& sampler, const PreferenceGame& game, double tau) {
  const std::size_t n = game.size();
  std::vector<DifferenceTerm> terms;
  terms.reserve(n * n);
  const double target = 1.0 / (2.0 * tau);
  for (std::size_t w = 0; w < n; ++w)
    for (std::size_t l = 0; l < n; ++l) terms.push_back({w, l, target, 2.0 * sampler[w] * sampler[l] * game(w, l)});
  return terms;
}

}  // namespace

LossAndGradient online_ipo_loss(std::span<const double> logits, const Policy& sampler, const Policy& ref,
                                const PreferenceGame& game, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("online_ipo: tau must be positive");
  const auto terms = ipo_terms(sampler, game, tau);
  std::vector<double> shifted(logits.begin(), logits.end());
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] -= std::log(ref[i]);
  return difference_loss(shifted, terms, 1.0);
}

StepResult online_ipo_phase(const Policy& sampler, const Policy& ref, const PreferenceGame& game, double tau,
                            const FitConfig& fit) {
  if (!(tau > 0.0)) throw std::invalid_argument("online_ipo: tau must be positive");
  const auto log_ref = policy_logits(ref);
  if (fit.method == FitMethod::direct_least_squares) {
    auto d = solve_difference_least_squares(game.size(), ipo_terms(sampler, game, tau));
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += log_ref[i];
    return {softmax(d)};
  }
  auto res = minimize_gradient_descent(
      [&](std::span<const double> x) { return online_ipo_loss(x, sampler, ref, game, tau); }, policy_logits(sampler),
      fit);
  return {softmax(res.point), res.converged, res.gradient_norm, res.iterations};
}

RunLog online_ipo_run(const PreferenceGame& game, const SolverConfig& config) {
  require_algorithm(config, Algorithm::online_ipo);
  config.validate(game.size());
  const double tau = *config.tau;
  RunRecorder rec(game, "online_ipo", config);
  StepResult current{config.start(game.size())};
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    RewardVector r = win_rate_vector(game, current.policy);
    StepResult next = t < config.iterations
                          ? online_ipo_phase(current.policy, *config.ref_policy, game, tau, config.inner_opt)
                          : current;
    auto& entry = rec.add(current.policy, std::move(r), config.eta);
    record_fit(entry, current);
    current = std::move(next);
  }
  return rec.finish();
}

RunLog run_solver(const PreferenceGame& game, const SolverConfig& config) {
  switch (config.algorithm) {
    case Algorithm::omd:
      return omd_selfplay(game, config);
    case Algorithm::onpo:
      return onpo_run(game, config);
    case Algorithm::nash_md:
      return nash_md_run(game, config);
    case Algorithm::sppo:
      return sppo_run(game, config);
    case Algorithm::online_ipo:
      return online_ipo_run(game, config);
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace prefgame
