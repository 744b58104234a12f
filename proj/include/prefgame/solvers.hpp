#pragma once

#include <span>
#include <vector>

#include "prefgame/game.hpp"
#include "prefgame/optimize.hpp"
#include "prefgame/run_log.hpp"

namespace prefgame {

// Exact tabular self-play solvers. Each throws std::invalid_argument when
// config.algorithm does not match or the config is invalid for the game.

// pi_{t+1} = md_step(pi_t, r_t, eta), r_t = win rates against pi_t.
RunLog omd_selfplay(const PreferenceGame& game, const SolverConfig& config);

// Optimistic two-sequence update: pi_t = md_step(pi'_t, m_t), pi'_{t+1} = md_step(pi'_t, r_t),
// m_t = r_{t-1} and m_1 = 0 so that pi_1 = pi'_1.
RunLog onpo_run(const PreferenceGame& game, const SolverConfig& config);

// pi'_t = geometric mixture of pi_t and the reference, pi_{t+1} = md_step(pi'_t, r(pi'_t)).
RunLog nash_md_run(const PreferenceGame& game, const SolverConfig& config);

// pi_{t+1} = argmin_pi E_{y~pi_t} (log(pi(y)/pi_t(y)) - eta (r_t(y) - 1/2))^2.
RunLog sppo_run(const PreferenceGame& game, const SolverConfig& config);

// Phases minimizing the population IPO loss against a frozen sampler copy.
RunLog online_ipo_run(const PreferenceGame& game, const SolverConfig& config);

RunLog run_solver(const PreferenceGame& game, const SolverConfig& config);

// --- SPPO inner problem -------------------------------------------------------------

// Loss over logits (any gauge) and its gradient.
LossAndGradient sppo_loss(std::span<const double> logits, const Policy& base, const RewardVector& reward, double eta);

// Exact minimizer over the simplex. With c = log base + eta (r - 1/2) the problem is the
// weighted projection of c onto {u : sum exp(u) <= 1}; its KKT conditions give
// pi(y) = base(y) a(y) W(mu a(y)) / (mu a(y)), a = exp(eta (r - 1/2)), with the scalar mu
// fixed by normalization (W is the principal Lambert function).
Policy sppo_exact_step(const Policy& base, const RewardVector& reward, double eta);

struct StepResult {
  Policy policy;
  bool converged = true;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
};

// The configured inner solve: gradient descent from the multiplicative-weights candidate,
// or the exact solve when fit.method is direct_least_squares.
StepResult sppo_step(const Policy& base, const RewardVector& reward, double eta, const FitConfig& fit);

// --- Online IPO population loss -------------------------------------------------------

// Exact population loss 2 sum_{y,y'} s(y) s(y') p(y,y') (h(y,y') - 1/(2 tau))^2 with
// h(w,l) = log(pi(w) ref(l) / (pi(l) ref(w))), s the frozen sampler. Returns the gradient
// with respect to the logits of pi.
LossAndGradient online_ipo_loss(std::span<const double> logits, const Policy& sampler, const Policy& ref,
                                const PreferenceGame& game, double tau);

// One stop-gradient phase: minimize the loss with the sampler held fixed.
StepResult online_ipo_phase(const Policy& sampler, const Policy& ref, const PreferenceGame& game, double tau,
                            const FitConfig& fit);

std::vector<double> policy_logits(const Policy& policy);  // centered log-probabilities
Policy softmax(std::span<const double> logits);

}  // namespace prefgame
