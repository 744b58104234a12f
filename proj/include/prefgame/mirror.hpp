#pragma once

#include "prefgame/game.hpp"

namespace prefgame {

// argmax_pi <pi, reward> - KL(pi || base) / eta, i.e. pi(i) ∝ base(i) exp(eta * reward(i)).
// Computed in log space. Throws std::invalid_argument for eta <= 0, a non-interior base or
// non-finite rewards, and std::domain_error if the result underflows out of the interior.
Policy md_step(const Policy& base, const RewardVector& reward, double eta);

// pi(i) ∝ current(i)^(1 - w) * reference(i)^w with w = eta * tau in (0, 1].
Policy geometric_mixture(const Policy& current, const Policy& reference, double weight);

// D = max over vertices of KL(vertex || start) = max_i -log start(i); log n for uniform start.
double kl_radius(const Policy& start);

// Step sizes under which the average-iterate bounds are stated.
double omd_theorem_eta(double radius, std::size_t iterations);  // sqrt(D / T)
double onpo_theorem_eta(double radius);                         // min(1/2, sqrt(D))

double omd_gap_bound(double radius, std::size_t iterations);   // 4 sqrt(D) / sqrt(T)
double onpo_gap_bound(double radius, std::size_t iterations);  // 4 sqrt(D) / T
double onpo_regret_bound(double radius);                       // 2 sqrt(D)

}  // namespace prefgame
