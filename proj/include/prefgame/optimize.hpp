#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace prefgame {

enum class FitMethod { direct_least_squares, gradient_descent };

std::string to_string(FitMethod method);
FitMethod fit_method_from_string(const std::string& name);

struct FitConfig {
  FitMethod method = FitMethod::direct_least_squares;
  double step_size = 1.0;            // initial trial step for gradient descent
  std::size_t max_iterations = 100000;
  double gradient_tolerance = 1e-8;  // infinity norm

  void validate() const;
  friend bool operator==(const FitConfig&, const FitConfig&) = default;
};

// Objective value and gradient at a point.
struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

using Objective = std::function<LossAndGradient(std::span<const double>)>;

struct MinimizeResult {
  std::vector<double> point;
  double loss = 0.0;
  double gradient_norm = 0.0;  // infinity norm at `point`
  std::size_t iterations = 0;
  bool converged = false;
};

// Gradient descent with Barzilai-Borwein step lengths and an Armijo backtracking
// safeguard. Each accepted step strictly decreases the loss. Iterates are projected onto
// the zero-sum subspace (logit gauge); objectives are expected to be shift invariant.
MinimizeResult minimize_gradient_descent(const Objective& objective, std::vector<double> start,
                                         const FitConfig& config);

// One weighted difference observation: weight * ((x[plus] - x[minus]) - target)^2.
struct DifferenceTerm {
  std::size_t plus = 0;
  std::size_t minus = 0;
  double target = 0.0;
  double weight = 1.0;
};

// Minimum-norm minimizer of sum_k weight_k ((x[plus]-x[minus]) - target_k)^2 over R^n.
// The minimum-norm solution is orthogonal to the all-ones vector, so it is gauge fixed.
std::vector<double> solve_difference_least_squares(std::size_t n, std::span<const DifferenceTerm> terms);

// Loss and gradient of the same objective, normalized by `scale`.
LossAndGradient difference_loss(std::span<const double> x, std::span<const DifferenceTerm> terms, double scale);

void center(std::vector<double>& x);

}  // namespace prefgame
