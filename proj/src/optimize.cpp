#include "prefgame/optimize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace prefgame {

std::string to_string(FitMethod method) {
  return method == FitMethod::direct_least_squares ? "direct_least_squares" : "gradient_descent";
}

FitMethod fit_method_from_string(const std::string& name) {
  if (name == "direct_least_squares" || name == "direct") return FitMethod::direct_least_squares;
  if (name == "gradient_descent" || name == "gradient") return FitMethod::gradient_descent;
  throw std::invalid_argument("unknown fit method '" + name + "'");
}

void FitConfig::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("fit step_size must be positive");
  if (!(gradient_tolerance > 0.0)) throw std::invalid_argument("fit gradient_tolerance must be positive");
  if (max_iterations == 0) throw std::invalid_argument("fit max_iterations must be positive");
}

void center(std::vector<double>& x) {
  if (x.empty()) return;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  for (double& v : x) v -= mean;
}

namespace {

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

MinimizeResult minimize_gradient_descent(const Objective& objective, std::vector<double> start,
                                         const FitConfig& config) {
  config.validate();
  center(start);
  MinimizeResult res;
  res.point = std::move(start);
  auto eval = objective(res.point);
  center(eval.gradient);
  res.loss = eval.loss;
  std::vector<double> grad = std::move(eval.gradient);
  std::vector<double> prev_point, prev_grad;

  const std::size_t n = res.point.size();
  for (res.iterations = 0; res.iterations < config.max_iterations; ++res.iterations) {
    res.gradient_norm = inf_norm(grad);
    if (res.gradient_norm <= config.gradient_tolerance) {
      res.converged = true;
      return res;
    }
    double step = config.step_size;
    if (!prev_point.empty()) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double s = res.point[i] - prev_point[i];
        const double y = grad[i] - prev_grad[i];
        ss += s * s;
        sy += s * y;
      }
      if (sy > 0.0 && std::isfinite(ss / sy)) step = ss / sy;
    }
    const double gg = dot(grad, grad);
    std::vector<double> trial(n);
    LossAndGradient trial_eval;
    bool accepted = false;
    for (int backtrack = 0; backtrack < 80; ++backtrack) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = res.point[i] - step * grad[i];
      center(trial);
      trial_eval = objective(trial);
      center(trial_eval.gradient);
      if (std::isfinite(trial_eval.loss)) {
        const bool armijo = trial_eval.loss <= res.loss - 1e-4 * step * gg;
        // Near the optimum the decrease drops below loss rounding; accept non-increasing
        // steps that still shrink the gradient.
        const bool rounding = trial_eval.loss <= res.loss && inf_norm(trial_eval.gradient) < res.gradient_norm;
        if (armijo || rounding) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;
    prev_point = std::move(res.point);
    prev_grad = std::move(grad);
    res.point = trial;
    res.loss = trial_eval.loss;
    grad = std::move(trial_eval.gradient);
  }
  res.gradient_norm = inf_norm(grad);
  res.converged = res.gradient_norm <= config.gradient_tolerance;
  return res;
}

std::vector<double> solve_difference_least_squares(std::size_t n, std::span<const DifferenceTerm> terms) {
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (const auto& t : terms) {
    if (t.plus >= n || t.minus >= n) throw std::out_of_range("difference term index out of range");
    if (t.plus == t.minus || t.weight == 0.0) continue;
    const auto p = static_cast<Eigen::Index>(t.plus);
    const auto m = static_cast<Eigen::Index>(t.minus);
    lap(p, p) += t.weight;
    lap(m, m) += t.weight;
    lap(p, m) -= t.weight;
    lap(m, p) -= t.weight;
    rhs(p) += t.weight * t.target;
    rhs(m) -= t.weight * t.target;
  }
  // Pseudo-inverse through the eigendecomposition of the (PSD) weighted Laplacian.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(1.0, values.cwiseAbs().maxCoeff());
  Eigen::VectorXd coeffs = eig.eigenvectors().transpose() * rhs;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) coeffs(k) = values(k) > cutoff ? coeffs(k) / values(k) : 0.0;
  const Eigen::VectorXd x = eig.eigenvectors() * coeffs;
  std::vector<double> out(x.data(), x.data() + x.size());
  center(out);
  return out;
}

LossAndGradient difference_loss(std::span<const double> x, std::span<const DifferenceTerm> terms, double scale) {
  LossAndGradient out;
  out.gradient.assign(x.size(), 0.0);
  for (const auto& t : terms) {
    const double resid = (x[t.plus] - x[t.minus]) - t.target;
    out.loss += t.weight * resid * resid;
    if (t.plus != t.minus) {
      out.gradient[t.plus] += 2.0 * t.weight * resid;
      out.gradient[t.minus] -= 2.0 * t.weight * resid;
    }
  }
  out.loss *= scale;
  for (double& g : out.gradient) g *= scale;
  return out;
}

}  // namespace prefgame
