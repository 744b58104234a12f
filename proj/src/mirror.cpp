#include "prefgame/mirror.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace prefgame {

namespace {

Policy softmax_of_logs(std::vector<double> logs) {
  const double top = *std::max_element(logs.begin(), logs.end());
  double total = 0.0;
  for (double& v : logs) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : logs) v /= total;
  Policy out(std::move(logs));
  if (!out.is_interior())
    throw std::domain_error("mirror-descent step left the interior of the simplex (entry below 1e-300)");
  return out;
}

}  // namespace

Policy md_step(const Policy& base, const RewardVector& reward, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("md_step: eta must be a positive finite number");
  if (base.size() != reward.size()) throw std::invalid_argument("md_step: dimension mismatch");
  if (!base.is_interior()) throw std::invalid_argument("md_step: base policy must be interior");
  std::vector<double> logs(base.size());
  bool constant = true;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (!std::isfinite(reward[i])) {
      std::ostringstream msg;
      msg << "md_step: reward entry " << i << " is not finite";
      throw std::invalid_argument(msg.str());
    }
    constant = constant && reward[i] == reward[0];
    logs[i] = std::log(base[i]) + eta * reward[i];
  }
  // Shift invariance: a constant reward leaves the base exactly in place.
  if (constant) return base;
  return softmax_of_logs(std::move(logs));
}

Policy geometric_mixture(const Policy& current, const Policy& reference, double weight) {
  if (!(weight > 0.0) || weight > 1.0) throw std::invalid_argument("geometric mixture weight eta*tau must lie in (0, 1]");
  if (current.size() != reference.size()) throw std::invalid_argument("geometric_mixture: dimension mismatch");
  if (!current.is_interior() || !reference.is_interior())
    throw std::invalid_argument("geometric_mixture: both policies must be interior");
  if (weight == 1.0) return reference;
  std::vector<double> logs(current.size());
  for (std::size_t i = 0; i < current.size(); ++i)
    logs[i] = (1.0 - weight) * std::log(current[i]) + weight * std::log(reference[i]);
  return softmax_of_logs(std::move(logs));
}

double kl_radius(const Policy& start) {
  double d = 0.0;
  for (double p : start.probs()) {
    if (p == 0.0) return std::numeric_limits<double>::infinity();
    d = std::max(d, -std::log(p));
  }
  return d;
}

double omd_theorem_eta(double radius, std::size_t iterations) {
  return std::sqrt(radius / static_cast<double>(iterations));
}

double onpo_theorem_eta(double radius) { return std::min(0.5, std::sqrt(radius)); }

double omd_gap_bound(double radius, std::size_t iterations) {
  return 4.0 * std::sqrt(radius) / std::sqrt(static_cast<double>(iterations));
}

double onpo_gap_bound(double radius, std::size_t iterations) {
  return 4.0 * std::sqrt(radius) / static_cast<double>(iterations);
}

double onpo_regret_bound(double radius) { return 2.0 * std::sqrt(radius); }

}  // namespace prefgame
