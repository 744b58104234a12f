#include "prefgame/game.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "prefgame/rng.hpp"

namespace prefgame {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

Policy::Policy(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("policy must have at least one entry");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (!std::isfinite(probs_[i]) || probs_[i] < 0.0) {
      std::ostringstream msg;
      msg << "policy entry " << i << " is not a probability (" << probs_[i] << ")";
      throw std::invalid_argument(msg.str());
    }
    sum += probs_[i];
  }
  if (std::abs(sum - 1.0) > kProbTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "policy entries sum to " << sum << ", not 1";
    throw std::invalid_argument(msg.str());
  }
}

Policy Policy::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform policy needs n >= 1");
  return Policy(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Policy Policy::point_mass(std::size_t n, std::size_t index) {
  if (index >= n) throw std::invalid_argument("point mass index out of range");
  std::vector<double> probs(n, 0.0);
  probs[index] = 1.0;
  return Policy(std::move(probs));
}

Policy Policy::from_weights(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("weights sum to zero");
  for (double& w : weights) w /= total;
  return Policy(std::move(weights));
}

bool Policy::is_interior() const {
  return std::all_of(probs_.begin(), probs_.end(), [](double p) { return p >= kInteriorFloor; });
}

std::vector<std::vector<double>> PreferenceGame::rows() const {
  std::vector<std::vector<double>> out(n_, std::vector<double>(n_));
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out[i][j] = (*this)(i, j);
  return out;
}

std::uint64_t PreferenceGame::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  };
  mix(n_);
  for (double v : p_) mix(std::bit_cast<std::uint64_t>(v));
  return h;
}

PreferenceGame validate_game(const std::vector<std::vector<double>>& matrix) {
  const std::size_t n = matrix.size();
  if (n < 2) throw std::invalid_argument("preference game needs n >= 2 responses");
  for (std::size_t i = 0; i < n; ++i) {
    if (matrix[i].size() != n) {
      std::ostringstream msg;
      msg << "matrix is not square: row " << i << " has " << matrix[i].size() << " entries, expected " << n;
      throw std::invalid_argument(msg.str());
    }
  }
  std::vector<double> flat(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = matrix[i][j];
      std::ostringstream msg;
      msg.precision(17);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        msg << "p[" << i << "][" << j << "] = " << v << " is outside [0,1]";
        throw std::invalid_argument(msg.str());
      }
      if (i == j && std::abs(v - 0.5) > kProbTolerance) {
        msg << "diagonal p[" << i << "][" << i << "] = " << v << " != 0.5";
        throw std::invalid_argument(msg.str());
      }
      if (std::abs(v + matrix[j][i] - 1.0) > kProbTolerance) {
        msg << "p[" << i << "][" << j << "]+p[" << j << "][" << i << "] = " << v + matrix[j][i] << " != 1";
        throw std::invalid_argument(msg.str());
      }
      flat[i * n + j] = v;
    }
  }
  return PreferenceGame(n, std::move(flat));
}

RewardVector win_rate_vector(const PreferenceGame& game, const Policy& opponent) {
  const std::size_t n = game.size();
  require_same_size(n, opponent.size(), "win_rate_vector");
  RewardVector r{std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += game(i, j) * opponent[j];
    r.values[i] = std::clamp(acc, 0.0, 1.0);
  }
  return r;
}

double game_value(const PreferenceGame& game, const Policy& max_player, const Policy& min_player) {
  const std::size_t n = game.size();
  require_same_size(n, max_player.size(), "game_value");
  require_same_size(n, min_player.size(), "game_value");
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (max_player[i] == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += game(i, j) * min_player[j];
    value += max_player[i] * row;
  }
  return std::clamp(value, 0.0, 1.0);
}

GapTerms duality_gap_terms(const PreferenceGame& game, const Policy& policy) {
  const std::size_t n = game.size();
  require_same_size(n, policy.size(), "duality_gap");
  // Linear objectives: vertices suffice. Lowest index wins ties.
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < n; ++j) v += game(i, j) * policy[j];
    if (v > best) best = v;
  }
  double worst = 2.0;
  for (std::size_t j = 0; j < n; ++j) {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += policy[i] * game(i, j);
    if (v < worst) worst = v;
  }
  return {best, worst};
}

double duality_gap(const PreferenceGame& game, const Policy& policy) {
  return std::max(0.0, duality_gap_terms(game, policy).gap());
}

double kl_divergence(const Policy& p, const Policy& q) {
  require_same_size(p.size(), q.size(), "kl_divergence");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) {
      std::ostringstream msg;
      msg << "KL undefined: p[" << i << "] > 0 where q[" << i << "] = 0";
      throw std::domain_error(msg.str());
    }
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(0.0, kl);
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "l1_distance");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

double total_variation(const Policy& p, const Policy& q) { return 0.5 * l1_distance(p.probs(), q.probs()); }

std::string to_string(GameKind kind) {
  switch (kind) {
    case GameKind::random_skew:
      return "random_skew";
    case GameKind::bradley_terry:
      return "bradley_terry";
    case GameKind::cycle:
      return "cycle";
  }
  return "unknown";
}

GameKind game_kind_from_string(const std::string& name) {
  if (name == "random_skew") return GameKind::random_skew;
  if (name == "bradley_terry") return GameKind::bradley_terry;
  if (name == "cycle") return GameKind::cycle;
  throw std::invalid_argument("unknown game kind '" + name + "'");
}

PreferenceGame make_game(const GameGenSpec& spec) {
  const std::size_t n = spec.n;
  if (n < 2) throw std::invalid_argument("game size n must be >= 2");
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.5));

  switch (spec.kind) {
    case GameKind::random_skew: {
      CounterRng rng(spec.seed);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) p[i][j] = rng.uniform();
      break;
    }
    case GameKind::bradley_terry: {
      if (spec.rewards.size() != n) {
        std::ostringstream msg;
        msg << "bradley_terry needs " << n << " rewards, got " << spec.rewards.size();
        throw std::invalid_argument(msg.str());
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(spec.rewards[i])) throw std::invalid_argument("bradley_terry rewards must be finite");
        for (std::size_t j = i + 1; j < n; ++j)
          p[i][j] = 1.0 / (1.0 + std::exp(-(spec.rewards[i] - spec.rewards[j])));
      }
      break;
    }
    case GameKind::cycle: {
      if (n < 3) throw std::invalid_argument("cycle games need n >= 3");
      if (!(spec.margin > 0.0 && spec.margin <= 0.5))
        throw std::invalid_argument("cycle margin must lie in (0, 0.5]");
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t next = (i + 1) % n;
        if (i < next) {
          p[i][next] = 0.5 + spec.margin;
        } else {
          p[next][i] = 0.5 - spec.margin;
        }
      }
      break;
    }
  }

  // Fill the lower triangle by complement, then symmetrize p <- (p + 1 - p^T) / 2.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) p[j][i] = 1.0 - p[i][j];
  auto sym = p;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sym[i][j] = i == j ? 0.5 : 0.5 * (p[i][j] + 1.0 - p[j][i]);
  return validate_game(sym);
}

}  // namespace prefgame
