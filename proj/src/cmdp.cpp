#include "prefgame/cmdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "prefgame/mirror.hpp"
#include "prefgame/rng.hpp"

namespace prefgame {

void TabularCMDP::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("cmdp: " + what); };
  if (horizon == 0) fail("horizon must be >= 1");
  if (states_per_step.size() != horizon + 1) fail("states_per_step must have H + 1 entries");
  if (states_per_step.front() != 1) fail("the first step must hold exactly one initial state");
  for (std::size_t count : states_per_step)
    if (count == 0) fail("every step needs at least one state");
  if (terminal_pref.size() != states_per_step.back()) fail("terminal_pref size does not match the terminal states");
  if (actions.size() != horizon || transitions.size() != horizon) fail("actions/transitions must have H steps");
  for (std::size_t h = 0; h < horizon; ++h) {
    if (actions[h].size() != states_per_step[h] || transitions[h].size() != states_per_step[h])
      fail("step " + std::to_string(h) + " has the wrong number of states");
    for (std::size_t s = 0; s < states_per_step[h]; ++s) {
      if (actions[h][s] == 0) fail("state needs at least one action");
      if (transitions[h][s].size() != actions[h][s]) fail("transition table does not match the action count");
      for (std::size_t a = 0; a < actions[h][s]; ++a) {
        const auto& row = transitions[h][s][a];
        if (row.size() != states_per_step[h + 1]) fail("transition row has the wrong length");
        double total = 0.0;
        for (double p : row) {
          if (!std::isfinite(p) || p < 0.0) fail("transition probabilities must be >= 0");
          total += p;
        }
        if (std::abs(total - 1.0) > kProbTolerance) {
          std::ostringstream msg;
          msg << "transition row (h=" << h << ", s=" << s << ", a=" << a << ") sums to " << total;
          fail(msg.str());
        }
      }
    }
  }
}

namespace {

void check_policy_shape(const TabularCMDP& cmdp, const StatePolicy& policy) {
  if (policy.size() != cmdp.horizon) throw std::invalid_argument("state policy: wrong number of steps");
  for (std::size_t h = 0; h < cmdp.horizon; ++h) {
    if (policy[h].size() != cmdp.states_per_step[h]) throw std::invalid_argument("state policy: wrong state count");
    for (std::size_t s = 0; s < policy[h].size(); ++s)
      if (policy[h][s].size() != cmdp.actions[h][s]) throw std::invalid_argument("state policy: wrong action count");
  }
}

// v(s) = P(s > opponent) over terminal states.
std::vector<double> terminal_values(const TabularCMDP& cmdp, const std::vector<double>& opponent_dist) {
  const std::size_t m = cmdp.states_per_step.back();
  std::vector<double> v(m, 0.0);
  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t t = 0; t < m; ++t) v[s] += opponent_dist[t] * cmdp.terminal_pref(s, t);
  return v;
}

double expect(const std::vector<double>& dist, const std::vector<double>& values) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) acc += dist[i] * values[i];
  return acc;
}

}  // namespace

StatePolicy uniform_state_policy(const TabularCMDP& cmdp) {
  StatePolicy policy(cmdp.horizon);
  for (std::size_t h = 0; h < cmdp.horizon; ++h)
    for (std::size_t s = 0; s < cmdp.states_per_step[h]; ++s) policy[h].push_back(Policy::uniform(cmdp.actions[h][s]));
  return policy;
}

std::vector<double> final_state_distribution(const TabularCMDP& cmdp, const StatePolicy& policy) {
  check_policy_shape(cmdp, policy);
  std::vector<double> dist{1.0};
  for (std::size_t h = 0; h < cmdp.horizon; ++h) {
    std::vector<double> next(cmdp.states_per_step[h + 1], 0.0);
    for (std::size_t s = 0; s < dist.size(); ++s) {
      if (dist[s] == 0.0) continue;
      for (std::size_t a = 0; a < cmdp.actions[h][s]; ++a) {
        const double mass = dist[s] * policy[h][s][a];
        const auto& row = cmdp.transitions[h][s][a];
        for (std::size_t t = 0; t < next.size(); ++t) next[t] += mass * row[t];
      }
    }
    dist = std::move(next);
  }
  return dist;
}

double terminal_pref_vs_policy(const TabularCMDP& cmdp, std::size_t terminal_state, const StatePolicy& opponent) {
  if (terminal_state >= cmdp.states_per_step.back()) throw std::out_of_range("terminal state index out of range");
  const auto dist = final_state_distribution(cmdp, opponent);
  double v = 0.0;
  for (std::size_t t = 0; t < dist.size(); ++t) v += dist[t] * cmdp.terminal_pref(terminal_state, t);
  return std::clamp(v, 0.0, 1.0);
}

QTable q_values(const TabularCMDP& cmdp, const StatePolicy& policy) {
  std::vector<double> values = terminal_values(cmdp, final_state_distribution(cmdp, policy));
  QTable q(cmdp.horizon);
  for (std::size_t h = cmdp.horizon; h-- > 0;) {
    q[h].resize(cmdp.states_per_step[h]);
    std::vector<double> state_values(cmdp.states_per_step[h], 0.0);
    for (std::size_t s = 0; s < cmdp.states_per_step[h]; ++s) {
      q[h][s].resize(cmdp.actions[h][s]);
      for (std::size_t a = 0; a < cmdp.actions[h][s]; ++a) {
        q[h][s][a] = expect(cmdp.transitions[h][s][a], values);
        state_values[s] += policy[h][s][a] * q[h][s][a];
      }
    }
    values = std::move(state_values);
  }
  return q;
}

std::pair<StatePolicy, StatePolicy> per_state_update(const TabularCMDP& cmdp, const StatePolicy& current,
                                                     const StatePolicy& aux, double eta, UpdateVariant variant) {
  if (!(eta > 0.0)) throw std::invalid_argument("per_state_update: eta must be positive");
  check_policy_shape(cmdp, aux);
  const QTable q = q_values(cmdp, current);
  StatePolicy next_current(cmdp.horizon), next_aux(cmdp.horizon);
  for (std::size_t h = 0; h < cmdp.horizon; ++h) {
    for (std::size_t s = 0; s < cmdp.states_per_step[h]; ++s) {
      const RewardVector reward{q[h][s]};
      if (variant == UpdateVariant::omd) {
        next_current[h].push_back(md_step(current[h][s], reward, eta));
        next_aux[h].push_back(next_current[h].back());
      } else {
        next_aux[h].push_back(md_step(aux[h][s], reward, eta));
        next_current[h].push_back(md_step(next_aux[h].back(), reward, eta));
      }
    }
  }
  return {std::move(next_current), std::move(next_aux)};
}

double best_response_value(const TabularCMDP& cmdp, const StatePolicy& policy) {
  std::vector<double> values = terminal_values(cmdp, final_state_distribution(cmdp, policy));
  for (std::size_t h = cmdp.horizon; h-- > 0;) {
    std::vector<double> state_values(cmdp.states_per_step[h], 0.0);
    for (std::size_t s = 0; s < cmdp.states_per_step[h]; ++s) {
      double best = -1.0;
      for (std::size_t a = 0; a < cmdp.actions[h][s]; ++a)
        best = std::max(best, expect(cmdp.transitions[h][s][a], values));
      state_values[s] = best;
    }
    values = std::move(state_values);
  }
  return values.front();
}

double exploitability(const TabularCMDP& cmdp, const StatePolicy& policy) {
  return std::max(0.0, 2.0 * best_response_value(cmdp, policy) - 1.0);
}

StatePolicy average_state_policy(const std::vector<StatePolicy>& iterates) {
  if (iterates.empty()) throw std::invalid_argument("average_state_policy: no iterates");
  StatePolicy out(iterates.front().size());
  for (std::size_t h = 0; h < out.size(); ++h) {
    for (std::size_t s = 0; s < iterates.front()[h].size(); ++s) {
      std::vector<double> mean(iterates.front()[h][s].size(), 0.0);
      for (const auto& it : iterates)
        for (std::size_t a = 0; a < mean.size(); ++a) mean[a] += it[h][s][a];
      out[h].push_back(Policy::from_weights(std::move(mean)));
    }
  }
  return out;
}

MultiTurnTrace run_multi_turn(const TabularCMDP& cmdp, std::size_t iterations, double eta, UpdateVariant variant) {
  if (iterations == 0) throw std::invalid_argument("run_multi_turn: T must be >= 1");
  cmdp.validate();
  MultiTurnTrace trace;
  StatePolicy current = uniform_state_policy(cmdp);
  StatePolicy aux = current;
  // Running row sums for the per-state average.
  std::vector<std::vector<std::vector<double>>> sums(cmdp.horizon);
  for (std::size_t h = 0; h < cmdp.horizon; ++h)
    for (std::size_t s = 0; s < cmdp.states_per_step[h]; ++s) sums[h].emplace_back(cmdp.actions[h][s], 0.0);

  for (std::size_t t = 1; t <= iterations; ++t) {
    StatePolicy avg(cmdp.horizon);
    for (std::size_t h = 0; h < cmdp.horizon; ++h) {
      for (std::size_t s = 0; s < sums[h].size(); ++s) {
        for (std::size_t a = 0; a < sums[h][s].size(); ++a) sums[h][s][a] += current[h][s][a];
        avg[h].push_back(Policy::from_weights(sums[h][s]));
      }
    }
    trace.exploit_last.push_back(exploitability(cmdp, current));
    trace.exploit_avg.push_back(exploitability(cmdp, avg));
    if (t == iterations) {
      trace.average_policy = std::move(avg);
      break;
    }
    auto [next_current, next_aux] = per_state_update(cmdp, current, aux, eta, variant);
    current = std::move(next_current);
    aux = std::move(next_aux);
  }
  trace.final_policy = std::move(current);
  return trace;
}

namespace {

std::size_t draw_between(CounterRng& rng, std::size_t lo, std::size_t hi) {
  if (hi <= lo) return lo;
  return lo + static_cast<std::size_t>(rng.uniform() * static_cast<double>(hi - lo + 1));
}

}  // namespace

TabularCMDP make_random_cmdp(const CmdpGenSpec& spec) {
  if (spec.horizon == 0) throw std::invalid_argument("cmdp generator: horizon must be >= 1");
  if (spec.max_states < 2 || spec.max_actions < 1)
    throw std::invalid_argument("cmdp generator: need max_states >= 2 and max_actions >= 1");
  CounterRng rng(spec.seed);
  std::vector<std::size_t> states{1};
  for (std::size_t h = 1; h <= spec.horizon; ++h) states.push_back(draw_between(rng, 2, spec.max_states));
  std::vector<std::vector<std::size_t>> actions(spec.horizon);
  std::vector<std::vector<std::vector<std::vector<double>>>> transitions(spec.horizon);
  for (std::size_t h = 0; h < spec.horizon; ++h) {
    for (std::size_t s = 0; s < states[h]; ++s) {
      const std::size_t count = draw_between(rng, std::min<std::size_t>(2, spec.max_actions), spec.max_actions);
      actions[h].push_back(count);
      std::vector<std::vector<double>> rows;
      for (std::size_t a = 0; a < count; ++a) {
        // Dirichlet(1, ..., 1) through normalized exponentials.
        std::vector<double> row(states[h + 1]);
        for (double& v : row) v = -std::log(1.0 - rng.uniform());
        rows.push_back(Policy::from_weights(std::move(row)).vec());
      }
      transitions[h].push_back(std::move(rows));
    }
  }
  GameGenSpec pref{GameKind::random_skew, states.back(), CounterRng::derive_seed(spec.seed, 1), {}, 0.5};
  TabularCMDP cmdp{spec.horizon, std::move(states), std::move(actions), std::move(transitions), make_game(pref)};
  cmdp.validate();
  return cmdp;
}

TabularCMDP cmdp_from_matrix_game(const PreferenceGame& game) {
  const std::size_t n = game.size();
  std::vector<std::vector<double>> rows;
  for (std::size_t a = 0; a < n; ++a) rows.push_back(Policy::point_mass(n, a).vec());
  TabularCMDP cmdp{1, {1, n}, {{n}}, {{rows}}, game};
  cmdp.validate();
  return cmdp;
}

}  // namespace prefgame
