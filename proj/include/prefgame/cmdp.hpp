#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "prefgame/game.hpp"

namespace prefgame {

// Finite-horizon CMDP whose only feedback is a preference between terminal states.
// Steps are indexed h = 0..H-1 for decisions; step H holds the terminal states.
// Step 0 has the single initial state.
struct TabularCMDP {
  std::size_t horizon = 1;
  std::vector<std::size_t> states_per_step;                          // size H + 1, front() == 1
  std::vector<std::vector<std::size_t>> actions;                      // [h][s], h < H
  std::vector<std::vector<std::vector<std::vector<double>>>> transitions;  // [h][s][a][s']
  PreferenceGame terminal_pref;                                       // over step-H states

  // Throws std::invalid_argument describing the first inconsistency.
  void validate() const;
};

// rows[h][s] is the action distribution at state s of step h.
using StatePolicy = std::vector<std::vector<Policy>>;
// q[h][s][a]
using QTable = std::vector<std::vector<std::vector<double>>>;

StatePolicy uniform_state_policy(const TabularCMDP& cmdp);

// Forward pass from the initial state; a distribution over terminal states.
std::vector<double> final_state_distribution(const TabularCMDP& cmdp, const StatePolicy& policy);

// P(s > pi) = sum_{s'} d_pi(s') pref(s, s').
double terminal_pref_vs_policy(const TabularCMDP& cmdp, std::size_t terminal_state, const StatePolicy& opponent);

// Self-play Q-values by backward induction, the opponent being `policy` itself.
QTable q_values(const TabularCMDP& cmdp, const StatePolicy& policy);

enum class UpdateVariant { omd, onpo };

// One per-state mirror-descent iteration. omd: current <- md_step(current, Q(current)).
// onpo: aux <- md_step(aux, Q(current)), current <- md_step(aux_new, Q(current)); the
// Q of this iteration is the predictor of the next.
std::pair<StatePolicy, StatePolicy> per_state_update(const TabularCMDP& cmdp, const StatePolicy& current,
                                                     const StatePolicy& aux, double eta, UpdateVariant variant);

// Value of the best opposing StatePolicy against `policy` (terminal reward P(s > policy)).
double best_response_value(const TabularCMDP& cmdp, const StatePolicy& policy);

// 2 * best_response_value - 1.
double exploitability(const TabularCMDP& cmdp, const StatePolicy& policy);

// Row-wise mean of state policies (a heuristic evaluation target, not a mixture).
StatePolicy average_state_policy(const std::vector<StatePolicy>& iterates);

struct MultiTurnTrace {
  std::vector<double> exploit_last;  // exploitability of pi_t
  std::vector<double> exploit_avg;   // exploitability of the per-state average of pi_1..pi_t
  StatePolicy final_policy;
  StatePolicy average_policy;
};

MultiTurnTrace run_multi_turn(const TabularCMDP& cmdp, std::size_t iterations, double eta, UpdateVariant variant);

struct CmdpGenSpec {
  std::size_t horizon = 2;
  std::size_t max_states = 3;   // per step after the first, drawn from [2, max_states]
  std::size_t max_actions = 3;  // per state, drawn from [2, max_actions]
  std::uint64_t seed = 0;
};

// Transition rows uniform on the simplex, terminal preferences random_skew.
TabularCMDP make_random_cmdp(const CmdpGenSpec& spec);

// H = 1 instance whose action a leads deterministically to terminal state a.
TabularCMDP cmdp_from_matrix_game(const PreferenceGame& game);

}  // namespace prefgame
