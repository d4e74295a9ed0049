#pragma once

#include <optional>
#include <string>
#include <vector>

#include "secgames/game_core.hpp"

namespace secgames {

// Per-player observation kernels, indexed [state][joint action] over
// observation labels. Carried so game documents round-trip; the
// complete-information solvers never read it.
struct ObservationModel {
  std::vector<std::string> observation_labels;
  // kernels[player][state] has joint_count(state) stochastic rows.
  std::vector<std::vector<Eigen::MatrixXd>> kernels;
};

// Discounted stochastic game. Joint actions are flattened row-major over
// players: for 2 players, joint = a0 * |A1(s)| + a1.
class MarkovGame {
public:
  MarkovGame(std::vector<std::string> states,
             std::vector<std::vector<ActionSpace>> action_spaces,
             std::vector<Eigen::MatrixXd> transition,
             std::vector<std::vector<Eigen::VectorXd>> stage_utility,
             double discount, std::optional<int> horizon = std::nullopt,
             std::optional<ObservationModel> observation = std::nullopt);

  const std::vector<std::string>& states() const { return states_; }
  std::size_t state_count() const { return states_.size(); }
  std::size_t player_count() const { return action_spaces_.size(); }
  const ActionSpace& action_space(std::size_t player, std::size_t state) const {
    return action_spaces_.at(player).at(state);
  }
  std::size_t joint_count(std::size_t state) const;
  std::size_t joint_index(std::size_t state, const std::vector<std::size_t>& actions) const;
  std::vector<std::size_t> joint_unflatten(std::size_t state, std::size_t flat) const;

  // transition(s) row `joint` is the distribution over successor states.
  const Eigen::MatrixXd& transition(std::size_t state) const { return transition_.at(state); }
  double stage_utility(std::size_t player, std::size_t state, std::size_t joint) const {
    return stage_utility_.at(player).at(state)(static_cast<Eigen::Index>(joint));
  }
  const std::vector<std::vector<Eigen::VectorXd>>& stage_utilities() const {
    return stage_utility_;
  }
  double discount() const { return discount_; }
  std::optional<int> horizon() const { return horizon_; }
  bool infinite_horizon() const { return !horizon_.has_value(); }
  const std::optional<ObservationModel>& observation() const { return observation_; }

  std::size_t state_index(const std::string& label) const;
  bool zero_sum_stage_utilities(double tol = 1e-12) const;

  // Same game with the utility tables swapped out (used by the
  // leader-commitment layer to select payoff variants).
  MarkovGame with_stage_utilities(std::vector<std::vector<Eigen::VectorXd>> utilities) const;

private:
  std::vector<std::string> states_;
  std::vector<std::vector<ActionSpace>> action_spaces_;  // [player][state]
  std::vector<Eigen::MatrixXd> transition_;              // [state](joint x state)
  std::vector<std::vector<Eigen::VectorXd>> stage_utility_;  // [player][state](joint)
  double discount_;
  std::optional<int> horizon_;
  std::optional<ObservationModel> observation_;
};

// Stationary behavioral policy: one distribution per state.
struct MarkovPolicy {
  std::vector<Distribution> per_state;
};

// Discounted value of `player` at `start_state` under stationary
// policies. Infinite horizon solves the linear policy-evaluation system
// (residual < 1e-10); finite horizon K sums K stages by backward
// recursion.
double evaluate_discounted_value(const MarkovGame& game,
                                 const std::vector<MarkovPolicy>& policies,
                                 std::size_t start_state, std::size_t player);

// Per-state values for all states at once (same computation as above).
Eigen::VectorXd policy_state_values(const MarkovGame& game,
                                    const std::vector<MarkovPolicy>& policies,
                                    std::size_t player);

struct ShapleyResult {
  std::vector<double> values;        // converged state values (row player)
  std::vector<MarkovPolicy> policies;  // [player], stationary saddle policies
  std::vector<double> sweep_deltas;  // sup-norm change per sweep
  int sweeps = 0;
};

// Zero-sum value iteration: V <- val(stage game + discounted continuation),
// each state solved exactly by solve_zero_sum. Stops when the sup-norm
// change drops below 1e-8; cap 1e5 sweeps.
ShapleyResult shapley_value_iteration(const MarkovGame& game);

struct MarkovPerfectReport {
  bool markov_perfect = false;
  // gains[player][state]: best one-shot deviation gain.
  std::vector<std::vector<double>> gains;
};

// One-shot deviation check at every state against continuation values of
// the given stationary policies.
MarkovPerfectReport verify_markov_perfect(const MarkovGame& game,
                                          const std::vector<MarkovPolicy>& policies,
                                          double epsilon);

struct BackwardInductionResult {
  // stage_values[k][state] for k = 0..K-1; stage 0 is the root.
  std::vector<std::vector<double>> stage_values;
  // stage_policies[k][player].per_state
  std::vector<std::vector<MarkovPolicy>> stage_policies;
};

// Finite-horizon zero-sum solver: K sweeps of the Shapley operator with
// the stage index in the policy key.
BackwardInductionResult backward_induction_zero_sum(const MarkovGame& game);

}  // namespace secgames
