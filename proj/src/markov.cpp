#include "secgames/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "secgames/equilibrium.hpp"

namespace secgames {

namespace {
constexpr double kRowSumTol = 1e-9;
constexpr double kPolicyEvalResidual = 1e-10;
constexpr double kShapleyTol = 1e-8;
constexpr int kShapleyCap = 100000;
}  // namespace

MarkovGame::MarkovGame(std::vector<std::string> states,
                       std::vector<std::vector<ActionSpace>> action_spaces,
                       std::vector<Eigen::MatrixXd> transition,
                       std::vector<std::vector<Eigen::VectorXd>> stage_utility,
                       double discount, std::optional<int> horizon,
                       std::optional<ObservationModel> observation)
    : states_(std::move(states)),
      action_spaces_(std::move(action_spaces)),
      transition_(std::move(transition)),
      stage_utility_(std::move(stage_utility)),
      discount_(discount),
      horizon_(horizon),
      observation_(std::move(observation)) {
  if (states_.empty()) throw InvalidInputError("markov game needs at least one state");
  if (action_spaces_.empty()) throw InvalidInputError("markov game needs players");
  for (const auto& per_state : action_spaces_)
    if (per_state.size() != states_.size())
      throw InvalidInputError("action spaces must cover every state");
  if (horizon_.has_value()) {
    if (*horizon_ < 1) throw InvalidInputError("finite horizon must be >= 1");
    if (!(discount_ > 0.0 && discount_ <= 1.0))
      throw InvalidInputError("discount must be in (0, 1] for finite horizon");
  } else if (!(discount_ > 0.0 && discount_ < 1.0)) {
    throw InvalidInputError("discount must be strictly inside (0, 1) for infinite horizon");
  }
  if (transition_.size() != states_.size())
    throw InvalidInputError("need one transition block per state");
  for (std::size_t s = 0; s < states_.size(); ++s) {
    const auto jc = static_cast<Eigen::Index>(joint_count(s));
    const auto& t = transition_[s];
    if (t.rows() != jc || t.cols() != static_cast<Eigen::Index>(states_.size()))
      throw InvalidInputError("transition block shape mismatch at state " + states_[s]);
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      double sum = 0.0;
      for (Eigen::Index c = 0; c < t.cols(); ++c) {
        if (t(r, c) < 0.0 || !std::isfinite(t(r, c)))
          throw InvalidInputError("transition probabilities must be in [0, 1]");
        sum += t(r, c);
      }
      if (std::abs(sum - 1.0) >= kRowSumTol)
        throw InvalidInputError("transition row at state " + states_[s] +
                                " sums to " + std::to_string(sum));
    }
  }
  if (stage_utility_.size() != player_count())
    throw InvalidInputError("need one stage-utility table per player");
  for (std::size_t p = 0; p < player_count(); ++p) {
    if (stage_utility_[p].size() != states_.size())
      throw InvalidInputError("stage utilities must cover every state");
    for (std::size_t s = 0; s < states_.size(); ++s) {
      if (stage_utility_[p][s].size() != static_cast<Eigen::Index>(joint_count(s)))
        throw InvalidInputError("stage utility length mismatch at state " + states_[s]);
      if (!stage_utility_[p][s].allFinite())
        throw InvalidInputError("stage utilities must be finite");
    }
  }
  if (observation_.has_value()) {
    if (observation_->kernels.size() != player_count())
      throw InvalidInputError("observation model needs one kernel per player");
    for (const auto& per_state : observation_->kernels) {
      if (per_state.size() != states_.size())
        throw InvalidInputError("observation kernels must cover every state");
      for (std::size_t s = 0; s < states_.size(); ++s) {
        const auto& k = per_state[s];
        if (k.rows() != static_cast<Eigen::Index>(joint_count(s)) ||
            k.cols() != static_cast<Eigen::Index>(observation_->observation_labels.size()))
          throw InvalidInputError("observation kernel shape mismatch");
        for (Eigen::Index r = 0; r < k.rows(); ++r) {
          if (std::abs(k.row(r).sum() - 1.0) >= kRowSumTol)
            throw InvalidInputError("observation kernel rows must sum to 1");
        }
      }
    }
  }
}

std::size_t MarkovGame::joint_count(std::size_t state) const {
  std::size_t count = 1;
  for (const auto& per_state : action_spaces_) count *= per_state.at(state).size();
  return count;
}

std::size_t MarkovGame::joint_index(std::size_t state,
                                    const std::vector<std::size_t>& actions) const {
  if (actions.size() != player_count()) throw InvalidInputError("joint action arity mismatch");
  std::size_t flat = 0;
  for (std::size_t p = 0; p < actions.size(); ++p) {
    const std::size_t n = action_spaces_[p].at(state).size();
    if (actions[p] >= n) throw InvalidInputError("action index out of range");
    flat = flat * n + actions[p];
  }
  return flat;
}

std::vector<std::size_t> MarkovGame::joint_unflatten(std::size_t state,
                                                     std::size_t flat) const {
  std::vector<std::size_t> actions(player_count());
  for (std::size_t p = player_count(); p-- > 0;) {
    const std::size_t n = action_spaces_[p].at(state).size();
    actions[p] = flat % n;
    flat /= n;
  }
  return actions;
}

std::size_t MarkovGame::state_index(const std::string& label) const {
  for (std::size_t s = 0; s < states_.size(); ++s)
    if (states_[s] == label) return s;
  throw InvalidInputError("unknown state label '" + label + "'");
}

bool MarkovGame::zero_sum_stage_utilities(double tol) const {
  if (player_count() != 2) return false;
  for (std::size_t s = 0; s < states_.size(); ++s)
    for (Eigen::Index j = 0; j < stage_utility_[0][s].size(); ++j)
      if (std::abs(stage_utility_[0][s](j) + stage_utility_[1][s](j)) > tol) return false;
  return true;
}

MarkovGame MarkovGame::with_stage_utilities(
    std::vector<std::vector<Eigen::VectorXd>> utilities) const {
  return MarkovGame(states_, action_spaces_, transition_, std::move(utilities),
                    discount_, horizon_, observation_);
}

namespace {

void check_policies(const MarkovGame& game, const std::vector<MarkovPolicy>& policies) {
  if (policies.size() != game.player_count())
    throw InvalidInputError("need one policy per player");
  for (std::size_t p = 0; p < policies.size(); ++p) {
    if (policies[p].per_state.size() != game.state_count())
      throw InvalidInputError("policy must cover every state");
    for (std::size_t s = 0; s < game.state_count(); ++s)
      if (policies[p].per_state[s].space() != game.action_space(p, s))
        throw InvalidInputError("policy distribution over wrong action space");
  }
}

// Probability of the flattened joint action under the product of the
// players' per-state mixes.
double joint_probability(const MarkovGame& game, const std::vector<MarkovPolicy>& policies,
                         std::size_t state, std::size_t joint) {
  const auto actions = game.joint_unflatten(state, joint);
  double w = 1.0;
  for (std::size_t p = 0; p < actions.size(); ++p)
    w *= policies[p].per_state[state].prob(actions[p]);
  return w;
}

struct InducedChain {
  Eigen::MatrixXd transition;  // state x state
  Eigen::VectorXd reward;      // per state, for one player
};

InducedChain induce_chain(const MarkovGame& game, const std::vector<MarkovPolicy>& policies,
                          std::size_t player) {
  const auto n = static_cast<Eigen::Index>(game.state_count());
  InducedChain chain{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  for (std::size_t s = 0; s < game.state_count(); ++s) {
    for (std::size_t joint = 0; joint < game.joint_count(s); ++joint) {
      const double w = joint_probability(game, policies, s, joint);
      if (w == 0.0) continue;
      chain.reward(static_cast<Eigen::Index>(s)) += w * game.stage_utility(player, s, joint);
      chain.transition.row(static_cast<Eigen::Index>(s)) +=
          w * game.transition(s).row(static_cast<Eigen::Index>(joint));
    }
  }
  return chain;
}

}  // namespace

Eigen::VectorXd policy_state_values(const MarkovGame& game,
                                    const std::vector<MarkovPolicy>& policies,
                                    std::size_t player) {
  check_policies(game, policies);
  if (player >= game.player_count()) throw InvalidInputError("player index out of range");
  const auto chain = induce_chain(game, policies, player);
  const auto n = static_cast<Eigen::Index>(game.state_count());
  const double gamma = game.discount();

  if (game.infinite_horizon()) {
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - gamma * chain.transition;
    const Eigen::VectorXd v = system.partialPivLu().solve(chain.reward);
    const double residual = (system * v - chain.reward).lpNorm<Eigen::Infinity>();
    if (!(residual < kPolicyEvalResidual * (1.0 + chain.reward.lpNorm<Eigen::Infinity>())))
      throw Error("policy evaluation system solved with residual " +
                  std::to_string(residual));
    return v;
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < *game.horizon(); ++k) v = chain.reward + gamma * (chain.transition * v);
  return v;
}

double evaluate_discounted_value(const MarkovGame& game,
                                 const std::vector<MarkovPolicy>& policies,
                                 std::size_t start_state, std::size_t player) {
  if (start_state >= game.state_count()) throw InvalidInputError("start state out of range");
  return policy_state_values(game, policies, player)(static_cast<Eigen::Index>(start_state));
}

namespace {

// Stage matrix at `state` with continuation values folded in:
// Q[a0][a1] = u(s, a) + gamma * E[V(s')].
BimatrixGame continuation_stage_game(const MarkovGame& game, std::size_t state,
                                     const Eigen::VectorXd& values) {
  const auto& row_space = game.action_space(0, state);
  const auto& col_space = game.action_space(1, state);
  const auto r = static_cast<Eigen::Index>(row_space.size());
  const auto c = static_cast<Eigen::Index>(col_space.size());
  Eigen::MatrixXd q(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) {
      const std::size_t joint = game.joint_index(
          state, {static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
      const double cont =
          game.transition(state).row(static_cast<Eigen::Index>(joint)).dot(values);
      q(i, j) = game.stage_utility(0, state, joint) + game.discount() * cont;
    }
  return BimatrixGame::make_zero_sum(row_space, col_space, std::move(q));
}

}  // namespace

ShapleyResult shapley_value_iteration(const MarkovGame& game) {
  if (game.player_count() != 2)
    throw InvalidInputError("shapley_value_iteration requires two players");
  if (!game.zero_sum_stage_utilities())
    throw InvalidInputError("shapley_value_iteration requires zero-sum stage utilities");
  if (!game.infinite_horizon())
    throw InvalidInputError(
        "shapley_value_iteration is the infinite-horizon solver; use "
        "backward_induction_zero_sum for finite horizons");

  const auto n = static_cast<Eigen::Index>(game.state_count());
  Eigen::VectorXd values = Eigen::VectorXd::Zero(n);
  ShapleyResult result;
  std::vector<EquilibriumResult> stage_solutions;

  for (int sweep = 0; sweep < kShapleyCap; ++sweep) {
    Eigen::VectorXd next(n);
    stage_solutions.clear();
    for (std::size_t s = 0; s < game.state_count(); ++s) {
      auto stage = continuation_stage_game(game, s, values);
      auto eq = solve_zero_sum(stage);
      next(static_cast<Eigen::Index>(s)) = eq.game_value();
      stage_solutions.push_back(std::move(eq));
    }
    const double delta = (next - values).lpNorm<Eigen::Infinity>();
    result.sweep_deltas.push_back(delta);
    values = next;
    ++result.sweeps;
    if (delta < kShapleyTol) {
      result.values.assign(values.data(), values.data() + values.size());
      result.policies.resize(2);
      for (const auto& eq : stage_solutions) {
        result.policies[0].per_state.push_back(eq.row_strategy);
        result.policies[1].per_state.push_back(eq.col_strategy);
      }
      return result;
    }
  }
  std::vector<double> last(values.data(), values.data() + values.size());
  throw ConvergenceFailure("shapley value iteration exceeded sweep cap", std::move(last));
}

MarkovPerfectReport verify_markov_perfect(const MarkovGame& game,
                                          const std::vector<MarkovPolicy>& policies,
                                          double epsilon) {
  if (game.player_count() != 2)
    throw InvalidInputError("verify_markov_perfect requires two players");
  if (!game.infinite_horizon())
    throw InvalidInputError("verify_markov_perfect checks stationary policies on the "
                            "infinite horizon");
  if (epsilon < 0.0) throw InvalidInputError("epsilon must be nonnegative");
  check_policies(game, policies);

  MarkovPerfectReport report;
  report.gains.assign(game.player_count(),
                      std::vector<double>(game.state_count(), 0.0));
  double worst = 0.0;
  for (std::size_t player = 0; player < game.player_count(); ++player) {
    const Eigen::VectorXd values = policy_state_values(game, policies, player);
    const std::size_t other = 1 - player;
    for (std::size_t s = 0; s < game.state_count(); ++s) {
      const std::size_t own_n = game.action_space(player, s).size();
      const std::size_t opp_n = game.action_space(other, s).size();
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < own_n; ++a) {
        double dev = 0.0;
        for (std::size_t b = 0; b < opp_n; ++b) {
          std::vector<std::size_t> joint(2);
          joint[player] = a;
          joint[other] = b;
          const std::size_t flat = game.joint_index(s, joint);
          const double w = policies[other].per_state[s].prob(b);
          if (w == 0.0) continue;
          const double cont =
              game.transition(s).row(static_cast<Eigen::Index>(flat)).dot(values);
          dev += w * (game.stage_utility(player, s, flat) + game.discount() * cont);
        }
        best = std::max(best, dev);
      }
      const double gain = best - values(static_cast<Eigen::Index>(s));
      report.gains[player][s] = gain;
      worst = std::max(worst, gain);
    }
  }
  report.markov_perfect = worst <= epsilon;
  return report;
}

BackwardInductionResult backward_induction_zero_sum(const MarkovGame& game) {
  if (game.player_count() != 2)
    throw InvalidInputError("backward induction requires two players");
  if (!game.zero_sum_stage_utilities())
    throw InvalidInputError("backward induction requires zero-sum stage utilities");
  if (game.infinite_horizon())
    throw InvalidInputError("backward induction requires a finite horizon");

  const int horizon = *game.horizon();
  const auto n = static_cast<Eigen::Index>(game.state_count());
  Eigen::VectorXd values = Eigen::VectorXd::Zero(n);

  BackwardInductionResult result;
  result.stage_values.assign(static_cast<std::size_t>(horizon), {});
  result.stage_policies.assign(static_cast<std::size_t>(horizon), {});

  for (int k = horizon - 1; k >= 0; --k) {
    Eigen::VectorXd next(n);
    std::vector<MarkovPolicy> stage_policy(2);
    for (std::size_t s = 0; s < game.state_count(); ++s) {
      auto stage = continuation_stage_game(game, s, values);
      auto eq = solve_zero_sum(stage);
      next(static_cast<Eigen::Index>(s)) = eq.game_value();
      stage_policy[0].per_state.push_back(eq.row_strategy);
      stage_policy[1].per_state.push_back(eq.col_strategy);
    }
    values = next;
    result.stage_values[static_cast<std::size_t>(k)].assign(values.data(),
                                                            values.data() + values.size());
    result.stage_policies[static_cast<std::size_t>(k)] = std::move(stage_policy);
  }
  return result;
}

}  // namespace secgames
