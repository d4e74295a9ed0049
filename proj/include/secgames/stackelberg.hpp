#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "secgames/markov.hpp"

namespace secgames {

// Alternative stage-utility tables keyed by a (leader type, follower type)
// label pair.
struct PayoffVariant {
  std::string leader_type;
  std::string follower_type;
  std::vector<std::vector<Eigen::VectorXd>> stage_utility;  // [player][state](joint)
};

// Leader-commitment view of a two-player general-sum Markov game. When a
// type profile is set it selects one of the payoff variants; otherwise the
// base game's utilities apply.
class StackelbergMarkovGame {
public:
  StackelbergMarkovGame(MarkovGame base, std::size_t leader,
                        std::vector<PayoffVariant> variants = {},
                        std::optional<std::pair<std::string, std::string>> type_profile =
                            std::nullopt);

  const MarkovGame& base() const { return base_; }
  std::size_t leader() const { return leader_; }
  std::size_t follower() const { return 1 - leader_; }
  const std::vector<PayoffVariant>& variants() const { return variants_; }
  const std::optional<std::pair<std::string, std::string>>& type_profile() const {
    return type_profile_;
  }

  // Base game with the selected variant's utilities substituted in.
  const MarkovGame& effective_game() const { return effective_; }

private:
  MarkovGame base_;
  std::size_t leader_;
  std::vector<PayoffVariant> variants_;
  std::optional<std::pair<std::string, std::string>> type_profile_;
  MarkovGame effective_;
};

struct FollowerResponse {
  MarkovPolicy policy;          // deterministic, lowest index among optima
  std::vector<double> values;   // follower's optimal value per state
  // All actions within 1e-9 of the optimum, per state (ascending).
  std::vector<std::vector<std::size_t>> optimal_action_sets;
};

// Collapses the committed leader policy into the environment and solves
// the follower's MDP by value iteration (tolerance 1e-8).
FollowerResponse follower_best_response_mdp(const StackelbergMarkovGame& game,
                                            const MarkovPolicy& leader_policy);

enum class LeaderPolicySpace { pure_per_state };

struct LeaderSolution {
  MarkovPolicy leader_policy;
  double leader_value = 0.0;
  MarkovPolicy follower_policy;
  std::vector<std::size_t> leader_encoding;  // action index per state
};

// Enumerates pure stationary leader policies (product of per-state action
// counts bounded at 1e5). For each candidate the follower best-responds;
// follower ties resolve to the leader-worst optimal action set member,
// then lowest index. The leader objective is the discounted value at
// `start_state`; ties across candidates break lexicographically on the
// policy encoding.
LeaderSolution solve_leader_commitment(
    const StackelbergMarkovGame& game,
    LeaderPolicySpace space = LeaderPolicySpace::pure_per_state,
    std::size_t start_state = 0);

struct EpisodeStep {
  int stage = 0;
  std::size_t state = 0;
  std::size_t leader_action = 0;
  std::size_t follower_action = 0;
  double leader_payoff = 0.0;
  double follower_payoff = 0.0;
  std::size_t next_state = 0;
};

struct EpisodeTrace {
  std::vector<EpisodeStep> steps;
  double discounted_leader = 0.0;
  double discounted_follower = 0.0;
};

// Simulates the kernel for `horizon` stages under the given stationary
// policies. The seed fixes every draw; expectation over seeds approaches
// evaluate_discounted_value.
EpisodeTrace run_deception_episode(const StackelbergMarkovGame& game,
                                   const MarkovPolicy& leader_policy,
                                   const MarkovPolicy& follower_policy,
                                   std::size_t start_state, int horizon,
                                   std::uint64_t seed);

}  // namespace secgames
