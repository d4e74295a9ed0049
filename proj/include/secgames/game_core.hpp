#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "secgames/errors.hpp"

namespace secgames {

// Tolerance used when validating probability vectors. Sums within this
// distance of 1 are renormalized; anything further off is rejected.
inline constexpr double kSimplexTolerance = 1e-9;

// Ordered, canonical set of action labels. The order fixes the index of
// every action in payoff matrices and probability vectors.
class ActionSpace {
public:
  explicit ActionSpace(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }

  // Throws InvalidInputError for unknown labels.
  std::size_t index_of(const std::string& label) const;
  bool contains(const std::string& label) const;

  bool operator==(const ActionSpace& other) const { return labels_ == other.labels_; }
  bool operator!=(const ActionSpace& other) const { return !(*this == other); }

private:
  std::vector<std::string> labels_;
};

// Point on the probability simplex over an ActionSpace.
class Distribution {
public:
  Distribution(ActionSpace space, std::vector<double> probs);

  static Distribution uniform(ActionSpace space);
  static Distribution point_mass(ActionSpace space, std::size_t index);

  const ActionSpace& space() const { return space_; }
  const std::vector<double>& probs() const { return probs_; }
  double prob(std::size_t i) const { return probs_.at(i); }
  std::size_t size() const { return probs_.size(); }

  double l1_distance(const Distribution& other) const;
  std::vector<std::size_t> support(double tol = 1e-12) const;

  // Deterministic inverse-CDF sample given a uniform draw in [0, 1).
  std::size_t sample_index(double unit) const;

  bool operator==(const Distribution& other) const {
    return space_ == other.space_ && probs_ == other.probs_;
  }

private:
  ActionSpace space_;
  std::vector<double> probs_;
};

// Two-player game in normal form. Row player is player 1. When zero_sum
// is set the column payoff must equal the elementwise negation exactly.
struct BimatrixGame {
  ActionSpace row_space;
  ActionSpace col_space;
  Eigen::MatrixXd row_payoff;
  Eigen::MatrixXd col_payoff;
  bool zero_sum = false;

  BimatrixGame(ActionSpace row, ActionSpace col, Eigen::MatrixXd row_payoff,
               Eigen::MatrixXd col_payoff, bool zero_sum_flag);

  static BimatrixGame make_zero_sum(ActionSpace row, ActionSpace col,
                                    Eigen::MatrixXd row_payoff);

  std::size_t rows() const { return row_space.size(); }
  std::size_t cols() const { return col_space.size(); }
};

// N-player payoff tensor, one flat row-major utility table per player.
class PayoffTensor {
public:
  PayoffTensor(std::vector<ActionSpace> spaces,
               std::vector<std::vector<double>> utilities);

  static PayoffTensor from_bimatrix(const BimatrixGame& game);

  std::size_t player_count() const { return spaces_.size(); }
  const ActionSpace& space(std::size_t player) const { return spaces_.at(player); }
  std::size_t joint_count() const { return joint_count_; }

  std::size_t flat_index(const std::vector<std::size_t>& joint) const;
  std::vector<std::size_t> unflatten(std::size_t flat) const;
  double utility(std::size_t player, std::size_t flat) const {
    return utilities_.at(player).at(flat);
  }
  double utility(std::size_t player, const std::vector<std::size_t>& joint) const {
    return utilities_.at(player).at(flat_index(joint));
  }

private:
  std::vector<ActionSpace> spaces_;
  std::vector<std::vector<double>> utilities_;
  std::size_t joint_count_ = 0;
};

enum class Side { row, col };

// Prospect-theory valuation parameters. Defaults are the conventional
// literature values.
struct ProspectParams {
  double gain_exponent = 0.88;
  double loss_exponent = 0.88;
  double loss_aversion = 2.25;
  double reference_point = 0.0;

  void validate() const;
};

// Expected utility of `player` under a mixed profile, Sum over joint
// actions of the product of marginals times the utility. Accumulated with
// exact summation so symmetric terms cancel to a true zero.
double expected_utility(const PayoffTensor& game,
                        const std::vector<Distribution>& profile,
                        std::size_t player);

struct BestResponseResult {
  double value = 0.0;
  std::vector<std::size_t> actions;  // all argmax indices, ascending
};

BestResponseResult best_response(const BimatrixGame& game,
                                 const Distribution& opponent_mix, Side player);

struct DeviationReport {
  bool epsilon_nash = false;
  std::vector<double> gains;  // best pure-deviation gain per player
};

DeviationReport is_epsilon_nash(const PayoffTensor& game,
                                const std::vector<Distribution>& profile,
                                double epsilon);

// Damped logit fixed-point iteration. Throws ConvergenceFailure carrying
// the concatenated (row, col) iterate when max_iter is exhausted.
std::pair<Distribution, Distribution> quantal_response_equilibrium(
    const BimatrixGame& game, double rationality, double damping = 0.5,
    int max_iter = 10000);

// Levels 0..k. Level 0 is uniform for both sides; level j is the pure
// best response (lowest index on ties) to the level j-1 opponent.
std::vector<std::pair<Distribution, Distribution>> level_k_strategies(
    const BimatrixGame& game, int k);

Eigen::MatrixXd prospect_transform(const Eigen::MatrixXd& payoffs,
                                   const ProspectParams& params);

}  // namespace secgames
