#include "secgames/game_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "secgames/numeric.hpp"

namespace secgames {

namespace {

std::string dim_text(std::size_t a, std::size_t b) {
  std::ostringstream os;
  os << a << " vs " << b;
  return os.str();
}

}  // namespace

ActionSpace::ActionSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw InvalidInputError("action space must be nonempty");
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (!seen.insert(l).second)
      throw InvalidInputError("duplicate action label '" + l + "'");
  }
}

std::size_t ActionSpace::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return i;
  throw InvalidInputError("unknown action label '" + label + "'");
}

bool ActionSpace::contains(const std::string& label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

Distribution::Distribution(ActionSpace space, std::vector<double> probs)
    : space_(std::move(space)), probs_(std::move(probs)) {
  if (probs_.size() != space_.size())
    throw InvalidInputError("distribution length " + std::to_string(probs_.size()) +
                            " does not match action space size " +
                            std::to_string(space_.size()));
  double sum = 0.0;
  for (double& p : probs_) {
    if (!std::isfinite(p)) throw InvalidInputError("non-finite probability");
    if (p < 0.0) {
      // Forgive solver round-off at the magnitude we forgive sum noise.
      if (p > -kSimplexTolerance) p = 0.0;
      else
        throw InvalidInputError("negative probability " + std::to_string(p));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) >= kSimplexTolerance) {
    std::ostringstream os;
    os << "probabilities sum to " << sum << ", outside simplex tolerance "
       << kSimplexTolerance;
    throw InvalidInputError(os.str());
  }
  if (sum != 1.0) {
    for (double& p : probs_) p /= sum;
  }
}

Distribution Distribution::uniform(ActionSpace space) {
  const std::size_t n = space.size();
  return Distribution(std::move(space), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Distribution Distribution::point_mass(ActionSpace space, std::size_t index) {
  if (index >= space.size()) throw InvalidInputError("point mass index out of range");
  std::vector<double> p(space.size(), 0.0);
  p[index] = 1.0;
  return Distribution(std::move(space), std::move(p));
}

double Distribution::l1_distance(const Distribution& other) const {
  if (size() != other.size())
    throw InvalidInputError("L1 distance between distributions of different size");
  double d = 0.0;
  for (std::size_t i = 0; i < size(); ++i) d += std::abs(probs_[i] - other.probs_[i]);
  return d;
}

std::vector<std::size_t> Distribution::support(double tol) const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < probs_.size(); ++i)
    if (probs_[i] > tol) s.push_back(i);
  return s;
}

std::size_t Distribution::sample_index(double unit) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    acc += probs_[i];
    if (unit < acc) return i;
  }
  return probs_.size() - 1;
}

BimatrixGame::BimatrixGame(ActionSpace row, ActionSpace col, Eigen::MatrixXd rp,
                           Eigen::MatrixXd cp, bool zero_sum_flag)
    : row_space(std::move(row)),
      col_space(std::move(col)),
      row_payoff(std::move(rp)),
      col_payoff(std::move(cp)),
      zero_sum(zero_sum_flag) {
  const auto r = static_cast<Eigen::Index>(row_space.size());
  const auto c = static_cast<Eigen::Index>(col_space.size());
  if (row_payoff.rows() != r || row_payoff.cols() != c)
    throw InvalidInputError("row payoff shape mismatch: " +
                            dim_text(row_payoff.rows(), r) + " x " +
                            dim_text(row_payoff.cols(), c));
  if (col_payoff.rows() != r || col_payoff.cols() != c)
    throw InvalidInputError("column payoff shape mismatch");
  if (!row_payoff.allFinite() || !col_payoff.allFinite())
    throw InvalidInputError("payoff entries must be finite");
  if (zero_sum) {
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j)
        if (col_payoff(i, j) != -row_payoff(i, j))
          throw InvalidInputError(
              "zero-sum flag set but column payoff is not the exact negation");
  }
}

BimatrixGame BimatrixGame::make_zero_sum(ActionSpace row, ActionSpace col,
                                         Eigen::MatrixXd row_payoff) {
  Eigen::MatrixXd col_payoff = -row_payoff;
  return BimatrixGame(std::move(row), std::move(col), std::move(row_payoff),
                      std::move(col_payoff), true);
}

PayoffTensor::PayoffTensor(std::vector<ActionSpace> spaces,
                           std::vector<std::vector<double>> utilities)
    : spaces_(std::move(spaces)), utilities_(std::move(utilities)) {
  if (spaces_.size() < 2) throw InvalidInputError("payoff tensor needs at least 2 players");
  if (utilities_.size() != spaces_.size())
    throw InvalidInputError("need one utility table per player");
  joint_count_ = 1;
  for (const auto& s : spaces_) joint_count_ *= s.size();
  for (const auto& u : utilities_) {
    if (u.size() != joint_count_)
      throw InvalidInputError("utility table size " + std::to_string(u.size()) +
                              " does not match joint action count " +
                              std::to_string(joint_count_));
    for (double v : u)
      if (!std::isfinite(v)) throw InvalidInputError("utility entries must be finite");
  }
}

PayoffTensor PayoffTensor::from_bimatrix(const BimatrixGame& game) {
  const std::size_t r = game.rows(), c = game.cols();
  std::vector<double> u0(r * c), u1(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      u0[i * c + j] = game.row_payoff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      u1[i * c + j] = game.col_payoff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  return PayoffTensor({game.row_space, game.col_space}, {std::move(u0), std::move(u1)});
}

std::size_t PayoffTensor::flat_index(const std::vector<std::size_t>& joint) const {
  if (joint.size() != spaces_.size())
    throw InvalidInputError("joint action arity mismatch");
  std::size_t flat = 0;
  for (std::size_t p = 0; p < joint.size(); ++p) {
    if (joint[p] >= spaces_[p].size())
      throw InvalidInputError("joint action index out of range");
    flat = flat * spaces_[p].size() + joint[p];
  }
  return flat;
}

std::vector<std::size_t> PayoffTensor::unflatten(std::size_t flat) const {
  std::vector<std::size_t> joint(spaces_.size());
  for (std::size_t p = spaces_.size(); p-- > 0;) {
    joint[p] = flat % spaces_[p].size();
    flat /= spaces_[p].size();
  }
  return joint;
}

void ProspectParams::validate() const {
  if (!(gain_exponent > 0.0 && gain_exponent <= 1.0))
    throw InvalidInputError("gain exponent must be in (0, 1]");
  if (!(loss_exponent > 0.0 && loss_exponent <= 1.0))
    throw InvalidInputError("loss exponent must be in (0, 1]");
  if (!(loss_aversion >= 1.0)) throw InvalidInputError("loss aversion must be >= 1");
  if (!std::isfinite(reference_point))
    throw InvalidInputError("reference point must be finite");
}

namespace {

void check_profile(const PayoffTensor& game, const std::vector<Distribution>& profile) {
  if (profile.size() != game.player_count())
    throw InvalidInputError("profile has " + std::to_string(profile.size()) +
                            " strategies for " + std::to_string(game.player_count()) +
                            " players");
  for (std::size_t p = 0; p < profile.size(); ++p)
    if (profile[p].space() != game.space(p))
      throw InvalidInputError("strategy " + std::to_string(p) +
                              " is over the wrong action space");
}

}  // namespace

double expected_utility(const PayoffTensor& game,
                        const std::vector<Distribution>& profile,
                        std::size_t player) {
  check_profile(game, profile);
  if (player >= game.player_count()) throw InvalidInputError("player index out of range");
  ExactSum sum;
  const std::size_t n = game.joint_count();
  for (std::size_t flat = 0; flat < n; ++flat) {
    const auto joint = game.unflatten(flat);
    double w = 1.0;
    for (std::size_t p = 0; p < joint.size(); ++p) w *= profile[p].prob(joint[p]);
    sum.add(w * game.utility(player, flat));
  }
  return sum.value();
}

BestResponseResult best_response(const BimatrixGame& game,
                                 const Distribution& opponent_mix, Side player) {
  const Eigen::MatrixXd& own =
      player == Side::row ? game.row_payoff : game.col_payoff;
  const ActionSpace& opp_space =
      player == Side::row ? game.col_space : game.row_space;
  if (opponent_mix.space() != opp_space)
    throw InvalidInputError("opponent mix is over the wrong action space");

  const std::size_t own_n = player == Side::row ? game.rows() : game.cols();
  std::vector<double> values(own_n);
  for (std::size_t a = 0; a < own_n; ++a) {
    ExactSum sum;
    for (std::size_t b = 0; b < opponent_mix.size(); ++b) {
      const double u = player == Side::row
                           ? own(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))
                           : own(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
      sum.add(opponent_mix.prob(b) * u);
    }
    values[a] = sum.value();
  }
  BestResponseResult result;
  result.value = *std::max_element(values.begin(), values.end());
  for (std::size_t a = 0; a < own_n; ++a)
    if (values[a] == result.value) result.actions.push_back(a);
  return result;
}

DeviationReport is_epsilon_nash(const PayoffTensor& game,
                                const std::vector<Distribution>& profile,
                                double epsilon) {
  if (epsilon < 0.0) throw InvalidInputError("epsilon must be nonnegative");
  check_profile(game, profile);

  DeviationReport report;
  report.gains.resize(game.player_count());
  for (std::size_t player = 0; player < game.player_count(); ++player) {
    const double current = expected_utility(game, profile, player);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < game.space(player).size(); ++a) {
      // Expected utility of the pure deviation a against the others' mixes.
      ExactSum sum;
      const std::size_t n = game.joint_count();
      for (std::size_t flat = 0; flat < n; ++flat) {
        const auto joint = game.unflatten(flat);
        if (joint[player] != a) continue;
        double w = 1.0;
        for (std::size_t p = 0; p < joint.size(); ++p)
          if (p != player) w *= profile[p].prob(joint[p]);
        sum.add(w * game.utility(player, flat));
      }
      best = std::max(best, sum.value());
    }
    report.gains[player] = best - current;
  }
  report.epsilon_nash = std::all_of(report.gains.begin(), report.gains.end(),
                                    [&](double g) { return g <= epsilon; });
  return report;
}

namespace {

std::vector<double> softmax(const Eigen::VectorXd& scores) {
  const double top = scores.maxCoeff();
  std::vector<double> out(static_cast<std::size_t>(scores.size()));
  double z = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    out[static_cast<std::size_t>(i)] = std::exp(scores(i) - top);
    z += out[static_cast<std::size_t>(i)];
  }
  for (double& v : out) v /= z;
  return out;
}

}  // namespace

std::pair<Distribution, Distribution> quantal_response_equilibrium(
    const BimatrixGame& game, double rationality, double damping, int max_iter) {
  if (rationality < 0.0) throw InvalidInputError("rationality must be >= 0");
  if (!(damping > 0.0 && damping <= 1.0))
    throw InvalidInputError("damping must be in (0, 1]");
  if (max_iter < 1) throw InvalidInputError("max_iter must be >= 1");

  const auto r = static_cast<Eigen::Index>(game.rows());
  const auto c = static_cast<Eigen::Index>(game.cols());
  Eigen::VectorXd p = Eigen::VectorXd::Constant(r, 1.0 / static_cast<double>(r));
  Eigen::VectorXd q = Eigen::VectorXd::Constant(c, 1.0 / static_cast<double>(c));

  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd row_scores = rationality * (game.row_payoff * q);
    const Eigen::VectorXd col_scores = rationality * (game.col_payoff.transpose() * p);
    const auto pr = softmax(row_scores);
    const auto qr = softmax(col_scores);

    double delta = 0.0;
    for (Eigen::Index i = 0; i < r; ++i) {
      const double next = (1.0 - damping) * p(i) + damping * pr[static_cast<std::size_t>(i)];
      delta = std::max(delta, std::abs(next - p(i)));
      p(i) = next;
    }
    for (Eigen::Index j = 0; j < c; ++j) {
      const double next = (1.0 - damping) * q(j) + damping * qr[static_cast<std::size_t>(j)];
      delta = std::max(delta, std::abs(next - q(j)));
      q(j) = next;
    }
    if (delta < 1e-10) {
      std::vector<double> pv(p.data(), p.data() + p.size());
      std::vector<double> qv(q.data(), q.data() + q.size());
      return {Distribution(game.row_space, std::move(pv)),
              Distribution(game.col_space, std::move(qv))};
    }
  }
  std::vector<double> last(p.data(), p.data() + p.size());
  last.insert(last.end(), q.data(), q.data() + q.size());
  throw ConvergenceFailure(
      "quantal response iteration did not converge in " + std::to_string(max_iter) +
          " iterations",
      std::move(last));
}

std::vector<std::pair<Distribution, Distribution>> level_k_strategies(
    const BimatrixGame& game, int k) {
  if (k < 0) throw InvalidInputError("k must be >= 0");
  std::vector<std::pair<Distribution, Distribution>> levels;
  levels.reserve(static_cast<std::size_t>(k) + 1);
  levels.emplace_back(Distribution::uniform(game.row_space),
                      Distribution::uniform(game.col_space));
  for (int level = 1; level <= k; ++level) {
    const auto& prev = levels.back();
    const auto row_br = best_response(game, prev.second, Side::row);
    const auto col_br = best_response(game, prev.first, Side::col);
    levels.emplace_back(Distribution::point_mass(game.row_space, row_br.actions.front()),
                        Distribution::point_mass(game.col_space, col_br.actions.front()));
  }
  return levels;
}

Eigen::MatrixXd prospect_transform(const Eigen::MatrixXd& payoffs,
                                   const ProspectParams& params) {
  params.validate();
  Eigen::MatrixXd out(payoffs.rows(), payoffs.cols());
  for (Eigen::Index i = 0; i < payoffs.rows(); ++i)
    for (Eigen::Index j = 0; j < payoffs.cols(); ++j) {
      const double z = payoffs(i, j) - params.reference_point;
      out(i, j) = z >= 0.0 ? std::pow(z, params.gain_exponent)
                           : -params.loss_aversion * std::pow(-z, params.loss_exponent);
    }
  return out;
}

}  // namespace secgames
