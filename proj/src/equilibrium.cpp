#include "secgames/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace secgames {

namespace {

constexpr double kVerifyTol = 1e-9;
constexpr double kNegativeProbFloor = -1e-10;
constexpr double kSupportEnumEps = 1e-8;
constexpr double kFictitiousPlayEps = 1e-4;
constexpr long kFictitiousPlayCap = 1000000;

// Next k-combination of {0..n-1} in lexicographic order.
bool next_combination(std::vector<std::size_t>& comb, std::size_t n) {
  const std::size_t k = comb.size();
  for (std::size_t i = k; i-- > 0;) {
    if (comb[i] < n - k + i) {
      ++comb[i];
      for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::vector<std::size_t> first_combination(std::size_t k) {
  std::vector<std::size_t> comb(k);
  for (std::size_t i = 0; i < k; ++i) comb[i] = i;
  return comb;
}

struct LinearSolveOutcome {
  bool consistent = false;
  bool unique = false;
  Eigen::VectorXd solution;
};

LinearSolveOutcome solve_linear(const Eigen::MatrixXd& m, const Eigen::VectorXd& b) {
  LinearSolveOutcome out;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  const Eigen::VectorXd x = lu.solve(b);
  const double residual = (m * x - b).lpNorm<Eigen::Infinity>();
  out.consistent = residual <= 1e-9 * (1.0 + b.lpNorm<Eigen::Infinity>());
  out.unique = lu.rank() == m.cols();
  out.solution = x;
  return out;
}

struct SupportCandidate {
  std::vector<double> row_probs;
  std::vector<double> col_probs;
  double row_value = 0.0;
  double col_value = 0.0;
  bool degenerate_marker = false;
};

// Solves the indifference systems for one equal-size support pair and
// verifies global best-response conditions. Returns nothing when the pair
// does not carry an equilibrium. Sets *saw_degenerate_system when a
// singular-but-consistent system was encountered (continuum of solutions).
std::optional<SupportCandidate> try_support_pair(
    const BimatrixGame& game, const std::vector<std::size_t>& rows,
    const std::vector<std::size_t>& cols, bool* saw_degenerate_system) {
  const std::size_t k = rows.size();
  const auto& a = game.row_payoff;
  const auto& b = game.col_payoff;

  // Column mix q on `cols` making every row in `rows` indifferent at v.
  Eigen::MatrixXd mq = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::VectorXd bq = Eigen::VectorXd::Zero(k + 1);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      mq(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          a(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    mq(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = -1.0;  // -v
  }
  for (std::size_t j = 0; j < k; ++j) mq(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = 1.0;
  bq(static_cast<Eigen::Index>(k)) = 1.0;
  const auto q_out = solve_linear(mq, bq);
  if (!q_out.consistent) return std::nullopt;
  if (!q_out.unique) {
    *saw_degenerate_system = true;
    return std::nullopt;
  }

  // Row mix p on `rows` making every column in `cols` indifferent at w.
  Eigen::MatrixXd mp = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::VectorXd bp = Eigen::VectorXd::Zero(k + 1);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < k; ++i)
      mp(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          b(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    mp(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = -1.0;  // -w
  }
  for (std::size_t i = 0; i < k; ++i) mp(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = 1.0;
  bp(static_cast<Eigen::Index>(k)) = 1.0;
  const auto p_out = solve_linear(mp, bp);
  if (!p_out.consistent) return std::nullopt;
  if (!p_out.unique) {
    *saw_degenerate_system = true;
    return std::nullopt;
  }

  SupportCandidate cand;
  cand.row_probs.assign(game.rows(), 0.0);
  cand.col_probs.assign(game.cols(), 0.0);
  bool zero_in_support = false;
  for (std::size_t i = 0; i < k; ++i) {
    double pi = p_out.solution(static_cast<Eigen::Index>(i));
    if (pi < kNegativeProbFloor) return std::nullopt;
    if (pi <= 1e-10) zero_in_support = true;
    cand.row_probs[rows[i]] = std::max(pi, 0.0);
  }
  for (std::size_t j = 0; j < k; ++j) {
    double qj = q_out.solution(static_cast<Eigen::Index>(j));
    if (qj < kNegativeProbFloor) return std::nullopt;
    if (qj <= 1e-10) zero_in_support = true;
    cand.col_probs[cols[j]] = std::max(qj, 0.0);
  }

  const double v = q_out.solution(static_cast<Eigen::Index>(k));
  const double w = p_out.solution(static_cast<Eigen::Index>(k));

  // Global best-response verification plus a count of indifferent
  // alternatives (more best responses than the support size means the
  // equilibrium sits on a degenerate face).
  Eigen::Map<const Eigen::VectorXd> p_full(cand.row_probs.data(),
                                           static_cast<Eigen::Index>(game.rows()));
  Eigen::Map<const Eigen::VectorXd> q_full(cand.col_probs.data(),
                                           static_cast<Eigen::Index>(game.cols()));
  const Eigen::VectorXd row_values = a * q_full;
  const Eigen::VectorXd col_values = b.transpose() * p_full;
  std::size_t row_best = 0, col_best = 0;
  for (Eigen::Index i = 0; i < row_values.size(); ++i) {
    if (row_values(i) > v + kVerifyTol) return std::nullopt;
    if (row_values(i) >= v - kVerifyTol) ++row_best;
  }
  for (Eigen::Index j = 0; j < col_values.size(); ++j) {
    if (col_values(j) > w + kVerifyTol) return std::nullopt;
    if (col_values(j) >= w - kVerifyTol) ++col_best;
  }

  cand.row_value = v;
  cand.col_value = w;
  cand.degenerate_marker = zero_in_support || row_best > k || col_best > k;
  return cand;
}

EquilibriumResult make_result(const BimatrixGame& game, const SupportCandidate& cand,
                              SolveMethod method) {
  EquilibriumResult result{Distribution(game.row_space, cand.row_probs),
                           Distribution(game.col_space, cand.col_probs),
                           cand.row_value, cand.col_value, method};
  return result;
}

bool passes_epsilon_nash(const BimatrixGame& game, const EquilibriumResult& r,
                         double eps) {
  const auto tensor = PayoffTensor::from_bimatrix(game);
  return is_epsilon_nash(tensor, {r.row_strategy, r.col_strategy}, eps).epsilon_nash;
}

EquilibriumResult fictitious_play(const BimatrixGame& game) {
  const std::size_t n = game.rows(), m = game.cols();
  std::vector<double> row_counts(n, 0.0), col_counts(m, 0.0);
  row_counts[0] = 1.0;
  col_counts[0] = 1.0;
  double total = 1.0;

  auto empirical = [&](const std::vector<double>& counts, const ActionSpace& space) {
    std::vector<double> probs(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) probs[i] = counts[i] / total;
    return Distribution(space, std::move(probs));
  };

  for (long iter = 1; iter <= kFictitiousPlayCap; ++iter) {
    const Distribution p = empirical(row_counts, game.row_space);
    const Distribution q = empirical(col_counts, game.col_space);
    const auto row_br = best_response(game, q, Side::row);
    const auto col_br = best_response(game, p, Side::col);
    row_counts[row_br.actions.front()] += 1.0;
    col_counts[col_br.actions.front()] += 1.0;
    total += 1.0;

    if (iter % 512 == 0 || iter == kFictitiousPlayCap) {
      const Distribution pe = empirical(row_counts, game.row_space);
      const Distribution qe = empirical(col_counts, game.col_space);
      double value = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
          value += pe.prob(i) * qe.prob(j) *
                   game.row_payoff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double row_gap = best_response(game, qe, Side::row).value - value;
      const double col_gap = best_response(game, pe, Side::col).value - (-value);
      if (std::max(row_gap, col_gap) <= kFictitiousPlayEps) {
        EquilibriumResult result{pe, qe, value, -value, SolveMethod::fictitious_play};
        return result;
      }
    }
  }
  std::vector<double> last;
  for (std::size_t i = 0; i < n; ++i) last.push_back(row_counts[i] / total);
  for (std::size_t j = 0; j < m; ++j) last.push_back(col_counts[j] / total);
  throw ConvergenceFailure("fictitious play did not reach eps=1e-4 within cap",
                           std::move(last));
}

}  // namespace

EquilibriumResult solve_zero_sum(const BimatrixGame& game) {
  if (!game.zero_sum) throw InvalidInputError("solve_zero_sum requires a zero-sum game");
  if (game.rows() > 50 || game.cols() > 50)
    throw UnsupportedSizeError("solve_zero_sum supports at most 50x50 games");

  if (game.rows() <= 9 && game.cols() <= 9) {
    bool saw_degenerate = false;
    const std::size_t max_k = std::min(game.rows(), game.cols());
    for (std::size_t k = 1; k <= max_k; ++k) {
      auto rows = first_combination(k);
      do {
        auto cols = first_combination(k);
        do {
          if (auto cand = try_support_pair(game, rows, cols, &saw_degenerate)) {
            auto result = make_result(game, *cand, SolveMethod::support_enumeration);
            if (passes_epsilon_nash(game, result, kSupportEnumEps)) return result;
          }
        } while (next_combination(cols, game.cols()));
      } while (next_combination(rows, game.rows()));
    }
    // No equal-support kernel passed verification (numerically degenerate
    // corner); fictitious play still converges for zero-sum games.
  }
  return fictitious_play(game);
}

BimatrixSolution solve_bimatrix(const BimatrixGame& game) {
  if (game.rows() > 6 || game.cols() > 6)
    throw UnsupportedSizeError("solve_bimatrix supports at most 6x6 games");

  BimatrixSolution solution;
  bool saw_degenerate = false;
  const std::size_t max_k = std::min(game.rows(), game.cols());
  for (std::size_t k = 1; k <= max_k; ++k) {
    auto rows = first_combination(k);
    do {
      auto cols = first_combination(k);
      do {
        if (auto cand = try_support_pair(game, rows, cols, &saw_degenerate)) {
          auto result = make_result(game, *cand, SolveMethod::support_enumeration);
          if (!passes_epsilon_nash(game, result, kSupportEnumEps)) continue;
          if (cand->degenerate_marker) saw_degenerate = true;
          const bool duplicate = std::any_of(
              solution.equilibria.begin(), solution.equilibria.end(),
              [&](const EquilibriumResult& other) {
                return result.row_strategy.l1_distance(other.row_strategy) < 1e-8 &&
                       result.col_strategy.l1_distance(other.col_strategy) < 1e-8;
              });
          if (!duplicate) solution.equilibria.push_back(std::move(result));
        }
      } while (next_combination(cols, game.cols()));
    } while (next_combination(rows, game.rows()));
  }
  solution.degenerate = saw_degenerate;

  std::sort(solution.equilibria.begin(), solution.equilibria.end(),
            [](const EquilibriumResult& lhs, const EquilibriumResult& rhs) {
              const auto ls = lhs.row_strategy.support(1e-9);
              const auto rs = rhs.row_strategy.support(1e-9);
              if (ls != rs) return ls < rs;
              const auto lc = lhs.col_strategy.support(1e-9);
              const auto rc = rhs.col_strategy.support(1e-9);
              if (lc != rc) return lc < rc;
              if (lhs.row_strategy.probs() != rhs.row_strategy.probs())
                return lhs.row_strategy.probs() < rhs.row_strategy.probs();
              return lhs.col_strategy.probs() < rhs.col_strategy.probs();
            });
  return solution;
}

}  // namespace secgames
