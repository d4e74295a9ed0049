#include "secgames/stackelberg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "secgames/numeric.hpp"

namespace secgames {

namespace {
constexpr double kValueIterTol = 1e-8;
constexpr int kValueIterCap = 100000;
constexpr double kTieTol = 1e-9;
constexpr std::size_t kLeaderEnumBound = 100000;

MarkovGame select_effective(const MarkovGame& base,
                            const std::vector<PayoffVariant>& variants,
                            const std::optional<std::pair<std::string, std::string>>& profile) {
  if (!profile.has_value()) return base;
  for (const auto& v : variants)
    if (v.leader_type == profile->first && v.follower_type == profile->second)
      return base.with_stage_utilities(v.stage_utility);
  throw InvalidInputError("type profile (" + profile->first + ", " + profile->second +
                          ") does not name a payoff variant");
}

}  // namespace

StackelbergMarkovGame::StackelbergMarkovGame(
    MarkovGame base, std::size_t leader, std::vector<PayoffVariant> variants,
    std::optional<std::pair<std::string, std::string>> type_profile)
    : base_(std::move(base)),
      leader_(leader),
      variants_(std::move(variants)),
      type_profile_(std::move(type_profile)),
      effective_(select_effective(base_, variants_, type_profile_)) {
  if (base_.player_count() != 2)
    throw InvalidInputError("stackelberg games are two-player");
  if (leader_ > 1) throw InvalidInputError("leader index must be 0 or 1");
  if (!base_.infinite_horizon())
    throw InvalidInputError("leader commitment solving requires the infinite horizon");
}

namespace {

struct CollapsedMdp {
  // reward[player][state](follower action), transition[state](action x state)
  std::vector<std::vector<Eigen::VectorXd>> reward;
  std::vector<Eigen::MatrixXd> transition;
};

// Marginalizes the leader's committed mix out of the joint kernel and both
// utility tables, leaving a follower MDP (with the leader's reward carried
// along for pessimization).
CollapsedMdp collapse_leader(const StackelbergMarkovGame& game,
                             const MarkovPolicy& leader_policy) {
  const MarkovGame& g = game.effective_game();
  const std::size_t leader = game.leader();
  const std::size_t follower = game.follower();
  if (leader_policy.per_state.size() != g.state_count())
    throw InvalidInputError("leader policy must cover every state");

  CollapsedMdp mdp;
  mdp.reward.assign(2, {});
  for (std::size_t s = 0; s < g.state_count(); ++s) {
    if (leader_policy.per_state[s].space() != g.action_space(leader, s))
      throw InvalidInputError("leader policy distribution over wrong action space");
    const std::size_t fn = g.action_space(follower, s).size();
    const std::size_t ln = g.action_space(leader, s).size();
    Eigen::VectorXd r_leader = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fn));
    Eigen::VectorXd r_follower = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fn));
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(fn),
                                              static_cast<Eigen::Index>(g.state_count()));
    for (std::size_t af = 0; af < fn; ++af) {
      for (std::size_t al = 0; al < ln; ++al) {
        const double w = leader_policy.per_state[s].prob(al);
        if (w == 0.0) continue;
        std::vector<std::size_t> joint(2);
        joint[leader] = al;
        joint[follower] = af;
        const std::size_t flat = g.joint_index(s, joint);
        r_leader(static_cast<Eigen::Index>(af)) += w * g.stage_utility(leader, s, flat);
        r_follower(static_cast<Eigen::Index>(af)) += w * g.stage_utility(follower, s, flat);
        t.row(static_cast<Eigen::Index>(af)) +=
            w * g.transition(s).row(static_cast<Eigen::Index>(flat));
      }
    }
    mdp.reward[game.leader()].push_back(std::move(r_leader));
    mdp.reward[game.follower()].push_back(std::move(r_follower));
    mdp.transition.push_back(std::move(t));
  }
  return mdp;
}

// Value iteration over a collapsed MDP for the player whose reward is
// `reward`, choosing per state among `allowed` actions with `optimize`
// (max for the follower, min for leader-pessimization).
struct SweepResult {
  Eigen::VectorXd values;
  std::vector<std::vector<std::size_t>> choice_sets;
};

SweepResult mdp_value_iteration(const CollapsedMdp& mdp,
                                const std::vector<Eigen::VectorXd>& reward,
                                double discount,
                                const std::vector<std::vector<std::size_t>>* allowed,
                                bool maximize, const std::string& what) {
  const std::size_t n = mdp.transition.size();
  Eigen::VectorXd values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (int iter = 0; iter < kValueIterCap; ++iter) {
    Eigen::VectorXd next(static_cast<Eigen::Index>(n));
    for (std::size_t s = 0; s < n; ++s) {
      double best = maximize ? -std::numeric_limits<double>::infinity()
                             : std::numeric_limits<double>::infinity();
      const std::size_t fn = static_cast<std::size_t>(reward[s].size());
      for (std::size_t a = 0; a < fn; ++a) {
        if (allowed != nullptr) {
          const auto& set = (*allowed)[s];
          if (std::find(set.begin(), set.end(), a) == set.end()) continue;
        }
        const double q = reward[s](static_cast<Eigen::Index>(a)) +
                         discount * mdp.transition[s].row(static_cast<Eigen::Index>(a)).dot(values);
        best = maximize ? std::max(best, q) : std::min(best, q);
      }
      next(static_cast<Eigen::Index>(s)) = best;
    }
    const double delta = (next - values).lpNorm<Eigen::Infinity>();
    values = next;
    if (delta < kValueIterTol) {
      SweepResult out;
      out.values = values;
      out.choice_sets.resize(n);
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t fn = static_cast<std::size_t>(reward[s].size());
        double best = maximize ? -std::numeric_limits<double>::infinity()
                               : std::numeric_limits<double>::infinity();
        std::vector<double> q(fn, maximize ? -std::numeric_limits<double>::infinity()
                                           : std::numeric_limits<double>::infinity());
        for (std::size_t a = 0; a < fn; ++a) {
          if (allowed != nullptr) {
            const auto& set = (*allowed)[s];
            if (std::find(set.begin(), set.end(), a) == set.end()) continue;
          }
          q[a] = reward[s](static_cast<Eigen::Index>(a)) +
                 discount * mdp.transition[s].row(static_cast<Eigen::Index>(a)).dot(values);
          best = maximize ? std::max(best, q[a]) : std::min(best, q[a]);
        }
        for (std::size_t a = 0; a < fn; ++a)
          if (std::abs(q[a] - best) <= kTieTol) out.choice_sets[s].push_back(a);
      }
      return out;
    }
  }
  std::vector<double> last(values.data(), values.data() + values.size());
  throw ConvergenceFailure(what + " value iteration exceeded its cap", std::move(last));
}

}  // namespace

FollowerResponse follower_best_response_mdp(const StackelbergMarkovGame& game,
                                            const MarkovPolicy& leader_policy) {
  const MarkovGame& g = game.effective_game();
  const auto mdp = collapse_leader(game, leader_policy);
  const auto sweep = mdp_value_iteration(mdp, mdp.reward[game.follower()], g.discount(),
                                         nullptr, /*maximize=*/true, "follower");

  FollowerResponse response;
  response.values.assign(sweep.values.data(), sweep.values.data() + sweep.values.size());
  response.optimal_action_sets = sweep.choice_sets;
  for (std::size_t s = 0; s < g.state_count(); ++s)
    response.policy.per_state.push_back(Distribution::point_mass(
        g.action_space(game.follower(), s), sweep.choice_sets[s].front()));
  return response;
}

LeaderSolution solve_leader_commitment(const StackelbergMarkovGame& game,
                                       LeaderPolicySpace space, std::size_t start_state) {
  if (space != LeaderPolicySpace::pure_per_state)
    throw InvalidInputError("only pure per-state leader enumeration is supported");
  const MarkovGame& g = game.effective_game();
  if (start_state >= g.state_count()) throw InvalidInputError("start state out of range");

  std::size_t policy_count = 1;
  for (std::size_t s = 0; s < g.state_count(); ++s) {
    const std::size_t n = g.action_space(game.leader(), s).size();
    if (policy_count > kLeaderEnumBound / n)
      throw UnsupportedSizeError("pure leader policy space exceeds " +
                                 std::to_string(kLeaderEnumBound));
    policy_count *= n;
  }

  bool have_best = false;
  LeaderSolution best;
  std::vector<std::size_t> encoding(g.state_count(), 0);

  for (std::size_t e = 0; e < policy_count; ++e) {
    std::size_t rem = e;
    for (std::size_t s = 0; s < g.state_count(); ++s) {
      const std::size_t n = g.action_space(game.leader(), s).size();
      encoding[s] = rem % n;
      rem /= n;
    }
    MarkovPolicy leader_policy;
    for (std::size_t s = 0; s < g.state_count(); ++s)
      leader_policy.per_state.push_back(
          Distribution::point_mass(g.action_space(game.leader(), s), encoding[s]));

    const auto mdp = collapse_leader(game, leader_policy);
    const auto follower_sweep = mdp_value_iteration(
        mdp, mdp.reward[game.follower()], g.discount(), nullptr, true, "follower");
    // Documented pessimism: among follower-optimal actions, the follower
    // picks the leader-worst continuation, lowest index on residual ties.
    const auto pessimal_sweep =
        mdp_value_iteration(mdp, mdp.reward[game.leader()], g.discount(),
                            &follower_sweep.choice_sets, false, "leader-pessimal");

    const double value = pessimal_sweep.values(static_cast<Eigen::Index>(start_state));
    if (!have_best || value > best.leader_value) {
      have_best = true;
      best.leader_policy = leader_policy;
      best.leader_value = value;
      best.leader_encoding = encoding;
      best.follower_policy.per_state.clear();
      for (std::size_t s = 0; s < g.state_count(); ++s)
        best.follower_policy.per_state.push_back(Distribution::point_mass(
            g.action_space(game.follower(), s), pessimal_sweep.choice_sets[s].front()));
    }
  }
  return best;
}

EpisodeTrace run_deception_episode(const StackelbergMarkovGame& game,
                                   const MarkovPolicy& leader_policy,
                                   const MarkovPolicy& follower_policy,
                                   std::size_t start_state, int horizon,
                                   std::uint64_t seed) {
  const MarkovGame& g = game.effective_game();
  if (horizon < 0) throw InvalidInputError("horizon must be nonnegative");
  if (start_state >= g.state_count()) throw InvalidInputError("start state out of range");
  if (leader_policy.per_state.size() != g.state_count() ||
      follower_policy.per_state.size() != g.state_count())
    throw InvalidInputError("policies must cover every state");

  std::mt19937_64 rng(seed);
  auto draw = [&rng] { return canonical_unit(rng()); };

  EpisodeTrace trace;
  std::size_t state = start_state;
  double discount_pow = 1.0;
  ExactSum leader_sum, follower_sum;
  for (int k = 0; k < horizon; ++k) {
    const std::size_t al = leader_policy.per_state[state].sample_index(draw());
    const std::size_t af = follower_policy.per_state[state].sample_index(draw());
    std::vector<std::size_t> joint(2);
    joint[game.leader()] = al;
    joint[game.follower()] = af;
    const std::size_t flat = g.joint_index(state, joint);
    const double ul = g.stage_utility(game.leader(), state, flat);
    const double uf = g.stage_utility(game.follower(), state, flat);

    // Next state via inverse CDF on the kernel row.
    const double u = draw();
    double acc = 0.0;
    std::size_t next = g.state_count() - 1;
    for (std::size_t s2 = 0; s2 < g.state_count(); ++s2) {
      acc += g.transition(state)(static_cast<Eigen::Index>(flat), static_cast<Eigen::Index>(s2));
      if (u < acc) {
        next = s2;
        break;
      }
    }

    trace.steps.push_back({k, state, al, af, ul, uf, next});
    leader_sum.add(discount_pow * ul);
    follower_sum.add(discount_pow * uf);
    discount_pow *= g.discount();
    state = next;
  }
  trace.discounted_leader = leader_sum.value();
  trace.discounted_follower = follower_sum.value();
  return trace;
}

}  // namespace secgames
