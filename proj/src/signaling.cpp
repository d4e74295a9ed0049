#include "secgames/signaling.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace secgames {

namespace {
constexpr double kCompareTol = 1e-12;
constexpr std::size_t kEnumerationBound = 1000;
}  // namespace

SignalingGame::SignalingGame(std::vector<std::string> types_in, Distribution prior_in,
                             ActionSpace signals_in, ActionSpace actions_in,
                             std::vector<double> sender_utility_in,
                             std::vector<double> receiver_utility_in)
    : types(std::move(types_in)),
      prior(std::move(prior_in)),
      signals(std::move(signals_in)),
      actions(std::move(actions_in)),
      sender_utility(std::move(sender_utility_in)),
      receiver_utility(std::move(receiver_utility_in)) {
  if (types.empty()) throw InvalidInputError("signaling game needs at least one type");
  std::set<std::string> seen(types.begin(), types.end());
  if (seen.size() != types.size()) throw InvalidInputError("duplicate type labels");
  if (prior.size() != types.size())
    throw InvalidInputError("prior must have one probability per type");
  const std::size_t expected = types.size() * signals.size() * actions.size();
  if (sender_utility.size() != expected || receiver_utility.size() != expected)
    throw InvalidInputError("utility tensor shape mismatch");
  for (double v : sender_utility)
    if (!std::isfinite(v)) throw InvalidInputError("sender utilities must be finite");
  for (double v : receiver_utility)
    if (!std::isfinite(v)) throw InvalidInputError("receiver utilities must be finite");
}

std::optional<Distribution> bayes_update(const Distribution& prior,
                                         const SenderStrategy& sender_strategy,
                                         std::size_t signal) {
  if (sender_strategy.size() != prior.size())
    throw InvalidInputError("sender strategy must map every type");
  double denom = 0.0;
  std::vector<double> numer(prior.size());
  for (std::size_t t = 0; t < prior.size(); ++t) {
    if (signal >= sender_strategy[t].size())
      throw InvalidInputError("signal index out of range");
    numer[t] = prior.prob(t) * sender_strategy[t].prob(signal);
    denom += numer[t];
  }
  if (denom == 0.0) return std::nullopt;
  for (double& v : numer) v /= denom;
  return Distribution(prior.space(), std::move(numer));
}

std::vector<Distribution> off_path_belief_candidates(const SignalingGame& game) {
  std::vector<Distribution> candidates;
  const ActionSpace type_space = game.prior.space();
  for (std::size_t t = 0; t < game.type_count(); ++t)
    candidates.push_back(Distribution::point_mass(type_space, t));
  candidates.push_back(game.prior);
  candidates.push_back(Distribution::uniform(type_space));
  return candidates;
}

namespace {

SenderStrategy pure_sender(const SignalingGame& game, const std::vector<std::size_t>& map) {
  SenderStrategy strategy;
  for (std::size_t t = 0; t < game.type_count(); ++t)
    strategy.push_back(Distribution::point_mass(game.signals, map[t]));
  return strategy;
}

// Expected receiver utility of `action` at `signal` under `belief`.
double receiver_expected(const SignalingGame& game, const Distribution& belief,
                         std::size_t signal, std::size_t action) {
  double v = 0.0;
  for (std::size_t t = 0; t < game.type_count(); ++t)
    v += belief.prob(t) * game.receiver_u(t, signal, action);
  return v;
}

bool receiver_action_optimal(const SignalingGame& game, const Distribution& belief,
                             std::size_t signal, std::size_t action) {
  const double chosen = receiver_expected(game, belief, signal, action);
  for (std::size_t a = 0; a < game.actions.size(); ++a)
    if (receiver_expected(game, belief, signal, a) > chosen + kCompareTol) return false;
  return true;
}

SignalingClass classify(const std::vector<std::size_t>& sender_map) {
  std::set<std::size_t> distinct(sender_map.begin(), sender_map.end());
  if (distinct.size() == sender_map.size()) return SignalingClass::separating;
  if (distinct.size() == 1) return SignalingClass::pooling;
  return SignalingClass::hybrid;
}

}  // namespace

std::vector<PBNEAssessment> enumerate_pure_pbne(const SignalingGame& game) {
  const std::size_t volume = game.type_count() * game.signals.size() * game.actions.size();
  if (volume > kEnumerationBound)
    throw UnsupportedSizeError("pure PBNE enumeration bounded at |types|*|signals|*|actions| <= " +
                               std::to_string(kEnumerationBound));

  const auto belief_candidates = off_path_belief_candidates(game);
  std::vector<PBNEAssessment> found;

  std::vector<std::size_t> sender_map(game.type_count(), 0);
  const std::size_t sender_total = [&] {
    std::size_t n = 1;
    for (std::size_t t = 0; t < game.type_count(); ++t) n *= game.signals.size();
    return n;
  }();
  const std::size_t receiver_total = [&] {
    std::size_t n = 1;
    for (std::size_t s = 0; s < game.signals.size(); ++s) n *= game.actions.size();
    return n;
  }();

  for (std::size_t se = 0; se < sender_total; ++se) {
    std::size_t rem = se;
    for (std::size_t t = 0; t < game.type_count(); ++t) {
      sender_map[t] = rem % game.signals.size();
      rem /= game.signals.size();
    }
    const auto strategy = pure_sender(game, sender_map);

    // Bayes posteriors for on-path signals; fixed for every receiver map.
    std::vector<std::optional<Distribution>> posterior(game.signals.size());
    for (std::size_t s = 0; s < game.signals.size(); ++s)
      posterior[s] = bayes_update(game.prior, strategy, s);

    std::vector<std::size_t> receiver_map(game.signals.size(), 0);
    for (std::size_t re = 0; re < receiver_total; ++re) {
      std::size_t rrem = re;
      for (std::size_t s = 0; s < game.signals.size(); ++s) {
        receiver_map[s] = rrem % game.actions.size();
        rrem /= game.actions.size();
      }

      // (c) every sender type's signal maximizes sender utility given the
      // receiver strategy as written.
      bool sender_ok = true;
      for (std::size_t t = 0; t < game.type_count() && sender_ok; ++t) {
        const double chosen = game.sender_u(t, sender_map[t], receiver_map[sender_map[t]]);
        for (std::size_t s = 0; s < game.signals.size(); ++s)
          if (game.sender_u(t, s, receiver_map[s]) > chosen + kCompareTol) {
            sender_ok = false;
            break;
          }
      }
      if (!sender_ok) continue;

      // (a) on path: receiver action optimal under the Bayes posterior.
      // (b) off path: some candidate belief supports the action.
      BeliefSystem beliefs;
      beliefs.per_signal.reserve(game.signals.size());
      beliefs.on_path.reserve(game.signals.size());
      bool receiver_ok = true;
      for (std::size_t s = 0; s < game.signals.size() && receiver_ok; ++s) {
        if (posterior[s].has_value()) {
          beliefs.on_path.push_back(true);
          if (!receiver_action_optimal(game, *posterior[s], s, receiver_map[s]))
            receiver_ok = false;
          else
            beliefs.per_signal.push_back(*posterior[s]);
        } else {
          beliefs.on_path.push_back(false);
          bool supported = false;
          for (const auto& belief : belief_candidates) {
            if (receiver_action_optimal(game, belief, s, receiver_map[s])) {
              beliefs.per_signal.push_back(belief);
              supported = true;
              break;
            }
          }
          if (!supported) receiver_ok = false;
        }
      }
      if (!receiver_ok) continue;

      PBNEAssessment assessment;
      assessment.sender_strategy = sender_map;
      assessment.receiver_strategy = receiver_map;
      assessment.beliefs = std::move(beliefs);
      assessment.classification = classify(sender_map);
      found.push_back(std::move(assessment));
    }
  }
  return found;
}

SignalingGame build_honeypot_game(double cost_signal, double attack_gain_real,
                                  double attack_loss_honeypot, double prior_real) {
  if (!(prior_real > 0.0 && prior_real < 1.0))
    throw InvalidInputError("prior probability of the real type must be in (0, 1)");

  std::vector<std::string> types{"real", "honeypot"};
  ActionSpace type_space(types);
  ActionSpace signals({"lookReal", "lookFake"});
  ActionSpace actions({"attack", "withdraw"});
  Distribution prior(type_space, {prior_real, 1.0 - prior_real});

  const std::size_t kAttack = 0;
  std::vector<double> sender(2 * 2 * 2, 0.0);
  std::vector<double> receiver(2 * 2 * 2, 0.0);
  auto flat = [](std::size_t t, std::size_t s, std::size_t a) {
    return (t * 2 + s) * 2 + a;
  };
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t s = 0; s < 2; ++s)
      for (std::size_t a = 0; a < 2; ++a) {
        if (a == kAttack) receiver[flat(t, s, a)] = t == 0 ? attack_gain_real : -attack_loss_honeypot;
        // Disguise = emitting the look that does not match the type
        // (real->lookFake or honeypot->lookReal).
        if (s != t) sender[flat(t, s, a)] = -cost_signal;
      }
  return SignalingGame(std::move(types), std::move(prior), std::move(signals),
                       std::move(actions), std::move(sender), std::move(receiver));
}

const char* to_string(SignalingClass c) {
  switch (c) {
    case SignalingClass::separating: return "separating";
    case SignalingClass::pooling: return "pooling";
    case SignalingClass::hybrid: return "hybrid";
  }
  return "unknown";
}

}  // namespace secgames
