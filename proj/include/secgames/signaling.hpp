#pragma once

#include <optional>
#include <string>
#include <vector>

#include "secgames/game_core.hpp"

namespace secgames {

// One-shot signaling game: nature draws a type, the sender (defender)
// picks a signal, the receiver (attacker) updates beliefs and acts.
struct SignalingGame {
  std::vector<std::string> types;
  Distribution prior;   // over types
  ActionSpace signals;
  ActionSpace actions;
  // Utilities indexed [type][signal][action], flattened row-major.
  std::vector<double> sender_utility;
  std::vector<double> receiver_utility;

  SignalingGame(std::vector<std::string> types, Distribution prior,
                ActionSpace signals, ActionSpace actions,
                std::vector<double> sender_utility,
                std::vector<double> receiver_utility);

  std::size_t type_count() const { return types.size(); }
  std::size_t flat(std::size_t type, std::size_t signal, std::size_t action) const {
    return (type * signals.size() + signal) * actions.size() + action;
  }
  double sender_u(std::size_t t, std::size_t s, std::size_t a) const {
    return sender_utility[flat(t, s, a)];
  }
  double receiver_u(std::size_t t, std::size_t s, std::size_t a) const {
    return receiver_utility[flat(t, s, a)];
  }
};

// Behavioral sender strategy: one signal distribution per type.
using SenderStrategy = std::vector<Distribution>;

// Bayes posterior over types after observing `signal`. Returns nullopt
// when the signal has zero probability under the strategy (off path).
std::optional<Distribution> bayes_update(const Distribution& prior,
                                         const SenderStrategy& sender_strategy,
                                         std::size_t signal);

struct BeliefSystem {
  std::vector<Distribution> per_signal;  // over types
  std::vector<bool> on_path;
};

enum class SignalingClass { separating, pooling, hybrid };

struct PBNEAssessment {
  std::vector<std::size_t> sender_strategy;    // type -> signal
  std::vector<std::size_t> receiver_strategy;  // signal -> action
  BeliefSystem beliefs;
  SignalingClass classification = SignalingClass::pooling;
};

// The documented off-path belief search set: point masses on each type,
// then the prior, then uniform. Surfaced so reports can print it.
std::vector<Distribution> off_path_belief_candidates(const SignalingGame& game);

// Enumerates all pure sender and receiver maps and keeps those forming a
// perfect Bayesian equilibrium: receiver optimal under Bayes posteriors on
// path, supportable under some candidate belief off path, and every sender
// type's signal optimal against the receiver strategy as written.
std::vector<PBNEAssessment> enumerate_pure_pbne(const SignalingGame& game);

// 2x2x2 deception template. Types {real, honeypot}, signals {lookReal,
// lookFake}, actions {attack, withdraw}. The receiver gains
// `attack_gain_real` attacking a real system and loses
// `attack_loss_honeypot` attacking a honeypot. The sender pays
// `cost_signal` whenever the emitted look differs from the type's natural
// look. All other payoffs are zero.
SignalingGame build_honeypot_game(double cost_signal, double attack_gain_real,
                                  double attack_loss_honeypot, double prior_real);

const char* to_string(SignalingClass c);

}  // namespace secgames
