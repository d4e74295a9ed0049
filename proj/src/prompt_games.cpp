#include "secgames/prompt_games.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "secgames/numeric.hpp"

namespace secgames {

namespace {
constexpr double kDeviationTol = 1e-9;
constexpr std::size_t kPromptGridBound = 10000;
}  // namespace

void StructuredPrompt::validate() const {
  if (rendered.empty()) throw InvalidInputError("prompt '" + id + "' has empty rendered text");
  if (id.empty()) throw InvalidInputError("prompt id must be nonempty");
}

const char* to_string(Role role) {
  switch (role) {
    case Role::sender: return "sender";
    case Role::receiver: return "receiver";
    case Role::row: return "row";
    case Role::col: return "col";
  }
  return "row";
}

Role role_from_string(const std::string& text) {
  if (text == "sender") return Role::sender;
  if (text == "receiver") return Role::receiver;
  if (text == "row") return Role::row;
  if (text == "col") return Role::col;
  throw InvalidInputError("unknown role '" + text + "'");
}

std::string InfoContext::canonical() const {
  std::ostringstream os;
  os << "role=" << to_string(role) << ';';
  for (const auto& [k, v] : private_info) os << k << '=' << v << ';';
  if (observed_message.has_value()) os << "observed=" << *observed_message << ';';
  return os.str();
}

Distribution policy_action_distribution(const ReasoningPolicy& policy,
                                        const StructuredPrompt& prompt,
                                        const InfoContext& info, std::uint64_t seed,
                                        int sample_count) {
  prompt.validate();
  if (policy.backend() == PolicyBackend::external && sample_count < 1)
    throw InvalidInputError("external backends need sample_count >= 1");
  return policy.evaluate(prompt, info, seed, sample_count);
}

void PromptSpaceGame::validate() const {
  if (row_prompts.empty() || col_prompts.empty())
    throw InvalidInputError("prompt spaces must be nonempty");
  if (!row_policy || !col_policy)
    throw InvalidInputError("both reasoning policies must be set");
  auto check_unique = [](const std::vector<StructuredPrompt>& prompts, const char* side) {
    std::set<std::string> ids;
    for (const auto& p : prompts) {
      p.validate();
      if (!ids.insert(p.id).second)
        throw InvalidInputError(std::string("duplicate prompt id '") + p.id + "' in " + side);
    }
  };
  check_unique(row_prompts, "row prompt space");
  check_unique(col_prompts, "col prompt space");
  if (sample_count < 1) throw InvalidInputError("sample_count must be >= 1");
}

namespace {

Distribution evaluated_mix(const PromptSpaceGame& game, Side side,
                           const StructuredPrompt& prompt) {
  const auto& policy = side == Side::row ? *game.row_policy : *game.col_policy;
  const auto& info = side == Side::row ? game.info_row : game.info_col;
  const auto& space = side == Side::row ? game.base.row_space : game.base.col_space;
  Distribution mix = [&] {
    try {
      return policy_action_distribution(policy, prompt, info, game.seed, game.sample_count);
    } catch (const Error& e) {
      throw InvalidInputError("prompt '" + prompt.id + "' failed to evaluate: " + e.what());
    }
  }();
  if (mix.space() != space)
    throw InvalidInputError("prompt '" + prompt.id +
                            "' evaluates over the wrong action space");
  return mix;
}

}  // namespace

LlmNashResult llm_nash_equilibria(const PromptSpaceGame& game) {
  game.validate();
  const std::size_t nx = game.row_prompts.size();
  const std::size_t ny = game.col_prompts.size();
  if (nx * ny > kPromptGridBound)
    throw UnsupportedSizeError("prompt grid larger than 1e4 pairs");

  LlmNashResult result;
  result.row_mixes.reserve(nx);
  result.col_mixes.reserve(ny);
  for (const auto& x : game.row_prompts)
    result.row_mixes.push_back(evaluated_mix(game, Side::row, x));
  for (const auto& y : game.col_prompts)
    result.col_mixes.push_back(evaluated_mix(game, Side::col, y));

  const auto tensor = PayoffTensor::from_bimatrix(game.base);
  result.row_prompt_payoff.resize(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(ny));
  result.col_prompt_payoff.resize(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(ny));
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const std::vector<Distribution> profile{result.row_mixes[i], result.col_mixes[j]};
      result.row_prompt_payoff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          expected_utility(tensor, profile, 0);
      result.col_prompt_payoff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          expected_utility(tensor, profile, 1);
    }

  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const double row_here =
          result.row_prompt_payoff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double col_here =
          result.col_prompt_payoff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      bool stable = true;
      for (std::size_t i2 = 0; i2 < nx && stable; ++i2)
        if (result.row_prompt_payoff(static_cast<Eigen::Index>(i2),
                                     static_cast<Eigen::Index>(j)) > row_here + kDeviationTol)
          stable = false;
      for (std::size_t j2 = 0; j2 < ny && stable; ++j2)
        if (result.col_prompt_payoff(static_cast<Eigen::Index>(i),
                                     static_cast<Eigen::Index>(j2)) > col_here + kDeviationTol)
          stable = false;
      if (stable) {
        result.equilibrium_prompts.emplace_back(i, j);
        result.behavioral_equilibria.emplace_back(result.row_mixes[i], result.col_mixes[j]);
      }
    }
  return result;
}

LlmStackelbergSolution llm_stackelberg_solve(
    const PromptSpaceGame& game, Side sender_role, const ActionSpace& message_space,
    const std::vector<std::vector<StructuredPrompt>>& receiver_prompt_map) {
  game.validate();
  const ActionSpace& sender_space =
      sender_role == Side::row ? game.base.row_space : game.base.col_space;
  if (message_space != sender_space)
    throw InvalidInputError(
        "message space must equal the sender side of the base game");
  if (receiver_prompt_map.size() != message_space.size())
    throw InvalidInputError("need one receiver prompt list per message");

  const Side receiver_role = sender_role == Side::row ? Side::col : Side::row;
  const auto& sender_prompts =
      sender_role == Side::row ? game.row_prompts : game.col_prompts;
  const auto& receiver_policy =
      receiver_role == Side::row ? *game.row_policy : *game.col_policy;
  const InfoContext& receiver_info_base =
      receiver_role == Side::row ? game.info_row : game.info_col;
  const ActionSpace& receiver_space =
      receiver_role == Side::row ? game.base.row_space : game.base.col_space;

  // Sender utility u_S(m, a) and receiver utility u_R(m, a), oriented so the
  // first index is the message.
  auto sender_u = [&](std::size_t m, std::size_t a) {
    return sender_role == Side::row
               ? game.base.row_payoff(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(a))
               : game.base.col_payoff(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(m));
  };
  auto receiver_u = [&](std::size_t m, std::size_t a) {
    return sender_role == Side::row
               ? game.base.col_payoff(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(a))
               : game.base.row_payoff(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(m));
  };

  // Message mixes induced by every sender prompt.
  std::vector<Distribution> message_mixes;
  message_mixes.reserve(sender_prompts.size());
  for (const auto& x : sender_prompts)
    message_mixes.push_back(evaluated_mix(game, sender_role, x));

  LlmStackelbergSolution solution;
  solution.zero_probability_messages.assign(message_space.size(), true);
  for (std::size_t m = 0; m < message_space.size(); ++m)
    for (const auto& mix : message_mixes)
      if (mix.prob(m) > 0.0) {
        solution.zero_probability_messages[m] = false;
        break;
      }

  // Receiver's per-message prompt choice and the sender payoff it induces.
  std::vector<double> sender_payoff_at(message_space.size(), 0.0);
  solution.receiver_prompt_per_message.assign(message_space.size(), std::nullopt);
  for (std::size_t m = 0; m < message_space.size(); ++m) {
    const auto& prompts = receiver_prompt_map[m];
    if (prompts.empty()) {
      if (!solution.zero_probability_messages[m])
        throw InvalidInputError("reachable message '" + message_space.label(m) +
                                "' has an empty receiver prompt list");
      continue;  // unreachable and unanswerable; contributes nothing
    }
    InfoContext info = receiver_info_base;
    info.observed_message = message_space.label(m);
    double best_value = 0.0;
    std::size_t best_idx = 0;
    Distribution best_mix = Distribution::uniform(receiver_space);
    for (std::size_t yi = 0; yi < prompts.size(); ++yi) {
      const Distribution mix =
          policy_action_distribution(receiver_policy, prompts[yi], info, game.seed,
                                     game.sample_count);
      if (mix.space() != receiver_space)
        throw InvalidInputError("receiver prompt '" + prompts[yi].id +
                                "' evaluates over the wrong action space");
      double value = 0.0;
      for (std::size_t a = 0; a < receiver_space.size(); ++a)
        value += mix.prob(a) * receiver_u(m, a);
      if (yi == 0 || value > best_value + kDeviationTol) {
        best_value = value;
        best_idx = yi;
        best_mix = mix;
      }
    }
    solution.receiver_prompt_per_message[m] = best_idx;
    double sender_here = 0.0;
    for (std::size_t a = 0; a < receiver_space.size(); ++a)
      sender_here += best_mix.prob(a) * sender_u(m, a);
    sender_payoff_at[m] = sender_here;
  }

  // Sender maximizes the message-averaged utility under the receiver map.
  bool have_best = false;
  for (std::size_t xi = 0; xi < sender_prompts.size(); ++xi) {
    double value = 0.0;
    for (std::size_t m = 0; m < message_space.size(); ++m)
      value += message_mixes[xi].prob(m) * sender_payoff_at[m];
    if (!have_best || value > solution.sender_value + kDeviationTol) {
      have_best = true;
      solution.sender_value = value;
      solution.sender_prompt = xi;
    }
  }
  return solution;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

namespace {

double token_edit_distance(const std::string& a, const std::string& b) {
  const auto ta = tokenize(a);
  const auto tb = tokenize(b);
  if (ta.empty() && tb.empty()) return 0.0;
  const std::size_t n = ta.size(), m = tb.size();
  std::vector<std::size_t> prev(m + 1), curr(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    curr[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t substitute = prev[j - 1] + (ta[i - 1] == tb[j - 1] ? 0 : 1);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, substitute});
    }
    std::swap(prev, curr);
  }
  return static_cast<double>(prev[m]) / static_cast<double>(std::max(n, m));
}

double slot_distance(const std::optional<std::string>& a,
                     const std::optional<std::string>& b) {
  if (!a.has_value() && !b.has_value()) return 0.0;
  if (a.has_value() != b.has_value()) return 1.0;
  return token_edit_distance(*a, *b);
}

}  // namespace

double prompt_distance(const StructuredPrompt& a, const StructuredPrompt& b) {
  const double rendered = token_edit_distance(a.rendered, b.rendered);
  const double slots = (slot_distance(a.cot, b.cot) + slot_distance(a.bias, b.bias) +
                        slot_distance(a.tom, b.tom) + slot_distance(a.memory, b.memory)) /
                       4.0;
  return 0.5 * (rendered + slots);
}

StabilityReport stability_profile(const ReasoningPolicy& policy,
                                  const std::vector<StructuredPrompt>& prompts,
                                  const InfoContext& info, std::uint64_t seed,
                                  int sample_count) {
  if (prompts.size() < 2)
    throw InvalidInputError("stability profile needs at least two prompts");
  std::vector<Distribution> mixes;
  mixes.reserve(prompts.size());
  for (const auto& p : prompts)
    mixes.push_back(policy_action_distribution(policy, p, info, seed, sample_count));

  StabilityReport report;
  for (std::size_t i = 0; i < prompts.size(); ++i)
    for (std::size_t j = i + 1; j < prompts.size(); ++j) {
      StabilityPair pair;
      pair.first = i;
      pair.second = j;
      pair.pair_distance = prompt_distance(prompts[i], prompts[j]);
      pair.output_l1_gap = mixes[i].l1_distance(mixes[j]);
      if (pair.pair_distance > 0.0)
        report.lipschitz_ratio =
            std::max(report.lipschitz_ratio, pair.output_l1_gap / pair.pair_distance);
      report.pairs.push_back(pair);
    }
  return report;
}

void RagStore::validate() const {
  if (capacity < 1) throw InvalidInputError("rag capacity must be >= 1");
  std::set<std::string> keys;
  for (const auto& d : documents)
    if (!keys.insert(d.key).second)
      throw InvalidInputError("duplicate rag document key '" + d.key + "'");
}

std::vector<RagDocument> rag_retrieve(const RagStore& store,
                                      const StructuredPrompt& prompt,
                                      const InfoContext& info) {
  store.validate();
  if (store.documents.empty()) throw InvalidInputError("rag store is empty");

  std::set<std::string> query_tokens;
  for (auto& t : tokenize(prompt.rendered)) query_tokens.insert(std::move(t));
  for (const auto& [key, value] : info.private_info)
    for (auto& t : tokenize(value)) query_tokens.insert(std::move(t));

  std::vector<std::pair<int, const RagDocument*>> scored;
  scored.reserve(store.documents.size());
  for (const auto& doc : store.documents) {
    int overlap = 0;
    for (const auto& tag : doc.tags)
      if (query_tokens.count(tag) > 0) ++overlap;
    scored.emplace_back(overlap, &doc);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& lhs, const auto& rhs) {
    if (lhs.first != rhs.first) return lhs.first > rhs.first;
    return lhs.second->key < rhs.second->key;
  });

  std::vector<RagDocument> out;
  const std::size_t r = std::min<std::size_t>(static_cast<std::size_t>(store.capacity),
                                              scored.size());
  for (std::size_t i = 0; i < r; ++i) out.push_back(*scored[i].second);
  return out;
}

double dpo_loss(double log_prob_chosen, double log_prob_rejected, double kl_penalty,
                double kl_value) {
  if (kl_penalty < 0.0) throw InvalidInputError("kl penalty must be >= 0");
  if (kl_value < 0.0) throw InvalidInputError("kl value must be >= 0");
  const double delta = log_prob_chosen - log_prob_rejected;
  // -log sigmoid(delta) = softplus(-delta), branch-stable.
  const double softplus =
      delta >= 0.0 ? std::log1p(std::exp(-delta)) : -delta + std::log1p(std::exp(delta));
  return softplus + kl_penalty * kl_value;
}

double elbo_value(const std::vector<double>& log_likelihood_terms, double kl_term) {
  if (kl_term < 0.0) throw InvalidInputError("kl term must be >= 0");
  ExactSum sum;
  for (double t : log_likelihood_terms) sum.add(t);
  sum.add(-kl_term);
  return sum.value();
}

}  // namespace secgames
