#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "secgames/game_core.hpp"

namespace secgames {

// Prompt decomposed into the four semantic slots plus the rendered text
// actually sent to a policy.
struct StructuredPrompt {
  std::string id;
  std::optional<std::string> cot;
  std::optional<std::string> bias;
  std::optional<std::string> tom;
  std::optional<std::string> memory;
  std::string rendered;

  void validate() const;
};

enum class Role { sender, receiver, row, col };

const char* to_string(Role role);
Role role_from_string(const std::string& text);

// Private context a policy conditions on.
struct InfoContext {
  Role role = Role::row;
  std::map<std::string, std::string> private_info;  // keys unique by map
  std::optional<std::string> observed_message;

  // Key-sorted serialization used for cache hashing.
  std::string canonical() const;
};

enum class PolicyBackend { table, external };

// Behavioral contract: maps (prompt, info) to an action distribution.
// Table backends are fully deterministic and ignore seed/sample count;
// external backends are deterministic given (seed, sample count, cache).
class ReasoningPolicy {
public:
  virtual ~ReasoningPolicy() = default;
  virtual PolicyBackend backend() const = 0;
  virtual bool deterministic() const = 0;
  virtual const ActionSpace& action_space() const = 0;
  virtual Distribution evaluate(const StructuredPrompt& prompt, const InfoContext& info,
                                std::uint64_t seed, int sample_count) const = 0;
};

// Uniform entry point with the precondition checks of the op contract.
Distribution policy_action_distribution(const ReasoningPolicy& policy,
                                        const StructuredPrompt& prompt,
                                        const InfoContext& info, std::uint64_t seed,
                                        int sample_count);

// Finite prompt-space game: prompts on both sides, reasoning policies
// mapping them into mixes over the base game's action spaces.
struct PromptSpaceGame {
  std::vector<StructuredPrompt> row_prompts;
  std::vector<StructuredPrompt> col_prompts;
  std::shared_ptr<const ReasoningPolicy> row_policy;
  std::shared_ptr<const ReasoningPolicy> col_policy;
  BimatrixGame base;
  InfoContext info_row;
  InfoContext info_col;
  std::uint64_t seed = 0;
  int sample_count = 64;

  void validate() const;
};

struct LlmNashResult {
  // Pure prompt pairs passing both deviation inequalities (tolerance 1e-9),
  // in (row, col) index order.
  std::vector<std::pair<std::size_t, std::size_t>> equilibrium_prompts;
  Eigen::MatrixXd row_prompt_payoff;  // |X| x |Y|, row player's utility
  Eigen::MatrixXd col_prompt_payoff;
  std::vector<std::pair<Distribution, Distribution>> behavioral_equilibria;
  // Induced action mixes per prompt, for audit output.
  std::vector<Distribution> row_mixes;
  std::vector<Distribution> col_mixes;
};

LlmNashResult llm_nash_equilibria(const PromptSpaceGame& game);

struct LlmStackelbergSolution {
  std::size_t sender_prompt = 0;  // x*
  // Per message: index into that message's receiver prompt list.
  std::vector<std::optional<std::size_t>> receiver_prompt_per_message;
  double sender_value = 0.0;
  // Messages with zero probability under every sender prompt.
  std::vector<bool> zero_probability_messages;
};

// Sender commits to a prompt inducing a message mix; for each message the
// receiver picks its best prompt; the sender maximizes the
// message-averaged utility under that map. The base game's sender-side
// space is the message space; its payoffs are u(m, a).
LlmStackelbergSolution llm_stackelberg_solve(
    const PromptSpaceGame& game, Side sender_role, const ActionSpace& message_space,
    const std::vector<std::vector<StructuredPrompt>>& receiver_prompt_map);

// Normalized token-level edit distance on the rendered text, averaged with
// the mean of the four slot distances (absent-vs-present slots count 1).
// Symmetric; zero iff rendered and all slots agree. Not guaranteed to
// satisfy the triangle inequality.
double prompt_distance(const StructuredPrompt& a, const StructuredPrompt& b);

struct StabilityPair {
  std::size_t first = 0;
  std::size_t second = 0;
  double pair_distance = 0.0;
  double output_l1_gap = 0.0;
};

struct StabilityReport {
  std::vector<StabilityPair> pairs;
  // max gap/distance over pairs with distance > 0; zero when no such pair.
  double lipschitz_ratio = 0.0;
};

StabilityReport stability_profile(const ReasoningPolicy& policy,
                                  const std::vector<StructuredPrompt>& prompts,
                                  const InfoContext& info, std::uint64_t seed,
                                  int sample_count = 64);

struct RagDocument {
  std::string key;
  std::set<std::string> tags;
  std::string body;
};

struct RagStore {
  std::vector<RagDocument> documents;
  int capacity = 1;

  void validate() const;
};

// Top-r documents by tag overlap with the token set of the rendered prompt
// and the private-info values; ties by key ascending. Never empty for a
// nonempty store.
std::vector<RagDocument> rag_retrieve(const RagStore& store,
                                      const StructuredPrompt& prompt,
                                      const InfoContext& info);

// -log sigmoid(chosen - rejected) + kl_penalty * kl_value, computed via
// log1p for stability.
double dpo_loss(double log_prob_chosen, double log_prob_rejected, double kl_penalty,
                double kl_value);

// Sum of log-likelihood terms minus the KL term.
double elbo_value(const std::vector<double>& log_likelihood_terms, double kl_term);

// Whitespace tokenization shared by prompt distance and RAG scoring.
std::vector<std::string> tokenize(const std::string& text);

}  // namespace secgames
