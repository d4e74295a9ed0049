#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "secgames/prompt_games.hpp"

namespace secgames {

// Deterministic lookup-table policy. Rows can be keyed three ways, tried
// most-specific first: (prompt id, observed message), rendered text,
// prompt id; then an optional default row. Rendered-text rows are what
// workflow agents use, since their rendered prompt carries the inputs.
class TablePolicy : public ReasoningPolicy {
public:
  explicit TablePolicy(ActionSpace actions);

  TablePolicy& row_for_id(const std::string& prompt_id, std::vector<double> probs);
  TablePolicy& row_for_id_and_message(const std::string& prompt_id,
                                      const std::string& message,
                                      std::vector<double> probs);
  TablePolicy& row_for_rendered(const std::string& rendered, std::vector<double> probs);
  TablePolicy& default_row(std::vector<double> probs);

  PolicyBackend backend() const override { return PolicyBackend::table; }
  bool deterministic() const override { return true; }
  const ActionSpace& action_space() const override { return actions_; }
  Distribution evaluate(const StructuredPrompt& prompt, const InfoContext& info,
                        std::uint64_t seed, int sample_count) const override;

private:
  ActionSpace actions_;
  std::map<std::string, Distribution> by_id_and_message_;
  std::map<std::string, Distribution> by_rendered_;
  std::map<std::string, Distribution> by_id_;
  std::unique_ptr<Distribution> default_;
};

// Append-only persistent store of request-hash -> samples records. A
// missing or empty path keeps the cache purely in memory.
class PolicyCache {
public:
  explicit PolicyCache(std::string path);

  std::vector<std::string>* lookup(const std::string& key);
  void store(const std::string& key, const std::vector<std::string>& samples);
  std::size_t size() const;

private:
  std::string path_;
  std::map<std::string, std::vector<std::string>> entries_;
  mutable std::mutex mutex_;
};

struct ExternalPolicyConfig {
  std::string endpoint_url;  // e.g. http://127.0.0.1:8089
  int timeout_ms = 5000;
  int retries = 2;
  int max_in_flight = 4;     // concurrent requests during prefetch
  std::string cache_path;    // empty -> in-memory cache only
};

// Canonical JSON body of the wire contract; its FNV-1a hash is the cache
// key.
std::string policy_request_body(const StructuredPrompt& prompt, const InfoContext& info,
                                const ActionSpace& actions, std::uint64_t seed,
                                int sample_count);
std::string policy_request_key(const std::string& request_body);

// HTTP-backed policy speaking the wire contract:
//   POST /sample  {prompt_id, rendered_prompt, role, info, action_labels,
//                  seed, n_samples}  ->  {samples: [string]}
// Sampled labels are folded into add-one (Laplace) smoothed frequencies.
// Responses are cached by request hash, so identical queries replay
// without touching the network.
class ExternalPolicy : public ReasoningPolicy {
public:
  ExternalPolicy(ActionSpace actions, ExternalPolicyConfig config);

  PolicyBackend backend() const override { return PolicyBackend::external; }
  bool deterministic() const override { return true; }
  const ActionSpace& action_space() const override { return actions_; }
  Distribution evaluate(const StructuredPrompt& prompt, const InfoContext& info,
                        std::uint64_t seed, int sample_count) const override;

  // Warms the cache for a batch with at most max_in_flight concurrent
  // requests. Results are identical regardless of completion order.
  void prefetch(const std::vector<std::pair<StructuredPrompt, InfoContext>>& batch,
                std::uint64_t seed, int sample_count) const;

  std::size_t network_request_count() const { return network_requests_.load(); }

private:
  std::vector<std::string> fetch_samples(const std::string& body) const;

  ActionSpace actions_;
  ExternalPolicyConfig config_;
  mutable PolicyCache cache_;
  mutable std::atomic<std::size_t> network_requests_{0};
};

}  // namespace secgames
