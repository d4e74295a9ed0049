#include "secgames/policy_backends.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "secgames/numeric.hpp"

namespace secgames {

using nlohmann::json;

TablePolicy::TablePolicy(ActionSpace actions) : actions_(std::move(actions)) {}

TablePolicy& TablePolicy::row_for_id(const std::string& prompt_id,
                                     std::vector<double> probs) {
  by_id_.emplace(prompt_id, Distribution(actions_, std::move(probs)));
  return *this;
}

TablePolicy& TablePolicy::row_for_id_and_message(const std::string& prompt_id,
                                                 const std::string& message,
                                                 std::vector<double> probs) {
  by_id_and_message_.emplace(prompt_id + "\x1f" + message,
                             Distribution(actions_, std::move(probs)));
  return *this;
}

TablePolicy& TablePolicy::row_for_rendered(const std::string& rendered,
                                           std::vector<double> probs) {
  by_rendered_.emplace(rendered, Distribution(actions_, std::move(probs)));
  return *this;
}

TablePolicy& TablePolicy::default_row(std::vector<double> probs) {
  default_ = std::make_unique<Distribution>(actions_, std::move(probs));
  return *this;
}

Distribution TablePolicy::evaluate(const StructuredPrompt& prompt, const InfoContext& info,
                                   std::uint64_t, int) const {
  if (info.observed_message.has_value()) {
    const auto it = by_id_and_message_.find(prompt.id + "\x1f" + *info.observed_message);
    if (it != by_id_and_message_.end()) return it->second;
  }
  if (const auto it = by_rendered_.find(prompt.rendered); it != by_rendered_.end())
    return it->second;
  if (const auto it = by_id_.find(prompt.id); it != by_id_.end()) return it->second;
  if (default_) return *default_;
  throw InvalidInputError("table policy has no row for prompt '" + prompt.id + "'");
}

PolicyCache::PolicyCache(std::string path) : path_(std::move(path)) {
  if (path_.empty() || !std::filesystem::exists(path_)) return;
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded() || !record.contains("key") || !record.contains("samples"))
      continue;  // later records supersede; damaged tails are skipped
    entries_[record["key"].get<std::string>()] =
        record["samples"].get<std::vector<std::string>>();
  }
}

std::vector<std::string>* PolicyCache::lookup(const std::string& key) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void PolicyCache::store(const std::string& key, const std::vector<std::string>& samples) {
  std::lock_guard<std::mutex> lock(mutex_);
  entries_[key] = samples;
  if (path_.empty()) return;
  json record;
  record["key"] = key;
  record["samples"] = samples;
  std::ofstream out(path_, std::ios::app);
  out << record.dump() << '\n';
}

std::size_t PolicyCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

std::string policy_request_body(const StructuredPrompt& prompt, const InfoContext& info,
                                const ActionSpace& actions, std::uint64_t seed,
                                int sample_count) {
  json body;
  body["prompt_id"] = prompt.id;
  body["rendered_prompt"] = prompt.rendered;
  body["role"] = to_string(info.role);
  json info_obj = json::object();
  for (const auto& [k, v] : info.private_info) info_obj[k] = v;
  if (info.observed_message.has_value())
    info_obj["observed_message"] = *info.observed_message;
  body["info"] = info_obj;
  body["action_labels"] = actions.labels();
  body["seed"] = seed;
  body["n_samples"] = sample_count;
  return body.dump();
}

std::string policy_request_key(const std::string& request_body) {
  std::ostringstream os;
  os << std::hex << fnv1a64(request_body);
  return os.str();
}

ExternalPolicy::ExternalPolicy(ActionSpace actions, ExternalPolicyConfig config)
    : actions_(std::move(actions)), config_(std::move(config)), cache_(config_.cache_path) {
  if (config_.endpoint_url.empty())
    throw InvalidInputError("external policy needs an endpoint url");
  if (config_.max_in_flight < 1)
    throw InvalidInputError("max_in_flight must be >= 1");
}

std::vector<std::string> ExternalPolicy::fetch_samples(const std::string& body) const {
  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    httplib::Client client(config_.endpoint_url);
    client.set_connection_timeout(0, config_.timeout_ms * 1000);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
    network_requests_.fetch_add(1);
    auto res = client.Post("/sample", body, "application/json");
    if (!res) {
      last_error = "transport error " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "endpoint returned status " + std::to_string(res->status);
      continue;
    }
    const json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("samples"))
      throw EndpointUnreachableError("endpoint returned a malformed body");
    return parsed["samples"].get<std::vector<std::string>>();
  }
  throw EndpointUnreachableError("policy endpoint " + config_.endpoint_url +
                                 " unreachable: " + last_error);
}

Distribution ExternalPolicy::evaluate(const StructuredPrompt& prompt,
                                      const InfoContext& info, std::uint64_t seed,
                                      int sample_count) const {
  if (sample_count < 1) throw InvalidInputError("external backends need sample_count >= 1");
  const std::string body =
      policy_request_body(prompt, info, actions_, seed, sample_count);
  const std::string key = policy_request_key(body);

  std::vector<std::string> samples;
  if (auto* cached = cache_.lookup(key)) {
    samples = *cached;
  } else {
    samples = fetch_samples(body);
    cache_.store(key, samples);
  }

  std::vector<std::size_t> counts(actions_.size(), 0);
  for (const auto& s : samples) {
    if (!actions_.contains(s))
      throw UnparseableActionError(
          "endpoint sample '" + s + "' is not an action label", s);
    ++counts[actions_.index_of(s)];
  }
  // Add-one smoothing over the action space.
  const double denom = static_cast<double>(samples.size() + actions_.size());
  std::vector<double> probs(actions_.size());
  for (std::size_t i = 0; i < actions_.size(); ++i)
    probs[i] = static_cast<double>(counts[i] + 1) / denom;
  return Distribution(actions_, std::move(probs));
}

void ExternalPolicy::prefetch(
    const std::vector<std::pair<StructuredPrompt, InfoContext>>& batch,
    std::uint64_t seed, int sample_count) const {
  if (batch.empty()) return;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(config_.max_in_flight), batch.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= batch.size()) return;
        try {
          evaluate(batch[i].first, batch[i].second, seed, sample_count);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace secgames
