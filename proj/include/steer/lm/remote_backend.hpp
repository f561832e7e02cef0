#pragma once

#include <chrono>
#include <functional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "steer/lm/language_model.hpp"

namespace steer::lm {

struct RemoteBackendConfig {
  std::string endpoint;  // scheme://host:port
  int timeout_ms = 5000;
  int max_retries = 3;
  int backoff_base_ms = 100;  // delays are base, 2*base, 4*base, ...

  void validate() const;
};

/// JSON-over-HTTP client shared by the logits and embedding protocols.
/// Connection failures, timeouts and 5xx responses are retried with
/// exponential backoff; other non-200 statuses fail immediately.
class RemoteBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit RemoteBackend(RemoteBackendConfig config, Sleeper sleeper = {});

  /// Throws NetworkTimeout (single attempt timed out), RetryExhausted or
  /// BackendError.
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;

  const RemoteBackendConfig& config() const { return config_; }

 private:
  RemoteBackendConfig config_;
  Sleeper sleeper_;
};

/// POST /logits {"context": [...]} -> {"log_probs": [...]}. Throws
/// ShapeMismatch when the reply length differs from `vocab_size`.
LogitVector remote_log_probs(const RemoteBackend& backend, std::span<const TokenId> context,
                             std::size_t vocab_size);

/// LanguageModel adapter over a remote logits server.
class RemoteLanguageModel final : public LanguageModel {
 public:
  RemoteLanguageModel(RemoteBackend backend, Vocabulary vocab,
                      std::size_t context_budget = kDefaultContextBudget);

  LogitVector log_probs(std::span<const TokenId> context) const override;
  const Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t context_budget() const override { return budget_; }

 private:
  RemoteBackend backend_;
  Vocabulary vocab_;
  std::size_t budget_;
};

}  // namespace steer::lm
