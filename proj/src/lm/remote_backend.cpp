#include "steer/lm/remote_backend.hpp"

#include <cmath>
#include <thread>

#include <httplib.h>

#include "steer/error.hpp"

namespace steer::lm {

using nlohmann::json;

void RemoteBackendConfig::validate() const {
  if (endpoint.empty()) raise(ErrorCode::kInvalidArgument, "remote endpoint is empty");
  if (timeout_ms <= 0) raise(ErrorCode::kParameterOutOfRange, "timeout_ms must be > 0");
  if (max_retries < 0) raise(ErrorCode::kParameterOutOfRange, "max_retries must be >= 0");
  if (backoff_base_ms < 0) raise(ErrorCode::kParameterOutOfRange, "backoff_base_ms must be >= 0");
}

RemoteBackend::RemoteBackend(RemoteBackendConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  config_.validate();
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

json RemoteBackend::post(const std::string& path, const json& body) const {
  httplib::Client client(config_.endpoint);
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  const std::string payload = body.dump();

  ErrorCode last_code = ErrorCode::kBackendError;
  std::string last_message;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      sleeper_(std::chrono::milliseconds(config_.backoff_base_ms) * (1LL << (attempt - 1)));
    }
    auto res = client.Post(path, payload, "application/json");
    if (!res) {
      const auto err = res.error();
      last_code = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
                      ? ErrorCode::kNetworkTimeout
                      : ErrorCode::kBackendError;
      last_message = config_.endpoint + path + ": " + httplib::to_string(err);
      continue;
    }
    if (res->status == 200) {
      try {
        return json::parse(res->body);
      } catch (const json::exception& e) {
        raise(ErrorCode::kBackendError, "unparseable reply from " + path + ": " + e.what());
      }
    }
    last_code = ErrorCode::kBackendError;
    last_message = config_.endpoint + path + ": HTTP " + std::to_string(res->status);
    if (res->status < 500) raise(ErrorCode::kBackendError, last_message);
  }
  if (config_.max_retries == 0) raise(last_code, last_message);
  raise(ErrorCode::kRetryExhausted, std::to_string(config_.max_retries + 1) +
                                        " attempts failed, last: " + last_message);
}

LogitVector remote_log_probs(const RemoteBackend& backend, std::span<const TokenId> context,
                             std::size_t vocab_size) {
  json body = {{"context", std::vector<TokenId>(context.begin(), context.end())}};
  json reply = backend.post("/logits", body);
  if (!reply.is_object() || !reply.contains("log_probs") || !reply["log_probs"].is_array()) {
    raise(ErrorCode::kBackendError, "reply lacks a log_probs array");
  }
  const auto& values = reply["log_probs"];
  if (values.size() != vocab_size) {
    raise(ErrorCode::kShapeMismatch, "backend returned " + std::to_string(values.size()) +
                                         " log-probs, vocabulary has " +
                                         std::to_string(vocab_size));
  }
  LogitVector out(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) {
    // JSON has no infinity; null marks a masked token.
    if (values[i].is_null()) {
      out[i] = kMasked;
    } else if (values[i].is_number()) {
      out[i] = values[i].get<double>();
      if (!std::isfinite(out[i])) raise(ErrorCode::kNonFiniteInput, "non-finite log-prob");
    } else {
      raise(ErrorCode::kBackendError, "log_probs entry is not a number");
    }
  }
  return out;
}

RemoteLanguageModel::RemoteLanguageModel(RemoteBackend backend, Vocabulary vocab,
                                         std::size_t context_budget)
    : backend_(std::move(backend)), vocab_(std::move(vocab)), budget_(context_budget) {}

LogitVector RemoteLanguageModel::log_probs(std::span<const TokenId> context) const {
  check_context(*this, context);
  return remote_log_probs(backend_, context, vocab_.size());
}

}  // namespace steer::lm
