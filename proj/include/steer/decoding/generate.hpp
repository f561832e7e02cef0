#pragma once

#include <span>
#include <vector>

#include "steer/decoding/sampler.hpp"
#include "steer/guidance.hpp"

namespace steer::decoding {

/// Produces next-token logits for a full context (prompt ++ generated).
class LogitSource {
 public:
  virtual ~LogitSource() = default;
  virtual LogitVector next(std::span<const TokenId> context) const = 0;
  /// Longest context `next` accepts.
  virtual std::size_t context_budget() const = 0;
};

/// Plain model logits.
class ModelSource final : public LogitSource {
 public:
  explicit ModelSource(const lm::LanguageModel& model) : model_(model) {}
  LogitVector next(std::span<const TokenId> context) const override {
    return model_.log_probs(context);
  }
  std::size_t context_budget() const override { return model_.context_budget(); }

 private:
  const lm::LanguageModel& model_;
};

/// STEER logits: the context passed to `next` plays the role of c ++ ctx and
/// the stored negative prompt is prepended for the conditioned pass.
class SteerSource final : public LogitSource {
 public:
  SteerSource(const guidance::ModelPair& models, std::vector<TokenId> negative,
              guidance::GuidanceParams params);
  LogitVector next(std::span<const TokenId> context) const override;
  std::size_t context_budget() const override;

 private:
  const guidance::ModelPair& models_;
  guidance::ConditioningPrompt prompt_;
  guidance::GuidanceParams params_;
};

struct StopCriteria {
  TokenId eos = lm::kEos;
  std::size_t max_new_tokens = 128;
};

/// Autoregressive loop: logits -> temperature -> method filter -> pick ->
/// append; stops on EOS (not returned) or after max_new_tokens. Throws
/// ContextOverflow when the prompt lacks max_new_tokens of headroom.
std::vector<TokenId> generate_sequence(const LogitSource& source,
                                       std::span<const TokenId> prompt_context,
                                       const SamplerConfig& sampler, const StopCriteria& stop,
                                       const embeddings::TokenEmbeddingTable* token_table = nullptr);

}  // namespace steer::decoding
