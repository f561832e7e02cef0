#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "steer/decoding/rng.hpp"
#include "steer/lm/language_model.hpp"

namespace steer::embeddings {
class TokenEmbeddingTable;
}

namespace steer::decoding {

using lm::LogitVector;
using lm::TokenId;

enum class SamplingMethod { kGreedy, kTopK, kNucleus, kContrastiveSearch };

std::string_view method_name(SamplingMethod method);
SamplingMethod parse_method(std::string_view name);

struct SamplerConfig {
  SamplingMethod method = SamplingMethod::kNucleus;
  double p = 0.95;
  int k = 50;
  double temperature = 1.0;
  double degeneration_alpha = 0.6;
  std::uint64_t seed = 0;

  void validate() const;
  /// Stable textual summary recorded in dataset metadata.
  std::string fingerprint() const;
};

/// Element-wise logp / T. Throws NonPositiveTemperature.
LogitVector apply_temperature(const LogitVector& logp, double temperature);

/// Keeps the k highest entries (ties: lower id first); the rest become -inf.
/// Throws InvalidK unless 1 <= k <= V.
LogitVector top_k_filter(const LogitVector& logp, int k);

/// Keeps the smallest descending-probability prefix whose mass reaches p.
/// Throws InvalidP unless p in (0, 1].
LogitVector nucleus_filter(const LogitVector& logp, double p);

/// Draws from the softmax over finite entries. Throws AllMasked.
TokenId sample_token(const LogitVector& logp, Xoshiro256& rng);

/// Argmax, ties to the lower id. Throws AllMasked.
TokenId greedy(const LogitVector& logp);

/// Among the top-k tokens by probability, picks the argmax of
///   (1 - alpha) * P(v) - alpha * max_j cos(e_v, e_{x_j})
/// over context tokens x_j (penalty 0 for an empty context).
TokenId contrastive_select(const LogitVector& logp, std::span<const TokenId> context, int k,
                           double degeneration_alpha,
                           const embeddings::TokenEmbeddingTable* table);

TokenId contrastive_search_step(const lm::LanguageModel& model,
                                std::span<const TokenId> context, int k,
                                double degeneration_alpha,
                                const embeddings::TokenEmbeddingTable* table);

}  // namespace steer::decoding
