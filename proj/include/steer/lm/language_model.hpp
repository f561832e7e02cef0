#pragma once

#include <span>

#include "steer/lm/logit_vector.hpp"
#include "steer/lm/vocabulary.hpp"

namespace steer::lm {

inline constexpr std::size_t kDefaultContextBudget = 2048;

/// Autoregressive model interface: next-token log-probabilities for a
/// context. Implementations are immutable after construction and safe for
/// concurrent readers.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  /// Normalised log P(w | context). Throws ContextOverflow when the context
  /// exceeds the budget; never truncates.
  virtual LogitVector log_probs(std::span<const TokenId> context) const = 0;

  virtual const Vocabulary& vocabulary() const = 0;
  virtual std::size_t context_budget() const = 0;
};

/// Sum over positions of log P(tokens[i] | tokens[0..i)).
double sequence_log_prob(const LanguageModel& model, std::span<const TokenId> tokens);

void check_context(const LanguageModel& model, std::span<const TokenId> context);

}  // namespace steer::lm
