#include "steer/lm/language_model.hpp"

#include <string>

#include "steer/error.hpp"

namespace steer::lm {

double sequence_log_prob(const LanguageModel& model, std::span<const TokenId> tokens) {
  double total = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    total += model.log_probs(tokens.first(i))[tokens[i]];
  }
  return total;
}

void check_context(const LanguageModel& model, std::span<const TokenId> context) {
  if (context.size() > model.context_budget()) {
    raise(ErrorCode::kContextOverflow, "context of " + std::to_string(context.size()) +
                                           " tokens exceeds budget " +
                                           std::to_string(model.context_budget()));
  }
  const std::size_t v = model.vocabulary().size();
  for (TokenId t : context) {
    if (t >= v) raise(ErrorCode::kInvalidTokenId, "context token " + std::to_string(t));
  }
}

}  // namespace steer::lm
