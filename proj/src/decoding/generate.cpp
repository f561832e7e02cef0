#include "steer/decoding/generate.hpp"

#include <algorithm>

#include "steer/error.hpp"

namespace steer::decoding {

SteerSource::SteerSource(const guidance::ModelPair& models, std::vector<TokenId> negative,
                         guidance::GuidanceParams params)
    : models_(models), params_(params) {
  params_.validate();
  prompt_.negative = std::move(negative);
}

LogitVector SteerSource::next(std::span<const TokenId> context) const {
  return guidance::steer_step(models_, prompt_, context, params_);
}

std::size_t SteerSource::context_budget() const {
  const std::size_t domain = models_.domain().context_budget();
  const std::size_t conditioned =
      domain > prompt_.negative.size() ? domain - prompt_.negative.size() : 0;
  return std::min(conditioned, models_.base().context_budget());
}

std::vector<TokenId> generate_sequence(const LogitSource& source,
                                       std::span<const TokenId> prompt_context,
                                       const SamplerConfig& sampler, const StopCriteria& stop,
                                       const embeddings::TokenEmbeddingTable* token_table) {
  sampler.validate();
  if (prompt_context.size() + stop.max_new_tokens > source.context_budget()) {
    raise(ErrorCode::kContextOverflow,
          "prompt of " + std::to_string(prompt_context.size()) + " tokens plus " +
              std::to_string(stop.max_new_tokens) + " new tokens exceeds budget " +
              std::to_string(source.context_budget()));
  }
  if (sampler.method == SamplingMethod::kContrastiveSearch && token_table == nullptr) {
    raise(ErrorCode::kMissingEmbeddings, "contrastive search needs a token embedding table");
  }
  Xoshiro256 rng(sampler.seed);
  std::vector<TokenId> context(prompt_context.begin(), prompt_context.end());
  const std::size_t prompt_len = context.size();
  for (std::size_t step = 0; step < stop.max_new_tokens; ++step) {
    auto logits = apply_temperature(source.next(context), sampler.temperature);
    TokenId token = 0;
    switch (sampler.method) {
      case SamplingMethod::kGreedy:
        token = greedy(logits);
        break;
      case SamplingMethod::kTopK: {
        const int k = std::min<int>(sampler.k, static_cast<int>(logits.size()));
        token = sample_token(top_k_filter(logits, k), rng);
        break;
      }
      case SamplingMethod::kNucleus:
        token = sample_token(nucleus_filter(logits, sampler.p), rng);
        break;
      case SamplingMethod::kContrastiveSearch:
        token = contrastive_select(logits, context, sampler.k, sampler.degeneration_alpha,
                                   token_table);
        break;
    }
    if (token == stop.eos) break;
    context.push_back(token);
  }
  return {context.begin() + static_cast<std::ptrdiff_t>(prompt_len), context.end()};
}

}  // namespace steer::decoding
