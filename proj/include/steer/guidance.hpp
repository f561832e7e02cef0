#pragma once

#include <memory>
#include <span>
#include <vector>

#include "steer/lm/language_model.hpp"

namespace steer::guidance {

using lm::LogitVector;
using lm::TokenId;

struct GuidanceParams {
  double gamma = 0.0;  // contrastive expert guidance strength
  double eta = 1.0;    // negative prompting interpolation weight
  bool allow_extrapolation = false;

  /// Throws ParameterOutOfRange naming the field when gamma or eta leave
  /// [0, 1] without allow_extrapolation.
  void validate() const;
};

/// Domain model (fine-tuned stand-in) and base model over one vocabulary.
class ModelPair {
 public:
  /// Throws VocabularyMismatch.
  ModelPair(std::shared_ptr<const lm::LanguageModel> domain,
            std::shared_ptr<const lm::LanguageModel> base);

  const lm::LanguageModel& domain() const { return *domain_; }
  const lm::LanguageModel& base() const { return *base_; }
  const lm::Vocabulary& vocabulary() const { return domain_->vocabulary(); }

 private:
  std::shared_ptr<const lm::LanguageModel> domain_;
  std::shared_ptr<const lm::LanguageModel> base_;
};

struct ConditioningPrompt {
  std::vector<TokenId> positive;  // instruction prompt
  std::vector<TokenId> negative;  // prior examples, already joined with separators
};

/// log P_domain - gamma * log P_base, unnormalised.
LogitVector contrastive_expert_guidance(const LogitVector& domain_logp,
                                        const LogitVector& base_logp, double gamma);

/// (1 - eta) * conditioned + eta * unconditioned, where `conditioned` saw the
/// negative prompt. Pure combination step of negative prompting.
LogitVector negative_prompt_combine(const LogitVector& conditioned,
                                    const LogitVector& unconditioned, double eta);

/// Two forward passes of `domain`: once on `context`, once on
/// `negative ++ context`. Throws ContextOverflow.
LogitVector negative_prompt_logits(const lm::LanguageModel& domain,
                                   std::span<const TokenId> context,
                                   std::span<const TokenId> negative, double eta);

/// Classifier-free guidance: (1 - gamma) * uncond + gamma * cond. Negative
/// gamma pushes away from the conditioning prompt.
LogitVector cfg_guidance(const LogitVector& uncond_logp, const LogitVector& cond_logp,
                         double gamma);

/// Element-wise sum of the contrastive and negative-prompt log-scores.
LogitVector steer_combine(const LogitVector& ceg_logp, const LogitVector& np_logp);

/// Full STEER logits for the next token after `prompt.positive ++ context`:
/// three evaluations (domain and base on c ++ ctx, domain on c-bar ++ c ++ ctx).
LogitVector steer_step(const ModelPair& models, const ConditioningPrompt& prompt,
                       std::span<const TokenId> context, const GuidanceParams& params);

}  // namespace steer::guidance
