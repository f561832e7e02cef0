#include "steer/guidance.hpp"

#include <cmath>
#include <sstream>

#include "steer/error.hpp"

namespace steer::guidance {

namespace {

void check_lengths(const LogitVector& a, const LogitVector& b) {
  if (a.size() != b.size()) {
    raise(ErrorCode::kLengthMismatch,
          "logit vectors of length " + std::to_string(a.size()) + " and " +
              std::to_string(b.size()));
  }
}

void check_entry(double v) {
  if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
    raise(ErrorCode::kNonFiniteInput, "logit entry is NaN or +inf");
  }
}

// w_a * a + w_b * b where a zero weight ignores its operand entirely, so the
// endpoint reductions are exact and a masked operand only matters when used.
double weighted_sum(double wa, double a, double wb, double b) {
  check_entry(a);
  check_entry(b);
  if (wa == 0.0) return wb * b;
  if (wb == 0.0) return wa * a;
  if (a == lm::kMasked || b == lm::kMasked) {
    const bool pos_inf = (a == lm::kMasked && wa < 0.0) || (b == lm::kMasked && wb < 0.0);
    if (pos_inf) raise(ErrorCode::kNonFiniteInput, "guidance would unmask a token to +inf");
    return lm::kMasked;
  }
  return wa * a + wb * b;
}

}  // namespace

void GuidanceParams::validate() const {
  if (!std::isfinite(gamma)) raise(ErrorCode::kParameterOutOfRange, "gamma must be finite");
  if (!std::isfinite(eta)) raise(ErrorCode::kParameterOutOfRange, "eta must be finite");
  if (allow_extrapolation) return;
  auto check = [](const char* name, double v) {
    if (v < 0.0 || v > 1.0) {
      std::ostringstream msg;
      msg << name << " = " << v << " lies outside [0, 1]; set allow_extrapolation to permit it";
      raise(ErrorCode::kParameterOutOfRange, msg.str());
    }
  };
  check("gamma", gamma);
  check("eta", eta);
}

ModelPair::ModelPair(std::shared_ptr<const lm::LanguageModel> domain,
                     std::shared_ptr<const lm::LanguageModel> base)
    : domain_(std::move(domain)), base_(std::move(base)) {
  if (!domain_ || !base_) raise(ErrorCode::kInvalidArgument, "model pair needs two models");
  if (!(domain_->vocabulary() == base_->vocabulary())) {
    raise(ErrorCode::kVocabularyMismatch, "domain and base models use different vocabularies");
  }
}

LogitVector contrastive_expert_guidance(const LogitVector& domain_logp,
                                        const LogitVector& base_logp, double gamma) {
  check_lengths(domain_logp, base_logp);
  LogitVector out(domain_logp.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = weighted_sum(1.0, domain_logp[i], -gamma, base_logp[i]);
  }
  return out;
}

LogitVector negative_prompt_combine(const LogitVector& conditioned,
                                    const LogitVector& unconditioned, double eta) {
  check_lengths(conditioned, unconditioned);
  LogitVector out(conditioned.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = weighted_sum(1.0 - eta, conditioned[i], eta, unconditioned[i]);
  }
  return out;
}

LogitVector negative_prompt_logits(const lm::LanguageModel& domain,
                                   std::span<const TokenId> context,
                                   std::span<const TokenId> negative, double eta) {
  std::vector<TokenId> conditioned_ctx;
  conditioned_ctx.reserve(negative.size() + context.size());
  conditioned_ctx.insert(conditioned_ctx.end(), negative.begin(), negative.end());
  conditioned_ctx.insert(conditioned_ctx.end(), context.begin(), context.end());
  auto conditioned = domain.log_probs(conditioned_ctx);
  auto unconditioned = domain.log_probs(context);
  return negative_prompt_combine(conditioned, unconditioned, eta);
}

LogitVector cfg_guidance(const LogitVector& uncond_logp, const LogitVector& cond_logp,
                         double gamma) {
  check_lengths(uncond_logp, cond_logp);
  LogitVector out(uncond_logp.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = weighted_sum(1.0 - gamma, uncond_logp[i], gamma, cond_logp[i]);
  }
  return out;
}

LogitVector steer_combine(const LogitVector& ceg_logp, const LogitVector& np_logp) {
  check_lengths(ceg_logp, np_logp);
  LogitVector out(ceg_logp.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = weighted_sum(1.0, ceg_logp[i], 1.0, np_logp[i]);
  }
  return out;
}

LogitVector steer_step(const ModelPair& models, const ConditioningPrompt& prompt,
                       std::span<const TokenId> context, const GuidanceParams& params) {
  std::vector<TokenId> full;
  full.reserve(prompt.negative.size() + prompt.positive.size() + context.size());
  full.insert(full.end(), prompt.negative.begin(), prompt.negative.end());
  full.insert(full.end(), prompt.positive.begin(), prompt.positive.end());
  full.insert(full.end(), context.begin(), context.end());
  std::span<const TokenId> with_negative(full);
  auto without_negative = with_negative.subspan(prompt.negative.size());

  auto domain_logp = models.domain().log_probs(without_negative);
  auto base_logp = models.base().log_probs(without_negative);
  auto ceg = contrastive_expert_guidance(domain_logp, base_logp, params.gamma);
  // With no negative prompt both NP inputs coincide; skip the interpolation so
  // the reduction is exact rather than exact up to rounding.
  if (prompt.negative.empty()) return steer_combine(ceg, domain_logp);
  auto conditioned = models.domain().log_probs(with_negative);
  auto np = negative_prompt_combine(conditioned, domain_logp, params.eta);
  return steer_combine(ceg, np);
}

}  // namespace steer::guidance
