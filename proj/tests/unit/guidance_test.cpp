#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "test_util.hpp"

#include "steer/decoding/rng.hpp"
#include "steer/error.hpp"
#include "steer/guidance.hpp"
#include "steer/lm/ngram_model.hpp"

using namespace steer;
using testkit::code_of;
using namespace steer::guidance;
using lm::LogitVector;

namespace {

LogitVector logs(std::vector<double> p) { return lm::log_of(p); }

LogitVector random_logits(decoding::Xoshiro256& rng, std::size_t n) {
  LogitVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = -10.0 * rng.uniform();
  return v;
}

std::shared_ptr<const lm::CacheNGramModel> toy_model(std::vector<std::string> texts) {
  const std::vector<std::string> all{"the quick brown fox", "jumps over the lazy dog"};
  auto v = lm::Vocabulary::build(all, lm::TokenizerMode::kCharacter);
  lm::NGramParams p;
  p.order = 3;
  return std::make_shared<lm::CacheNGramModel>(lm::CacheNGramModel::train(texts, v, p));
}

}  // namespace

TEST(Guidance, CegWorkedExample) {
  const auto out = contrastive_expert_guidance(logs({0.7, 0.2, 0.1}), logs({0.5, 0.3, 0.2}), 0.5);
  // Oracle: p_theta * p_phi^(-gamma), renormalised.
  std::vector<double> raw{0.7 / std::sqrt(0.5), 0.2 / std::sqrt(0.3), 0.1 / std::sqrt(0.2)};
  const double z = raw[0] + raw[1] + raw[2];
  const auto p = lm::softmax(out);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], raw[i] / z, 1e-12);
  EXPECT_NEAR(p[0], 0.627, 1e-3);
  EXPECT_NEAR(p[1], 0.231, 1e-3);
  EXPECT_NEAR(p[2], 0.142, 1e-3);
}

TEST(Guidance, CegCancellationIsUniform) {
  const auto a = logs({0.6, 0.3, 0.1});
  const auto p = lm::softmax(contrastive_expert_guidance(a, a, 1.0));
  for (double x : p) EXPECT_NEAR(x, 1.0 / 3, 1e-12);
  EXPECT_EQ(contrastive_expert_guidance(a, logs({0.2, 0.2, 0.6}), 0.0), a);
}

TEST(Guidance, NpWorkedExample) {
  const auto out = negative_prompt_combine(logs({0.6, 0.3, 0.1}), logs({0.2, 0.3, 0.5}), 0.5);
  std::vector<double> raw{std::sqrt(0.6 * 0.2), std::sqrt(0.3 * 0.3), std::sqrt(0.1 * 0.5)};
  const double z = raw[0] + raw[1] + raw[2];
  const auto p = lm::softmax(out);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], raw[i] / z, 1e-12);
  EXPECT_NEAR(p[0], 0.398, 1e-3);
  EXPECT_NEAR(p[1], 0.345, 1e-3);
  EXPECT_NEAR(p[2], 0.257, 1e-3);
}

TEST(Guidance, CfgWorkedExample) {
  const auto p = lm::softmax(cfg_guidance(logs({0.25, 0.75}), logs({0.5, 0.5}), 2.0));
  EXPECT_NEAR(p[0], 0.75, 1e-12);
  EXPECT_NEAR(p[1], 0.25, 1e-12);
}

TEST(Guidance, SteerCombineExamples) {
  const LogitVector a(std::vector<double>{1, 1, 1}), b(std::vector<double>{-2, -2, -2});
  for (double x : lm::softmax(steer_combine(a, b))) EXPECT_NEAR(x, 1.0 / 3, 1e-15);
  const LogitVector c(std::vector<double>{-0.5, -1.5, -3.25, -7});
  EXPECT_EQ(steer_combine(c, LogitVector(4, 0.0)), c);
  decoding::Xoshiro256 rng(5);
  const auto x = random_logits(rng, 4), y = random_logits(rng, 4);
  const auto s = steer_combine(x, y);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(s[i], x[i] + y[i]);
}

TEST(Guidance, ShiftInvarianceAndExponentialForm) {
  decoding::Xoshiro256 rng(9);
  for (int t = 0; t < 200; ++t) {
    const auto d = random_logits(rng, 12), b = random_logits(rng, 12);
    auto shifted = d;
    for (std::size_t i = 0; i < 12; ++i) shifted[i] += 3.7;
    const auto p1 = lm::softmax(d), p2 = lm::softmax(shifted);
    for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(p1[i], p2[i], 1e-12);

    const double gamma = rng.uniform();
    const auto pd = lm::softmax(d), pb = lm::softmax(b);
    std::vector<double> ratio(12);
    double z = 0;
    for (std::size_t i = 0; i < 12; ++i) z += ratio[i] = pd[i] / std::pow(pb[i], gamma);
    const auto pc = lm::softmax(contrastive_expert_guidance(lm::log_of(pd), lm::log_of(pb), gamma));
    for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(pc[i], ratio[i] / z, 1e-9);
  }
}

TEST(Guidance, NpIsConvexElementwise) {
  decoding::Xoshiro256 rng(10);
  for (int t = 0; t < 200; ++t) {
    const auto c = random_logits(rng, 8), u = random_logits(rng, 8);
    const double eta = rng.uniform();
    const auto out = negative_prompt_combine(c, u, eta);
    for (std::size_t i = 0; i < 8; ++i) {
      EXPECT_GE(out[i], std::min(c[i], u[i]) - 1e-12);
      EXPECT_LE(out[i], std::max(c[i], u[i]) + 1e-12);
    }
  }
}

TEST(Guidance, ErrorsAndMasks) {
  const LogitVector two(2), three(3);
  EXPECT_EQ(code_of([&] { contrastive_expert_guidance(two, three, 0.5); }), ErrorCode::kLengthMismatch);
  EXPECT_EQ(code_of([&] { cfg_guidance(two, three, 0.5); }), ErrorCode::kLengthMismatch);
  EXPECT_EQ(code_of([&] { steer_combine(two, three); }), ErrorCode::kLengthMismatch);
  const LogitVector nan(std::vector<double>{0.0, std::nan("")});
  EXPECT_EQ(code_of([&] { contrastive_expert_guidance(nan, two, 0.5); }), ErrorCode::kNonFiniteInput);
  const LogitVector masked(std::vector<double>{0.0, lm::kMasked});
  EXPECT_EQ(steer_combine(masked, two)[1], lm::kMasked);
  EXPECT_EQ(contrastive_expert_guidance(masked, two, 0.3)[1], lm::kMasked);

  GuidanceParams p;
  p.eta = 1.5;
  try {
    p.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParameterOutOfRange);
    EXPECT_NE(std::string(e.what()).find("eta"), std::string::npos);
  }
  p.allow_extrapolation = true;
  EXPECT_NO_THROW(p.validate());
}

TEST(Guidance, ModelPairRejectsVocabularyMismatch) {
  auto a = toy_model({"the quick brown fox"});
  const std::vector<std::string> words{"one two"};
  auto w = std::make_shared<lm::CacheNGramModel>(
      lm::Vocabulary::build(words, lm::TokenizerMode::kWord), lm::NGramParams{});
  EXPECT_EQ(code_of([&] { ModelPair(a, w); }), ErrorCode::kVocabularyMismatch);
}

TEST(Guidance, NegativePromptReductions) {
  auto domain = toy_model({"the quick brown fox", "the lazy dog"});
  const auto& v = domain->vocabulary();
  const auto ctx = v.tokenize("the q");
  const auto neg = v.tokenize("jumps over ");
  std::vector<lm::TokenId> full = neg;
  full.insert(full.end(), ctx.begin(), ctx.end());
  EXPECT_EQ(negative_prompt_logits(*domain, ctx, neg, 1.0), domain->log_probs(ctx));
  EXPECT_EQ(negative_prompt_logits(*domain, ctx, neg, 0.0), domain->log_probs(full));
}

TEST(Guidance, SteerStepComposition) {
  auto domain = toy_model({"the quick brown fox", "the lazy dog"});
  auto base = toy_model({"jumps over the lazy dog"});
  ModelPair models(domain, base);
  const auto& v = domain->vocabulary();
  ConditioningPrompt prompt{v.tokenize("the "), v.tokenize("lazy dog\n###\n")};
  const auto ctx = v.tokenize("qu");
  std::vector<lm::TokenId> c_ctx = prompt.positive;
  c_ctx.insert(c_ctx.end(), ctx.begin(), ctx.end());
  std::vector<lm::TokenId> full = prompt.negative;
  full.insert(full.end(), c_ctx.begin(), c_ctx.end());

  decoding::Xoshiro256 rng(2);
  for (int t = 0; t < 20; ++t) {
    GuidanceParams p{rng.uniform(), rng.uniform(), false};
    const auto manual = steer_combine(
        contrastive_expert_guidance(domain->log_probs(c_ctx), base->log_probs(c_ctx), p.gamma),
        negative_prompt_combine(domain->log_probs(full), domain->log_probs(c_ctx), p.eta));
    EXPECT_EQ(steer_step(models, prompt, ctx, p), manual);
  }

  // gamma = 0, eta = 1: squared-renormalised domain distribution.
  const auto out = lm::softmax(steer_step(models, prompt, ctx, {0.0, 1.0, false}));
  const auto pd = lm::softmax(domain->log_probs(c_ctx));
  double z = 0;
  for (double x : pd) z += x * x;
  for (std::size_t i = 0; i < pd.size(); ++i) EXPECT_NEAR(out[i], pd[i] * pd[i] / z, 1e-12);

  // Empty negative prompt: NP branch collapses to the plain domain logits.
  ConditioningPrompt no_neg{prompt.positive, {}};
  for (double eta : {0.0, 0.3, 1.0}) {
    const auto r = steer_step(models, no_neg, ctx, {0.4, eta, false});
    const auto expect = steer_combine(
        contrastive_expert_guidance(domain->log_probs(c_ctx), base->log_probs(c_ctx), 0.4),
        domain->log_probs(c_ctx));
    EXPECT_EQ(r, expect);
  }
}
