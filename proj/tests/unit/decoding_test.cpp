#include <algorithm>
#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "test_util.hpp"

#include "steer/decoding/generate.hpp"
#include "steer/decoding/rng.hpp"
#include "steer/decoding/sampler.hpp"
#include "steer/embeddings/token_table.hpp"
#include "steer/error.hpp"
#include "steer/lm/ngram_model.hpp"

using namespace steer;
using testkit::code_of;
using namespace steer::decoding;
using lm::LogitVector;
using lm::TokenId;

namespace {

LogitVector logs(std::vector<double> p) { return lm::log_of(p); }

std::vector<double> random_probs(Xoshiro256& rng, std::size_t n) {
  std::vector<double> p(n);
  double z = 0;
  for (auto& x : p) z += x = rng.uniform() + 1e-3;
  for (auto& x : p) x /= z;
  return p;
}

std::size_t kept(const LogitVector& v) {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](double x) { return x != lm::kMasked; }));
}

}  // namespace

TEST(Rng, ReferenceOutputs) {
  // Frozen from an independent transcription of splitmix64 + xoshiro256**.
  Xoshiro256 a(0);
  EXPECT_EQ(a(), 0x99ec5f36cb75f2b4ULL);
  EXPECT_EQ(a(), 0xbf6e1f784956452aULL);
  EXPECT_EQ(a(), 0x1a5f849d4933e6e0ULL);
  Xoshiro256 b(42);
  EXPECT_EQ(b(), 0x15780b2e0c2ec716ULL);
  EXPECT_EQ(b(), 0x6104d9866d113a7eULL);
  EXPECT_EQ(derive_seed(0, 0), 0x2d0f28c7e7e786b2ULL);
  EXPECT_EQ(derive_seed(1234, 7), 0xf77c6e742607462aULL);
}

TEST(Sampler, Temperature) {
  const LogitVector x(std::vector<double>{0.0, -1.0});
  EXPECT_EQ(apply_temperature(x, 1.0), x);
  EXPECT_EQ(apply_temperature(x, 0.5), LogitVector(std::vector<double>{0.0, -2.0}));
  EXPECT_GT(lm::softmax(apply_temperature(x, 0.5))[0], lm::softmax(x)[0]);
  const auto flat = lm::softmax(apply_temperature(logs({0.9, 0.05, 0.05}), 1e6));
  EXPECT_LT(*std::max_element(flat.begin(), flat.end()) - *std::min_element(flat.begin(), flat.end()),
            1e-5);
  EXPECT_EQ(code_of([&] { apply_temperature(x, 0.0); }), ErrorCode::kNonPositiveTemperature);
}

TEST(Sampler, TopK) {
  const auto x = logs({0.4, 0.4, 0.2});
  EXPECT_EQ(top_k_filter(x, 3), x);
  const auto one = top_k_filter(x, 1);
  EXPECT_EQ(one[0], x[0]);
  EXPECT_EQ(kept(one), 1u);
  EXPECT_EQ(code_of([&] { top_k_filter(x, 0); }), ErrorCode::kInvalidK);
  EXPECT_EQ(code_of([&] { top_k_filter(x, 4); }), ErrorCode::kInvalidK);
}

TEST(Sampler, Nucleus) {
  const auto x = logs({0.5, 0.3, 0.2});
  EXPECT_EQ(nucleus_filter(x, 1.0), x);
  const auto y = nucleus_filter(x, 0.7);
  EXPECT_EQ(kept(y), 2u);
  EXPECT_EQ(y[2], lm::kMasked);
  const auto hot = nucleus_filter(logs({1.0, 0.0, 0.0}), 0.3);
  EXPECT_EQ(kept(hot), 1u);
  EXPECT_EQ(code_of([&] { nucleus_filter(x, 0.0); }), ErrorCode::kInvalidP);
  EXPECT_EQ(code_of([&] { nucleus_filter(x, 1.5); }), ErrorCode::kInvalidP);
}

TEST(Sampler, NucleusMinimalityAgainstSubsetOracle) {
  Xoshiro256 rng(1);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.below(7);
    const auto p = random_probs(rng, n);
    const double target = 0.05 + 0.9 * rng.uniform();
    const auto f = nucleus_filter(lm::log_of(p), target);
    // Oracle: smallest subset size whose mass reaches target (brute force).
    std::size_t best = n;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      double mass = 0;
      for (std::size_t i = 0; i < n; ++i) if (mask >> i & 1) mass += p[i];
      if (mass >= target) best = std::min<std::size_t>(best, std::popcount(mask));
    }
    EXPECT_EQ(kept(f), best);
    double mass = 0, min_kept = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (f[i] != lm::kMasked) {
        mass += p[i];
        min_kept = std::min(min_kept, p[i]);
      }
    }
    EXPECT_GE(mass, target - 1e-12);
    EXPECT_LT(mass - min_kept, target);
    EXPECT_NE(f[greedy(lm::log_of(p))], lm::kMasked);
    EXPECT_NE(top_k_filter(lm::log_of(p), 1)[greedy(lm::log_of(p))], lm::kMasked);
  }
}

TEST(Sampler, GreedyAndSampling) {
  EXPECT_EQ(greedy(logs({0.1, 0.9})), 1u);
  EXPECT_EQ(greedy(LogitVector(5, -1.0)), 0u);
  const LogitVector masked(3, lm::kMasked);
  EXPECT_EQ(code_of([&] { greedy(masked); }), ErrorCode::kAllMasked);
  Xoshiro256 rng(3);
  EXPECT_EQ(code_of([&] { sample_token(masked, rng); }), ErrorCode::kAllMasked);
  const LogitVector single(std::vector<double>{lm::kMasked, -3.0, lm::kMasked});
  for (int i = 0; i < 20; ++i) EXPECT_EQ(sample_token(single, rng), 1u);

  Xoshiro256 r1(77), r2(77);
  const auto x = logs({0.2, 0.3, 0.5});
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_token(x, r1), sample_token(x, r2));

  Xoshiro256 r3(5);
  for (int i = 0; i < 50; ++i) {
    const auto p = random_probs(r3, 6);
    EXPECT_EQ(sample_token(top_k_filter(lm::log_of(p), 1), r3), greedy(lm::log_of(p)));
    EXPECT_EQ(sample_token(nucleus_filter(lm::log_of(p), 1e-12), r3), greedy(lm::log_of(p)));
  }
}

TEST(Sampler, UniformFrequencies) {
  Xoshiro256 rng(2024);
  std::vector<int> counts(4, 0);
  const LogitVector u(4, 0.0);
  for (int i = 0; i < 100000; ++i) ++counts[sample_token(u, rng)];
  for (int c : counts) EXPECT_NEAR(c / 100000.0, 0.25, 0.01);
}

TEST(Sampler, ContrastiveSelect) {
  Eigen::MatrixXd rows = Eigen::MatrixXd::Identity(4, 4);
  embeddings::TokenEmbeddingTable table(rows);
  const auto x = logs({0.1, 0.1, 0.4, 0.4});
  const std::vector<TokenId> ctx{2};
  EXPECT_EQ(contrastive_select(x, ctx, 2, 1.0, &table), 3u);
  EXPECT_EQ(contrastive_select(x, ctx, 2, 0.0, &table), 2u);
  EXPECT_EQ(contrastive_select(x, ctx, 1, 1.0, &table), 2u);
  EXPECT_EQ(contrastive_select(x, {}, 2, 0.9, &table), 2u);
  Xoshiro256 rng(8);
  for (int t = 0; t < 50; ++t) {
    const auto p = lm::log_of(random_probs(rng, 4));
    EXPECT_EQ(contrastive_select(p, ctx, 4, 0.0, &table), greedy(p));
  }
  EXPECT_EQ(code_of([&] { contrastive_select(x, ctx, 2, 0.5, nullptr); }),
            ErrorCode::kMissingEmbeddings);
}

TEST(Generate, GreedyBigramChain) {
  const lm::Vocabulary v(lm::TokenizerMode::kCharacter, {"a", "b"});
  lm::NGramParams p;
  p.order = 2;
  p.cache_weight = 0.0;
  const std::vector<std::string> corpus{"ababab"};
  const auto m = lm::CacheNGramModel::train(corpus, v, p);
  ModelSource src(m);
  SamplerConfig greedy_cfg;
  greedy_cfg.method = SamplingMethod::kGreedy;
  StopCriteria stop;
  stop.max_new_tokens = 7;
  const auto out = generate_sequence(src, v.tokenize("a"), greedy_cfg, stop);
  EXPECT_EQ(v.detokenize(out), "bababab");
  stop.max_new_tokens = 0;
  EXPECT_TRUE(generate_sequence(src, v.tokenize("a"), greedy_cfg, stop).empty());
}

TEST(Generate, NucleusDeterministicAndStopsAtEos) {
  const std::vector<std::string> corpus{"the cat sat", "a dog ran", "the dog sat"};
  const auto v = lm::Vocabulary::build(corpus, lm::TokenizerMode::kCharacter);
  lm::NGramParams p;
  p.order = 4;
  p.smoothing_alpha = 1e-6;
  p.cache_weight = 0.0;
  p.interpolation_weights = {0.0, 0.0, 0.0, 1.0};
  const auto m = lm::CacheNGramModel::train(corpus, v, p);
  ModelSource src(m);
  SamplerConfig cfg;
  cfg.seed = 99;
  StopCriteria stop;
  stop.max_new_tokens = 60;
  const auto a = generate_sequence(src, v.tokenize("th"), cfg, stop);
  const auto b = generate_sequence(src, v.tokenize("th"), cfg, stop);
  EXPECT_EQ(a, b);
  EXPECT_EQ(std::count(a.begin(), a.end(), lm::kEos), 0);
  EXPECT_LT(a.size(), 60u);
}

TEST(Generate, HeadroomIsChecked) {
  const lm::Vocabulary v(lm::TokenizerMode::kCharacter, {"a", "b"});
  lm::NGramParams p;
  p.context_budget = 10;
  lm::CacheNGramModel m(v, p);
  ModelSource src(m);
  StopCriteria stop;
  stop.max_new_tokens = 6;
  EXPECT_NO_THROW(generate_sequence(src, v.tokenize("abab"), SamplerConfig{}, stop));
  EXPECT_EQ(code_of([&] { generate_sequence(src, v.tokenize("ababa"), SamplerConfig{}, stop); }),
            ErrorCode::kContextOverflow);
}

TEST(Generate, SteerSourceKeepsDomainOrdering) {
  const std::vector<std::string> dom{"the cat sat", "a cat ran"}, gen{"dogs bark loud"};
  const auto v = lm::Vocabulary::build(dom, lm::TokenizerMode::kCharacter);
  auto domain = std::make_shared<lm::CacheNGramModel>(lm::CacheNGramModel::train(dom, v, {}));
  auto base = std::make_shared<lm::CacheNGramModel>(lm::CacheNGramModel::train(gen, v, {}));
  guidance::ModelPair models(domain, base);
  SteerSource steer(models, v.tokenize("a dog\n###\n"), {0.0, 1.0, false});
  for (const char* ctx : {"", "t", "the c", "a ca"}) {
    const auto s = steer.next(v.tokenize(ctx));
    const auto d = domain->log_probs(v.tokenize(ctx));
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = 0; j < s.size(); ++j) EXPECT_EQ(s[i] < s[j], d[i] < d[j]);
    }
    // Same nucleus support as the squared-renormalised domain distribution.
    auto sq = lm::softmax(d);
    for (auto& x : sq) x *= x;
    EXPECT_EQ(kept(nucleus_filter(s, 0.9)), kept(nucleus_filter(lm::log_of(sq), 0.9)));
  }
  EXPECT_EQ(steer.context_budget(), lm::kDefaultContextBudget - v.tokenize("a dog\n###\n").size());
}
