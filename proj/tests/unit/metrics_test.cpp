#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "lp_oracle.hpp"
#include "steer/decoding/rng.hpp"
#include "steer/metrics/classifier.hpp"
#include "steer/metrics/coherence.hpp"
#include "steer/metrics/hull.hpp"
#include "steer/metrics/matrix.hpp"
#include "steer/metrics/ngrams.hpp"
#include "steer/metrics/report.hpp"
#include "test_util.hpp"

using namespace steer;
using namespace steer::metrics;
using testkit::code_of;

namespace {

using Tokens = std::vector<std::vector<std::string>>;

double oracle_norm(const Tokens& data, int n) {
  std::set<std::vector<std::string>> unique;
  std::size_t total = 0;
  for (const auto& ex : data) {
    for (std::size_t i = 0; i + n <= ex.size(); ++i) {
      unique.insert(std::vector<std::string>(ex.begin() + i, ex.begin() + i + n));
      ++total;
    }
  }
  return total == 0 ? 0.0 : 1.0 - static_cast<double>(unique.size()) / static_cast<double>(total);
}

double oracle_auroc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    (y[i] == 1 ? pos : neg) += 1;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] == 1 && y[j] == 0) wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return wins / (pos * neg);
}

Tokens random_tokens(decoding::Xoshiro256& rng) {
  Tokens data(1 + rng.below(6));
  const std::size_t alphabet = 2 + rng.below(4);
  for (auto& ex : data) {
    const std::size_t len = rng.below(12);
    for (std::size_t i = 0; i < len; ++i) ex.push_back(std::string(1, char('a' + rng.below(alphabet))));
  }
  return data;
}

Eigen::MatrixXd gaussian(decoding::Xoshiro256& rng, int rows, int cols, double shift = 0.0) {
  Eigen::MatrixXd x(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      // Box-Muller.
      const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
      x(i, j) = std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2) + shift;
    }
  }
  return x;
}

Eigen::MatrixXd reversed_rows(const Eigen::MatrixXd& x) { return x.colwise().reverse(); }

}  // namespace

TEST(Ngrams, Examples) {
  const Tokens distinct{{"a", "b", "c", "d"}};
  EXPECT_EQ(normalized_ngrams(distinct, 2).value, 0.0);
  const Tokens aaaa{{"a", "a", "a", "a"}};
  EXPECT_EQ(normalized_ngrams(aaaa, 3).value, 0.5);
  const Tokens short_one{{"a", "b"}};
  const auto s = normalized_ngrams(short_one, 3);
  EXPECT_EQ(s.value, 0.0);
  EXPECT_TRUE(s.no_ngrams);
  EXPECT_EQ(code_of([] { normalized_ngrams(Tokens{}, 2); }), ErrorCode::kEmptyDataset);
  EXPECT_EQ(diversity_score(Tokens{{"a", "b", "c", "d", "e"}}), 1.0);
  const Tokens hundred{std::vector<std::string>(100, "x")};
  EXPECT_LT(diversity_score(hundred), 0.01);
}

TEST(Ngrams, NeverCrossExamples) {
  const std::vector<std::string> texts{"a b", "a b"};
  const auto s = normalized_ngrams(texts, 3, word_tokenizer());
  EXPECT_EQ(s.total, 0u);
  EXPECT_EQ(normalized_ngrams(texts, 2, word_tokenizer()).value, 0.5);
  EXPECT_EQ(normalized_ngrams(std::vector<std::string>{"abab"}, 2, character_tokenizer()).value,
            1.0 - 2.0 / 3.0);
}

TEST(Ngrams, MatchBruteForceOracle) {
  decoding::Xoshiro256 rng(31);
  for (int t = 0; t < 100; ++t) {
    const auto data = random_tokens(rng);
    for (int n = 1; n <= 4; ++n) EXPECT_EQ(normalized_ngrams(data, n).value, oracle_norm(data, n));
    EXPECT_EQ(diversity_score(data),
              (1.0 - oracle_norm(data, 2)) * (1.0 - oracle_norm(data, 3)) * (1.0 - oracle_norm(data, 4)));
  }
}

TEST(Ngrams, DuplicationIncreasesRepetition) {
  decoding::Xoshiro256 rng(32);
  for (int t = 0; t < 50; ++t) {
    const auto data = random_tokens(rng);
    auto doubled = data;
    doubled.insert(doubled.end(), data.begin(), data.end());
    for (int n = 1; n <= 4; ++n) {
      if (normalized_ngrams(data, n).total == 0) continue;
      EXPECT_GT(normalized_ngrams(doubled, n).value, normalized_ngrams(data, n).value);
    }
  }
}

TEST(RankAuroc, Examples) {
  EXPECT_EQ(rank_auroc(std::vector<double>{0.9, 0.8, 0.3, 0.2}, std::vector<int>{1, 1, 0, 0}), 1.0);
  EXPECT_EQ(rank_auroc(std::vector<double>{0.9, 0.2, 0.8, 0.3}, std::vector<int>{1, 0, 0, 1}), 0.75);
  EXPECT_EQ(code_of([] { rank_auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}); }),
            ErrorCode::kTooFewSamples);
}

TEST(RankAuroc, MatchesPairwiseOracleAndIsSymmetric) {
  decoding::Xoshiro256 rng(33);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.below(40);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(6));
      y[i] = static_cast<int>(rng.below(2));
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_EQ(rank_auroc(s, y), oracle_auroc(s, y));
    std::vector<int> flipped(n);
    for (std::size_t i = 0; i < n; ++i) flipped[i] = 1 - y[i];
    EXPECT_NEAR(rank_auroc(s, flipped), 1.0 - rank_auroc(s, y), 1e-15);
  }
}

TEST(Coherence, CosineExamples) {
  Eigen::MatrixXd a(1, 2), b(1, 2), c(2, 2);
  a << 1, 0;
  b << 1, 1;
  c << 2, 0, 0, 0;
  EXPECT_NEAR(dataset_cosine_similarity(a, b), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(dataset_cosine_similarity(a, -a), -1.0, 1e-15);
  EXPECT_NEAR(dataset_cosine_similarity(c, c), 1.0, 1e-15);
  Eigen::MatrixXd zero(2, 2);
  zero << 1, 0, -1, 0;
  EXPECT_EQ(code_of([&] { dataset_cosine_similarity(zero, a); }), ErrorCode::kZeroMeanVector);
  EXPECT_EQ(code_of([&] { dataset_cosine_similarity(Eigen::MatrixXd(0, 2), a); }), ErrorCode::kEmptySet);
}

TEST(Coherence, QuantizedDivergence) {
  decoding::Xoshiro256 rng(40);
  const auto x = gaussian(rng, 60, 4);
  const auto same = quantized_divergence(x, x, 5, 1e-6, 17);
  EXPECT_NEAR(same.score, 1.0, 1e-12);

  // Two far-apart clusters, one per dataset: two-bin closed form.
  const auto a = gaussian(rng, 30, 3, 0.0) * 0.01;
  const auto b = (gaussian(rng, 40, 3, 0.0) * 0.01).array() + 100.0;
  const double eps = 1e-6;
  const auto r = quantized_divergence(a, b, 2, eps, 17);
  const double hi = (1 + eps) / (1 + 2 * eps), lo = eps / (1 + 2 * eps);
  const auto kl = [](double p, double q) { return p * std::log2(p / q); };
  const double m1 = 0.5 * (hi + lo);
  const double js = 0.5 * (kl(hi, m1) + kl(lo, m1)) + 0.5 * (kl(lo, m1) + kl(hi, m1));
  EXPECT_NEAR(r.score, 1.0 - js, 1e-12);
  EXPECT_LT(r.score, 1e-4);

  EXPECT_EQ(default_cluster_count(1000, 1000), 50);
  EXPECT_EQ(default_cluster_count(10, 5), 2);
  EXPECT_EQ(code_of([&] { quantized_divergence(x.topRows(1), x.topRows(1), 3, 1e-6, 1); }),
            ErrorCode::kTooFewPoints);

  for (int t = 0; t < 10; ++t) {
    const auto p = gaussian(rng, 25, 3), q = gaussian(rng, 30, 3, 0.5);
    const double s = quantized_divergence(p, q, 0, 1e-6, 17).score;
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_EQ(s, quantized_divergence(reversed_rows(p), reversed_rows(q), 0, 1e-6, 17).score);
  }
}

TEST(Coherence, KMeansIsOrderInvariant) {
  decoding::Xoshiro256 rng(41);
  const auto x = gaussian(rng, 50, 2);
  const auto a = kmeans(x, 4, 9), b = kmeans(reversed_rows(x), 4, 9);
  EXPECT_EQ(a.centroids, b.centroids);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(a.assignment[i], b.assignment[49 - i]);
}

TEST(Classifier, AdversarialNullIsChance) {
  decoding::Xoshiro256 rng(42);
  const auto real = gaussian(rng, 500, 8), synth = gaussian(rng, 500, 8);
  const double auc = adversarial_auroc(real, synth, 5, 23);
  EXPECT_GE(auc, 0.45);
  EXPECT_LE(auc, 0.55);
  EXPECT_EQ(auc, adversarial_auroc(reversed_rows(real), reversed_rows(synth), 5, 23));
  const auto shifted = gaussian(rng, 100, 8, 2.0);
  EXPECT_GT(adversarial_auroc(real.topRows(100), shifted, 5, 23), 0.95);
  EXPECT_EQ(code_of([&] { adversarial_auroc(real.topRows(3), synth, 5, 23); }), ErrorCode::kTooFewSamples);
}

TEST(Classifier, StratifiedFoldsBalanced) {
  decoding::Xoshiro256 rng(43);
  const auto x = gaussian(rng, 23, 2);
  std::vector<int> y(23);
  for (int i = 0; i < 23; ++i) y[i] = i < 13 ? 1 : 0;
  const auto folds = stratified_folds(x, y, 5, 1);
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<int> sizes(5, 0);
    for (int i = 0; i < 23; ++i) if (y[i] == cls) ++sizes[folds[i]];
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1);
  }
}

TEST(Classifier, DownstreamOracles) {
  decoding::Xoshiro256 rng(44);
  Eigen::MatrixXd x(300, 4);
  std::vector<std::string> labels(300);
  const auto noise = gaussian(rng, 300, 4);
  for (int i = 0; i < 300; ++i) {
    const int c = i % 3;
    labels[i] = "c" + std::to_string(c);
    x.row(i) = noise.row(i) * 0.3;
    x(i, c) += 3.0;
  }
  EXPECT_GE(downstream_eval(x, labels, x, labels), 0.95);

  auto shuffled = labels;
  for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
  // Pure-noise features: no feature carries label information.
  EXPECT_NEAR(downstream_eval(noise.topRows(150), std::span(shuffled).first(150), noise.bottomRows(150),
                              std::span(labels).last(150)),
              1.0 / 3, 0.12);

  const std::vector<std::string> one(300, "only");
  EXPECT_EQ(code_of([&] { downstream_eval(x, one, x, labels); }), ErrorCode::kSingleClassTraining);
  EXPECT_EQ(code_of([&] { downstream_eval(x, labels, Eigen::MatrixXd(0, 4), {}); }),
            ErrorCode::kEmptyHoldout);
}

TEST(Hull, FScore) {
  EXPECT_NEAR(f_score(0.994, 0.963), 0.978, 1e-3);
  EXPECT_NEAR(f_score(0.772, 0.993), 0.869, 1e-3);
  EXPECT_EQ(f_score(0.0, 0.0), 0.0);
}

TEST(Hull, UnitSquareExample) {
  Eigen::MatrixXd square(4, 2), synth(2, 2);
  square << 0, 0, 1, 0, 0, 1, 1, 1;
  synth << 0.5, 0.5, 2, 2;
  const auto r = hull_precision_recall(square, synth);
  EXPECT_FALSE(r.projected);
  EXPECT_EQ(r.precision, 0.5);
  EXPECT_EQ(r.recall, 0.25);
  const auto same = hull_precision_recall(square, square);
  EXPECT_EQ(same.precision, 1.0);
  EXPECT_EQ(same.recall, 1.0);
  const Eigen::MatrixXd far = square.array() + 50.0;
  EXPECT_EQ(hull_precision_recall(square, far).precision, 0.0);
  EXPECT_EQ(code_of([&] { hull_precision_recall(square.topRows(1), synth); }), ErrorCode::kTooFewPoints);
}

TEST(Hull, RotationInvariance) {
  decoding::Xoshiro256 rng(45);
  for (int t = 0; t < 10; ++t) {
    const auto a = gaussian(rng, 15, 3), b = gaussian(rng, 12, 3, 0.3);
    // Rotation from the QR factor of a random matrix.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rng, 3, 3));
    const Eigen::MatrixXd q = qr.householderQ();
    const auto r1 = hull_precision_recall(a, b), r2 = hull_precision_recall(a * q, b * q);
    EXPECT_EQ(r1.precision, r2.precision);
    EXPECT_EQ(r1.recall, r2.recall);
  }
}

TEST(Hull, MembershipAgreesWithLpOracle) {
  decoding::Xoshiro256 rng(46);
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    const int dim = 2 + static_cast<int>(rng.below(2));
    const int n = 3 + static_cast<int>(rng.below(28));
    Eigen::MatrixXd x(n, dim);
    for (int i = 0; i < n; ++i) for (int j = 0; j < dim; ++j) x(i, j) = rng.uniform();
    const double tau = 1e-6 * diameter(x);
    for (int q = 0; q < 10; ++q) {
      Eigen::VectorXd p(dim);
      for (int j = 0; j < dim; ++j) p(j) = 1.3 * rng.uniform() - 0.15;
      if (q == 0) p = x.row(static_cast<Eigen::Index>(rng.below(n))).transpose();
      const auto oracle = testkit::lp_hull_distance_l1(x, p);
      const auto fw = hull_membership(x, p, tau);
      if (oracle <= 1e-9) {
        EXPECT_TRUE(fw.member) << "inside point rejected, residual " << fw.residual;
      } else if (oracle > std::sqrt(double(dim)) * tau) {
        EXPECT_FALSE(fw.member) << "outside point accepted, L1 gap " << oracle;
      }
      ++checked;
    }
  }
  EXPECT_EQ(checked, 600);
}

TEST(Hull, PcaProjectionAboveFiveDims) {
  decoding::Xoshiro256 rng(47);
  const auto real = gaussian(rng, 40, 12), synth = gaussian(rng, 40, 12);
  const auto r = hull_precision_recall(real, synth);
  EXPECT_TRUE(r.projected);
  EXPECT_GT(r.precision, 0.0);
  const auto pca = fit_pca(real, 5);
  EXPECT_EQ(pca.components.cols(), 5);
  const Eigen::MatrixXd gram = pca.components.transpose() * pca.components;
  EXPECT_TRUE(gram.isApprox(Eigen::MatrixXd::Identity(5, 5), 1e-10));
}

TEST(Report, IdentityCase) {
  decoding::Xoshiro256 rng(48);
  const auto x = gaussian(rng, 120, 16);
  std::vector<std::string> texts;
  for (int i = 0; i < 120; ++i) texts.push_back("example number " + std::to_string(i));
  const auto r = evaluate_embedded(texts, texts, x, x, MetricConfig{}, "test");
  EXPECT_NEAR(r.cosine, 1.0, 1e-9);
  EXPECT_NEAR(r.qdiv, 1.0, 1e-9);
  EXPECT_EQ(r.hull_precision, 1.0);
  EXPECT_EQ(r.hull_recall, 1.0);
  EXPECT_EQ(r.n, 120u);
  EXPECT_EQ(r.m, 120u);
}

TEST(Report, FieldsMatchIndividualMetrics) {
  decoding::Xoshiro256 rng(49);
  const auto real = gaussian(rng, 60, 6), synth = gaussian(rng, 50, 6, 0.4);
  std::vector<std::string> rt, st;
  for (int i = 0; i < 60; ++i) rt.push_back("real text " + std::to_string(i % 7));
  for (int i = 0; i < 50; ++i) st.push_back("synthetic text " + std::to_string(i % 9) + " more");
  MetricConfig cfg;
  const auto r = evaluate_embedded(rt, st, real, synth, cfg, "fp");
  const auto tok = tokenizer_for(cfg.ngram_tokenizer);
  EXPECT_EQ(r.norm3, normalized_ngrams(st, 3, tok).value);
  EXPECT_EQ(r.diversity, diversity_score(st, tok));
  EXPECT_EQ(r.cosine, dataset_cosine_similarity(real, synth));
  EXPECT_EQ(r.qdiv, quantized_divergence(real, synth, 0, cfg.qdiv_epsilon, cfg.kmeans_seed).score);
  EXPECT_EQ(r.adversarial_auroc, adversarial_auroc(real, synth, cfg.auroc_folds, cfg.auroc_seed));
  const auto hull = hull_precision_recall(real, synth, {cfg.hull_dim, cfg.hull_tau, {}});
  EXPECT_EQ(r.hull_precision, hull.precision);
  EXPECT_EQ(r.hull_recall, hull.recall);
  EXPECT_EQ(r.hull_fscore, f_score(hull.precision, hull.recall));

  // Permutation invariance.
  std::vector<std::string> rt_rev(rt.rbegin(), rt.rend()), st_rev(st.rbegin(), st.rend());
  const auto p = evaluate_embedded(rt_rev, st_rev, reversed_rows(real), reversed_rows(synth), cfg, "fp");
  EXPECT_EQ(p.to_json(), r.to_json());

  const auto round = MetricReport::from_json(r.to_json());
  EXPECT_EQ(round.to_json(), r.to_json());
  const std::vector<std::string> none;
  EXPECT_EQ(code_of([&] { evaluate_embedded(rt, none, real, Eigen::MatrixXd(0, 6), cfg, "fp"); }),
            ErrorCode::kEmptyDataset);
}

TEST(Report, CsvLayout) {
  EXPECT_EQ(csv_header(),
            "gamma,eta,norm2,norm3,norm4,diversity,cosine,qdiv,auroc,hull_p,hull_r,hull_f,n,m,seed,status\n");
  MetricReport r;
  r.norm3 = 0.5;
  const auto row = csv_row(0.25, std::nullopt, &r, 3, 4, 9, "ok");
  EXPECT_EQ(row, "0.250000,,0.000000,0.500000,0.000000,0.000000,0.000000,0.000000,0.000000,"
                 "0.000000,0.000000,0.000000,3,4,9,ok\n");
  EXPECT_EQ(csv_row(1.0, 0.0, nullptr, 3, 4, 9, "error:AllMasked"),
            "1.000000,0.000000,,,,,,,,,,,3,4,9,error:AllMasked\n");
}
