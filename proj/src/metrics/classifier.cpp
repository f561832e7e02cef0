#include "steer/metrics/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "steer/decoding/rng.hpp"
#include "steer/error.hpp"
#include "steer/metrics/matrix.hpp"

namespace steer::metrics {

void SoftmaxRegression::fit(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                            int num_classes, const LogisticConfig& config) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  weights_ = Eigen::MatrixXd::Zero(d, num_classes);
  bias_ = Eigen::RowVectorXd::Zero(num_classes);
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, num_classes);
  for (Eigen::Index i = 0; i < n; ++i) onehot(i, labels[static_cast<std::size_t>(i)]) = 1.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Eigen::MatrixXd residual = predict_proba(x) - onehot;
    Eigen::MatrixXd grad_w = x.transpose() * residual * inv_n + config.l2 * weights_;
    Eigen::RowVectorXd grad_b = residual.colwise().sum() * inv_n;
    weights_ -= config.learning_rate * grad_w;
    bias_ -= config.learning_rate * grad_b;
  }
}

Eigen::MatrixXd SoftmaxRegression::predict_proba(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd z = x * weights_;
  z.rowwise() += bias_;
  Eigen::VectorXd max = z.rowwise().maxCoeff();
  z.colwise() -= max;
  z = z.array().exp().matrix();
  Eigen::VectorXd sums = z.rowwise().sum();
  for (Eigen::Index i = 0; i < z.rows(); ++i) z.row(i) /= sums(i);
  return z;
}

std::vector<int> SoftmaxRegression::predict(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd p = predict_proba(x);
  std::vector<int> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::Index arg = 0;
    p.row(i).maxCoeff(&arg);
    out[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return out;
}

void LogisticRegression::fit(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                             const LogisticConfig& config) {
  const Eigen::Index n = x.rows();
  weights_ = Eigen::VectorXd::Zero(x.cols());
  bias_ = 0.0;
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Eigen::VectorXd residual = predict_proba(x) - y;
    Eigen::VectorXd grad_w = x.transpose() * residual * inv_n + config.l2 * weights_;
    const double grad_b = residual.sum() * inv_n;
    weights_ -= config.learning_rate * grad_w;
    bias_ -= config.learning_rate * grad_b;
  }
}

Eigen::VectorXd LogisticRegression::predict_proba(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd z = (x * weights_).array() + bias_;
  return z.unaryExpr([](double v) {
    return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  });
}

double rank_auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) raise(ErrorCode::kLengthMismatch, "scores vs labels");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  double positives = 0.0;
  double negatives = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) {
        positive_rank_sum += avg_rank;
        positives += 1.0;
      } else {
        negatives += 1.0;
      }
    }
    i = j;
  }
  if (positives == 0.0 || negatives == 0.0) {
    raise(ErrorCode::kTooFewSamples, "AUROC needs both classes");
  }
  return (positive_rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

std::vector<int> stratified_folds(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                  int folds, std::uint64_t seed) {
  std::vector<int> fold(labels.size(), 0);
  std::map<int, std::vector<Eigen::Index>> by_class;
  for (Eigen::Index i : canonical_order(x)) {
    by_class[labels[static_cast<std::size_t>(i)]].push_back(i);
  }
  decoding::Xoshiro256 rng(seed);
  for (auto& [label, members] : by_class) {
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.below(i)]);
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      fold[static_cast<std::size_t>(members[i])] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }
  }
  return fold;
}

namespace {

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

}  // namespace

double adversarial_auroc(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth, int folds,
                         std::uint64_t seed, const LogisticConfig& config) {
  if (folds < 2) raise(ErrorCode::kParameterOutOfRange, "need at least two folds");
  if (real.rows() < folds || synth.rows() < folds) {
    raise(ErrorCode::kTooFewSamples, "each class needs at least " + std::to_string(folds) +
                                         " samples");
  }
  if (real.cols() != synth.cols()) raise(ErrorCode::kLengthMismatch, "embedding dimensions differ");
  Eigen::MatrixXd x(real.rows() + synth.rows(), real.cols());
  x << real, synth;
  std::vector<int> labels(static_cast<std::size_t>(x.rows()), 0);
  std::fill(labels.begin() + real.rows(), labels.end(), 1);
  const auto fold = stratified_folds(x, labels, folds, seed);

  double total = 0.0;
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train_rows;
    std::vector<Eigen::Index> test_rows;
    std::vector<int> train_labels;
    std::vector<int> test_labels;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (fold[static_cast<std::size_t>(i)] == f) {
        test_rows.push_back(i);
        test_labels.push_back(labels[static_cast<std::size_t>(i)]);
      } else {
        train_rows.push_back(i);
        train_labels.push_back(labels[static_cast<std::size_t>(i)]);
      }
    }
    LogisticRegression model;
    model.fit(select_rows(x, train_rows), train_labels, config);
    Eigen::VectorXd scores = model.predict_proba(select_rows(x, test_rows));
    total += rank_auroc(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
                        test_labels);
  }
  return total / folds;
}

double downstream_eval(const Eigen::MatrixXd& synth_x, std::span<const std::string> synth_labels,
                       const Eigen::MatrixXd& holdout_x,
                       std::span<const std::string> holdout_labels,
                       const LogisticConfig& config) {
  if (static_cast<std::size_t>(synth_x.rows()) != synth_labels.size() ||
      static_cast<std::size_t>(holdout_x.rows()) != holdout_labels.size()) {
    raise(ErrorCode::kLengthMismatch, "embeddings and labels differ in count");
  }
  if (holdout_labels.empty()) raise(ErrorCode::kEmptyHoldout, "holdout set is empty");
  std::map<std::string, int> classes;
  for (const auto& l : synth_labels) classes.emplace(l, 0);
  if (classes.size() < 2) {
    raise(ErrorCode::kSingleClassTraining, "synthetic training data holds fewer than 2 labels");
  }
  int next = 0;
  for (auto& [name, id] : classes) id = next++;
  std::vector<int> y;
  y.reserve(synth_labels.size());
  for (const auto& l : synth_labels) y.push_back(classes.at(l));
  SoftmaxRegression model;
  model.fit(synth_x, y, static_cast<int>(classes.size()), config);
  auto predicted = model.predict(holdout_x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < holdout_labels.size(); ++i) {
    auto it = classes.find(holdout_labels[i]);
    if (it != classes.end() && it->second == predicted[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(holdout_labels.size());
}

}  // namespace steer::metrics
