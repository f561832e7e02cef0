#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace steer::metrics {

struct LogisticConfig {
  double learning_rate = 0.1;
  int epochs = 500;
  double l2 = 1e-3;
};

/// Multinomial logistic regression trained by full-batch gradient descent on
/// the mean cross-entropy plus (l2 / 2) * ||W||^2 (bias unregularised). Two
/// classes is the binary special case of the same model.
class SoftmaxRegression {
 public:
  void fit(const Eigen::MatrixXd& x, const std::vector<int>& labels, int num_classes,
           const LogisticConfig& config);
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const;
  std::vector<int> predict(const Eigen::MatrixXd& x) const;

 private:
  Eigen::MatrixXd weights_;  // d x C
  Eigen::RowVectorXd bias_;  // 1 x C
};

/// Binary logistic regression: sigmoid(x.w + b), same optimiser settings.
class LogisticRegression {
 public:
  void fit(const Eigen::MatrixXd& x, const std::vector<int>& labels,
           const LogisticConfig& config);
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const;

 private:
  Eigen::VectorXd weights_;
  double bias_ = 0.0;
};

/// Mann-Whitney AUROC with average ranks for ties (a tie counts 1/2). Label 1
/// is the positive class. Throws TooFewSamples when a class is absent.
double rank_auroc(std::span<const double> scores, std::span<const int> labels);

/// Fold index per row: each class in canonical row order, shuffled with the
/// seed, then dealt round-robin.
std::vector<int> stratified_folds(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                  int folds, std::uint64_t seed);

/// Mean held-out AUROC of a real-vs-synthetic logistic classifier (synthetic
/// positive) under stratified k-fold cross-validation. Throws TooFewSamples.
double adversarial_auroc(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth, int folds,
                         std::uint64_t seed, const LogisticConfig& config = {});

/// Trains on synthetic embeddings/labels, reports accuracy on the real
/// holdout. Throws SingleClassTraining, EmptyHoldout.
double downstream_eval(const Eigen::MatrixXd& synth_x, std::span<const std::string> synth_labels,
                       const Eigen::MatrixXd& holdout_x,
                       std::span<const std::string> holdout_labels,
                       const LogisticConfig& config = {});

}  // namespace steer::metrics
