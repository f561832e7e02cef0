#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "steer/embeddings/embedder.hpp"
#include "steer/metrics/classifier.hpp"
#include "steer/metrics/hull.hpp"

namespace steer::metrics {

struct MetricConfig {
  std::string ngram_tokenizer = "word";
  int qdiv_clusters = 0;  // 0 selects the default rule
  double qdiv_epsilon = 1e-6;
  std::uint64_t kmeans_seed = 17;
  int auroc_folds = 5;
  std::uint64_t auroc_seed = 23;
  LogisticConfig classifier;
  Eigen::Index hull_dim = 5;
  std::optional<double> hull_tau;

  std::string fingerprint(const std::string& embedder_fingerprint) const;
};

struct MetricReport {
  double norm2 = 0.0;
  double norm3 = 0.0;  // headline repetition figure
  double norm4 = 0.0;
  double diversity = 0.0;
  double cosine = 0.0;
  double qdiv = 0.0;
  int qdiv_clusters = 0;
  double adversarial_auroc = 0.0;
  double hull_precision = 0.0;
  double hull_recall = 0.0;
  double hull_fscore = 0.0;
  double hull_tau = 0.0;
  std::size_t n = 0;  // real examples
  std::size_t m = 0;  // synthetic examples
  std::string config_fingerprint;
  std::uint64_t kmeans_seed = 0;
  std::uint64_t auroc_seed = 0;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
  static MetricReport from_json(const nlohmann::json& doc);
};

/// Every metric on one (real, synthetic) pair; embeddings computed once.
/// Throws EmptyDataset when either side is empty.
MetricReport evaluate_pair(std::span<const std::string> real, std::span<const std::string> synth,
                           const MetricConfig& config, const embeddings::Embedder& embedder);

/// Same, with embeddings already computed (rows parallel to the texts).
MetricReport evaluate_embedded(std::span<const std::string> real,
                               std::span<const std::string> synth,
                               const Eigen::MatrixXd& real_x, const Eigen::MatrixXd& synth_x,
                               const MetricConfig& config, const std::string& embedder_fingerprint);

/// Fixed column order shared by evaluation ledgers and sweep tables.
std::string csv_header();
/// `gamma`/`eta` print empty when absent; `status` is "ok" or an error marker.
std::string csv_row(std::optional<double> gamma, std::optional<double> eta,
                    const MetricReport* report, std::size_t n, std::size_t m, std::uint64_t seed,
                    const std::string& status);

}  // namespace steer::metrics
