#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace steer::metrics {

/// Cosine between the mean real and mean synthetic rows. Throws EmptySet,
/// LengthMismatch, ZeroMeanVector.
double dataset_cosine_similarity(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth);

struct KMeansResult {
  Eigen::MatrixXd centroids;
  std::vector<int> assignment;  // per input row
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding (xoshiro256** seeded with `seed`),
/// run on the rows in canonical order. Stops after `max_iterations` or when
/// the summed squared centroid shift is <= `tolerance`. Ties go to the lower
/// centroid index; an emptied cluster keeps its previous centroid.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                    int max_iterations = 300, double tolerance = 1e-8);

/// max(2, min(50, floor((n + m) / 20))).
int default_cluster_count(std::size_t n, std::size_t m);

/// Jensen-Shannon divergence with base-2 logs; lies in [0, 1].
double jensen_shannon_bits(const std::vector<double>& p, const std::vector<double>& q);

struct QuantizedDivergenceResult {
  double score = 0.0;  // 1 - JS
  int k = 0;
  std::vector<double> real_histogram;
  std::vector<double> synth_histogram;
};

/// Quantised-embedding similarity: k-means over the pooled rows, per-dataset
/// bin frequencies plus `epsilon` renormalised, score = 1 - JS2(p, q).
/// k <= 0 selects default_cluster_count. Throws TooFewPoints.
QuantizedDivergenceResult quantized_divergence(const Eigen::MatrixXd& real,
                                               const Eigen::MatrixXd& synth, int k,
                                               double epsilon, std::uint64_t seed);

}  // namespace steer::metrics
