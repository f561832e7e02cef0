#include "steer/metrics/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "steer/decoding/rng.hpp"
#include "steer/error.hpp"
#include "steer/metrics/matrix.hpp"

namespace steer::metrics {

double dataset_cosine_similarity(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth) {
  if (real.rows() == 0 || synth.rows() == 0) {
    raise(ErrorCode::kEmptySet, "cosine similarity needs two non-empty sets");
  }
  if (real.cols() != synth.cols()) raise(ErrorCode::kLengthMismatch, "embedding dimensions differ");
  const Eigen::VectorXd vr = real.colwise().mean().transpose();
  const Eigen::VectorXd vs = synth.colwise().mean().transpose();
  const double nr = vr.norm();
  const double ns = vs.norm();
  if (nr == 0.0 || ns == 0.0) raise(ErrorCode::kZeroMeanVector, "mean embedding is zero");
  return std::clamp(vr.dot(vs) / (nr * ns), -1.0, 1.0);
}

namespace {

int nearest(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& x, double* dist) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d = (centroids.row(c) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (dist) *dist = best_d;
  return best;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                    int max_iterations, double tolerance) {
  const Eigen::Index n = points.rows();
  if (k < 1 || n < k) {
    raise(ErrorCode::kTooFewPoints, "k-means with k = " + std::to_string(k) + " on " +
                                        std::to_string(n) + " points");
  }
  const auto order = canonical_order(points);
  Eigen::MatrixXd x(n, points.cols());
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = points.row(order[static_cast<std::size_t>(i)]);

  decoding::Xoshiro256 rng(seed);
  Eigen::MatrixXd centroids(k, points.cols());
  centroids.row(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = (x.row(i) - centroids.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (u < acc && d2[static_cast<std::size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centroids.row(c) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], (x.row(i) - centroids.row(c)).squaredNorm());
    }
  }

  KMeansResult result;
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  for (int iter = 0; iter < max_iterations; ++iter) {
    result.iterations = iter + 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      assign[static_cast<std::size_t>(i)] = nearest(centroids, x.row(i), nullptr);
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) continue;
      Eigen::RowVectorXd updated = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      shift += (updated - centroids.row(c)).squaredNorm();
      centroids.row(c) = updated;
    }
    if (shift <= tolerance) break;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    assign[static_cast<std::size_t>(i)] = nearest(centroids, x.row(i), nullptr);
  }
  result.centroids = std::move(centroids);
  result.assignment.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    result.assignment[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] =
        assign[static_cast<std::size_t>(i)];
  }
  return result;
}

int default_cluster_count(std::size_t n, std::size_t m) {
  return std::max<int>(2, std::min<int>(50, static_cast<int>((n + m) / 20)));
}

double jensen_shannon_bits(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) raise(ErrorCode::kLengthMismatch, "histogram sizes differ");
  double js = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) js += 0.5 * p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) js += 0.5 * q[i] * std::log2(q[i] / m);
  }
  return std::clamp(js, 0.0, 1.0);
}

QuantizedDivergenceResult quantized_divergence(const Eigen::MatrixXd& real,
                                               const Eigen::MatrixXd& synth, int k,
                                               double epsilon, std::uint64_t seed) {
  if (real.rows() == 0 || synth.rows() == 0) {
    raise(ErrorCode::kTooFewPoints, "quantised divergence needs two non-empty sets");
  }
  if (real.cols() != synth.cols()) raise(ErrorCode::kLengthMismatch, "embedding dimensions differ");
  if (!(epsilon > 0.0)) raise(ErrorCode::kParameterOutOfRange, "epsilon must be > 0");
  const auto n = static_cast<std::size_t>(real.rows());
  const auto m = static_cast<std::size_t>(synth.rows());
  if (k <= 0) k = default_cluster_count(n, m);
  if (k < 2 || static_cast<std::size_t>(k) > n + m) {
    raise(ErrorCode::kTooFewPoints, std::to_string(n + m) + " pooled points for k = " +
                                        std::to_string(k));
  }
  Eigen::MatrixXd pooled(real.rows() + synth.rows(), real.cols());
  pooled << real, synth;
  auto clusters = kmeans(pooled, k, seed);

  QuantizedDivergenceResult result;
  result.k = k;
  result.real_histogram.assign(static_cast<std::size_t>(k), 0.0);
  result.synth_histogram.assign(static_cast<std::size_t>(k), 0.0);
  for (std::size_t i = 0; i < n; ++i) result.real_histogram[static_cast<std::size_t>(clusters.assignment[i])] += 1.0;
  for (std::size_t i = 0; i < m; ++i) result.synth_histogram[static_cast<std::size_t>(clusters.assignment[n + i])] += 1.0;
  auto smooth = [&](std::vector<double>& h, double count) {
    double total = 0.0;
    for (double& v : h) {
      v = v / count + epsilon;
      total += v;
    }
    for (double& v : h) v /= total;
  };
  smooth(result.real_histogram, static_cast<double>(n));
  smooth(result.synth_histogram, static_cast<double>(m));
  result.score = 1.0 - jensen_shannon_bits(result.real_histogram, result.synth_histogram);
  return result;
}

}  // namespace steer::metrics
