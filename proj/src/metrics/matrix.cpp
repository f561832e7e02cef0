#include "steer/metrics/matrix.hpp"

#include <algorithm>
#include <numeric>

#include "steer/error.hpp"

namespace steer::metrics {

Eigen::MatrixXd to_matrix(std::span<const embeddings::EmbeddingVector> vectors) {
  if (vectors.empty()) return {};
  const auto d = static_cast<Eigen::Index>(vectors.front().dim());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(vectors.size()), d);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (static_cast<Eigen::Index>(vectors[i].dim()) != d) {
      raise(ErrorCode::kLengthMismatch, "embedding dimensions differ");
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      out(static_cast<Eigen::Index>(i), j) = vectors[i].values[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

std::vector<Eigen::Index> canonical_order(const Eigen::MatrixXd& rows) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(rows.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      if (rows(a, j) != rows(b, j)) return rows(a, j) < rows(b, j);
    }
    return false;
  });
  return order;
}

}  // namespace steer::metrics
