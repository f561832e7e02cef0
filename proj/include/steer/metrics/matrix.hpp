#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "steer/embeddings/embedder.hpp"

namespace steer::metrics {

/// Stacks embeddings as rows. Throws LengthMismatch on ragged input.
Eigen::MatrixXd to_matrix(std::span<const embeddings::EmbeddingVector> vectors);

/// Row indices sorted lexicographically by row contents (index breaks ties).
/// Used wherever a result must not depend on input order.
std::vector<Eigen::Index> canonical_order(const Eigen::MatrixXd& rows);

}  // namespace steer::metrics
