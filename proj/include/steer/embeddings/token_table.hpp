#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "steer/lm/vocabulary.hpp"

namespace steer::embeddings {

/// Static per-token vectors used by contrastive search. Rows are unit length.
class TokenEmbeddingTable {
 public:
  explicit TokenEmbeddingTable(Eigen::MatrixXd rows);

  std::size_t vocab_size() const { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(rows_.cols()); }
  Eigen::VectorXd row(lm::TokenId id) const { return rows_.row(id).transpose(); }
  const Eigen::MatrixXd& matrix() const { return rows_; }

  /// Rows are unit length, so this is their dot product.
  double cosine(lm::TokenId a, lm::TokenId b) const { return rows_.row(a).dot(rows_.row(b)); }

 private:
  Eigen::MatrixXd rows_;
};

inline constexpr int kCooccurrenceWindow = 2;

/// Symmetric co-occurrence counts within +-2 positions, never crossing
/// sequence boundaries.
Eigen::MatrixXd cooccurrence_counts(std::span<const std::vector<lm::TokenId>> sequences,
                                    std::size_t vocab_size);

/// max(0, log(C_ij * N / (C_i * C_j))), zero where C_ij = 0.
Eigen::MatrixXd ppmi(const Eigen::MatrixXd& counts);

/// PPMI matrix factorised by truncated SVD: row i is U_i * Sigma restricted to
/// the top `dim` singular directions, then L2-normalised. Each singular
/// vector is signed so its largest-magnitude entry is positive. All-zero rows
/// map to the unit basis vector e_0. Throws EmptyCorpus.
TokenEmbeddingTable build_token_table(std::span<const std::vector<lm::TokenId>> sequences,
                                      std::size_t vocab_size, std::size_t dim);

/// Tokenises each corpus line with `vocab` first.
TokenEmbeddingTable token_embedding_table(std::span<const std::string> corpus,
                                          const lm::Vocabulary& vocab, std::size_t dim);

}  // namespace steer::embeddings
