#include "steer/embeddings/token_table.hpp"

#include <algorithm>
#include <cmath>

#include "steer/error.hpp"

namespace steer::embeddings {

TokenEmbeddingTable::TokenEmbeddingTable(Eigen::MatrixXd rows) : rows_(std::move(rows)) {}

Eigen::MatrixXd cooccurrence_counts(std::span<const std::vector<lm::TokenId>> sequences,
                                    std::size_t vocab_size) {
  const auto v = static_cast<Eigen::Index>(vocab_size);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(v, v);
  for (const auto& seq : sequences) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const std::size_t hi = std::min(seq.size(), i + kCooccurrenceWindow + 1);
      for (std::size_t j = i + 1; j < hi; ++j) {
        counts(seq[i], seq[j]) += 1.0;
        counts(seq[j], seq[i]) += 1.0;
      }
    }
  }
  return counts;
}

Eigen::MatrixXd ppmi(const Eigen::MatrixXd& counts) {
  const Eigen::VectorXd row_sums = counts.rowwise().sum();
  const Eigen::RowVectorXd col_sums = counts.colwise().sum();
  const double total = counts.sum();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(counts.rows(), counts.cols());
  if (total <= 0.0) return out;
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < counts.cols(); ++j) {
      if (counts(i, j) <= 0.0) continue;
      const double pmi = std::log(counts(i, j) * total / (row_sums(i) * col_sums(j)));
      out(i, j) = std::max(0.0, pmi);
    }
  }
  return out;
}

TokenEmbeddingTable build_token_table(std::span<const std::vector<lm::TokenId>> sequences,
                                      std::size_t vocab_size, std::size_t dim) {
  if (sequences.empty()) raise(ErrorCode::kEmptyCorpus, "token table needs a corpus");
  if (dim == 0) raise(ErrorCode::kParameterOutOfRange, "token embedding dimension must be > 0");
  const Eigen::MatrixXd m = ppmi(cooccurrence_counts(sequences, vocab_size));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  const Eigen::MatrixXd& u = svd.matrixU();
  const Eigen::VectorXd& sigma = svd.singularValues();
  const auto v = static_cast<Eigen::Index>(vocab_size);
  const auto keep = std::min<Eigen::Index>(static_cast<Eigen::Index>(dim), u.cols());

  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(v, static_cast<Eigen::Index>(dim));
  for (Eigen::Index c = 0; c < keep; ++c) {
    Eigen::VectorXd col = u.col(c);
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col(arg) < 0.0) col = -col;
    rows.col(c) = col * sigma(c);
  }
  const double tiny = 1e-12 * std::max(1.0, sigma.size() > 0 ? sigma(0) : 0.0);
  for (Eigen::Index i = 0; i < v; ++i) {
    const double norm = rows.row(i).norm();
    if (norm <= tiny) {
      rows.row(i).setZero();
      rows(i, 0) = 1.0;
    } else {
      rows.row(i) /= norm;
    }
  }
  return TokenEmbeddingTable(std::move(rows));
}

TokenEmbeddingTable token_embedding_table(std::span<const std::string> corpus,
                                          const lm::Vocabulary& vocab, std::size_t dim) {
  std::vector<std::vector<lm::TokenId>> sequences;
  sequences.reserve(corpus.size());
  for (const auto& line : corpus) sequences.push_back(vocab.tokenize(line));
  return build_token_table(sequences, vocab.size(), dim);
}

}  // namespace steer::embeddings
