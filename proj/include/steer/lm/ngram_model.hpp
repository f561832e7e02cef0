#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "steer/lm/language_model.hpp"

namespace steer::lm {

struct NGramParams {
  int order = 5;
  double smoothing_alpha = 0.1;
  double cache_weight = 0.3;   // lambda_c in [0, 1]
  double cache_decay = 0.99;   // rho in (0, 1]
  std::size_t context_budget = kDefaultContextBudget;
  // Per-order mixing weights, lowest order first. Empty means equal weights.
  std::vector<double> interpolation_weights;

  void validate() const;
};

/// Interpolated add-alpha n-gram model mixed with a recency-weighted unigram
/// cache over the supplied context:
///
///   P(w | ctx) = (1 - lambda_c) * sum_k beta_k * (c_k(h, w) + a) / (c_k(h) + a V)
///              + lambda_c * sum_j rho^(L-1-j) [x_j = w] / sum_j rho^(L-1-j)
///
/// where h is the last k-1 tokens of the BOS-padded context. The cache term
/// is dropped for an empty context.
class CacheNGramModel final : public LanguageModel {
 public:
  /// Untrained model: every count is zero, so the n-gram part is uniform.
  CacheNGramModel(Vocabulary vocab, NGramParams params);

  /// Each example is trained as [BOS x (n-1)] tokens [EOS]. Throws EmptyCorpus.
  static CacheNGramModel train(std::span<const std::string> corpus, Vocabulary vocab,
                               NGramParams params);

  LogitVector log_probs(std::span<const TokenId> context) const override;
  const Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t context_budget() const override { return params_.context_budget; }

  const NGramParams& params() const { return params_; }
  int order() const { return params_.order; }
  std::uint64_t training_tokens() const { return training_tokens_; }

  /// Count of `next` after `history` (history length selects the order).
  std::uint64_t count(std::span<const TokenId> history, TokenId next) const;

  /// `.gz` suffix selects gzip compression. Throws IoError.
  void save(const std::filesystem::path& path) const;
  std::string serialize() const;

  /// Throws IoError or FormatVersionMismatch; never returns a partial model.
  static CacheNGramModel load(const std::filesystem::path& path);
  static CacheNGramModel deserialize(const std::string& text);

  static constexpr int kFormatVersion = 1;

 private:
  struct HistoryHash {
    std::size_t operator()(const std::vector<TokenId>& key) const noexcept;
  };
  struct Successors {
    std::uint64_t total = 0;
    std::vector<std::pair<TokenId, std::uint64_t>> next;  // sorted by id
  };
  using Table = std::unordered_map<std::vector<TokenId>, Successors, HistoryHash>;

  void add_count(std::size_t order_index, std::vector<TokenId> history, TokenId next,
                 std::uint64_t count);
  void finalize();

  Vocabulary vocab_;
  NGramParams params_;
  std::vector<double> weights_;
  std::vector<Table> tables_;  // tables_[k-1] holds histories of length k-1
  std::uint64_t training_tokens_ = 0;
};

}  // namespace steer::lm
