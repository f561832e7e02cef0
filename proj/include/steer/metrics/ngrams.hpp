#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace steer::metrics {

using TextTokenizer = std::function<std::vector<std::string>(std::string_view)>;

TextTokenizer word_tokenizer();
TextTokenizer character_tokenizer();
TextTokenizer tokenizer_for(std::string_view mode);

struct NgramStat {
  double value = 0.0;       // 1 - unique / total, in [0, 1]
  std::size_t total = 0;
  std::size_t unique = 0;
  bool no_ngrams = false;   // every example was shorter than n
};

/// Repetition rate of n-grams collected per example (never across example
/// boundaries) and pooled over the dataset. Throws EmptyDataset.
NgramStat normalized_ngrams(std::span<const std::vector<std::string>> tokenized, int n);
NgramStat normalized_ngrams(std::span<const std::string> texts, int n,
                            const TextTokenizer& tokenizer);

/// prod_{n=2..4} (1 - normalized_ngrams(n)).
double diversity_score(std::span<const std::vector<std::string>> tokenized);
double diversity_score(std::span<const std::string> texts, const TextTokenizer& tokenizer);

}  // namespace steer::metrics
