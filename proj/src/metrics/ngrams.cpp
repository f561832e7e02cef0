#include "steer/metrics/ngrams.hpp"

#include <unordered_set>

#include "steer/error.hpp"
#include "steer/util/utf8.hpp"

namespace steer::metrics {

TextTokenizer word_tokenizer() {
  return [](std::string_view text) {
    std::vector<std::string> out;
    for (auto w : util::split_words(text)) out.emplace_back(w);
    return out;
  };
}

TextTokenizer character_tokenizer() {
  return [](std::string_view text) {
    std::vector<std::string> out;
    for (auto c : util::split_code_points(text)) out.emplace_back(c);
    return out;
  };
}

TextTokenizer tokenizer_for(std::string_view mode) {
  if (mode == "word") return word_tokenizer();
  if (mode == "character" || mode == "char") return character_tokenizer();
  raise(ErrorCode::kInvalidArgument, "unknown n-gram tokenizer '" + std::string(mode) + "'");
}

NgramStat normalized_ngrams(std::span<const std::vector<std::string>> tokenized, int n) {
  if (tokenized.empty()) raise(ErrorCode::kEmptyDataset, "n-gram statistics of an empty dataset");
  if (n < 1) raise(ErrorCode::kParameterOutOfRange, "n must be >= 1");
  const auto len = static_cast<std::size_t>(n);
  std::unordered_set<std::string> seen;
  NgramStat stat;
  std::string key;
  for (const auto& tokens : tokenized) {
    for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
      key.clear();
      for (std::size_t j = 0; j < len; ++j) {
        key += tokens[i + j];
        key.push_back('\x1f');
      }
      seen.insert(key);
      ++stat.total;
    }
  }
  stat.unique = seen.size();
  if (stat.total == 0) {
    stat.no_ngrams = true;
    return stat;
  }
  stat.value = 1.0 - static_cast<double>(stat.unique) / static_cast<double>(stat.total);
  return stat;
}

namespace {

std::vector<std::vector<std::string>> tokenize_all(std::span<const std::string> texts,
                                                   const TextTokenizer& tokenizer) {
  std::vector<std::vector<std::string>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(tokenizer(t));
  return out;
}

}  // namespace

NgramStat normalized_ngrams(std::span<const std::string> texts, int n,
                            const TextTokenizer& tokenizer) {
  return normalized_ngrams(tokenize_all(texts, tokenizer), n);
}

double diversity_score(std::span<const std::vector<std::string>> tokenized) {
  double product = 1.0;
  for (int n = 2; n <= 4; ++n) product *= 1.0 - normalized_ngrams(tokenized, n).value;
  return product;
}

double diversity_score(std::span<const std::string> texts, const TextTokenizer& tokenizer) {
  return diversity_score(tokenize_all(texts, tokenizer));
}

}  // namespace steer::metrics
