#include "steer/decoding/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "steer/embeddings/token_table.hpp"
#include "steer/error.hpp"

namespace steer::decoding {

namespace {

// Ids ordered by descending score, ties by ascending id.
std::vector<TokenId> ranked_ids(const LogitVector& logp) {
  std::vector<TokenId> ids(logp.size());
  std::iota(ids.begin(), ids.end(), TokenId{0});
  std::stable_sort(ids.begin(), ids.end(),
                   [&](TokenId a, TokenId b) { return logp[a] > logp[b]; });
  return ids;
}

}  // namespace

std::string_view method_name(SamplingMethod method) {
  switch (method) {
    case SamplingMethod::kGreedy: return "greedy";
    case SamplingMethod::kTopK: return "top_k";
    case SamplingMethod::kNucleus: return "nucleus";
    case SamplingMethod::kContrastiveSearch: return "contrastive_search";
  }
  return "unknown";
}

SamplingMethod parse_method(std::string_view name) {
  if (name == "greedy") return SamplingMethod::kGreedy;
  if (name == "top_k" || name == "top-k") return SamplingMethod::kTopK;
  if (name == "nucleus" || name == "top_p") return SamplingMethod::kNucleus;
  if (name == "contrastive_search" || name == "contrastive") {
    return SamplingMethod::kContrastiveSearch;
  }
  raise(ErrorCode::kInvalidArgument, "unknown sampling method '" + std::string(name) + "'");
}

void SamplerConfig::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    raise(ErrorCode::kNonPositiveTemperature, "temperature must be > 0");
  }
  if (method == SamplingMethod::kNucleus && !(p > 0.0 && p <= 1.0)) {
    raise(ErrorCode::kInvalidP, "nucleus p must lie in (0, 1]");
  }
  if ((method == SamplingMethod::kTopK || method == SamplingMethod::kContrastiveSearch) &&
      k < 1) {
    raise(ErrorCode::kInvalidK, "k must be >= 1");
  }
  if (method == SamplingMethod::kContrastiveSearch &&
      !(degeneration_alpha >= 0.0 && degeneration_alpha <= 1.0)) {
    raise(ErrorCode::kParameterOutOfRange, "degeneration_alpha must lie in [0, 1]");
  }
}

std::string SamplerConfig::fingerprint() const {
  std::ostringstream out;
  out.precision(17);
  out << method_name(method) << ";T=" << temperature;
  switch (method) {
    case SamplingMethod::kGreedy: break;
    case SamplingMethod::kTopK: out << ";k=" << k; break;
    case SamplingMethod::kNucleus: out << ";p=" << p; break;
    case SamplingMethod::kContrastiveSearch:
      out << ";k=" << k << ";alpha=" << degeneration_alpha;
      break;
  }
  return out.str();
}

LogitVector apply_temperature(const LogitVector& logp, double temperature) {
  if (!(temperature > 0.0)) raise(ErrorCode::kNonPositiveTemperature, "temperature must be > 0");
  if (temperature == 1.0) return logp;
  LogitVector out(logp.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = logp[i] / temperature;
  return out;
}

LogitVector top_k_filter(const LogitVector& logp, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > logp.size()) {
    raise(ErrorCode::kInvalidK, "k = " + std::to_string(k) + " outside [1, " +
                                    std::to_string(logp.size()) + "]");
  }
  if (static_cast<std::size_t>(k) == logp.size()) return logp;
  auto ids = ranked_ids(logp);
  LogitVector out(logp.size(), lm::kMasked);
  for (int i = 0; i < k; ++i) out[ids[static_cast<std::size_t>(i)]] = logp[ids[static_cast<std::size_t>(i)]];
  return out;
}

LogitVector nucleus_filter(const LogitVector& logp, double p) {
  if (!(p > 0.0 && p <= 1.0)) raise(ErrorCode::kInvalidP, "p must lie in (0, 1]");
  if (p >= 1.0) return logp;
  auto probs = lm::softmax(logp);
  auto ids = ranked_ids(logp);
  LogitVector out(logp.size(), lm::kMasked);
  double mass = 0.0;
  for (TokenId id : ids) {
    if (logp[id] == lm::kMasked) break;
    out[id] = logp[id];
    mass += probs[id];
    if (mass >= p) break;
  }
  return out;
}

TokenId sample_token(const LogitVector& logp, Xoshiro256& rng) {
  auto probs = lm::softmax(logp);
  double total = 0.0;
  TokenId last = 0;
  bool any = false;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (logp[i] != lm::kMasked) {
      any = true;
      last = static_cast<TokenId>(i);
    }
    total += probs[i];
  }
  if (!any) raise(ErrorCode::kAllMasked, "every token is masked");
  const double u = rng.uniform() * total;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] == 0.0) continue;
    cumulative += probs[i];
    if (u < cumulative) return static_cast<TokenId>(i);
  }
  return last;
}

TokenId greedy(const LogitVector& logp) {
  std::size_t best = logp.size();
  for (std::size_t i = 0; i < logp.size(); ++i) {
    if (logp[i] == lm::kMasked) continue;
    if (best == logp.size() || logp[i] > logp[best]) best = i;
  }
  if (best == logp.size()) raise(ErrorCode::kAllMasked, "every token is masked");
  return static_cast<TokenId>(best);
}

TokenId contrastive_select(const LogitVector& logp, std::span<const TokenId> context, int k,
                           double degeneration_alpha,
                           const embeddings::TokenEmbeddingTable* table) {
  if (table == nullptr) raise(ErrorCode::kMissingEmbeddings, "contrastive search needs a table");
  if (table->vocab_size() != logp.size()) {
    raise(ErrorCode::kMissingEmbeddings, "token embedding table does not cover the vocabulary");
  }
  if (k < 1) raise(ErrorCode::kInvalidK, "k must be >= 1");
  auto probs = lm::softmax(logp);
  auto ids = ranked_ids(logp);
  const std::size_t candidates = std::min<std::size_t>(static_cast<std::size_t>(k), ids.size());
  if (candidates == 0 || logp[ids[0]] == lm::kMasked) {
    raise(ErrorCode::kAllMasked, "every token is masked");
  }
  TokenId best = ids[0];
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates; ++c) {
    const TokenId v = ids[c];
    if (logp[v] == lm::kMasked) break;
    double penalty = 0.0;
    if (!context.empty()) {
      penalty = -std::numeric_limits<double>::infinity();
      for (TokenId x : context) penalty = std::max(penalty, table->cosine(v, x));
    }
    const double score = (1.0 - degeneration_alpha) * probs[v] - degeneration_alpha * penalty;
    if (score > best_score || (score == best_score && v < best)) {
      best_score = score;
      best = v;
    }
  }
  return best;
}

TokenId contrastive_search_step(const lm::LanguageModel& model,
                                std::span<const TokenId> context, int k,
                                double degeneration_alpha,
                                const embeddings::TokenEmbeddingTable* table) {
  return contrastive_select(model.log_probs(context), context, k, degeneration_alpha, table);
}

}  // namespace steer::decoding
