#include "steer/lm/ngram_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "steer/error.hpp"
#include "steer/util/file_io.hpp"

namespace steer::lm {

using nlohmann::json;

void NGramParams::validate() const {
  if (order < 1) raise(ErrorCode::kParameterOutOfRange, "order must be >= 1");
  if (!(smoothing_alpha > 0.0) || !std::isfinite(smoothing_alpha)) {
    raise(ErrorCode::kParameterOutOfRange, "smoothing_alpha must be > 0");
  }
  if (!(cache_weight >= 0.0 && cache_weight <= 1.0)) {
    raise(ErrorCode::kParameterOutOfRange, "cache_weight must lie in [0, 1]");
  }
  if (!(cache_decay > 0.0 && cache_decay <= 1.0)) {
    raise(ErrorCode::kParameterOutOfRange, "cache_decay must lie in (0, 1]");
  }
  if (context_budget == 0) raise(ErrorCode::kParameterOutOfRange, "context_budget must be > 0");
  if (!interpolation_weights.empty()) {
    if (interpolation_weights.size() != static_cast<std::size_t>(order)) {
      raise(ErrorCode::kParameterOutOfRange, "interpolation_weights needs one entry per order");
    }
    double total = 0.0;
    for (double w : interpolation_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        raise(ErrorCode::kParameterOutOfRange, "interpolation weights must be >= 0");
      }
      total += w;
    }
    if (!(total > 0.0)) raise(ErrorCode::kParameterOutOfRange, "interpolation weights sum to 0");
  }
}

std::size_t CacheNGramModel::HistoryHash::operator()(
    const std::vector<TokenId>& key) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ key.size();
  for (TokenId t : key) {
    h ^= t;
    h *= 0x100000001b3ULL;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

CacheNGramModel::CacheNGramModel(Vocabulary vocab, NGramParams params)
    : vocab_(std::move(vocab)), params_(std::move(params)) {
  params_.validate();
  tables_.resize(static_cast<std::size_t>(params_.order));
  weights_.assign(static_cast<std::size_t>(params_.order), 1.0 / params_.order);
  if (!params_.interpolation_weights.empty()) {
    double total = 0.0;
    for (double w : params_.interpolation_weights) total += w;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      weights_[k] = params_.interpolation_weights[k] / total;
    }
  }
}

void CacheNGramModel::add_count(std::size_t order_index, std::vector<TokenId> history,
                                TokenId next, std::uint64_t count) {
  auto& succ = tables_[order_index][std::move(history)];
  succ.next.emplace_back(next, count);
}

void CacheNGramModel::finalize() {
  for (auto& table : tables_) {
    for (auto& [history, succ] : table) {
      std::sort(succ.next.begin(), succ.next.end());
      std::vector<std::pair<TokenId, std::uint64_t>> merged;
      merged.reserve(succ.next.size());
      succ.total = 0;
      for (const auto& [id, c] : succ.next) {
        if (!merged.empty() && merged.back().first == id) {
          merged.back().second += c;
        } else {
          merged.emplace_back(id, c);
        }
        succ.total += c;
      }
      succ.next = std::move(merged);
    }
  }
}

CacheNGramModel CacheNGramModel::train(std::span<const std::string> corpus, Vocabulary vocab,
                                       NGramParams params) {
  if (corpus.empty()) raise(ErrorCode::kEmptyCorpus, "training corpus has no examples");
  CacheNGramModel model(std::move(vocab), std::move(params));
  const auto n = static_cast<std::size_t>(model.params_.order);

  // Scratch counts keep training linear; finalize() packs them.
  std::vector<std::unordered_map<std::vector<TokenId>, std::map<TokenId, std::uint64_t>,
                                 HistoryHash>>
      scratch(n);
  std::vector<TokenId> seq;
  for (const auto& example : corpus) {
    seq.assign(n - 1, kBos);
    auto ids = model.vocab_.tokenize(example);
    seq.insert(seq.end(), ids.begin(), ids.end());
    seq.push_back(kEos);
    for (std::size_t i = n - 1; i < seq.size(); ++i) {
      for (std::size_t k = 1; k <= n; ++k) {
        std::vector<TokenId> history(seq.begin() + static_cast<std::ptrdiff_t>(i - (k - 1)),
                                     seq.begin() + static_cast<std::ptrdiff_t>(i));
        ++scratch[k - 1][std::move(history)][seq[i]];
      }
      ++model.training_tokens_;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (auto& [history, nexts] : scratch[k]) {
      auto& succ = model.tables_[k][history];
      succ.next.assign(nexts.begin(), nexts.end());
    }
  }
  model.finalize();
  return model;
}

std::uint64_t CacheNGramModel::count(std::span<const TokenId> history, TokenId next) const {
  if (history.size() >= tables_.size()) return 0;
  const auto& table = tables_[history.size()];
  auto it = table.find(std::vector<TokenId>(history.begin(), history.end()));
  if (it == table.end()) return 0;
  auto pos = std::lower_bound(it->second.next.begin(), it->second.next.end(),
                              std::pair<TokenId, std::uint64_t>(next, 0));
  if (pos == it->second.next.end() || pos->first != next) return 0;
  return pos->second;
}

LogitVector CacheNGramModel::log_probs(std::span<const TokenId> context) const {
  check_context(*this, context);
  const std::size_t vocab_size = vocab_.size();
  const auto n = static_cast<std::size_t>(params_.order);
  const double alpha = params_.smoothing_alpha;

  // Last n-1 tokens of the BOS-padded context.
  std::vector<TokenId> padded(n - 1, kBos);
  const std::size_t take = std::min(context.size(), n - 1);
  std::copy(context.end() - static_cast<std::ptrdiff_t>(take), context.end(),
            padded.end() - static_cast<std::ptrdiff_t>(take));

  // Orders whose history never occurred in training hand their weight to the
  // orders that did; with no seen history at all the estimate is uniform.
  std::vector<const Successors*> seen(n + 1, nullptr);
  double seen_weight = 0.0;
  std::vector<TokenId> history;
  for (std::size_t k = 1; k <= n; ++k) {
    if (weights_[k - 1] == 0.0) continue;
    history.assign(padded.end() - static_cast<std::ptrdiff_t>(k - 1), padded.end());
    auto it = tables_[k - 1].find(history);
    if (it == tables_[k - 1].end() || it->second.total == 0) continue;
    seen[k] = &it->second;
    seen_weight += weights_[k - 1];
  }

  std::vector<double> probs(vocab_size, 0.0);
  if (seen_weight == 0.0) {
    std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(vocab_size));
  }
  for (std::size_t k = 1; k <= n; ++k) {
    if (seen[k] == nullptr) continue;
    const double weight = weights_[k - 1] / seen_weight;
    const double denom =
        static_cast<double>(seen[k]->total) + alpha * static_cast<double>(vocab_size);
    const double floor = weight * alpha / denom;
    for (double& p : probs) p += floor;
    for (const auto& [id, c] : seen[k]->next) {
      probs[id] += weight * static_cast<double>(c) / denom;
    }
  }

  const double lambda = params_.cache_weight;
  if (lambda > 0.0 && !context.empty()) {
    std::vector<double> cache(vocab_size, 0.0);
    double w = 1.0;
    double norm = 0.0;
    for (auto it = context.rbegin(); it != context.rend(); ++it) {
      cache[*it] += w;
      norm += w;
      w *= params_.cache_decay;
    }
    for (std::size_t i = 0; i < vocab_size; ++i) {
      probs[i] = (1.0 - lambda) * probs[i] + lambda * cache[i] / norm;
    }
  }

  LogitVector out(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) out[i] = std::log(probs[i]);
  return out;
}

std::string CacheNGramModel::serialize() const {
  json doc;
  doc["format"] = "steer-lm";
  doc["version"] = kFormatVersion;
  doc["vocab"] = {{"mode", std::string(mode_name(vocab_.mode()))},
                  {"tokens", std::vector<std::string>(vocab_.tokens().begin() + kNumReserved,
                                                      vocab_.tokens().end())}};
  doc["order"] = params_.order;
  doc["params"] = {{"smoothing_alpha", params_.smoothing_alpha},
                   {"cache_weight", params_.cache_weight},
                   {"cache_decay", params_.cache_decay},
                   {"context_budget", params_.context_budget},
                   {"interpolation_weights", params_.interpolation_weights}};
  doc["training_tokens"] = training_tokens_;
  json counts = json::array();
  for (std::size_t k = 0; k < tables_.size(); ++k) {
    std::vector<const Table::value_type*> rows;
    rows.reserve(tables_[k].size());
    for (const auto& row : tables_[k]) rows.push_back(&row);
    std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->first < b->first; });
    json entries = json::array();
    for (const auto* row : rows) {
      for (const auto& [id, c] : row->second.next) {
        json e = json::array();
        for (TokenId t : row->first) e.push_back(t);
        e.push_back(id);
        e.push_back(c);
        entries.push_back(std::move(e));
      }
    }
    counts.push_back({{"order", k + 1}, {"entries", std::move(entries)}});
  }
  doc["counts"] = std::move(counts);
  return doc.dump();
}

void CacheNGramModel::save(const std::filesystem::path& path) const {
  std::string text = serialize();
  if (path.extension() == ".gz") text = util::gzip_compress(text);
  util::write_file_atomic(path, text);
}

CacheNGramModel CacheNGramModel::deserialize(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorCode::kIoError, std::string("malformed model file: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "steer-lm" || !doc.contains("version")) {
    raise(ErrorCode::kFormatVersionMismatch, "not a steer-lm model file");
  }
  if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kFormatVersion) {
    raise(ErrorCode::kFormatVersionMismatch,
          "unsupported model version " + doc["version"].dump() + ", expected " +
              std::to_string(kFormatVersion));
  }
  try {
    Vocabulary vocab(parse_mode(doc.at("vocab").at("mode").get<std::string>()),
                     doc.at("vocab").at("tokens").get<std::vector<std::string>>());
    const auto& p = doc.at("params");
    NGramParams params;
    params.order = doc.at("order").get<int>();
    params.smoothing_alpha = p.at("smoothing_alpha").get<double>();
    params.cache_weight = p.at("cache_weight").get<double>();
    params.cache_decay = p.at("cache_decay").get<double>();
    params.context_budget = p.at("context_budget").get<std::size_t>();
    params.interpolation_weights = p.at("interpolation_weights").get<std::vector<double>>();
    CacheNGramModel model(std::move(vocab), std::move(params));
    model.training_tokens_ = doc.at("training_tokens").get<std::uint64_t>();
    const auto& counts = doc.at("counts");
    if (counts.size() != model.tables_.size()) {
      raise(ErrorCode::kFormatVersionMismatch, "count tables do not match model order");
    }
    for (const auto& table : counts) {
      const auto k = table.at("order").get<std::size_t>();
      if (k < 1 || k > model.tables_.size()) {
        raise(ErrorCode::kFormatVersionMismatch, "count table order out of range");
      }
      for (const auto& e : table.at("entries")) {
        if (!e.is_array() || e.size() != k + 1) {
          raise(ErrorCode::kFormatVersionMismatch, "malformed count entry");
        }
        std::vector<TokenId> history;
        for (std::size_t i = 0; i + 1 < k; ++i) history.push_back(e[i].get<TokenId>());
        const auto next = e[k - 1].get<TokenId>();
        for (TokenId t : history) {
          if (t >= model.vocab_.size()) raise(ErrorCode::kInvalidTokenId, "count history id");
        }
        if (next >= model.vocab_.size()) raise(ErrorCode::kInvalidTokenId, "count token id");
        model.add_count(k - 1, std::move(history), next, e[k].get<std::uint64_t>());
      }
    }
    model.finalize();
    return model;
  } catch (const json::exception& e) {
    raise(ErrorCode::kFormatVersionMismatch, std::string("malformed model contents: ") + e.what());
  }
}

CacheNGramModel CacheNGramModel::load(const std::filesystem::path& path) {
  return deserialize(util::read_file(path));
}

}  // namespace steer::lm
