#include "steer/embeddings/embedder.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>

#include "steer/decoding/rng.hpp"
#include "steer/error.hpp"
#include "steer/util/file_io.hpp"
#include "steer/util/utf8.hpp"

namespace steer::embeddings {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) raise(ErrorCode::kLengthMismatch, "vector dimensions differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) raise(ErrorCode::kZeroMeanVector, "cosine of a zero vector");
  return dot(a, b) / (na * nb);
}

std::vector<double> mean_embedding(std::span<const EmbeddingVector> vectors) {
  if (vectors.empty()) raise(ErrorCode::kEmptySet, "mean of an empty set");
  const std::size_t d = vectors.front().dim();
  std::vector<double> mean(d, 0.0);
  for (const auto& v : vectors) {
    if (v.dim() != d) raise(ErrorCode::kLengthMismatch, "embedding dimensions differ");
    for (std::size_t i = 0; i < d; ++i) mean[i] += v.values[i];
  }
  for (double& x : mean) x /= static_cast<double>(vectors.size());
  return mean;
}

std::string IdfTable::fingerprint() const {
  std::string bytes(weights.size() * sizeof(double), '\0');
  std::memcpy(bytes.data(), weights.data(), bytes.size());
  return util::sha256_hex(bytes).substr(0, 16);
}

void EmbedderConfig::validate() const {
  if (!(1 <= ngram_low && ngram_low <= ngram_high && ngram_high <= 5)) {
    raise(ErrorCode::kParameterOutOfRange, "ngram range must satisfy 1 <= low <= high <= 5");
  }
  if (dimension < 8) raise(ErrorCode::kParameterOutOfRange, "embedding dimension must be >= 8");
  if (idf && idf->weights.size() != dimension) {
    raise(ErrorCode::kShapeMismatch, "idf table does not match embedding dimension");
  }
}

std::string EmbedderConfig::fingerprint() const {
  std::ostringstream out;
  out << (kind == EmbedderKind::kBuiltin ? "builtin" : "external") << ";ngram=" << ngram_low
      << "-" << ngram_high << ";d=" << dimension << ";seed=" << hash_seed
      << ";idf=" << (idf ? idf->fingerprint() : "none");
  return out.str();
}

std::size_t ngram_bucket(std::string_view ngram, std::size_t dimension, std::uint64_t seed) {
  std::uint64_t sm = seed;
  std::uint64_t h = 0xcbf29ce484222325ULL ^ decoding::splitmix64(sm);
  for (unsigned char c : ngram) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t mixed = h;
  return static_cast<std::size_t>(decoding::splitmix64(mixed) % dimension);
}

namespace {

std::map<std::size_t, double> bucket_counts(std::string_view text, const EmbedderConfig& config) {
  auto cps = util::split_code_points(text);
  std::map<std::size_t, double> counts;
  for (int n = config.ngram_low; n <= config.ngram_high; ++n) {
    const auto len = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + len <= cps.size(); ++i) {
      const char* begin = cps[i].data();
      const char* end = cps[i + len - 1].data() + cps[i + len - 1].size();
      std::string_view gram(begin, static_cast<std::size_t>(end - begin));
      counts[ngram_bucket(gram, config.dimension, config.hash_seed)] += 1.0;
    }
  }
  return counts;
}

}  // namespace

EmbeddingVector embed_builtin(std::string_view text, const EmbedderConfig& config) {
  config.validate();
  if (util::trim(text).empty()) raise(ErrorCode::kEmptyText, "cannot embed blank text");
  EmbeddingVector out{std::vector<double>(config.dimension, 0.0)};
  for (const auto& [bucket, count] : bucket_counts(text, config)) {
    double w = std::log1p(count);
    if (config.idf) w *= config.idf->weights[bucket];
    out.values[bucket] = w;
  }
  const double norm = std::sqrt(dot(out.values, out.values));
  if (!(norm > 0.0)) raise(ErrorCode::kEmptyText, "text produced a zero embedding");
  for (double& v : out.values) v /= norm;
  return out;
}

IdfTable fit_idf(std::span<const std::string> documents, const EmbedderConfig& config) {
  std::vector<double> df(config.dimension, 0.0);
  for (const auto& doc : documents) {
    for (const auto& [bucket, count] : bucket_counts(doc, config)) df[bucket] += 1.0;
  }
  const auto n = static_cast<double>(documents.size());
  IdfTable table;
  table.weights.resize(config.dimension);
  for (std::size_t b = 0; b < config.dimension; ++b) {
    table.weights[b] = std::log((1.0 + n) / (1.0 + df[b])) + 1.0;
  }
  return table;
}

EmbeddingCache::EmbeddingCache(std::filesystem::path directory)
    : directory_(std::move(directory)) {
  std::error_code ec;
  std::filesystem::create_directories(directory_, ec);
  if (ec) raise(ErrorCode::kIoError, "cannot create cache directory " + directory_.string());
}

std::filesystem::path EmbeddingCache::path_for(std::string_view text,
                                               std::string_view fingerprint) const {
  std::string key;
  key.reserve(text.size() + fingerprint.size() + 1);
  key.append(fingerprint);
  key.push_back('\0');
  key.append(text);
  return directory_ / util::sha256_hex(key);
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::string_view in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return v;
}

}  // namespace

std::optional<EmbeddingVector> EmbeddingCache::get(std::string_view text,
                                                   std::string_view fingerprint) const {
  const auto path = path_for(text, fingerprint);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() < 16 || data.compare(0, 4, "STEC") != 0 || get_u32(data, 4) != kVersion) {
    return std::nullopt;
  }
  const std::uint32_t dim = get_u32(data, 8);
  if (data.size() != 16 + 4 * static_cast<std::size_t>(dim)) return std::nullopt;
  EmbeddingVector out{std::vector<double>(dim)};
  for (std::uint32_t i = 0; i < dim; ++i) {
    out.values[i] = static_cast<double>(std::bit_cast<float>(get_u32(data, 16 + 4 * i)));
  }
  return out;
}

void EmbeddingCache::put(std::string_view text, std::string_view fingerprint,
                         const EmbeddingVector& vec) const {
  std::string data = "STEC";
  put_u32(data, kVersion);
  put_u32(data, static_cast<std::uint32_t>(vec.dim()));
  put_u32(data, 0);
  for (double v : vec.values) put_u32(data, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  util::write_file_atomic(path_for(text, fingerprint), data);
}

BuiltinEmbedder::BuiltinEmbedder(EmbedderConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::vector<EmbeddingVector> BuiltinEmbedder::embed(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_builtin(t, config_));
  return out;
}

std::vector<EmbeddingVector> embed_external(std::span<const std::string> texts,
                                            const lm::RemoteBackend& backend,
                                            std::size_t dimension, std::size_t max_batch) {
  if (texts.size() > max_batch) {
    raise(ErrorCode::kInvalidArgument, "batch of " + std::to_string(texts.size()) +
                                           " exceeds max batch " + std::to_string(max_batch));
  }
  nlohmann::json body = {{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  auto reply = backend.post("/embed", body);
  if (!reply.is_object() || !reply.contains("embeddings") || !reply["embeddings"].is_array()) {
    raise(ErrorCode::kBackendError, "reply lacks an embeddings array");
  }
  const auto& rows = reply["embeddings"];
  if (rows.size() != texts.size()) {
    raise(ErrorCode::kShapeMismatch, "expected " + std::to_string(texts.size()) +
                                         " embeddings, got " + std::to_string(rows.size()));
  }
  std::vector<EmbeddingVector> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != dimension) {
      raise(ErrorCode::kShapeMismatch, "embedding of dimension " + std::to_string(row.size()) +
                                           ", expected " + std::to_string(dimension));
    }
    EmbeddingVector v{std::vector<double>(dimension)};
    for (std::size_t i = 0; i < dimension; ++i) {
      if (!row[i].is_number()) raise(ErrorCode::kNonFiniteEmbedding, "non-numeric entry");
      v.values[i] = row[i].get<double>();
      if (!std::isfinite(v.values[i])) raise(ErrorCode::kNonFiniteEmbedding, "non-finite entry");
    }
    const double norm = std::sqrt(dot(v.values, v.values));
    if (!(norm > 0.0)) raise(ErrorCode::kNonFiniteEmbedding, "zero embedding vector");
    for (double& x : v.values) x = static_cast<double>(static_cast<float>(x / norm));
    out.push_back(std::move(v));
  }
  return out;
}

ExternalEmbedder::ExternalEmbedder(ExternalEmbedderConfig config,
                                   lm::RemoteBackend::Sleeper sleeper)
    : config_(std::move(config)), backend_(config_.backend, std::move(sleeper)) {
  if (config_.max_batch == 0) raise(ErrorCode::kParameterOutOfRange, "max_batch must be > 0");
  if (config_.max_in_flight == 0) config_.max_in_flight = 1;
  if (config_.cache_dir) cache_.emplace(*config_.cache_dir);
}

std::vector<EmbeddingVector> ExternalEmbedder::fetch(std::span<const std::string> texts) const {
  std::vector<std::span<const std::string>> batches;
  for (std::size_t i = 0; i < texts.size(); i += config_.max_batch) {
    batches.push_back(texts.subspan(i, std::min(config_.max_batch, texts.size() - i)));
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t b = 0; b < batches.size(); b += config_.max_in_flight) {
    std::vector<std::future<std::vector<EmbeddingVector>>> inflight;
    for (std::size_t j = b; j < std::min(batches.size(), b + config_.max_in_flight); ++j) {
      inflight.push_back(std::async(std::launch::async, [this, batch = batches[j]] {
        return embed_external(batch, backend_, config_.dimension, config_.max_batch);
      }));
    }
    for (auto& f : inflight) {
      auto part = f.get();
      out.insert(out.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
    }
  }
  return out;
}

std::vector<EmbeddingVector> ExternalEmbedder::embed(std::span<const std::string> texts) const {
  const std::string fp = fingerprint();
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::optional<EmbeddingVector> hit;
    if (cache_) hit = cache_->get(texts[i], fp);
    if (hit && hit->dim() == config_.dimension) {
      out[i] = std::move(*hit);
    } else {
      missing.push_back(i);
    }
  }
  if (missing.empty()) return out;
  // Deduplicate so one text costs one request slot.
  std::vector<std::string> unique;
  std::map<std::string_view, std::size_t> slot;
  for (std::size_t i : missing) {
    if (slot.emplace(texts[i], unique.size()).second) unique.push_back(texts[i]);
  }
  auto fetched = fetch(unique);
  for (std::size_t u = 0; u < unique.size(); ++u) {
    if (cache_) cache_->put(unique[u], fp, fetched[u]);
  }
  for (std::size_t i : missing) out[i] = fetched[slot.at(texts[i])];
  return out;
}

}  // namespace steer::embeddings
