#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "steer/lm/remote_backend.hpp"

namespace steer::embeddings {

/// Unit-L2 text embedding.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

double dot(std::span<const double> a, std::span<const double> b);
double cosine(std::span<const double> a, std::span<const double> b);

/// Arithmetic mean, not renormalised. Throws EmptySet.
std::vector<double> mean_embedding(std::span<const EmbeddingVector> vectors);

/// Smoothed inverse document frequency per hash bucket.
struct IdfTable {
  std::vector<double> weights;
  std::string fingerprint() const;
};

enum class EmbedderKind { kBuiltin, kExternal };

struct EmbedderConfig {
  EmbedderKind kind = EmbedderKind::kBuiltin;
  int ngram_low = 1;
  int ngram_high = 3;
  std::size_t dimension = 256;
  std::uint64_t hash_seed = 0x5eed5eedULL;
  std::optional<IdfTable> idf;

  void validate() const;
  std::string fingerprint() const;
};

/// Bucket a character n-gram (UTF-8 code points) hashes into.
std::size_t ngram_bucket(std::string_view ngram, std::size_t dimension, std::uint64_t seed);

/// Hashed character n-grams, bucket weight log(1 + count) (times IDF when
/// fitted), L2-normalised. Throws EmptyText for blank text or a zero vector.
EmbeddingVector embed_builtin(std::string_view text, const EmbedderConfig& config);

/// idf_b = ln((1 + N) / (1 + df_b)) + 1 over the reference documents.
IdfTable fit_idf(std::span<const std::string> documents, const EmbedderConfig& config);

/// Content-addressed on-disk store: one file per (text, fingerprint) named by
/// its SHA-256; body is a 16-byte header {"STEC", version, dim, 0} followed by
/// little-endian float32 values.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path directory);

  std::optional<EmbeddingVector> get(std::string_view text, std::string_view fingerprint) const;
  void put(std::string_view text, std::string_view fingerprint, const EmbeddingVector& vec) const;
  std::filesystem::path path_for(std::string_view text, std::string_view fingerprint) const;

  static constexpr std::uint32_t kVersion = 1;

 private:
  std::filesystem::path directory_;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const = 0;
  virtual std::string fingerprint() const = 0;
};

class BuiltinEmbedder final : public Embedder {
 public:
  explicit BuiltinEmbedder(EmbedderConfig config);
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;
  std::string fingerprint() const override { return config_.fingerprint(); }
  const EmbedderConfig& config() const { return config_; }

 private:
  EmbedderConfig config_;
};

struct ExternalEmbedderConfig {
  lm::RemoteBackendConfig backend;
  std::size_t dimension = 1536;
  std::size_t max_batch = 64;
  std::size_t max_in_flight = 4;
  std::optional<std::filesystem::path> cache_dir;
  std::string model_name = "external";
};

/// Client for POST /embed {"texts": [...]} -> {"embeddings": [[...], ...]}.
/// Vectors are normalised on receipt and rounded to float32, the precision
/// the cache stores, so cached and fresh results are bit-identical.
class ExternalEmbedder final : public Embedder {
 public:
  explicit ExternalEmbedder(ExternalEmbedderConfig config,
                            lm::RemoteBackend::Sleeper sleeper = {});

  /// Throws ShapeMismatch, NonFiniteEmbedding, or backend errors.
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;
  std::string fingerprint() const override { return "external;" + config_.model_name; }

 private:
  std::vector<EmbeddingVector> fetch(std::span<const std::string> texts) const;

  ExternalEmbedderConfig config_;
  lm::RemoteBackend backend_;
  std::optional<EmbeddingCache> cache_;
};

/// Embeds one batch through `backend` without caching. Throws
/// InvalidArgument when the batch exceeds `max_batch`.
std::vector<EmbeddingVector> embed_external(std::span<const std::string> texts,
                                            const lm::RemoteBackend& backend,
                                            std::size_t dimension, std::size_t max_batch);

}  // namespace steer::embeddings
