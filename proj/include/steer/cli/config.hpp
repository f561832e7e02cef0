#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "steer/decoding/sampler.hpp"
#include "steer/embeddings/embedder.hpp"
#include "steer/guidance.hpp"
#include "steer/lm/ngram_model.hpp"
#include "steer/metrics/report.hpp"

namespace steer::cli {

/// Parses the config grammar into {section: {key: value}}; top-level keys land
/// in section "". Throws ConfigError naming the line.
///
///   document := line*
///   line     := ws (comment | "[" name "]" | name ws "=" ws value)? ws comment? NL
///   value    := string | integer | float | "true" | "false" | "[" (value ("," value)*)? "]"
///   string   := '"' (char | "\\" ("\"" | "\\" | "n" | "t"))* '"'
///   name     := [A-Za-z0-9_-]+
///   comment  := "#" anything
nlohmann::json parse_config(std::string_view text);

/// Sets `section.key` from a flag string, typed like a config value; bare words
/// are taken as strings.
void set_override(nlohmann::json& doc, std::string_view dotted_key, std::string_view raw);

struct CliConfig {
  // [models]
  std::string base_model;
  std::string domain_model;
  // [train]
  lm::NGramParams lm;
  lm::TokenizerMode tokenizer = lm::TokenizerMode::kCharacter;
  std::vector<std::string> vocab_corpora;
  // [data]
  std::string real;
  std::string holdout;
  std::string synthetic;
  // [generate]
  std::string instruction;
  std::optional<std::size_t> count;
  std::optional<double> gamma;
  std::optional<double> eta;
  bool allow_extrapolation = false;
  std::size_t negative_prompt_count = 8;
  std::size_t batch_size = 1;
  std::size_t max_new_tokens = 128;
  std::vector<std::string> labels;  // uniform quotas over these labels
  // [sampler]
  decoding::SamplerConfig sampler;
  std::size_t token_dim = 32;  // token table width for contrastive search
  // [metrics]
  metrics::MetricConfig metrics;
  // [embedder]
  embeddings::EmbedderKind embedder = embeddings::EmbedderKind::kBuiltin;
  embeddings::EmbedderConfig builtin;
  std::string embed_endpoint;
  std::size_t embed_dimension = 1536;
  std::string embed_cache;
  std::string embed_model = "external";
  // [sweep]
  std::vector<double> gammas;
  std::vector<double> etas;
  std::optional<std::size_t> samples_per_cell;
  std::size_t budget = 100000;
  // [run]
  std::uint64_t seed = 1234;
  std::string out = "out";

  nlohmann::json source;  // merged document the fields came from

  /// Throws ConfigError on unknown sections/keys or mistyped values.
  static CliConfig from_json(const nlohmann::json& doc);
  /// First 16 hex chars of the SHA-256 of the merged document.
  std::string fingerprint() const;
};

}  // namespace steer::cli
