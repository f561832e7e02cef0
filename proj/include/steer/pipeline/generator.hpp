#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "steer/decoding/generate.hpp"
#include "steer/embeddings/token_table.hpp"
#include "steer/guidance.hpp"
#include "steer/pipeline/dataset.hpp"

namespace steer::pipeline {

struct NegativePrompt {
  std::string text;                 // examples joined by the separator, plus a trailing separator
  std::vector<lm::TokenId> tokens;  // tokenised `text`
  std::vector<std::string> ids;     // records used, in prompt order
};

/// Samples up to K records uniformly without replacement from real ++ synth,
/// joins them with the separator and drops whole records from the end until
/// the tokens fit in `token_budget`. Empty when K = 0 or the pool is empty.
NegativePrompt build_negative_prompt(const Dataset& real, const Dataset& synth, std::size_t k,
                                     decoding::Xoshiro256& rng, const lm::Vocabulary& vocab,
                                     std::size_t token_budget);

/// Rebuilds the prompt for explicit record ids (provenance replay).
NegativePrompt negative_prompt_from_ids(const Dataset& real, const Dataset& synth,
                                        const std::vector<std::string>& ids,
                                        const lm::Vocabulary& vocab);

/// Instruction as seen by the domain model; a label adds "Label: <label>\n".
std::string instruction_for(const std::string& instruction, const std::optional<std::string>& label);

/// Training text for the domain model: instruction_for(...) followed by the example.
std::string training_example(const std::string& instruction, const std::optional<std::string>& label,
                             const std::string& text);

struct GenerationJob {
  std::string instruction;
  std::size_t count = 0;  // m
  std::vector<std::pair<std::string, std::size_t>> label_quotas;  // must sum to count when set
  guidance::GuidanceParams guidance;
  decoding::SamplerConfig sampler;
  std::size_t negative_prompt_count = 8;  // K
  decoding::StopCriteria stop;
  std::uint64_t seed = 0;
  /// Needed only by contrastive search.
  std::shared_ptr<const embeddings::TokenEmbeddingTable> token_table;
  /// Examples generated against one snapshot of the negative pool; 1 is the
  /// sequential reference behaviour.
  std::size_t batch_size = 1;
  /// Optional early stop, consulted after every batch.
  std::function<bool(const Dataset&)> converged;

  void validate() const;
};

/// Seeds for example `index`: negative-prompt stream, first sampling seed,
/// and the retry seed used after an empty generation.
struct ExampleSeeds {
  std::uint64_t negative;
  std::uint64_t sample;
  std::uint64_t retry;
};
ExampleSeeds example_seeds(std::uint64_t master_seed, std::size_t index);

/// Label of the example at `index` under the quotas (cycling through labels
/// with remaining quota in listed order), or nullopt without quotas.
std::vector<std::optional<std::string>> label_schedule(const GenerationJob& job);

/// Generates one synthetic dataset with STEER logits and the job's sampler.
Dataset generate_dataset(const GenerationJob& job, const guidance::ModelPair& models,
                         const Dataset& real);

/// Regenerates the text of `record` from its recorded negative-prompt ids and
/// seed.
std::string replay_record(const GenerationJob& job, const guidance::ModelPair& models,
                          const Dataset& real, const Dataset& synth, const DatasetRecord& record);

/// Tokens generated for a single example; used by generate_dataset and replay.
std::string generate_text(const GenerationJob& job, const guidance::ModelPair& models,
                          const NegativePrompt& negative, const std::optional<std::string>& label,
                          std::uint64_t sample_seed);

}  // namespace steer::pipeline
