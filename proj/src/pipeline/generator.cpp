#include "steer/pipeline/generator.hpp"

#include <future>
#include <limits>
#include <numeric>

#include "steer/error.hpp"

namespace steer::pipeline {

namespace {

NegativePrompt assemble(std::vector<const DatasetRecord*> chosen, const lm::Vocabulary& vocab,
                        std::size_t token_budget) {
  NegativePrompt prompt;
  while (!chosen.empty()) {
    std::string text;
    for (const auto* r : chosen) {
      text += r->text;
      text += kSeparator;
    }
    auto tokens = vocab.tokenize(text);
    if (tokens.size() <= token_budget) {
      prompt.text = std::move(text);
      prompt.tokens = std::move(tokens);
      for (const auto* r : chosen) prompt.ids.push_back(r->id);
      return prompt;
    }
    chosen.pop_back();
  }
  return prompt;
}

}  // namespace

NegativePrompt build_negative_prompt(const Dataset& real, const Dataset& synth, std::size_t k,
                                     decoding::Xoshiro256& rng, const lm::Vocabulary& vocab,
                                     std::size_t token_budget) {
  std::vector<const DatasetRecord*> pool;
  pool.reserve(real.size() + synth.size());
  for (const auto& r : real.records()) pool.push_back(&r);
  for (const auto& r : synth.records()) pool.push_back(&r);
  const std::size_t take = std::min(k, pool.size());
  // Partial Fisher-Yates: the first `take` slots become the sample.
  for (std::size_t i = 0; i < take; ++i) {
    std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  }
  pool.resize(take);
  return assemble(std::move(pool), vocab, token_budget);
}

NegativePrompt negative_prompt_from_ids(const Dataset& real, const Dataset& synth,
                                        const std::vector<std::string>& ids,
                                        const lm::Vocabulary& vocab) {
  std::vector<const DatasetRecord*> chosen;
  for (const auto& id : ids) {
    const DatasetRecord* r = real.find(id);
    if (r == nullptr) r = synth.find(id);
    if (r == nullptr) raise(ErrorCode::kInvalidArgument, "unknown negative-prompt id " + id);
    chosen.push_back(r);
  }
  return assemble(std::move(chosen), vocab, std::numeric_limits<std::size_t>::max());
}

std::string instruction_for(const std::string& instruction,
                            const std::optional<std::string>& label) {
  if (!label) return instruction;
  return instruction + "Label: " + *label + "\n";
}

std::string training_example(const std::string& instruction,
                             const std::optional<std::string>& label, const std::string& text) {
  return instruction_for(instruction, label) + text;
}

void GenerationJob::validate() const {
  guidance.validate();
  sampler.validate();
  if (batch_size == 0) raise(ErrorCode::kParameterOutOfRange, "batch_size must be >= 1");
  if (sampler.method == decoding::SamplingMethod::kContrastiveSearch && !token_table) {
    raise(ErrorCode::kMissingEmbeddings, "contrastive search needs a token embedding table");
  }
  if (!label_quotas.empty()) {
    std::size_t total = 0;
    for (const auto& [label, quota] : label_quotas) total += quota;
    if (total != count) {
      raise(ErrorCode::kParameterOutOfRange, "label quotas sum to " + std::to_string(total) +
                                                 ", expected " + std::to_string(count));
    }
  }
}

ExampleSeeds example_seeds(std::uint64_t master_seed, std::size_t index) {
  const std::uint64_t base = decoding::derive_seed(master_seed, index);
  return {decoding::derive_seed(base, 0), decoding::derive_seed(base, 1),
          decoding::derive_seed(base, 2)};
}

std::vector<std::optional<std::string>> label_schedule(const GenerationJob& job) {
  std::vector<std::optional<std::string>> out;
  if (job.label_quotas.empty()) {
    out.assign(job.count, std::nullopt);
    return out;
  }
  std::vector<std::size_t> remaining;
  for (const auto& [label, quota] : job.label_quotas) remaining.push_back(quota);
  while (out.size() < job.count) {
    for (std::size_t i = 0; i < remaining.size() && out.size() < job.count; ++i) {
      if (remaining[i] == 0) continue;
      --remaining[i];
      out.emplace_back(job.label_quotas[i].first);
    }
  }
  return out;
}

std::string generate_text(const GenerationJob& job, const guidance::ModelPair& models,
                          const NegativePrompt& negative, const std::optional<std::string>& label,
                          std::uint64_t sample_seed) {
  const auto& vocab = models.vocabulary();
  auto prompt = vocab.tokenize(instruction_for(job.instruction, label));
  decoding::SteerSource source(models, negative.tokens, job.guidance);
  auto sampler = job.sampler;
  sampler.seed = sample_seed;
  auto tokens = decoding::generate_sequence(source, prompt, sampler, job.stop, job.token_table.get());
  return escape_separator(vocab.detokenize(tokens));
}

namespace {

DatasetRecord generate_record(const GenerationJob& job, const guidance::ModelPair& models,
                              const Dataset& real, const Dataset& pool_snapshot,
                              std::size_t index, const std::optional<std::string>& label) {
  const auto seeds = example_seeds(job.seed, index);
  const auto& vocab = models.vocabulary();
  const std::size_t instruction_len = vocab.tokenize(instruction_for(job.instruction, label)).size();
  const std::size_t budget = models.domain().context_budget();
  const std::size_t reserved = instruction_len + job.stop.max_new_tokens;
  const std::size_t negative_budget = budget > reserved ? budget - reserved : 0;

  decoding::Xoshiro256 rng(seeds.negative);
  auto negative = build_negative_prompt(real, pool_snapshot, job.negative_prompt_count, rng,
                                        vocab, negative_budget);
  RecordMeta meta;
  meta.gamma = job.guidance.gamma;
  meta.eta = job.guidance.eta;
  meta.sampler = job.sampler.fingerprint();
  meta.seed = seeds.sample;
  meta.negative_prompt_ids = negative.ids;
  meta.pool_snapshot = pool_snapshot.size();

  std::string text = generate_text(job, models, negative, label, seeds.sample);
  if (text.empty()) {
    meta.seed = seeds.retry;
    text = generate_text(job, models, negative, label, seeds.retry);
    if (text.empty()) meta.quality = "empty_after_retry";
  }
  DatasetRecord record;
  record.id = padded_id(index, "syn-");
  record.text = std::move(text);
  record.label = label;
  record.meta = std::move(meta);
  return record;
}

}  // namespace

Dataset generate_dataset(const GenerationJob& job, const guidance::ModelPair& models,
                         const Dataset& real) {
  job.validate();
  const auto labels = label_schedule(job);
  Dataset synth(DatasetKind::kSynthetic);
  for (std::size_t start = 0; start < job.count; start += job.batch_size) {
    const std::size_t end = std::min(job.count, start + job.batch_size);
    if (end - start == 1) {
      synth.add(generate_record(job, models, real, synth, start, labels[start]));
    } else {
      // Every example in the batch sees the pool as it stood at the batch start.
      const Dataset snapshot = synth;
      std::vector<std::future<DatasetRecord>> batch;
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(std::async(std::launch::async, [&, i] {
          return generate_record(job, models, real, snapshot, i, labels[i]);
        }));
      }
      for (auto& f : batch) synth.add(f.get());
    }
    if (job.converged && job.converged(synth)) break;
  }
  return synth;
}

std::string replay_record(const GenerationJob& job, const guidance::ModelPair& models,
                          const Dataset& real, const Dataset& synth, const DatasetRecord& record) {
  if (!record.meta) raise(ErrorCode::kInvalidArgument, "record " + record.id + " has no metadata");
  auto negative = negative_prompt_from_ids(real, synth, record.meta->negative_prompt_ids,
                                           models.vocabulary());
  auto replay_job = job;
  replay_job.guidance.gamma = record.meta->gamma;
  replay_job.guidance.eta = record.meta->eta;
  return generate_text(replay_job, models, negative, record.label, record.meta->seed);
}

}  // namespace steer::pipeline
