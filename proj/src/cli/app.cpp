#include "steer/cli/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>

#include <CLI11.hpp>

#include "steer/cli/config.hpp"
#include "steer/error.hpp"
#include "steer/lm/ngram_model.hpp"
#include "steer/pipeline/generator.hpp"
#include "steer/pipeline/sweep.hpp"
#include "steer/util/file_io.hpp"

namespace steer::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoError:
    case ErrorCode::kFormatVersionMismatch:
    case ErrorCode::kNetworkTimeout:
    case ErrorCode::kRetryExhausted:
    case ErrorCode::kBackendError:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kMalformedRecord:
    case ErrorCode::kNonFiniteEmbedding:
      return kExitIo;
    case ErrorCode::kInternal:
    case ErrorCode::kNonFiniteInput:
    case ErrorCode::kAllMasked:
      return kExitInternal;
    default:
      return kExitConfig;
  }
}

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> sets;
};

// Flags that map onto config keys; applied after the file, so they win.
struct Overrides {
  std::vector<std::pair<std::string, std::string>> entries;
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto* holder = &entries;
    app->add_option_function<std::string>(
        flag, [holder, key](const std::string& v) { holder->emplace_back(key, v); }, help);
  }
};

CliConfig load_config(const Globals& g, const Overrides& o) {
  json doc = json::object();
  if (!g.config_path.empty()) doc = parse_config(util::read_file(g.config_path));
  for (const auto& s : g.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) raise(ErrorCode::kConfigError, "--set expects key=value: " + s);
    set_override(doc, s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& [key, value] : o.entries) set_override(doc, key, value);
  if (g.seed) doc["run"]["seed"] = *g.seed;
  if (g.out) doc["run"]["out"] = *g.out;
  return CliConfig::from_json(doc);
}

template <class T>
T required(const std::optional<T>& v, const char* name) {
  if (!v) raise(ErrorCode::kConfigError, std::string(name) + " is required (config or flag)");
  return *v;
}

void require_path(const std::string& v, const char* name) {
  if (v.empty()) raise(ErrorCode::kConfigError, std::string(name) + " is required (config or flag)");
}

void write_manifest(const CliConfig& c, const std::string& command, json seeds,
                    const std::vector<std::string>& outputs) {
  json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["config_fingerprint"] = c.fingerprint();
  m["config"] = c.source;
  m["seed"] = c.seed;
  m["seeds"] = std::move(seeds);
  m["outputs"] = outputs;
  util::write_file_atomic(fs::path(c.out) / (command + ".manifest.json"), m.dump(2) + "\n");
}

pipeline::Dataset load_dataset(const std::string& path) {
  return pipeline::ingest_dataset(path, pipeline::format_for(path));
}

std::vector<std::string> training_texts(const pipeline::Dataset& d, const std::string& role,
                                        const std::string& instruction) {
  std::vector<std::string> out;
  for (const auto& r : d.records()) {
    out.push_back(role == "domain" ? pipeline::training_example(instruction, r.label, r.text)
                                   : r.text);
  }
  return out;
}

int cmd_train(const CliConfig& c, const std::string& corpus, const std::string& role,
              std::string model_path, std::ostream& out) {
  if (role != "base" && role != "domain") {
    raise(ErrorCode::kConfigError, "--role must be base or domain");
  }
  c.lm.validate();
  const auto data = load_dataset(corpus);
  const auto texts = training_texts(data, role, c.instruction);
  std::vector<std::string> train, heldout;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    (i % 20 == 19 ? heldout : train).push_back(texts[i]);
  }
  // The vocabulary sees every corpus that either model may be trained on.
  std::vector<std::string> vocab_texts = texts;
  for (const auto& path : c.vocab_corpora) {
    const auto extra = load_dataset(path);
    for (const auto& t : training_texts(extra, "domain", c.instruction)) vocab_texts.push_back(t);
  }
  auto vocab = lm::Vocabulary::build(vocab_texts, c.tokenizer);
  auto model = lm::CacheNGramModel::train(train, vocab, c.lm);

  double nll = 0.0;
  std::size_t count = 0;
  for (const auto& text : heldout) {
    auto tokens = model.vocabulary().tokenize(text);
    tokens.push_back(lm::kEos);
    const std::size_t budget = model.context_budget();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const std::size_t from = i > budget ? i - budget : 0;
      const auto logp = model.log_probs(std::span(tokens).subspan(from, i - from));
      nll -= logp[tokens[i]];
      ++count;
    }
  }
  if (model_path.empty()) model_path = (fs::path(c.out) / (role + ".lm.json.gz")).string();
  model.save(model_path);

  char line[256];
  if (count > 0) {
    std::snprintf(line, sizeof line, "tokens=%llu vocab=%zu heldout_perplexity=%.4f\n",
                  static_cast<unsigned long long>(model.training_tokens()), vocab.size(),
                  std::exp(nll / static_cast<double>(count)));
  } else {
    std::snprintf(line, sizeof line, "tokens=%llu vocab=%zu heldout_perplexity=n/a\n",
                  static_cast<unsigned long long>(model.training_tokens()), vocab.size());
  }
  out << line;
  write_manifest(c, "train", json::object(), {model_path});
  return kExitOk;
}

guidance::ModelPair load_models(const CliConfig& c) {
  require_path(c.base_model, "models.base");
  require_path(c.domain_model, "models.domain");
  auto base = std::make_shared<lm::CacheNGramModel>(lm::CacheNGramModel::load(c.base_model));
  auto domain = std::make_shared<lm::CacheNGramModel>(lm::CacheNGramModel::load(c.domain_model));
  return guidance::ModelPair(domain, base);
}

pipeline::GenerationJob make_job(const CliConfig& c, std::size_t count) {
  pipeline::GenerationJob job;
  job.instruction = c.instruction;
  job.count = count;
  job.guidance.allow_extrapolation = c.allow_extrapolation;
  job.sampler = c.sampler;
  job.negative_prompt_count = c.negative_prompt_count;
  job.stop.max_new_tokens = c.max_new_tokens;
  job.seed = c.seed;
  job.batch_size = c.batch_size;
  if (!c.labels.empty()) {
    for (std::size_t i = 0; i < c.labels.size(); ++i) {
      job.label_quotas.emplace_back(
          c.labels[i], count / c.labels.size() + (i < count % c.labels.size() ? 1 : 0));
    }
  }
  return job;
}

// Contrastive search scores candidates against a token table fitted on the
// real data; other samplers need none.
void attach_token_table(const CliConfig& c, const guidance::ModelPair& models,
                        const pipeline::Dataset& real, pipeline::GenerationJob& job) {
  if (c.sampler.method != decoding::SamplingMethod::kContrastiveSearch) return;
  if (c.token_dim == 0) raise(ErrorCode::kParameterOutOfRange, "sampler.token_dim must be >= 1");
  std::vector<std::string> texts;
  for (const auto& r : real.records()) texts.push_back(pipeline::training_example(c.instruction, r.label, r.text));
  const auto& vocab = models.vocabulary();
  job.token_table = std::make_shared<embeddings::TokenEmbeddingTable>(
      embeddings::token_embedding_table(texts, vocab, std::min(c.token_dim, vocab.size())));
}

int cmd_generate(const CliConfig& c, std::string output, std::ostream& out) {
  auto job = make_job(c, required(c.count, "generate.count"));
  job.guidance.gamma = required(c.gamma, "generate.gamma");
  job.guidance.eta = required(c.eta, "generate.eta");
  job.guidance.validate();
  job.sampler.validate();
  require_path(c.real, "data.real");
  const auto models = load_models(c);
  const auto real = load_dataset(c.real);
  attach_token_table(c, models, real, job);
  job.validate();

  const auto start = std::chrono::steady_clock::now();
  const auto synth = pipeline::generate_dataset(job, models, real);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (output.empty()) output = c.synthetic.empty() ? (fs::path(c.out) / "synthetic.jsonl").string() : c.synthetic;
  util::write_file_atomic(output, synth.to_jsonl());

  double mean_length = 0.0;
  for (const auto& r : synth.records()) mean_length += static_cast<double>(r.text.size());
  if (!synth.empty()) mean_length /= static_cast<double>(synth.size());
  char line[256];
  std::snprintf(line, sizeof line, "generated m=%zu mean_length=%.1f elapsed=%.2fs\n",
                synth.size(), mean_length, elapsed);
  out << line;
  json seeds = json::array();
  for (const auto& r : synth.records()) seeds.push_back(r.meta->seed);
  write_manifest(c, "generate", seeds, {output});
  return kExitOk;
}

std::unique_ptr<embeddings::Embedder> make_embedder(const CliConfig& c) {
  if (c.embedder == embeddings::EmbedderKind::kBuiltin) {
    c.builtin.validate();
    return std::make_unique<embeddings::BuiltinEmbedder>(c.builtin);
  }
  require_path(c.embed_endpoint, "embedder.endpoint");
  embeddings::ExternalEmbedderConfig e;
  e.backend.endpoint = c.embed_endpoint;
  e.dimension = c.embed_dimension;
  e.model_name = c.embed_model;
  if (!c.embed_cache.empty()) e.cache_dir = c.embed_cache;
  return std::make_unique<embeddings::ExternalEmbedder>(e);
}

int cmd_evaluate(const CliConfig& c, std::ostream& out) {
  require_path(c.real, "data.real");
  require_path(c.synthetic, "data.synthetic");
  const auto real = load_dataset(c.real);
  const auto synth = load_dataset(c.synthetic);
  const auto embedder = make_embedder(c);
  const auto real_texts = real.texts();
  const auto synth_texts = synth.texts();
  const auto report = metrics::evaluate_pair(real_texts, synth_texts, c.metrics, *embedder);

  const fs::path report_path = fs::path(c.out) / "report.json";
  util::write_file_atomic(report_path, report.to_json().dump(2) + "\n");
  std::optional<double> gamma, eta;
  if (!synth.empty() && synth.records().front().meta) {
    gamma = synth.records().front().meta->gamma;
    eta = synth.records().front().meta->eta;
  }
  const fs::path ledger = fs::path(c.out) / "runs.csv";
  if (!fs::exists(ledger)) util::append_file(ledger, metrics::csv_header());
  util::append_file(ledger, metrics::csv_row(gamma, eta, &report, report.n, report.m, c.seed, "ok"));
  char line[256];
  std::snprintf(line, sizeof line, "norm3=%.4f diversity=%.4f cosine=%.4f qdiv=%.4f auroc=%.4f hull_f=%.4f\n",
                report.norm3, report.diversity, report.cosine, report.qdiv,
                report.adversarial_auroc, report.hull_fscore);
  out << line;
  write_manifest(c, "evaluate", {{"kmeans", report.kmeans_seed}, {"auroc", report.auroc_seed}},
                 {report_path.string(), ledger.string()});
  return kExitOk;
}

int cmd_sweep(const CliConfig& c, bool keep, std::ostream& out) {
  pipeline::SweepGrid grid;
  grid.gammas = c.gammas;
  grid.etas = c.etas;
  if (grid.gammas.empty()) raise(ErrorCode::kConfigError, "sweep.gammas is required (config or flag)");
  if (grid.etas.empty()) raise(ErrorCode::kConfigError, "sweep.etas is required (config or flag)");
  grid.samples_per_cell = required(c.samples_per_cell, "sweep.samples_per_cell");
  grid.budget = c.budget;
  grid.base_job = make_job(c, grid.samples_per_cell);
  grid.validate();  // before anything is loaded or generated
  require_path(c.real, "data.real");
  const auto models = load_models(c);
  const auto real = load_dataset(c.real);
  const auto holdout = c.holdout.empty() ? real : load_dataset(c.holdout);
  attach_token_table(c, models, real, grid.base_job);
  const auto embedder = make_embedder(c);

  pipeline::SweepOptions options;
  options.metrics = c.metrics;
  options.keep_datasets = keep;
  const auto result = pipeline::run_sweep(grid, models, real, holdout, *embedder, options);

  std::vector<std::string> outputs;
  const fs::path csv = fs::path(c.out) / "sweep.csv";
  util::write_file_atomic(csv, result.csv);
  outputs.push_back(csv.string());
  if (!result.axis_table.empty()) {
    const fs::path axis = fs::path(c.out) / "sweep_axis.csv";
    util::write_file_atomic(axis, result.axis_table);
    outputs.push_back(axis.string());
  }
  std::size_t failed = 0;
  std::optional<ErrorCode> first_error;
  json seeds = json::array();
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const auto& cell = result.cells[i];
    seeds.push_back(cell.seed);
    if (cell.error) {
      ++failed;
      if (!first_error) first_error = cell.error;
    }
    if (keep && cell.dataset) {
      const fs::path p = fs::path(c.out) / "cells" / ("cell-" + pipeline::padded_id(i) + ".jsonl");
      fs::create_directories(p.parent_path());
      util::write_file_atomic(p, cell.dataset->to_jsonl());
      outputs.push_back(p.string());
    }
  }
  out << "cells=" << result.cells.size() << " generations=" << result.total_generated
      << " failed=" << failed << "\n";
  write_manifest(c, "sweep", seeds, outputs);
  if (failed == result.cells.size()) return exit_code_for(*first_error);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Guided synthetic text generation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Config file");
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--set", g.sets, "Override a config key: section.key=value");
  app.fallthrough();

  Overrides o;
  std::string corpus, role, model_path, output;
  bool keep_datasets = false;

  auto* train = app.add_subcommand("train", "Train a base or domain model");
  train->add_option("--corpus", corpus, "Training corpus (lines or .jsonl)")->required();
  train->add_option("--role", role, "base or domain")->required();
  train->add_option("--model", model_path, "Model output path");
  o.add(train, "--instruction", "generate.instruction", "Instruction prefix for domain training");

  auto* generate = app.add_subcommand("generate", "Generate a synthetic dataset");
  generate->add_option("--output", output, "Dataset output path");
  o.add(generate, "--gamma", "generate.gamma", "Contrastive guidance strength");
  o.add(generate, "--eta", "generate.eta", "Negative prompting weight");
  o.add(generate, "--count", "generate.count", "Number of examples");
  o.add(generate, "--real", "data.real", "Real dataset");
  o.add(generate, "--base", "models.base", "Base model file");
  o.add(generate, "--domain", "models.domain", "Domain model file");
  o.add(generate, "--instruction", "generate.instruction", "Instruction prompt");
  o.add(generate, "--method", "sampler.method", "greedy, top_k, nucleus or contrastive");
  generate->add_flag_function(
      "--allow-extrapolation",
      [&o](std::int64_t) { o.entries.emplace_back("generate.allow_extrapolation", "true"); },
      "Permit gamma/eta outside [0, 1]");

  auto* evaluate = app.add_subcommand("evaluate", "Score a synthetic dataset against real data");
  o.add(evaluate, "--real", "data.real", "Real dataset");
  o.add(evaluate, "--synthetic", "data.synthetic", "Synthetic dataset");

  auto* sweep = app.add_subcommand("sweep", "Grid over gamma and eta");
  sweep->add_flag("--keep-datasets", keep_datasets, "Keep per-cell JSONL datasets");
  o.add(sweep, "--real", "data.real", "Real dataset (negative-prompt pool)");
  o.add(sweep, "--holdout", "data.holdout", "Real holdout for evaluation");
  o.add(sweep, "--base", "models.base", "Base model file");
  o.add(sweep, "--domain", "models.domain", "Domain model file");

  std::vector<std::string> argv_tail(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv_tail.begin(), argv_tail.end());
  try {
    app.parse(argv_tail);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const CliConfig c = load_config(g, o);
    fs::create_directories(c.out);
    if (*train) return cmd_train(c, corpus, role, model_path, out);
    if (*generate) return cmd_generate(c, output, out);
    if (*evaluate) return cmd_evaluate(c, out);
    return cmd_sweep(c, keep_datasets, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace steer::cli
