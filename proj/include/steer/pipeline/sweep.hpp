#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "steer/embeddings/embedder.hpp"
#include "steer/error.hpp"
#include "steer/metrics/report.hpp"
#include "steer/pipeline/generator.hpp"

namespace steer::pipeline {

struct SweepGrid {
  std::vector<double> gammas;
  std::vector<double> etas;
  std::size_t samples_per_cell = 0;
  GenerationJob base_job;  // count, guidance and seed are overridden per cell
  std::size_t budget = 100000;  // max cells x samples

  std::size_t cell_count() const { return gammas.size() * etas.size(); }
  /// Throws InvalidArgument on an empty axis, BudgetExceeded over budget and
  /// ParameterOutOfRange for any out-of-range grid value.
  void validate() const;
};

struct SweepCell {
  double gamma = 0.0;
  double eta = 0.0;
  std::uint64_t seed = 0;
  std::string status = "ok";  // or "error:<Code>"
  std::optional<ErrorCode> error;
  std::optional<metrics::MetricReport> report;
  std::optional<Dataset> dataset;  // kept when requested
  std::size_t generated = 0;
};

struct SweepResult {
  std::string csv;         // header + one row per cell, gamma-major
  std::string axis_table;  // one-axis variation table; empty unless an axis has length 1
  std::vector<SweepCell> cells;
  std::size_t total_generated = 0;
};

struct SweepOptions {
  metrics::MetricConfig metrics;
  bool keep_datasets = false;
  /// Called after each cell (progress reporting).
  std::function<void(const SweepCell&)> on_cell;
};

/// Seed for cell `index` (gamma-major order).
std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t index);

SweepResult run_sweep(const SweepGrid& grid, const guidance::ModelPair& models,
                      const Dataset& real_pool, const Dataset& real_holdout,
                      const embeddings::Embedder& embedder, const SweepOptions& options = {});

}  // namespace steer::pipeline
