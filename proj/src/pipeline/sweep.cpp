#include "steer/pipeline/sweep.hpp"

#include <cstdio>

#include "steer/error.hpp"
#include "steer/metrics/matrix.hpp"

namespace steer::pipeline {

void SweepGrid::validate() const {
  if (gammas.empty() || etas.empty()) raise(ErrorCode::kInvalidArgument, "sweep axes must be non-empty");
  if (samples_per_cell == 0) raise(ErrorCode::kInvalidArgument, "samples_per_cell must be >= 1");
  const std::size_t total = cell_count() * samples_per_cell;
  if (total > budget) {
    raise(ErrorCode::kBudgetExceeded, std::to_string(cell_count()) + " cells x " +
                                          std::to_string(samples_per_cell) + " samples = " +
                                          std::to_string(total) + " exceeds budget " +
                                          std::to_string(budget));
  }
  for (double g : gammas) {
    for (double e : etas) {
      guidance::GuidanceParams p = base_job.guidance;
      p.gamma = g;
      p.eta = e;
      p.validate();
    }
  }
  base_job.sampler.validate();
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t index) {
  return decoding::derive_seed(base_seed, index);
}

namespace {

std::string axis_table(const std::vector<SweepCell>& cells, bool vary_gamma) {
  std::string out = vary_gamma ? "gamma" : "eta";
  out += ",norm3,diversity,cosine,qdiv,auroc,hull_f,status\n";
  char buf[64];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%.6f", vary_gamma ? c.gamma : c.eta);
    out += buf;
    for (double v : c.report ? std::vector<double>{c.report->norm3, c.report->diversity,
                                                   c.report->cosine, c.report->qdiv,
                                                   c.report->adversarial_auroc,
                                                   c.report->hull_fscore}
                             : std::vector<double>{}) {
      std::snprintf(buf, sizeof buf, ",%.6f", v);
      out += buf;
    }
    if (!c.report) out += ",,,,,,";
    out += "," + c.status + "\n";
  }
  return out;
}

}  // namespace

SweepResult run_sweep(const SweepGrid& grid, const guidance::ModelPair& models,
                      const Dataset& real_pool, const Dataset& real_holdout,
                      const embeddings::Embedder& embedder, const SweepOptions& options) {
  grid.validate();
  const auto real_texts = real_holdout.texts();
  if (real_texts.empty()) raise(ErrorCode::kEmptyDataset, "real holdout is empty");
  const Eigen::MatrixXd real_x = metrics::to_matrix(embedder.embed(real_texts));

  SweepResult result;
  result.csv = metrics::csv_header();
  std::size_t index = 0;
  for (double gamma : grid.gammas) {
    for (double eta : grid.etas) {
      SweepCell cell;
      cell.gamma = gamma;
      cell.eta = eta;
      cell.seed = cell_seed(grid.base_job.seed, index++);
      GenerationJob job = grid.base_job;
      job.count = grid.samples_per_cell;
      job.guidance.gamma = gamma;
      job.guidance.eta = eta;
      job.seed = cell.seed;
      if (!job.label_quotas.empty()) {
        // Rescale quotas to the cell size, remainder to the earliest labels.
        const std::size_t labels = job.label_quotas.size();
        for (std::size_t i = 0; i < labels; ++i) {
          job.label_quotas[i].second = job.count / labels + (i < job.count % labels ? 1 : 0);
        }
      }
      cell.generated = job.count;
      try {
        Dataset synth = generate_dataset(job, models, real_pool);
        const auto synth_texts = synth.texts();
        const Eigen::MatrixXd synth_x = metrics::to_matrix(embedder.embed(synth_texts));
        cell.report = metrics::evaluate_embedded(real_texts, synth_texts, real_x, synth_x,
                                                 options.metrics, embedder.fingerprint());
        if (options.keep_datasets) cell.dataset = std::move(synth);
      } catch (const Error& e) {
        cell.status = "error:" + std::string(error_code_name(e.code()));
        cell.error = e.code();
        cell.report.reset();
      }
      result.csv += metrics::csv_row(gamma, eta, cell.report ? &*cell.report : nullptr,
                                     real_texts.size(), job.count, cell.seed, cell.status);
      result.total_generated += cell.generated;
      if (options.on_cell) options.on_cell(cell);
      result.cells.push_back(std::move(cell));
    }
  }
  if (grid.etas.size() == 1 && grid.gammas.size() > 1) {
    result.axis_table = axis_table(result.cells, true);
  } else if (grid.gammas.size() == 1 && grid.etas.size() > 1) {
    result.axis_table = axis_table(result.cells, false);
  }
  return result;
}

}  // namespace steer::pipeline
