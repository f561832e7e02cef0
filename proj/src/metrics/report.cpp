#include "steer/metrics/report.hpp"

#include <cstdio>
#include <sstream>

#include "steer/error.hpp"
#include "steer/metrics/coherence.hpp"
#include "steer/metrics/matrix.hpp"
#include "steer/metrics/ngrams.hpp"
#include "steer/util/file_io.hpp"

namespace steer::metrics {

using nlohmann::json;

std::string MetricConfig::fingerprint(const std::string& embedder_fingerprint) const {
  std::ostringstream out;
  out.precision(17);
  out << "ngram=" << ngram_tokenizer << ";k=" << qdiv_clusters << ";eps=" << qdiv_epsilon
      << ";kseed=" << kmeans_seed << ";folds=" << auroc_folds << ";aseed=" << auroc_seed
      << ";lr=" << classifier.learning_rate << ";epochs=" << classifier.epochs
      << ";l2=" << classifier.l2 << ";hull_dim=" << hull_dim
      << ";tau=" << (hull_tau ? std::to_string(*hull_tau) : "auto")
      << ";embedder=" << embedder_fingerprint;
  return util::sha256_hex(out.str()).substr(0, 16);
}

json MetricReport::to_json() const {
  return json{{"norm_ngrams", {{"2", norm2}, {"3", norm3}, {"4", norm4}}},
              {"diversity", diversity},
              {"cosine", cosine},
              {"qdiv", qdiv},
              {"qdiv_clusters", qdiv_clusters},
              {"adversarial_auroc", adversarial_auroc},
              {"hull_precision", hull_precision},
              {"hull_recall", hull_recall},
              {"hull_fscore", hull_fscore},
              {"hull_tau", hull_tau},
              {"n", n},
              {"m", m},
              {"config_fingerprint", config_fingerprint},
              {"seeds", {{"kmeans", kmeans_seed}, {"auroc", auroc_seed}}},
              {"warnings", warnings}};
}

MetricReport MetricReport::from_json(const json& doc) {
  MetricReport r;
  r.norm2 = doc.at("norm_ngrams").at("2").get<double>();
  r.norm3 = doc.at("norm_ngrams").at("3").get<double>();
  r.norm4 = doc.at("norm_ngrams").at("4").get<double>();
  r.diversity = doc.at("diversity").get<double>();
  r.cosine = doc.at("cosine").get<double>();
  r.qdiv = doc.at("qdiv").get<double>();
  r.qdiv_clusters = doc.at("qdiv_clusters").get<int>();
  r.adversarial_auroc = doc.at("adversarial_auroc").get<double>();
  r.hull_precision = doc.at("hull_precision").get<double>();
  r.hull_recall = doc.at("hull_recall").get<double>();
  r.hull_fscore = doc.at("hull_fscore").get<double>();
  r.hull_tau = doc.at("hull_tau").get<double>();
  r.n = doc.at("n").get<std::size_t>();
  r.m = doc.at("m").get<std::size_t>();
  r.config_fingerprint = doc.at("config_fingerprint").get<std::string>();
  r.kmeans_seed = doc.at("seeds").at("kmeans").get<std::uint64_t>();
  r.auroc_seed = doc.at("seeds").at("auroc").get<std::uint64_t>();
  r.warnings = doc.at("warnings").get<std::vector<std::string>>();
  return r;
}

MetricReport evaluate_embedded(std::span<const std::string> real,
                               std::span<const std::string> synth,
                               const Eigen::MatrixXd& real_x, const Eigen::MatrixXd& synth_x,
                               const MetricConfig& config,
                               const std::string& embedder_fingerprint) {
  if (real.empty()) raise(ErrorCode::kEmptyDataset, "real dataset is empty");
  if (synth.empty()) raise(ErrorCode::kEmptyDataset, "synthetic dataset is empty");
  MetricReport report;
  report.n = real.size();
  report.m = synth.size();
  report.config_fingerprint = config.fingerprint(embedder_fingerprint);
  report.kmeans_seed = config.kmeans_seed;
  report.auroc_seed = config.auroc_seed;

  const auto tokenizer = tokenizer_for(config.ngram_tokenizer);
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(synth.size());
  for (const auto& t : synth) tokens.push_back(tokenizer(t));
  double* norms[] = {&report.norm2, &report.norm3, &report.norm4};
  report.diversity = 1.0;
  for (int n = 2; n <= 4; ++n) {
    auto stat = normalized_ngrams(tokens, n);
    *norms[n - 2] = stat.value;
    report.diversity *= 1.0 - stat.value;
    if (stat.no_ngrams) {
      report.warnings.push_back("no " + std::to_string(n) + "-grams in synthetic data");
    }
  }

  report.cosine = dataset_cosine_similarity(real_x, synth_x);
  auto q = quantized_divergence(real_x, synth_x, config.qdiv_clusters, config.qdiv_epsilon,
                                config.kmeans_seed);
  report.qdiv = q.score;
  report.qdiv_clusters = q.k;
  report.adversarial_auroc =
      adversarial_auroc(real_x, synth_x, config.auroc_folds, config.auroc_seed, config.classifier);
  HullConfig hull_config;
  hull_config.dim = config.hull_dim;
  hull_config.tau = config.hull_tau;
  auto hull = hull_precision_recall(real_x, synth_x, hull_config);
  report.hull_precision = hull.precision;
  report.hull_recall = hull.recall;
  report.hull_fscore = f_score(hull.precision, hull.recall);
  report.hull_tau = hull.tau;
  return report;
}

MetricReport evaluate_pair(std::span<const std::string> real, std::span<const std::string> synth,
                           const MetricConfig& config, const embeddings::Embedder& embedder) {
  if (real.empty()) raise(ErrorCode::kEmptyDataset, "real dataset is empty");
  if (synth.empty()) raise(ErrorCode::kEmptyDataset, "synthetic dataset is empty");
  auto real_x = to_matrix(embedder.embed(real));
  auto synth_x = to_matrix(embedder.embed(synth));
  return evaluate_embedded(real, synth, real_x, synth_x, config, embedder.fingerprint());
}

std::string csv_header() {
  return "gamma,eta,norm2,norm3,norm4,diversity,cosine,qdiv,auroc,hull_p,hull_r,hull_f,n,m,seed,"
         "status\n";
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string csv_row(std::optional<double> gamma, std::optional<double> eta,
                    const MetricReport* report, std::size_t n, std::size_t m, std::uint64_t seed,
                    const std::string& status) {
  std::string row;
  row += gamma ? num(*gamma) : "";
  row += ",";
  row += eta ? num(*eta) : "";
  if (report) {
    for (double v : {report->norm2, report->norm3, report->norm4, report->diversity,
                     report->cosine, report->qdiv, report->adversarial_auroc,
                     report->hull_precision, report->hull_recall, report->hull_fscore}) {
      row += "," + num(v);
    }
  } else {
    for (int i = 0; i < 10; ++i) row += ",";
  }
  row += "," + std::to_string(n) + "," + std::to_string(m) + "," + std::to_string(seed) + ",";
  // Status text never contains commas or quotes.
  std::string clean = status;
  for (char& c : clean) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') c = ' ';
  }
  row += clean + "\n";
  return row;
}

}  // namespace steer::metrics
