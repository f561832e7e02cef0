#include "steer/metrics/hull.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "steer/error.hpp"
#include "steer/metrics/matrix.hpp"

namespace steer::metrics {

Eigen::MatrixXd PcaProjection::apply(const Eigen::MatrixXd& x) const {
  return (x.rowwise() - mean) * components;
}

PcaProjection fit_pca(const Eigen::MatrixXd& x, Eigen::Index out_dim) {
  const auto order = canonical_order(x);
  Eigen::MatrixXd sorted(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) sorted.row(i) = x.row(order[static_cast<std::size_t>(i)]);
  PcaProjection pca;
  pca.mean = sorted.colwise().mean();
  Eigen::MatrixXd centered = sorted.rowwise() - pca.mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / std::max<double>(1.0, static_cast<double>(x.rows() - 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::Index ambient = x.cols();
  out_dim = std::min(out_dim, ambient);
  pca.components.resize(ambient, out_dim);
  for (Eigen::Index c = 0; c < out_dim; ++c) {
    // Eigen sorts eigenvalues ascending.
    Eigen::VectorXd axis = eig.eigenvectors().col(ambient - 1 - c);
    Eigen::Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis(arg) < 0.0) axis = -axis;
    pca.components.col(c) = axis;
  }
  return pca;
}

namespace {

// Minimiser of ||sum a_i y_i|| subject to sum a_i = 1 over the active rows.
Eigen::VectorXd affine_minimizer(const Eigen::MatrixXd& y, const std::vector<Eigen::Index>& active) {
  const auto s = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(s + 1, s + 1);
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double g = y.row(active[static_cast<std::size_t>(i)]).dot(y.row(active[static_cast<std::size_t>(j)]));
      kkt(i, j) = g;
      kkt(j, i) = g;
    }
    kkt(i, s) = 1.0;
    kkt(s, i) = 1.0;
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
  rhs(s) = 1.0;
  Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  return sol.head(s);
}

}  // namespace

MembershipResult hull_membership(const Eigen::MatrixXd& points, const Eigen::VectorXd& p,
                                 double tau, const MembershipOptions& options) {
  const Eigen::Index n = points.rows();
  if (n == 0) raise(ErrorCode::kTooFewPoints, "hull of an empty set");
  if (points.cols() != p.size()) raise(ErrorCode::kLengthMismatch, "point dimension differs");
  const Eigen::MatrixXd y = points.rowwise() - p.transpose();
  const Eigen::VectorXd norms2 = y.rowwise().squaredNorm();
  const double scale = std::max(norms2.maxCoeff(), std::numeric_limits<double>::min());
  constexpr double kWeightFloor = 1e-14;

  std::vector<Eigen::Index> active;
  std::vector<double> lambda;
  Eigen::Index start = 0;
  norms2.minCoeff(&start);
  active.push_back(start);
  lambda.push_back(1.0);
  Eigen::VectorXd x = y.row(start).transpose();

  MembershipResult result;
  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    const double xx = x.squaredNorm();
    if (std::sqrt(xx) <= tau) break;
    if (xx >= previous) break;  // no progress in the last major cycle
    previous = xx;

    Eigen::VectorXd g = y * x;
    Eigen::Index j = 0;
    const double gmin = g.minCoeff(&j);
    // Every hull point z has <z, x> >= gmin, so dist >= gmin / ||x||.
    if (gmin > 0.0 && gmin / std::sqrt(xx) > tau) break;
    if (xx - gmin <= options.gap_tolerance * scale) break;
    if (std::find(active.begin(), active.end(), j) != active.end()) break;
    active.push_back(j);
    lambda.push_back(0.0);

    for (std::size_t minor = 0; minor <= active.size() + 1; ++minor) {
      Eigen::VectorXd alpha = affine_minimizer(y, active);
      bool interior = true;
      for (Eigen::Index i = 0; i < alpha.size(); ++i) interior &= alpha(i) > kWeightFloor;
      if (interior) {
        for (std::size_t i = 0; i < lambda.size(); ++i) lambda[i] = alpha(static_cast<Eigen::Index>(i));
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < lambda.size(); ++i) {
        const double a = alpha(static_cast<Eigen::Index>(i));
        if (a <= kWeightFloor && lambda[i] - a > 0.0) theta = std::min(theta, lambda[i] / (lambda[i] - a));
      }
      for (std::size_t i = 0; i < lambda.size(); ++i) {
        lambda[i] = (1.0 - theta) * lambda[i] + theta * alpha(static_cast<Eigen::Index>(i));
      }
      std::vector<Eigen::Index> kept;
      std::vector<double> kept_lambda;
      for (std::size_t i = 0; i < lambda.size(); ++i) {
        if (lambda[i] > kWeightFloor) {
          kept.push_back(active[i]);
          kept_lambda.push_back(lambda[i]);
        }
      }
      if (kept.empty()) {
        kept.push_back(active.back());
        kept_lambda.push_back(1.0);
      }
      active = std::move(kept);
      lambda = std::move(kept_lambda);
      double total = 0.0;
      for (double l : lambda) total += l;
      for (double& l : lambda) l /= total;
    }
    x.setZero();
    for (std::size_t i = 0; i < active.size(); ++i) x += lambda[i] * y.row(active[i]).transpose();
  }
  result.residual = x.norm();
  result.member = result.residual <= tau;
  result.weights = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < active.size(); ++i) result.weights(active[i]) = lambda[i];
  return result;
}

double diameter(const Eigen::MatrixXd& points) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < points.rows(); ++j) {
      best = std::max(best, (points.row(i) - points.row(j)).squaredNorm());
    }
  }
  return std::sqrt(best);
}

namespace {

double fraction_inside(const Eigen::MatrixXd& hull, const Eigen::MatrixXd& queries, double tau,
                       const MembershipOptions& options) {
  const auto n = static_cast<std::size_t>(queries.rows());
  std::vector<char> inside(n, 0);
  const std::size_t workers = std::max<std::size_t>(
      1, std::min<std::size_t>(std::thread::hardware_concurrency(), n / 16 + 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        inside[i] = hull_membership(hull, queries.row(static_cast<Eigen::Index>(i)).transpose(),
                                    tau, options).member;
      }
    });
  }
  for (auto& t : pool) t.join();
  std::size_t count = 0;
  for (char c : inside) count += c ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(n);
}

}  // namespace

HullResult hull_precision_recall(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth,
                                 const HullConfig& config) {
  if (real.rows() < 2 || synth.rows() < 2) {
    raise(ErrorCode::kTooFewPoints, "convex hull metrics need at least 2 points per set");
  }
  if (real.cols() != synth.cols()) raise(ErrorCode::kLengthMismatch, "embedding dimensions differ");
  HullResult result;
  Eigen::MatrixXd r = real;
  Eigen::MatrixXd s = synth;
  if (real.cols() > config.dim) {
    Eigen::MatrixXd pooled(real.rows() + synth.rows(), real.cols());
    pooled << real, synth;
    auto pca = fit_pca(pooled, config.dim);
    r = pca.apply(real);
    s = pca.apply(synth);
    result.projected = true;
  }
  if (config.tau) {
    result.tau = *config.tau;
  } else {
    Eigen::MatrixXd pooled(r.rows() + s.rows(), r.cols());
    pooled << r, s;
    result.tau = 1e-6 * diameter(pooled);
  }
  result.precision = fraction_inside(r, s, result.tau, config.solver);
  result.recall = fraction_inside(s, r, result.tau, config.solver);
  return result;
}

double f_score(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace steer::metrics
