#pragma once

#include <optional>

#include <Eigen/Dense>

namespace steer::metrics {

struct PcaProjection {
  Eigen::RowVectorXd mean;
  Eigen::MatrixXd components;  // ambient x out_dim, columns by descending variance

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

/// Principal axes of `x` (rows are points); each axis is signed so its
/// largest-magnitude entry is positive.
PcaProjection fit_pca(const Eigen::MatrixXd& x, Eigen::Index out_dim);

struct MembershipResult {
  bool member = false;
  double residual = 0.0;  // ||X^T lambda - p|| at the final iterate
  int iterations = 0;
  Eigen::VectorXd weights;  // simplex coefficients, parallel to the rows of X
};

struct MembershipOptions {
  int max_iterations = 2000;
  double gap_tolerance = 1e-10;  // relative to the squared point spread
};

/// Decides p in conv(rows of X) by minimising ||X^T lambda - p||^2 over the
/// simplex with fully-corrective Frank-Wolfe: each linear-minimisation vertex
/// joins an active set, and the iterate is re-optimised over the hull of the
/// active set (Wolfe's minor cycle), keeping lambda >= 0 and sum(lambda) = 1.
/// Member iff the residual is <= tau. Stops early once the residual is under
/// tau or a separating hyperplane proves the distance exceeds tau.
MembershipResult hull_membership(const Eigen::MatrixXd& points, const Eigen::VectorXd& p,
                                 double tau, const MembershipOptions& options = {});

/// Largest pairwise distance between rows.
double diameter(const Eigen::MatrixXd& points);

struct HullConfig {
  Eigen::Index dim = 5;
  std::optional<double> tau;       // default: 1e-6 * diameter of the pooled projected data
  MembershipOptions solver;
};

struct HullResult {
  double precision = 0.0;  // synthetic points inside the real hull
  double recall = 0.0;     // real points inside the synthetic hull
  double tau = 0.0;
  bool projected = false;
};

/// Throws TooFewPoints when either set has fewer than 2 points. When the
/// ambient dimension exceeds config.dim both sets are projected by PCA fitted
/// on the pooled points.
HullResult hull_precision_recall(const Eigen::MatrixXd& real, const Eigen::MatrixXd& synth,
                                 const HullConfig& config = {});

/// Harmonic mean 2pr / (p + r); 0 when p + r = 0.
double f_score(double precision, double recall);

}  // namespace steer::metrics
