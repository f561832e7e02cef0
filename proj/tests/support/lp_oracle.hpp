#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace steer::testkit {

/// min ||X^T lambda - p||_1 over the simplex, by a dense two-phase tableau
/// simplex with Bland's rule. Zero (to rounding) iff p lies in conv(rows of X).
inline double lp_hull_distance_l1(const Eigen::MatrixXd& x, const Eigen::VectorXd& p) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  const int m = d + 1;
  // Columns: lambda (n), r+ (d), r- (d), artificial (m), rhs.
  const int art = n + 2 * d;
  const int cols = art + m + 1;
  const int rhs = cols - 1;
  std::vector<std::vector<double>> t(m, std::vector<double>(cols, 0.0));
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < n; ++i) t[j][i] = x(i, j);
    t[j][n + j] = 1.0;
    t[j][n + d + j] = -1.0;
    t[j][rhs] = p(j);
  }
  for (int i = 0; i < n; ++i) t[d][i] = 1.0;
  t[d][rhs] = 1.0;
  std::vector<int> basis(m);
  for (int r = 0; r < m; ++r) {
    if (t[r][rhs] < 0) {
      for (double& v : t[r]) v = -v;
    }
    t[r][art + r] = 1.0;
    basis[r] = art + r;
  }

  auto run = [&](const std::vector<double>& cost, bool allow_artificial) {
    for (int iter = 0; iter < 100000; ++iter) {
      int enter = -1;
      for (int j = 0; j < rhs && enter < 0; ++j) {
        if (!allow_artificial && j >= art) break;
        double z = cost[j];
        for (int r = 0; r < m; ++r) z -= cost[basis[r]] * t[r][j];
        if (z < -1e-12) enter = j;
      }
      if (enter < 0) return;
      int leave = -1;
      double best = 0;
      for (int r = 0; r < m; ++r) {
        if (t[r][enter] <= 1e-12) continue;
        const double ratio = t[r][rhs] / t[r][enter];
        if (leave < 0 || ratio < best - 1e-15 ||
            (std::abs(ratio - best) <= 1e-15 && basis[r] < basis[leave])) {
          leave = r;
          best = ratio;
        }
      }
      if (leave < 0) return;  // unbounded; cannot happen here
      const double piv = t[leave][enter];
      for (double& v : t[leave]) v /= piv;
      for (int r = 0; r < m; ++r) {
        if (r == leave || t[r][enter] == 0.0) continue;
        const double f = t[r][enter];
        for (int c = 0; c < cols; ++c) t[r][c] -= f * t[leave][c];
      }
      basis[leave] = enter;
    }
  };

  std::vector<double> phase1(cols - 1, 0.0);
  for (int r = 0; r < m; ++r) phase1[art + r] = 1.0;
  run(phase1, true);
  std::vector<double> phase2(cols - 1, 0.0);
  for (int j = n; j < art; ++j) phase2[j] = 1.0;
  for (int r = 0; r < m; ++r) phase2[art + r] = 1e6;
  run(phase2, false);

  double objective = 0.0;
  for (int r = 0; r < m; ++r) {
    if (basis[r] >= n && basis[r] < art) objective += t[r][rhs];
  }
  return objective;
}

}  // namespace steer::testkit
