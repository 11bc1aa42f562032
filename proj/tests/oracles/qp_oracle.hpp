#pragma once

// Reference solver for the soft-margin SVM dual
//   max  sum(a) - 1/2 a'Qa,  Q_ij = y_i y_j K_ij,  0 <= a <= C,  y'a = 0
// by accelerated projected gradient (FISTA with adaptive restart). The
// projection onto box-and-hyperplane is a:= clip(v - lambda y, 0, C) with
// lambda found by bisection.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

struct QpSolution {
  std::vector<double> alpha;
  double objective = 0.0;
};

inline std::vector<double> project_box_hyperplane(const std::vector<double>& v,
                                                  const std::vector<int>& y, double C) {
  auto clipped = [&](double lambda, std::vector<double>& out) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i] = std::clamp(v[i] - lambda * y[i], 0.0, C);
      s += y[i] * out[i];
    }
    return s;  // non-increasing in lambda
  };
  std::vector<double> out(v.size());
  double lo = -1.0, hi = 1.0;
  while (clipped(lo, out) < 0.0) lo *= 2.0;
  while (clipped(hi, out) > 0.0) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (clipped(mid, out) > 0.0 ? lo : hi) = mid;
  }
  clipped(0.5 * (lo + hi), out);
  return out;
}

inline double dual_objective(const std::vector<std::vector<double>>& Q, const std::vector<double>& a) {
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    lin += a[i];
    for (std::size_t j = 0; j < a.size(); ++j) quad += a[i] * Q[i][j] * a[j];
  }
  return lin - 0.5 * quad;
}

inline QpSolution solve_dual_qp(const std::vector<std::vector<double>>& K, const std::vector<int>& y,
                                double C, int iterations = 20000) {
  const std::size_t n = y.size();
  std::vector<std::vector<double>> Q(n, std::vector<double>(n));
  double lipschitz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      Q[i][j] = y[i] * y[j] * K[i][j];
      row += std::fabs(Q[i][j]);
    }
    lipschitz = std::max(lipschitz, row);  // Gershgorin bound on the top eigenvalue
  }
  const double step = 1.0 / std::max(lipschitz, 1e-12);
  std::vector<double> a(n, 0.0), z = a, prev = a, grad(n), v(n);
  double t = 1.0, f_prev = dual_objective(Q, a);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double qz = 0.0;
      for (std::size_t j = 0; j < n; ++j) qz += Q[i][j] * z[j];
      grad[i] = 1.0 - qz;
      v[i] = z[i] + step * grad[i];
    }
    prev = a;
    a = project_box_hyperplane(v, y, C);
    const double f = dual_objective(Q, a);
    if (f < f_prev) {  // restart momentum
      t = 1.0;
      z = a;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      for (std::size_t i = 0; i < n; ++i) z[i] = a[i] + (t - 1.0) / t_next * (a[i] - prev[i]);
      t = t_next;
    }
    f_prev = f;
  }
  return {a, dual_objective(Q, a)};
}

}  // namespace oracle
