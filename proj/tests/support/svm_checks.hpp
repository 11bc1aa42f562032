#pragma once

// Toy SVM problems and the checks run on every trained model, shared by the
// unit tests and the acceptance runner.

#include <cmath>
#include <string>
#include <vector>

#include "gazescreen/learn/svm.hpp"
#include "gazescreen/random.hpp"
#include "oracles/qp_oracle.hpp"

namespace testsupport {

struct SvmProblem {
  gazescreen::learn::Matrix x;
  std::vector<int> y;
};

// Two overlapping Gaussian clouds in 2-D, both classes guaranteed present.
inline SvmProblem overlapping_toy(std::uint64_t seed, std::size_t n = 20) {
  gazescreen::Rng rng(seed);
  SvmProblem p{gazescreen::learn::Matrix(n, 2), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 == 0 ? 1 : -1;
    p.y.push_back(label);
    p.x(i, 0) = 0.6 * label + rng.normal(0.0, 0.8);
    p.x(i, 1) = 0.6 * label + rng.normal(0.0, 0.8);
  }
  return p;
}

// Uniform discs of radius 0.5 around +(2,2) and -(2,2).
inline SvmProblem separable_blobs(std::uint64_t seed, std::size_t per_class = 25) {
  gazescreen::Rng rng(seed);
  SvmProblem p{gazescreen::learn::Matrix(2 * per_class, 2), {}};
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const int label = i < per_class ? 1 : -1;
    const double r = 0.5 * std::sqrt(rng.uniform()), t = rng.uniform(0.0, 2.0 * M_PI);
    p.x(i, 0) = 2.0 * label + r * std::cos(t);
    p.x(i, 1) = 2.0 * label + r * std::sin(t);
    p.y.push_back(label);
  }
  return p;
}

struct TrainAudit {
  bool feasible = true;
  double kkt = 0.0;
  double equality_residual = 0.0;
};

inline TrainAudit audit(const SvmProblem& p, const gazescreen::learn::SvmTrainResult& r, double C) {
  TrainAudit a;
  for (std::size_t i = 0; i < r.alpha.size(); ++i) {
    if (r.alpha[i] < 0.0 || r.alpha[i] > C) a.feasible = false;
    a.equality_residual += r.alpha[i] * p.y[i];
  }
  a.equality_residual = std::fabs(a.equality_residual);
  if (a.equality_residual > 1e-9) a.feasible = false;
  a.kkt = gazescreen::learn::svm_kkt_violation(p.x, p.y, r.alpha, r.model.bias, C, r.model.kernel);
  return a;
}

// Kernel written out longhand for the oracle.
inline std::vector<std::vector<double>> oracle_gram(const SvmProblem& p, double gamma, double coef0) {
  const std::size_t n = p.y.size();
  std::vector<std::vector<double>> K(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double ip = 0.0;
      for (std::size_t d = 0; d < p.x.cols(); ++d) ip += p.x(i, d) * p.x(j, d);
      const double base = gamma * ip + coef0;
      K[i][j] = base * base * base;
    }
  return K;
}

}  // namespace testsupport
