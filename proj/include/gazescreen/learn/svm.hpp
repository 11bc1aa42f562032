#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gazescreen/learn/matrix.hpp"

namespace gazescreen::learn {

struct PolyKernel {
  int degree = 3;
  double gamma = 1.0;
  double coef0 = 0.0;
};

// (gamma * <u, v> + r)^3
double kernel_poly3(std::span<const double> u, std::span<const double> v, double gamma, double r);

// gamma = 1 / (d * mean per-dimension variance of x); falls back to 1/d when
// the data has no variance.
double default_gamma(const Matrix& x);

struct SvmParams {
  double C = 1.0;
  double gamma = 0.0;  // <= 0 selects default_gamma on the training data
  double coef0 = 0.0;
  double tol = 1e-3;
  std::size_t max_passes = 1000;  // sweeps of n pair updates each
};

struct SvmModel {
  PolyKernel kernel;
  double C = 1.0;
  Matrix support_vectors;
  std::vector<double> dual_coef;  // alpha_i * y_i per support vector
  double bias = 0.0;

  double decision_value(std::span<const double> x) const;
  std::size_t dims() const { return support_vectors.cols(); }
};

struct SvmTrainResult {
  SvmModel model;
  std::vector<double> alpha;  // over all training rows
  bool converged = false;
  std::size_t iterations = 0;
  double max_kkt_violation = 0.0;  // final maximal-violating-pair gap
  double dual_objective = 0.0;
};

// Soft-margin dual solved by SMO with maximal-violating-pair selection.
// SingleClass / NonFiniteFeature / DimensionMismatch throw. Hitting the
// iteration cap returns the model with converged = false (NoConvergence).
SvmTrainResult svm_train(const Matrix& x, std::span<const int> y, const SvmParams& params,
                         std::uint64_t seed);

struct SvmPrediction {
  int label = -1;  // +1 ASD, -1 CONTROL; f == 0 maps to CONTROL
  double decision_value = 0.0;
};
SvmPrediction svm_predict(const SvmModel& model, std::span<const double> x);

// sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
double svm_dual_objective(const Matrix& x, std::span<const int> y, std::span<const double> alpha,
                          const PolyKernel& kernel);

// Largest KKT violation of (alpha, bias) measured on the functional margin
// y_i f(x_i): 0 for a primal-dual optimal pair.
double svm_kkt_violation(const Matrix& x, std::span<const int> y, std::span<const double> alpha,
                         double bias, double C, const PolyKernel& kernel);

}  // namespace gazescreen::learn
