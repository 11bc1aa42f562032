#include "gazescreen/learn/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gazescreen/error.hpp"
#include "gazescreen/random.hpp"

namespace gazescreen::learn {

double kernel_poly3(std::span<const double> u, std::span<const double> v, double gamma, double r) {
  if (u.size() != v.size())
    throw Error(ErrorCode::DimensionMismatch, "kernel arguments differ in length");
  const double t = gamma * dot(u, v) + r;
  return t * t * t;
}

double default_gamma(const Matrix& x) {
  const auto d = x.cols();
  if (d == 0) return 1.0;
  double total_var = 0.0;
  if (x.rows() > 0) {
    const double n = static_cast<double>(x.rows());
    for (std::size_t c = 0; c < d; ++c) {
      double mean = 0.0, var = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) mean += x(r, c);
      mean /= n;
      for (std::size_t r = 0; r < x.rows(); ++r) var += (x(r, c) - mean) * (x(r, c) - mean);
      total_var += var / n;
    }
  }
  const double mean_var = total_var / static_cast<double>(d);
  return mean_var > 0.0 ? 1.0 / (static_cast<double>(d) * mean_var) : 1.0 / static_cast<double>(d);
}

double SvmModel::decision_value(std::span<const double> x) const {
  if (x.size() != dims())
    throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(x.size()) +
                                                  " values, model expects " +
                                                  std::to_string(dims()));
  double f = bias;
  for (std::size_t i = 0; i < support_vectors.rows(); ++i)
    f += dual_coef[i] * kernel_poly3(support_vectors.row(i), x, kernel.gamma, kernel.coef0);
  return f;
}

SvmPrediction svm_predict(const SvmModel& model, std::span<const double> x) {
  SvmPrediction p;
  p.decision_value = model.decision_value(x);
  p.label = p.decision_value > 0.0 ? +1 : -1;
  return p;
}

namespace {

Matrix gram(const Matrix& x, const PolyKernel& k) {
  const auto n = x.rows();
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      g(i, j) = g(j, i) = kernel_poly3(x.row(i), x.row(j), k.gamma, k.coef0);
  return g;
}

void check_inputs(const Matrix& x, std::span<const int> y) {
  if (y.size() != x.rows())
    throw Error(ErrorCode::DimensionMismatch, "label count differs from row count");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw Error(ErrorCode::InvalidConfig, "labels must be +1 or -1");
  }
  if (!pos || !neg) throw Error(ErrorCode::SingleClass, "training data holds a single class");
  for (double v : x.data())
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFeature, "non-finite training feature");
}

constexpr double kTau = 1e-12;

}  // namespace

double svm_dual_objective(const Matrix& x, std::span<const int> y, std::span<const double> alpha,
                          const PolyKernel& kernel) {
  const auto k = gram(x, kernel);
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    lin += alpha[i];
    for (std::size_t j = 0; j < x.rows(); ++j)
      quad += alpha[i] * alpha[j] * y[i] * y[j] * k(i, j);
  }
  return lin - 0.5 * quad;
}

double svm_kkt_violation(const Matrix& x, std::span<const int> y, std::span<const double> alpha,
                         double bias, double C, const PolyKernel& kernel) {
  const auto k = gram(x, kernel);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double f = bias;
    for (std::size_t j = 0; j < x.rows(); ++j) f += alpha[j] * y[j] * k(i, j);
    const double margin = y[i] * f;
    double v;
    if (alpha[i] <= 0.0) v = std::max(0.0, 1.0 - margin);
    else if (alpha[i] >= C) v = std::max(0.0, margin - 1.0);
    else v = std::abs(margin - 1.0);
    worst = std::max(worst, v);
  }
  return worst;
}

SvmTrainResult svm_train(const Matrix& x, std::span<const int> y, const SvmParams& params,
                         std::uint64_t seed) {
  check_inputs(x, y);
  if (!(params.C > 0.0)) throw Error(ErrorCode::InvalidConfig, "C must be positive");
  if (!(params.tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "tol must be positive");
  if (params.max_passes == 0) throw Error(ErrorCode::InvalidConfig, "max_passes must be >= 1");

  PolyKernel kernel;
  kernel.gamma = params.gamma > 0.0 ? params.gamma : default_gamma(x);
  kernel.coef0 = params.coef0;
  const double C = params.C;
  const auto n = x.rows();
  const auto K = gram(x, kernel);
  auto Q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * K(i, j); };

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a
  Rng rng(seed);

  auto in_up = [&](std::size_t t) {
    return (y[t] == +1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0);
  };
  auto in_low = [&](std::size_t t) {
    return (y[t] == -1 && alpha[t] < C) || (y[t] == +1 && alpha[t] > 0.0);
  };

  // Analytic two-variable step; returns true when either multiplier moved.
  auto step = [&](std::size_t i, std::size_t j) {
    const double old_i = alpha[i], old_j = alpha[j];
    double quad = K(i, i) + K(j, j) - 2.0 * K(i, j);
    if (quad <= 0.0) quad = kTau;
    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
      } else {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; }
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
      } else {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
      }
      if (sum > C) {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
      }
    }
    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    if (di == 0.0 && dj == 0.0) return false;
    for (std::size_t t = 0; t < n; ++t) grad[t] += Q(i, t) * di + Q(j, t) * dj;
    return true;
  };

  SvmTrainResult result;
  const std::size_t max_iter = params.max_passes * n;
  double gap = std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    // Maximal violating pair: i maximizes -y G over I_up, j minimizes it over
    // I_low, i.e. the pair with the largest |E_i - E_j|.
    std::size_t i = n, j = n;
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > g_max) { g_max = v; i = t; }
      if (in_low(t) && v < g_min) { g_min = v; j = t; }
    }
    gap = g_max - g_min;
    if (i == n || j == n || gap < params.tol) {
      result.converged = true;
      break;
    }
    if (step(i, j)) continue;
    // Fallback: seeded random sweep over other violating partners of i.
    bool moved = false;
    for (std::size_t attempt = 0; attempt < n && !moved; ++attempt) {
      const std::size_t t = rng.index(n);
      if (t != i && in_low(t) && -y[t] * grad[t] < g_max - params.tol) moved = step(i, t);
    }
    if (!moved) break;
  }
  result.iterations = iter;
  result.max_kkt_violation = std::max(0.0, gap);
  if (!result.converged && gap < params.tol) result.converged = true;

  // Bias from free multipliers, else the midpoint of the feasible interval.
  double sum_free = 0.0;
  std::size_t n_free = 0;
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= C) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] == +1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

  auto& m = result.model;
  m.kernel = kernel;
  m.C = C;
  m.bias = -rho;
  std::vector<std::size_t> sv;
  for (std::size_t t = 0; t < n; ++t)
    if (alpha[t] > 0.0) sv.push_back(t);
  m.support_vectors = x.select_rows(sv);
  for (auto t : sv) m.dual_coef.push_back(alpha[t] * y[t]);

  double lin = 0.0, quad = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    lin += alpha[t];
    quad += alpha[t] * (grad[t] + 1.0);  // (Qa)_t = G_t + 1
  }
  result.dual_objective = lin - 0.5 * quad;
  result.alpha = std::move(alpha);
  return result;
}

}  // namespace gazescreen::learn
