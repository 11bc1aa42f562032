#include "gazescreen/learn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gazescreen/error.hpp"
#include "gazescreen/random.hpp"

namespace gazescreen::learn {

MlpModel mlp_init(std::size_t inputs, const MlpConfig& config, std::uint64_t seed) {
  if (inputs == 0 || config.hidden == 0)
    throw Error(ErrorCode::InvalidConfig, "MLP needs at least one input and one hidden unit");
  Rng rng(seed);
  MlpModel m;
  m.config = config;
  // Glorot-uniform bounds, applied to weights and biases alike.
  const double bound1 = std::sqrt(6.0 / static_cast<double>(inputs + config.hidden));
  const double bound2 = std::sqrt(6.0 / static_cast<double>(config.hidden + 1));
  m.w1 = Matrix(config.hidden, inputs);
  for (auto& w : m.w1.data()) w = rng.uniform(-bound1, bound1);
  m.b1.resize(config.hidden);
  for (auto& b : m.b1) b = rng.uniform(-bound1, bound1);
  m.w2.resize(config.hidden);
  for (auto& w : m.w2) w = rng.uniform(-bound2, bound2);
  m.b2 = rng.uniform(-bound2, bound2);
  return m;
}

namespace {

// Network output in model (scaled) units; `hidden` receives the activations.
double forward(const MlpModel& m, std::span<const double> x, std::vector<double>& hidden) {
  hidden.resize(m.hidden());
  double out = m.b2;
  for (std::size_t h = 0; h < m.hidden(); ++h) {
    const double z = dot(m.w1.row(h), x) + m.b1[h];
    hidden[h] = z > 0.0 ? z : 0.0;
    out += m.w2[h] * hidden[h];
  }
  return out;
}

double weight_norm2(const MlpModel& m) {
  double s = 0.0;
  for (double w : m.w1.data()) s += w * w;
  for (double w : m.w2) s += w * w;
  return s;
}

}  // namespace

double mlp_predict(const MlpModel& model, std::span<const double> x) {
  if (x.size() != model.inputs())
    throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(x.size()) +
                                                  " values, model expects " +
                                                  std::to_string(model.inputs()));
  std::vector<double> hidden;
  return forward(model, x, hidden) * model.target_scale + model.target_mean;
}

double mlp_loss(const MlpModel& model, const Matrix& x, std::span<const double> targets) {
  std::vector<double> hidden;
  double sq = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double e = forward(model, x.row(r), hidden) - targets[r];
    sq += e * e;
  }
  const double n = static_cast<double>(x.rows());
  return 0.5 * sq / n + 0.5 * model.config.l2 * weight_norm2(model) / n;
}

double mlp_loss_and_gradient(const MlpModel& model, const Matrix& x,
                             std::span<const double> targets, MlpGradient& grad) {
  const auto H = model.hidden(), D = model.inputs();
  grad.w1 = Matrix(H, D);
  grad.b1.assign(H, 0.0);
  grad.w2.assign(H, 0.0);
  grad.b2 = 0.0;
  const double n = static_cast<double>(x.rows());
  std::vector<double> hidden;
  double sq = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto xr = x.row(r);
    const double e = forward(model, xr, hidden) - targets[r];
    sq += e * e;
    const double delta = e / n;
    grad.b2 += delta;
    for (std::size_t h = 0; h < H; ++h) {
      grad.w2[h] += delta * hidden[h];
      if (hidden[h] <= 0.0) continue;
      const double dz = delta * model.w2[h];
      grad.b1[h] += dz;
      auto gw = grad.w1.row(h);
      for (std::size_t d = 0; d < D; ++d) gw[d] += dz * xr[d];
    }
  }
  const double reg = model.config.l2 / n;
  for (std::size_t k = 0; k < model.w1.data().size(); ++k)
    grad.w1.data()[k] += reg * model.w1.data()[k];
  for (std::size_t h = 0; h < H; ++h) grad.w2[h] += reg * model.w2[h];
  return 0.5 * sq / n + 0.5 * model.config.l2 * weight_norm2(model) / n;
}

std::vector<double> mlp_flatten(const MlpModel& m) {
  std::vector<double> p(m.w1.data().begin(), m.w1.data().end());
  p.insert(p.end(), m.b1.begin(), m.b1.end());
  p.insert(p.end(), m.w2.begin(), m.w2.end());
  p.push_back(m.b2);
  return p;
}

std::vector<double> mlp_flatten(const MlpGradient& g) {
  std::vector<double> p(g.w1.data().begin(), g.w1.data().end());
  p.insert(p.end(), g.b1.begin(), g.b1.end());
  p.insert(p.end(), g.w2.begin(), g.w2.end());
  p.push_back(g.b2);
  return p;
}

void mlp_unflatten(MlpModel& m, std::span<const double> p) {
  const auto n1 = m.w1.data().size(), H = m.hidden();
  if (p.size() != n1 + 2 * H + 1)
    throw Error(ErrorCode::DimensionMismatch, "parameter vector has the wrong length");
  std::copy(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(n1), m.w1.data().begin());
  std::copy(p.begin() + static_cast<std::ptrdiff_t>(n1),
            p.begin() + static_cast<std::ptrdiff_t>(n1 + H), m.b1.begin());
  std::copy(p.begin() + static_cast<std::ptrdiff_t>(n1 + H),
            p.begin() + static_cast<std::ptrdiff_t>(n1 + 2 * H), m.w2.begin());
  m.b2 = p.back();
}

MlpModel mlp_train(const Matrix& x, std::span<const double> y, const MlpConfig& config,
                   std::uint64_t seed) {
  const auto n = x.rows();
  if (n < 2) throw Error(ErrorCode::InsufficientData, "MLP training needs at least 2 examples");
  if (y.size() != n) throw Error(ErrorCode::DimensionMismatch, "target count differs from row count");
  for (double v : x.data())
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFeature, "non-finite training feature");
  for (double v : y)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFeature, "non-finite training target");

  MlpModel m = mlp_init(x.cols(), config, derive_seed(seed, {0}));
  std::vector<double> t(y.begin(), y.end());
  if (config.scale_target) {
    const double mean = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : t) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    m.target_mean = mean;
    // A constant target has no scaled units; scale 0 pins predictions to it.
    m.target_scale = sd;
    for (auto& v : t) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  }

  Rng rng(derive_seed(seed, {1}));
  const std::size_t batch = std::max<std::size_t>(1, std::min(config.batch_size, n));
  auto params = mlp_flatten(m);
  std::vector<double> m1(params.size(), 0.0), m2(params.size(), 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t step = 0;
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  MlpGradient grad;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const auto stop = std::min(n, start + batch);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Matrix xb = x.select_rows(idx);
      std::vector<double> tb;
      for (auto i : idx) tb.push_back(t[i]);
      const double loss = mlp_loss_and_gradient(m, xb, tb, grad);
      if (!std::isfinite(loss))
        throw Error(ErrorCode::DivergenceDetected, "loss became non-finite at epoch " +
                                                       std::to_string(epoch));
      epoch_loss += loss * static_cast<double>(idx.size());
      ++step;
      const auto g = mlp_flatten(grad);
      const double lr = config.learning_rate *
                        std::sqrt(1.0 - std::pow(config.beta2, static_cast<double>(step))) /
                        (1.0 - std::pow(config.beta1, static_cast<double>(step)));
      for (std::size_t k = 0; k < params.size(); ++k) {
        m1[k] = config.beta1 * m1[k] + (1.0 - config.beta1) * g[k];
        m2[k] = config.beta2 * m2[k] + (1.0 - config.beta2) * g[k] * g[k];
        params[k] -= lr * m1[k] / (std::sqrt(m2[k]) + config.epsilon);
      }
      mlp_unflatten(m, params);
    }
    epoch_loss /= static_cast<double>(n);
    m.epochs_run = epoch + 1;
    m.final_loss = epoch_loss;
    if (epoch_loss > best - config.tol) {
      if (++stale >= config.n_iter_no_change) break;
    } else {
      stale = 0;
    }
    best = std::min(best, epoch_loss);
  }
  return m;
}

}  // namespace gazescreen::learn
