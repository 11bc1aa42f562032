#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gazescreen/learn/matrix.hpp"

namespace gazescreen::learn {

struct MlpConfig {
  std::size_t hidden = 100;
  double l2 = 1e-4;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 200;  // effective batch is min(batch_size, n)
  std::size_t max_epochs = 200;
  double tol = 1e-4;
  std::size_t n_iter_no_change = 10;
  bool scale_target = true;
};

// One hidden ReLU layer and a linear scalar output. Targets are modelled in
// z-scored units when `scale_target` is set; predictions are mapped back.
struct MlpModel {
  Matrix w1;                 // hidden x inputs
  std::vector<double> b1;    // hidden
  std::vector<double> w2;    // hidden
  double b2 = 0.0;
  double target_mean = 0.0;
  double target_scale = 1.0;
  MlpConfig config;
  std::size_t epochs_run = 0;
  double final_loss = 0.0;

  std::size_t inputs() const { return w1.cols(); }
  std::size_t hidden() const { return w1.rows(); }
};

MlpModel mlp_init(std::size_t inputs, const MlpConfig& config, std::uint64_t seed);
MlpModel mlp_train(const Matrix& x, std::span<const double> y, const MlpConfig& config,
                   std::uint64_t seed);
double mlp_predict(const MlpModel& model, std::span<const double> x);

// Gradients laid out like the parameters of MlpModel.
struct MlpGradient {
  Matrix w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
};

// Training objective on a batch in the model's (scaled) target units:
// 1/(2n) sum (out - t)^2 + l2/(2n) * sum of squared weights (biases excluded).
double mlp_loss(const MlpModel& model, const Matrix& x, std::span<const double> targets);
double mlp_loss_and_gradient(const MlpModel& model, const Matrix& x,
                             std::span<const double> targets, MlpGradient& grad);

// Flat parameter views for gradient checking: w1 row-major, b1, w2, b2.
std::vector<double> mlp_flatten(const MlpModel& model);
void mlp_unflatten(MlpModel& model, std::span<const double> params);
std::vector<double> mlp_flatten(const MlpGradient& grad);

}  // namespace gazescreen::learn
