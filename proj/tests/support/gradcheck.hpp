#pragma once

// Central finite differences against mlp_loss_and_gradient.

#include <cmath>
#include <vector>

#include "gazescreen/learn/mlp.hpp"
#include "gazescreen/random.hpp"

namespace testsupport {

struct GradCheck {
  std::size_t parameters = 0;
  double worst_rel = 0.0;
  std::size_t worst_index = 0;
};

// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps exact zeros
// (inactive units) from dividing by zero.
inline GradCheck mlp_gradient_check(std::uint64_t seed, double h = 1e-6, double floor = 1e-8) {
  using namespace gazescreen;
  using namespace gazescreen::learn;
  Rng rng(seed);
  Matrix x(5, 3);
  std::vector<double> t(5);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t d = 0; d < 3; ++d) x(i, d) = rng.normal();
    t[i] = rng.normal();
  }
  MlpConfig cfg;
  cfg.l2 = 0.05;  // large enough that the penalty term matters
  auto model = mlp_init(3, cfg, derive_seed(seed, {1}));
  model.b2 = 0.3;

  MlpGradient grad;
  mlp_loss_and_gradient(model, x, t, grad);
  const auto analytic = mlp_flatten(grad);
  auto params = mlp_flatten(model);

  GradCheck out;
  out.parameters = params.size();
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double keep = params[k];
    params[k] = keep + h;
    mlp_unflatten(model, params);
    const double up = mlp_loss(model, x, t);
    params[k] = keep - h;
    mlp_unflatten(model, params);
    const double down = mlp_loss(model, x, t);
    params[k] = keep;
    const double numeric = (up - down) / (2.0 * h);
    const double rel = std::fabs(analytic[k] - numeric) /
                       std::max({std::fabs(analytic[k]), std::fabs(numeric), floor});
    if (rel > out.worst_rel) {
      out.worst_rel = rel;
      out.worst_index = k;
    }
  }
  mlp_unflatten(model, params);
  return out;
}

}  // namespace testsupport
