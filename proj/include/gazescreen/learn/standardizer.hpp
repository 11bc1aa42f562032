#pragma once

#include <span>
#include <vector>

#include "gazescreen/learn/matrix.hpp"

namespace gazescreen::learn {

// Per-dimension z-scoring with population statistics. Dimensions with zero
// variance on the training data map to 0.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> sd)
      : mean_(std::move(mean)), sd_(std::move(sd)) {}

  static Standardizer fit(const Matrix& x);

  Matrix transform(const Matrix& x) const;
  std::vector<double> transform(std::span<const double> row) const;

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& sd() const { return sd_; }
  std::size_t dims() const { return mean_.size(); }

 private:
  std::vector<double> mean_;
  std::vector<double> sd_;
};

}  // namespace gazescreen::learn
