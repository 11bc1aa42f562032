#include "gazescreen/learn/standardizer.hpp"

#include <cmath>

#include "gazescreen/error.hpp"

namespace gazescreen::learn {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols())
      throw Error(ErrorCode::DimensionMismatch, "ragged rows");
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const {
  Matrix out(idx.size(), cols_);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto src = row(idx[k]);
    std::copy(src.begin(), src.end(), out.row(k).begin());
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Standardizer Standardizer::fit(const Matrix& x) {
  const auto d = x.cols();
  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  if (x.rows() == 0) throw Error(ErrorCode::InsufficientData, "cannot fit a standardizer on no rows");
  const double n = static_cast<double>(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < d; ++c) mean[c] += x(r, c);
  for (auto& m : mean) m /= n;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < d; ++c) sd[c] += (x(r, c) - mean[c]) * (x(r, c) - mean[c]);
  for (auto& s : sd) s = std::sqrt(s / n);
  return {std::move(mean), std::move(sd)};
}

std::vector<double> Standardizer::transform(std::span<const double> row) const {
  if (row.size() != dims())
    throw Error(ErrorCode::DimensionMismatch, "row has " + std::to_string(row.size()) +
                                                  " values, standardizer expects " +
                                                  std::to_string(dims()));
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c)
    out[c] = sd_[c] > 0.0 ? (row[c] - mean_[c]) / sd_[c] : 0.0;
  return out;
}

Matrix Standardizer::transform(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto z = transform(x.row(r));
    std::copy(z.begin(), z.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace gazescreen::learn
