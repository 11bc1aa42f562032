#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gazescreen/error.hpp"
#include "gazescreen/learn/model_io.hpp"
#include "gazescreen/learn/svm.hpp"
#include "support/svm_checks.hpp"

using namespace gazescreen;
using namespace gazescreen::learn;
using testsupport::SvmProblem;

namespace {

// Every fit in this file goes through here so feasibility and KKT are
// verified on all of them.
SvmTrainResult train_and_audit(const SvmProblem& p, const SvmParams& params, std::uint64_t seed = 1) {
  auto r = svm_train(p.x, p.y, params, seed);
  const auto a = testsupport::audit(p, r, params.C);
  CHECK(a.feasible);
  CHECK(a.equality_residual <= 1e-9);
  if (r.converged) CHECK(a.kkt <= params.tol);
  return r;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected gazescreen::Error");
  return ErrorCode::InvalidConfig;
}

}  // namespace

TEST_CASE("cubic polynomial kernel") {
  const std::vector<double> zero{0, 0}, e1{1, 0}, u{1, 2}, v{3, 4};
  CHECK(kernel_poly3(zero, zero, 1.0, 0.0) == 0.0);
  CHECK(kernel_poly3(e1, e1, 1.0, 0.0) == 1.0);
  CHECK(kernel_poly3(u, v, 0.5, 1.0) == doctest::Approx(274.625));
}

TEST_CASE("default gamma is one over d times the mean variance") {
  const auto x = Matrix::from_rows({{0, 0}, {2, 4}});  // variances 1 and 4
  CHECK(default_gamma(x) == doctest::Approx(1.0 / (2 * 2.5)));
  const auto flat = Matrix::from_rows({{1, 1}, {1, 1}});
  CHECK(default_gamma(flat) == doctest::Approx(0.5));
}

TEST_CASE("dual objective matches the projected-gradient oracle on toy problems") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p = testsupport::overlapping_toy(100 + s);
    SvmParams params;
    params.gamma = 0.5;
    params.coef0 = 1.0;
    const auto r = train_and_audit(p, params, s);
    REQUIRE(r.converged);
    const auto ref = oracle::solve_dual_qp(testsupport::oracle_gram(p, 0.5, 1.0), p.y, params.C);
    CHECK_MESSAGE(std::fabs(r.dual_objective - ref.objective) <= 1e-4,
                  "problem " << s << ": smo " << r.dual_objective << " oracle " << ref.objective);
    CHECK(r.dual_objective == doctest::Approx(svm_dual_objective(p.x, p.y, r.alpha, r.model.kernel)));
  }
}

TEST_CASE("separable blobs are classified perfectly") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto p = testsupport::separable_blobs(s);
    for (double coef0 : {0.0, 1.0}) {
      SvmParams params;
      params.coef0 = coef0;
      const auto r = train_and_audit(p, params, s);
      CHECK(r.converged);
      for (std::size_t i = 0; i < p.y.size(); ++i) CHECK(svm_predict(r.model, p.x.row(i)).label == p.y[i]);
      const std::vector<double> inside{2.0, 2.0};
      CHECK(svm_predict(r.model, inside).label == 1);
    }
  }
}

TEST_CASE("contradictory duplicate becomes a bound support vector") {
  auto p = testsupport::separable_blobs(3, 10);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < p.x.rows(); ++i) rows.emplace_back(p.x.row(i).begin(), p.x.row(i).end());
  rows.push_back(rows[0]);
  p.y.push_back(-p.y[0]);
  p.x = Matrix::from_rows(rows);
  SvmParams params;
  params.C = 0.5;
  const auto r = train_and_audit(p, params);
  CHECK(r.model.dims() == 2);
  const double a0 = r.alpha[0], a_dup = r.alpha.back();
  CHECK((a0 == doctest::Approx(params.C) || a_dup == doctest::Approx(params.C)));
}

TEST_CASE("unbound support vectors sit on the margin") {
  const auto p = testsupport::overlapping_toy(7);
  SvmParams params;
  params.gamma = 0.5;
  params.coef0 = 1.0;
  const auto r = train_and_audit(p, params);
  std::size_t free = 0;
  for (std::size_t i = 0; i < p.y.size(); ++i) {
    if (r.alpha[i] > 1e-8 && r.alpha[i] < params.C - 1e-8) {
      ++free;
      CHECK(p.y[i] * r.model.decision_value(p.x.row(i)) == doctest::Approx(1.0).epsilon(params.tol));
    }
  }
  CHECK(free > 0);
}

TEST_CASE("swapping every label negates the decision function") {
  const auto p = testsupport::overlapping_toy(21);
  auto q = p;
  for (auto& y : q.y) y = -y;
  SvmParams params;
  params.gamma = 0.5;
  params.coef0 = 1.0;
  params.tol = 1e-9;
  const auto a = train_and_audit(p, params);
  const auto b = train_and_audit(q, params);
  for (double t : {-1.5, -0.3, 0.0, 0.8}) {
    const std::vector<double> x{t, 0.5 - t};
    CHECK(a.model.decision_value(x) == doctest::Approx(-b.model.decision_value(x)).epsilon(1e-6));
  }
}

TEST_CASE("row order does not change the optimum") {
  const auto p = testsupport::overlapping_toy(33, 24);
  std::vector<std::size_t> order(p.y.size());
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());
  std::rotate(order.begin(), order.begin() + 5, order.end());
  SvmProblem q{p.x.select_rows(order), {}};
  for (auto i : order) q.y.push_back(p.y[i]);
  SvmParams params;
  params.tol = 1e-9;
  const auto a = train_and_audit(p, params);
  const auto b = train_and_audit(q, params, 99);
  CHECK(a.dual_objective == doctest::Approx(b.dual_objective).epsilon(1e-9));
  for (double t : {-1.0, 0.1, 0.9}) {
    const std::vector<double> x{t, t * t};
    CHECK(a.model.decision_value(x) == doctest::Approx(b.model.decision_value(x)).epsilon(1e-5));
  }
}

TEST_CASE("iteration cap returns an unconverged model") {
  const auto p = testsupport::overlapping_toy(5, 200);
  SvmParams params;
  params.max_passes = 1;
  params.tol = 1e-12;
  const auto r = svm_train(p.x, p.y, params, 1);
  CHECK_FALSE(r.converged);
  CHECK(r.model.dims() == 2);
  CHECK(r.iterations == 200);
  params.max_passes = 0;
  CHECK(code_of([&] { svm_train(p.x, p.y, params, 1); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("training input errors") {
  const auto x = Matrix::from_rows({{0, 0}, {1, 1}});
  const std::vector<int> same{1, 1}, mixed{1, -1}, short_y{1};
  CHECK(code_of([&] { svm_train(x, same, {}, 1); }) == ErrorCode::SingleClass);
  CHECK(code_of([&] { svm_train(x, short_y, {}, 1); }) == ErrorCode::DimensionMismatch);
  const auto bad = Matrix::from_rows({{0, std::nan("")}, {1, 1}});
  CHECK(code_of([&] { svm_train(bad, mixed, {}, 1); }) == ErrorCode::NonFiniteFeature);
  const auto r = svm_train(x, mixed, {}, 1);
  const std::vector<double> wrong{1, 2, 3};
  CHECK(code_of([&] { svm_predict(r.model, wrong); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("zero decision value maps to CONTROL") {
  SvmModel m;
  m.support_vectors = Matrix::from_rows({{1.0}});
  m.dual_coef = {0.0};
  m.bias = 0.0;
  const std::vector<double> x{3.0};
  CHECK(svm_predict(m, x).label == -1);
}

TEST_CASE("model JSON round trip keeps predictions bit-exact") {
  const auto p = testsupport::overlapping_toy(8);
  const auto r = train_and_audit(p, {});
  const auto back = svm_from_json(nlohmann::json::parse(to_json(r.model).dump()));
  for (std::size_t i = 0; i < p.y.size(); ++i)
    CHECK(back.decision_value(p.x.row(i)) == r.model.decision_value(p.x.row(i)));
}
