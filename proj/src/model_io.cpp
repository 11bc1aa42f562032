#include "gazescreen/learn/model_io.hpp"

#include "gazescreen/error.hpp"

namespace gazescreen::learn {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", std::vector<double>(m.data().begin(), m.data().end())}};
}

Matrix matrix_from(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.data().size())
    throw Error(ErrorCode::DimensionMismatch, "matrix data length does not match its shape");
  std::copy(data.begin(), data.end(), m.data().begin());
  return m;
}

void expect_kind(const json& j, const char* kind) {
  if (!j.contains("kind") || j.at("kind") != kind)
    throw Error(ErrorCode::InvalidConfig, std::string("expected a '") + kind + "' model");
}

}  // namespace

json to_json(const SvmModel& m) {
  return {{"kind", "svm"},
          {"kernel", {{"type", "polynomial"}, {"degree", m.kernel.degree}, {"gamma", m.kernel.gamma},
                      {"coef0", m.kernel.coef0}}},
          {"C", m.C},
          {"labels", {{"+1", "ASD"}, {"-1", "CONTROL"}}},
          {"bias", m.bias},
          {"dual_coef", m.dual_coef},
          {"support_vectors", matrix_json(m.support_vectors)}};
}

SvmModel svm_from_json(const json& j) {
  expect_kind(j, "svm");
  SvmModel m;
  try {
    m.kernel.degree = j.at("kernel").at("degree").get<int>();
    m.kernel.gamma = j.at("kernel").at("gamma").get<double>();
    m.kernel.coef0 = j.at("kernel").at("coef0").get<double>();
    m.C = j.at("C").get<double>();
    m.bias = j.at("bias").get<double>();
    m.dual_coef = j.at("dual_coef").get<std::vector<double>>();
    m.support_vectors = matrix_from(j.at("support_vectors"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  if (m.kernel.degree != 3) throw Error(ErrorCode::InvalidConfig, "only cubic kernels are supported");
  if (m.dual_coef.size() != m.support_vectors.rows())
    throw Error(ErrorCode::DimensionMismatch, "one dual coefficient per support vector expected");
  return m;
}

json to_json(const MlpModel& m) {
  const auto& c = m.config;
  return {{"kind", "mlp"},
          {"activation", "relu"},
          {"hyperparameters",
           {{"hidden", c.hidden}, {"l2", c.l2}, {"learning_rate", c.learning_rate},
            {"beta1", c.beta1}, {"beta2", c.beta2}, {"epsilon", c.epsilon},
            {"batch_size", c.batch_size}, {"max_epochs", c.max_epochs}, {"tol", c.tol},
            {"n_iter_no_change", c.n_iter_no_change}, {"scale_target", c.scale_target}}},
          {"target_mean", m.target_mean},
          {"target_scale", m.target_scale},
          {"epochs_run", m.epochs_run},
          {"final_loss", m.final_loss},
          {"hidden_weights", matrix_json(m.w1)},
          {"hidden_bias", m.b1},
          {"output_weights", m.w2},
          {"output_bias", m.b2}};
}

MlpModel mlp_from_json(const json& j) {
  expect_kind(j, "mlp");
  MlpModel m;
  try {
    const auto& h = j.at("hyperparameters");
    auto& c = m.config;
    c.hidden = h.at("hidden").get<std::size_t>();
    c.l2 = h.at("l2").get<double>();
    c.learning_rate = h.at("learning_rate").get<double>();
    c.beta1 = h.at("beta1").get<double>();
    c.beta2 = h.at("beta2").get<double>();
    c.epsilon = h.at("epsilon").get<double>();
    c.batch_size = h.at("batch_size").get<std::size_t>();
    c.max_epochs = h.at("max_epochs").get<std::size_t>();
    c.tol = h.at("tol").get<double>();
    c.n_iter_no_change = h.at("n_iter_no_change").get<std::size_t>();
    c.scale_target = h.at("scale_target").get<bool>();
    m.target_mean = j.at("target_mean").get<double>();
    m.target_scale = j.at("target_scale").get<double>();
    m.epochs_run = j.at("epochs_run").get<std::size_t>();
    m.final_loss = j.at("final_loss").get<double>();
    m.w1 = matrix_from(j.at("hidden_weights"));
    m.b1 = j.at("hidden_bias").get<std::vector<double>>();
    m.w2 = j.at("output_weights").get<std::vector<double>>();
    m.b2 = j.at("output_bias").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  if (m.b1.size() != m.w1.rows() || m.w2.size() != m.w1.rows())
    throw Error(ErrorCode::DimensionMismatch, "layer sizes disagree");
  return m;
}

json to_json(const Standardizer& s) {
  return {{"kind", "standardizer"}, {"mean", s.mean()}, {"sd", s.sd()}};
}

Standardizer standardizer_from_json(const json& j) {
  expect_kind(j, "standardizer");
  auto mean = j.at("mean").get<std::vector<double>>();
  auto sd = j.at("sd").get<std::vector<double>>();
  if (mean.size() != sd.size())
    throw Error(ErrorCode::DimensionMismatch, "mean and sd lengths differ");
  return {std::move(mean), std::move(sd)};
}

}  // namespace gazescreen::learn
