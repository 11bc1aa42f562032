#pragma once

#include "json.hpp"

#include "gazescreen/learn/mlp.hpp"
#include "gazescreen/learn/standardizer.hpp"
#include "gazescreen/learn/svm.hpp"

namespace gazescreen::learn {

// Self-describing JSON: {"kind": ..., hyperparameters, row-major arrays}.
nlohmann::json to_json(const SvmModel& m);
nlohmann::json to_json(const MlpModel& m);
nlohmann::json to_json(const Standardizer& s);
SvmModel svm_from_json(const nlohmann::json& j);
MlpModel mlp_from_json(const nlohmann::json& j);
Standardizer standardizer_from_json(const nlohmann::json& j);

}  // namespace gazescreen::learn
