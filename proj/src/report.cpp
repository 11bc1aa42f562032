#include "gazescreen/report.hpp"

#include <fstream>
#include <sstream>

#include "gazescreen/numfmt.hpp"

namespace gazescreen::report {

using nlohmann::json;

json published_reference() {
  return {
      {"note", "human cohort of 35 ASD + 25 control participants; not reproducible on synthetic data"},
      {"with_aoi_accuracy_per_video",
       {{"car_pursuit", 0.9141}, {"dialog", 0.9344}, {"case_exchange", 0.9434}, {"ball_game", 0.9193}}},
      {"with_aoi_accuracy_concatenated", 0.983},
      {"no_aoi_accuracy_per_video",
       {{"car_pursuit", 0.9116}, {"dialog", 0.9174}, {"case_exchange", 0.8679}, {"ball_game", 0.9091}}},
      {"no_aoi_accuracy_concatenated", 0.933},
      {"with_aoi_accuracy_15s", 0.9575},
      {"no_aoi_accuracy_15s", 0.925},
      {"severity_mae", 2.03},
      {"severity_abs_err_std", 1.37},
  };
}

namespace {

json folds_json(const std::vector<eval::FoldResult>& folds) {
  json arr = json::array();
  for (const auto& f : folds)
    arr.push_back({{"rep", f.repetition}, {"fold", f.fold}, {"accuracy", f.accuracy},
                   {"n_test", f.n_test}, {"tp", f.true_pos}, {"fn", f.false_neg},
                   {"tn", f.true_neg}, {"fp", f.false_pos}, {"converged", f.converged}});
  return arr;
}

}  // namespace

json to_json(const eval::ClassificationSummary& s) {
  return {{"mean_accuracy", s.mean_accuracy},
          {"std_accuracy", s.std_accuracy},
          {"sensitivity", s.sensitivity},
          {"specificity", s.specificity},
          {"n_fold_accuracies", s.folds.size()},
          {"non_converged_trainings", s.non_converged},
          {"folds", folds_json(s.folds)}};
}

json to_json(const std::vector<eval::DurationPoint>& curve) {
  json arr = json::array();
  for (const auto& p : curve)
    arr.push_back({{"duration_s", p.duration_s},
                   {"mean_accuracy", p.mean_accuracy},
                   {"std_accuracy", p.std_accuracy},
                   {"n_runs", p.n_runs},
                   {"window_retries", p.window_retries},
                   {"folds", folds_json(p.folds)}});
  return arr;
}

json to_json(const eval::SeveritySummary& s) {
  json rows = json::array();
  for (const auto& r : s.rows)
    rows.push_back({{"participant_id", r.participant_id}, {"true_cars", r.true_cars},
                    {"predicted_cars", r.predicted}, {"abs_err", r.abs_err}});
  return {{"mae", s.mae},
          {"std_abs_err", s.std_abs_err},
          {"constant_baseline_mae", s.constant_baseline_mae},
          {"participants", rows}};
}

std::string cv_folds_csv(const eval::ClassificationSummary& s) {
  std::string out = "rep,fold,accuracy,n_test\n";
  for (const auto& f : s.folds)
    out += std::to_string(f.repetition) + ',' + std::to_string(f.fold) + ',' +
           format_real(f.accuracy) + ',' + std::to_string(f.n_test) + '\n';
  return out;
}

std::string duration_curve_csv(const std::vector<eval::DurationPoint>& curve) {
  std::string out = "duration_s,mean_acc,std_acc,n_runs\n";
  for (const auto& p : curve)
    out += format_real(p.duration_s) + ',' + format_real(p.mean_accuracy) + ',' +
           format_real(p.std_accuracy) + ',' + std::to_string(p.n_runs) + '\n';
  return out;
}

std::string severity_csv(const eval::SeveritySummary& s) {
  std::string out = "participant_id,true_cars,predicted_cars,abs_err\n";
  for (const auto& r : s.rows)
    out += r.participant_id + ',' + std::to_string(r.true_cars) + ',' + format_real(r.predicted) +
           ',' + format_real(r.abs_err) + '\n';
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open for writing", path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed", path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open file", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace gazescreen::report
