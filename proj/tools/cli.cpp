#include "cli.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "json.hpp"

#include "gazescreen/eval.hpp"
#include "gazescreen/features.hpp"
#include "gazescreen/learn/model_io.hpp"
#include "gazescreen/learn/standardizer.hpp"
#include "gazescreen/numfmt.hpp"
#include "gazescreen/parallel.hpp"
#include "gazescreen/random.hpp"
#include "gazescreen/report.hpp"
#include "gazescreen/synth.hpp"

namespace gazescreen::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Everything that determines a run's outputs. `jobs` and `verbosity` only
// affect scheduling and logging, so they are kept out of the echo.
struct RunConfig {
  std::string subcommand;
  std::string spec = "default";
  std::string manifest;
  std::string out;
  std::string mode = "aoi";
  std::string video = "all";
  std::optional<std::uint64_t> seed;
  std::size_t reps = 100;
  std::size_t folds = 3;
  std::vector<double> durations{3, 6, 9, 12, 15, 18};
  bool permute_labels = false;
  learn::SvmParams svm;
  learn::MlpConfig mlp;
  int jobs = 1;
  int verbosity = 0;
};

json echo(const RunConfig& c) {
  json j{{"subcommand", c.subcommand}};
  if (c.subcommand == "synth") {
    j["spec"] = c.spec;
  } else {
    j["manifest"] = c.manifest;
    j["mode"] = c.mode;
  }
  j["out"] = c.out;
  if (c.seed) j["seed"] = *c.seed;
  if (c.subcommand == "evaluate" || c.subcommand == "duration-curve") {
    j["video"] = c.video;
    j["reps"] = c.reps;
    j["folds"] = c.folds;
    j["svm"] = {{"C", c.svm.C}, {"gamma", c.svm.gamma}, {"coef0", c.svm.coef0},
                {"tol", c.svm.tol}, {"max_passes", c.svm.max_passes}, {"degree", 3}};
  }
  if (c.subcommand == "evaluate") j["permute_labels"] = c.permute_labels;
  if (c.subcommand == "duration-curve") j["durations"] = c.durations;
  if (c.subcommand == "severity") {
    j["video"] = c.video;
    const auto& m = c.mlp;
    j["mlp"] = {{"hidden", m.hidden}, {"l2", m.l2}, {"learning_rate", m.learning_rate},
                {"beta1", m.beta1}, {"beta2", m.beta2}, {"epsilon", m.epsilon},
                {"batch_size", m.batch_size}, {"max_epochs", m.max_epochs}, {"tol", m.tol},
                {"n_iter_no_change", m.n_iter_no_change}, {"scale_target", m.scale_target}};
  }
  return j;
}

// Fills options the user did not pass from a config file (a report's
// "run_config" block or a bare object with the same keys).
void apply_config_file(const std::string& path, CLI::App& sub, RunConfig& c) {
  json j;
  try {
    j = json::parse(report::read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what(), path);
  }
  if (j.contains("run_config")) j = j.at("run_config");
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object", path);
  auto unset = [&](const char* flag) {
    try {
      return sub.get_option(flag)->count() == 0;
    } catch (const CLI::OptionNotFound&) {
      return false;
    }
  };
  auto take = [&](const char* key, const char* flag, auto& dst) {
    if (j.contains(key) && unset(flag)) {
      try {
        j.at(key).get_to(dst);
      } catch (const json::exception&) {
        throw Error(ErrorCode::InvalidConfig, std::string("bad value for '") + key + "'", path);
      }
    }
  };
  take("manifest", "--manifest", c.manifest);
  take("out", "--out", c.out);
  take("mode", "--mode", c.mode);
  take("video", "--video", c.video);
  take("reps", "--reps", c.reps);
  take("folds", "--folds", c.folds);
  take("durations", "--durations", c.durations);
  take("permute_labels", "--permute-labels", c.permute_labels);
  if (j.contains("seed") && unset("--seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("svm")) {
    const auto& s = j.at("svm");
    if (s.contains("C") && unset("--C")) c.svm.C = s.at("C").get<double>();
    if (s.contains("gamma") && unset("--gamma")) c.svm.gamma = s.at("gamma").get<double>();
    if (s.contains("coef0") && unset("--coef0")) c.svm.coef0 = s.at("coef0").get<double>();
    if (s.contains("tol") && unset("--tol")) c.svm.tol = s.at("tol").get<double>();
    if (s.contains("max_passes") && unset("--max-passes"))
      c.svm.max_passes = s.at("max_passes").get<std::size_t>();
  }
  if (j.contains("mlp")) {
    const auto& m = j.at("mlp");
    if (m.contains("hidden") && unset("--mlp-hidden")) c.mlp.hidden = m.at("hidden").get<std::size_t>();
    if (m.contains("l2") && unset("--mlp-l2")) c.mlp.l2 = m.at("l2").get<double>();
    if (m.contains("learning_rate") && unset("--mlp-lr"))
      c.mlp.learning_rate = m.at("learning_rate").get<double>();
    if (m.contains("max_epochs") && unset("--mlp-epochs"))
      c.mlp.max_epochs = m.at("max_epochs").get<std::size_t>();
    if (m.contains("batch_size") && unset("--mlp-batch"))
      c.mlp.batch_size = m.at("batch_size").get<std::size_t>();
    if (m.contains("scale_target") && unset("--mlp-scale-target"))
      c.mlp.scale_target = m.at("scale_target").get<bool>();
    m.at("beta1").get_to(c.mlp.beta1);
    m.at("beta2").get_to(c.mlp.beta2);
    m.at("epsilon").get_to(c.mlp.epsilon);
    m.at("tol").get_to(c.mlp.tol);
    m.at("n_iter_no_change").get_to(c.mlp.n_iter_no_change);
  }
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::MalformedManifest:
    case ErrorCode::DurationTooLong:
    case ErrorCode::TooFewParticipants:
    case ErrorCode::TooFewPerClass:
      return kExitConfig;
    case ErrorCode::IoFailure:
      return kExitIo;
    default:
      return kExitPipeline;
  }
}

fs::path prepare_out_dir(const std::string& out) {
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "--out is required");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out))
    throw Error(ErrorCode::IoFailure, "cannot create output directory", out);
  return fs::path(out);
}

std::uint64_t require_seed(const RunConfig& c) {
  if (!c.seed) throw Error(ErrorCode::InvalidConfig, "--seed is required; runs are never seeded from the clock");
  return *c.seed;
}

// Loads the dataset and fails with the full list of broken pairs.
eval::LoadedDataset load_or_fail(const RunConfig& c, std::ostream& err) {
  auto ds = eval::load_dataset(fs::path(c.manifest), c.jobs);
  if (!ds.failures.empty()) {
    for (const auto& f : ds.failures) err << "failed: " << f << "\n";
    throw Error(ErrorCode::MissingFeatures,
                std::to_string(ds.failures.size()) + " participant/video pairs failed to load", c.manifest);
  }
  if (c.verbosity > 0)
    for (const auto& w : ds.quality_warnings) err << "warning: " << w << "\n";
  return ds;
}

json report_header(const RunConfig& c, const eval::LoadedDataset& ds) {
  json j;
  j["run_config"] = echo(c);
  j["dataset"] = {{"participants", ds.manifest.participants.size()},
                  {"videos", ds.manifest.video_order()},
                  {"quality_warnings", ds.quality_warnings}};
  j["published_reference"] = report::published_reference();
  return j;
}

void write_json(const fs::path& p, const json& j) { report::write_text(p, j.dump(2) + "\n"); }

int cmd_synth(const RunConfig& c, std::ostream& out) {
  const auto seed = require_seed(c);
  synth::CohortSpec spec;
  if (c.spec == "default") {
    spec = synth::CohortSpec::defaults();
  } else {
    json j;
    try {
      j = json::parse(report::read_text(c.spec));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidConfig, e.what(), c.spec);
    }
    spec = synth::cohort_spec_from_json(j);
  }
  spec.seed = seed;
  const auto dir = prepare_out_dir(c.out);
  const auto summary = synth::generate_cohort(spec, dir, c.jobs);
  out << "participants: " << summary.n_asd << " ASD, " << summary.n_control << " CONTROL\n";
  out << "gaze logs: " << summary.gaze_logs << "\n";
  for (const auto& [vid, dur] : summary.video_durations)
    out << "video " << vid << ": " << format_real(dur) << " s\n";
  return kExitOk;
}

int cmd_features(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto mode = parse_mode(c.mode);
  const auto dir = prepare_out_dir(c.out);
  const auto ds = eval::load_dataset(fs::path(c.manifest), c.jobs);
  std::vector<std::string> failures = ds.failures;
  const auto& m = ds.manifest;
  const auto nv = m.videos.size();
  std::vector<std::string> rows(m.participants.size() * nv), errors(rows.size());
  parallel_for(rows.size(), c.jobs, [&](std::size_t k) {
    const auto& aligned = ds.aligned[k / nv][k % nv];
    if (!aligned) return;  // already listed by the loader
    try {
      rows[k] = format_feature_row(
          extract(*aligned, ds.aoi[k % nv], Window::full(m.videos[k % nv]), mode));
    } catch (const Error& e) {
      errors[k] = m.participants[k / nv].participant_id + "/" + m.videos[k % nv].video_id + ": " + e.what();
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) failures.push_back(e);
  if (!failures.empty()) {
    for (const auto& f : failures) err << "failed: " << f << "\n";
    err << failures.size() << " participant/video pairs failed\n";
    return kExitPipeline;
  }
  std::string csv = kFeatureCsvHeader;
  csv += '\n';
  for (const auto& r : rows) csv += r;
  report::write_text(dir / "features.csv", csv);
  out << "wrote " << rows.size() << " rows (" << features_per_video(mode) << " features, "
      << to_string(mode) << ") to " << (dir / "features.csv").string() << "\n";
  return kExitOk;
}

eval::CvConfig cv_config(const RunConfig& c) {
  eval::CvConfig cv;
  cv.folds = c.folds;
  cv.repetitions = c.reps;
  cv.seed = require_seed(c);
  cv.mode = parse_mode(c.mode);
  cv.video_selection = c.video;
  cv.svm = c.svm;
  cv.jobs = c.jobs;
  return cv;
}

json derived_seeds(std::uint64_t root, std::size_t reps) {
  std::vector<std::uint64_t> folds, svms;
  for (std::size_t r = 0; r < reps; ++r) {
    folds.push_back(eval::fold_seed(root, r));
    svms.push_back(eval::svm_seed(root, r));
  }
  return {{"fold_seeds", folds}, {"svm_seeds", svms}};
}

int cmd_evaluate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto cv = cv_config(c);
  const auto dir = prepare_out_dir(c.out);
  const auto ds = load_or_fail(c, err);
  const auto videos = eval::selected_videos(ds.manifest, cv.video_selection);
  auto rows = eval::build_features(ds, cv.mode, videos, {}, c.jobs);
  const std::uint64_t permute_seed = derive_seed(cv.seed, {5});
  if (c.permute_labels) rows = eval::permute_labels(rows, permute_seed);
  const auto summary = eval::run_classification_cv(rows, cv);

  auto j = report_header(c, ds);
  j["run_config"]["feature_layout"] = {{"per_video", features_per_video(cv.mode)},
                                       {"videos", videos},
                                       {"dims", rows.front().values.size()}};
  j["derived_seeds"] = derived_seeds(cv.seed, cv.repetitions);
  if (c.permute_labels) j["derived_seeds"]["permute_seed"] = permute_seed;
  j["classification"] = report::to_json(summary);

  // Audit model fitted on every participant.
  learn::Matrix x(rows.size(), rows.front().values.size());
  std::vector<int> y;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].values.begin(), rows[i].values.end(), x.row(i).begin());
    y.push_back(label_of(rows[i].group));
  }
  const auto scaler = learn::Standardizer::fit(x);
  const auto fit = learn::svm_train(scaler.transform(x), y, cv.svm, derive_seed(cv.seed, {6}));
  write_json(dir / "model.json", {{"standardizer", learn::to_json(scaler)},
                                  {"model", learn::to_json(fit.model)},
                                  {"converged", fit.converged},
                                  {"max_kkt_violation", fit.max_kkt_violation}});

  write_json(dir / "report.json", j);
  report::write_text(dir / "cv_folds.csv", report::cv_folds_csv(summary));
  out << "mean accuracy " << format_real(summary.mean_accuracy) << " (std "
      << format_real(summary.std_accuracy) << ") over " << summary.folds.size() << " folds\n";
  return kExitOk;
}

int cmd_duration_curve(const RunConfig& c, std::ostream& out, std::ostream& err) {
  eval::DurationConfig dc;
  dc.cv = cv_config(c);
  dc.durations = c.durations;
  const auto dir = prepare_out_dir(c.out);
  const auto ds = load_or_fail(c, err);
  const auto curve = eval::run_duration_simulation(ds, dc);

  auto j = report_header(c, ds);
  auto seeds = derived_seeds(dc.cv.seed, dc.cv.repetitions);
  json windows = json::array();
  for (std::size_t d = 0; d < dc.durations.size(); ++d) {
    std::vector<std::uint64_t> w;
    for (std::size_t r = 0; r < dc.cv.repetitions; ++r) w.push_back(eval::window_seed(dc.cv.seed, d, r));
    windows.push_back(w);
  }
  seeds["window_seeds"] = windows;
  j["derived_seeds"] = seeds;
  j["duration_curve"] = report::to_json(curve);
  write_json(dir / "report.json", j);
  report::write_text(dir / "duration_curve.csv", report::duration_curve_csv(curve));
  for (const auto& p : curve)
    out << format_real(p.duration_s) << " s: mean accuracy " << format_real(p.mean_accuracy) << "\n";
  return kExitOk;
}

int cmd_severity(const RunConfig& c, std::ostream& out, std::ostream& err) {
  eval::SeverityConfig sc;
  sc.seed = require_seed(c);
  sc.mode = parse_mode(c.mode);
  sc.video_selection = c.video;
  sc.mlp = c.mlp;
  sc.jobs = c.jobs;
  const auto dir = prepare_out_dir(c.out);
  const auto ds = load_or_fail(c, err);
  const auto videos = eval::selected_videos(ds.manifest, sc.video_selection);
  const auto rows = eval::build_features(ds, sc.mode, videos, {}, c.jobs);
  std::vector<eval::ScoredFeatures> scored;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& p = ds.manifest.participants[i];
    if (p.group == Group::ASD && p.cars) scored.push_back({p.participant_id, *p.cars, rows[i].values});
  }
  const auto s = eval::run_severity_loocv(scored, sc);

  auto j = report_header(c, ds);
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < scored.size(); ++i) seeds.push_back(eval::mlp_seed(sc.seed, i));
  j["derived_seeds"] = {{"mlp_seeds", seeds}};
  j["severity"] = report::to_json(s);
  write_json(dir / "report.json", j);
  report::write_text(dir / "severity_loocv.csv", report::severity_csv(s));
  out << "MAE " << format_real(s.mae) << " +/- " << format_real(s.std_abs_err) << " over "
      << scored.size() << " participants (constant-median baseline "
      << format_real(s.constant_baseline_mae) << ")\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaze-based screening toolkit: synthetic cohorts, features, classification and severity experiments"};
  app.require_subcommand(1);
  RunConfig c;
  std::string config_file;

  auto add_common = [&](CLI::App* sub, bool needs_manifest) {
    if (needs_manifest) {
      sub->add_option("--manifest", c.manifest, "dataset manifest (JSON)");
      sub->add_option("--mode", c.mode, "aoi | noaoi")->capture_default_str();
    }
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--jobs", c.jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_flag("-v,--verbose", c.verbosity, "print data-quality warnings");
  };
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", c.seed, "root seed (required)"); };
  auto add_svm = [&](CLI::App* sub) {
    sub->add_option("--video", c.video, "video id or 'all' (concatenated)")->capture_default_str();
    sub->add_option("--reps", c.reps, "cross-validation repetitions")->capture_default_str();
    sub->add_option("--folds", c.folds, "folds per repetition")->capture_default_str();
    sub->add_option("--C", c.svm.C, "SVM box constraint")->capture_default_str();
    sub->add_option("--gamma", c.svm.gamma, "kernel scale; <= 0 uses 1/(d * mean variance)")->capture_default_str();
    sub->add_option("--coef0", c.svm.coef0, "kernel offset")->capture_default_str();
    sub->add_option("--tol", c.svm.tol, "SMO KKT tolerance")->capture_default_str();
    sub->add_option("--max-passes", c.svm.max_passes, "SMO sweep cap")->capture_default_str();
    sub->add_option("--config", config_file, "take unset options from a report or config JSON");
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
  synth->add_option("--spec", c.spec, "'default' or a cohort spec JSON file")->capture_default_str();
  add_seed(synth);
  add_common(synth, false);

  auto* features = app.add_subcommand("features", "export per-video feature rows");
  add_common(features, true);

  auto* evaluate = app.add_subcommand("evaluate", "repeated stratified k-fold classification");
  add_common(evaluate, true);
  add_seed(evaluate);
  add_svm(evaluate);
  evaluate->add_flag("--permute-labels", c.permute_labels, "null experiment with shuffled labels");

  auto* duration = app.add_subcommand("duration-curve", "accuracy versus observed video duration");
  add_common(duration, true);
  add_seed(duration);
  add_svm(duration);
  duration->add_option("--durations", c.durations, "window lengths in seconds")->delimiter(',');

  auto* severity = app.add_subcommand("severity", "leave-one-out CARS regression");
  add_common(severity, true);
  add_seed(severity);
  severity->add_option("--video", c.video, "video id or 'all' (concatenated)")->capture_default_str();
  severity->add_option("--mlp-hidden", c.mlp.hidden)->capture_default_str();
  severity->add_option("--mlp-l2", c.mlp.l2)->capture_default_str();
  severity->add_option("--mlp-lr", c.mlp.learning_rate)->capture_default_str();
  severity->add_option("--mlp-epochs", c.mlp.max_epochs)->capture_default_str();
  severity->add_option("--mlp-batch", c.mlp.batch_size)->capture_default_str();
  severity->add_option("--mlp-scale-target", c.mlp.scale_target)->capture_default_str();
  severity->add_option("--config", config_file, "take unset options from a report or config JSON");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    c.subcommand = sub->get_name();
    if (!config_file.empty()) apply_config_file(config_file, *sub, c);
    if (c.subcommand != "synth" && c.manifest.empty())
      throw Error(ErrorCode::InvalidConfig, "--manifest is required");
    if (c.subcommand == "synth") return cmd_synth(c, out);
    if (c.subcommand == "features") return cmd_features(c, out, err);
    if (c.subcommand == "evaluate") return cmd_evaluate(c, out, err);
    if (c.subcommand == "duration-curve") return cmd_duration_curve(c, out, err);
    return cmd_severity(c, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
}

}  // namespace gazescreen::cli
