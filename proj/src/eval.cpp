#include "gazescreen/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gazescreen/learn/standardizer.hpp"
#include "gazescreen/parallel.hpp"
#include "gazescreen/random.hpp"

namespace gazescreen::eval {

using learn::Matrix;

void CvConfig::validate(std::size_t n_asd, std::size_t n_control) const {
  if (repetitions < 1) throw Error(ErrorCode::InvalidConfig, "repetitions must be >= 1");
  if (folds < 2) throw Error(ErrorCode::InvalidConfig, "folds must be >= 2");
  if (folds > std::min(n_asd, n_control))
    throw Error(ErrorCode::TooFewPerClass,
                "each class needs at least " + std::to_string(folds) + " participants (have " +
                    std::to_string(n_asd) + " ASD, " + std::to_string(n_control) + " CONTROL)");
}

std::vector<std::size_t> stratified_folds(std::span<const Group> groups, std::size_t folds,
                                          std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::InvalidConfig, "folds must be >= 2");
  std::vector<std::size_t> asd, control;
  for (std::size_t i = 0; i < groups.size(); ++i)
    (groups[i] == Group::ASD ? asd : control).push_back(i);
  if (asd.size() < folds || control.size() < folds)
    throw Error(ErrorCode::TooFewPerClass,
                "each class needs at least " + std::to_string(folds) + " participants");
  Rng asd_rng(derive_seed(seed, {0}));
  Rng control_rng(derive_seed(seed, {1}));
  asd_rng.shuffle(std::span<std::size_t>(asd));
  control_rng.shuffle(std::span<std::size_t>(control));

  std::vector<std::size_t> fold_of(groups.size(), 0);
  std::size_t deal = 0;
  for (auto i : asd) fold_of[i] = deal++ % folds;
  for (auto i : control) fold_of[i] = deal++ % folds;
  return fold_of;
}

std::uint64_t fold_seed(std::uint64_t root, std::size_t repetition) {
  return derive_seed(root, {1, repetition});
}
std::uint64_t svm_seed(std::uint64_t root, std::size_t repetition) {
  return derive_seed(root, {2, repetition});
}
std::uint64_t window_seed(std::uint64_t root, std::size_t duration_index, std::size_t repetition) {
  return derive_seed(root, {3, duration_index, repetition});
}
std::uint64_t mlp_seed(std::uint64_t root, std::size_t held_out) {
  return derive_seed(root, {4, held_out});
}

ClassificationSummary summarize(std::vector<FoldResult> folds) {
  ClassificationSummary s;
  s.folds = std::move(folds);
  if (s.folds.empty()) return s;
  double sum = 0.0;
  std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
  for (const auto& f : s.folds) {
    sum += f.accuracy;
    tp += f.true_pos;
    fn += f.false_neg;
    tn += f.true_neg;
    fp += f.false_pos;
    if (!f.converged) ++s.non_converged;
  }
  const double n = static_cast<double>(s.folds.size());
  s.mean_accuracy = sum / n;
  double var = 0.0;
  for (const auto& f : s.folds) var += (f.accuracy - s.mean_accuracy) * (f.accuracy - s.mean_accuracy);
  s.std_accuracy = std::sqrt(var / n);
  s.sensitivity = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  s.specificity = tn + fp > 0 ? static_cast<double>(tn) / static_cast<double>(tn + fp) : 0.0;
  return s;
}

namespace {

void check_rows(std::span<const LabeledFeatures> data) {
  if (data.empty()) throw Error(ErrorCode::MissingFeatures, "no participants");
  const auto d = data.front().values.size();
  for (const auto& row : data) {
    if (row.values.empty())
      throw Error(ErrorCode::MissingFeatures, "participant has no feature vector", row.participant_id);
    if (row.values.size() != d)
      throw Error(ErrorCode::MissingFeatures, "feature vector has the wrong length",
                  row.participant_id);
  }
}

std::vector<Group> groups_of(std::span<const LabeledFeatures> data) {
  std::vector<Group> g;
  for (const auto& row : data) g.push_back(row.group);
  return g;
}

Matrix rows_of(std::span<const LabeledFeatures> data, std::span<const std::size_t> idx) {
  Matrix m(idx.size(), data.front().values.size());
  for (std::size_t k = 0; k < idx.size(); ++k)
    std::copy(data[idx[k]].values.begin(), data[idx[k]].values.end(), m.row(k).begin());
  return m;
}

}  // namespace

std::vector<FoldResult> run_folds(std::span<const LabeledFeatures> data,
                                  std::span<const std::size_t> fold_of, std::size_t folds,
                                  std::size_t repetition, const learn::SvmParams& svm,
                                  std::uint64_t seed) {
  std::vector<FoldResult> out;
  for (std::size_t k = 0; k < folds; ++k) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < data.size(); ++i) (fold_of[i] == k ? test : train).push_back(i);
    const auto scaler = learn::Standardizer::fit(rows_of(data, train));
    const auto x_train = scaler.transform(rows_of(data, train));
    std::vector<int> y_train;
    for (auto i : train) y_train.push_back(label_of(data[i].group));
    const auto fit = learn::svm_train(x_train, y_train, svm, derive_seed(seed, {k}));

    FoldResult r;
    r.repetition = repetition;
    r.fold = k;
    r.n_test = test.size();
    r.converged = fit.converged;
    for (auto i : test) {
      const auto pred = learn::svm_predict(fit.model, scaler.transform(data[i].values));
      const bool asd = data[i].group == Group::ASD;
      if (asd) (pred.label == 1 ? r.true_pos : r.false_neg)++;
      else (pred.label == -1 ? r.true_neg : r.false_pos)++;
    }
    r.accuracy = r.n_test ? static_cast<double>(r.true_pos + r.true_neg) / static_cast<double>(r.n_test)
                          : 0.0;
    out.push_back(r);
  }
  return out;
}

ClassificationSummary run_classification_cv(std::span<const LabeledFeatures> data,
                                            const CvConfig& config) {
  check_rows(data);
  const auto groups = groups_of(data);
  const auto n_asd = static_cast<std::size_t>(std::count(groups.begin(), groups.end(), Group::ASD));
  config.validate(n_asd, groups.size() - n_asd);

  std::vector<std::vector<FoldResult>> per_rep(config.repetitions);
  parallel_for(config.repetitions, config.jobs, [&](std::size_t r) {
    const auto fold_of = stratified_folds(groups, config.folds, fold_seed(config.seed, r));
    per_rep[r] = run_folds(data, fold_of, config.folds, r, config.svm, svm_seed(config.seed, r));
  });
  std::vector<FoldResult> all;
  for (auto& rep : per_rep) all.insert(all.end(), rep.begin(), rep.end());
  return summarize(std::move(all));
}

LoadedDataset load_dataset(const std::filesystem::path& manifest_path, int jobs) {
  return load_dataset(load_manifest(manifest_path), jobs);
}

LoadedDataset load_dataset(DatasetManifest manifest, int jobs) {
  LoadedDataset ds;
  ds.manifest = std::move(manifest);
  const auto& m = ds.manifest;
  const auto nv = m.videos.size(), np = m.participants.size();

  ds.aoi.resize(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    const auto& meta = m.videos[v];
    const auto it = m.aoi_paths.find(meta.video_id);
    if (it == m.aoi_paths.end()) {
      ds.aoi[v] = AoiTrack(meta.video_id, {});
      continue;
    }
    try {
      ds.aoi[v] = parse_aoi_track(it->second, meta);
    } catch (const Error& e) {
      ds.aoi[v] = AoiTrack(meta.video_id, {});
      ds.failures.push_back("video " + meta.video_id + ": " + e.what());
    }
  }

  ds.aligned.assign(np, std::vector<std::optional<AlignedTrace>>(nv));
  std::vector<std::string> errors(np * nv);
  parallel_for(np * nv, jobs, [&](std::size_t k) {
    const auto& p = m.participants[k / nv];
    const auto& meta = m.videos[k % nv];
    const auto it = m.gaze_log_paths.find({p.participant_id, meta.video_id});
    if (it == m.gaze_log_paths.end()) {
      errors[k] = "MissingVideo: no gaze log declared";
      return;
    }
    try {
      auto trace = parse_gaze_log(it->second, meta);
      if (trace.participant_id() != p.participant_id)
        throw Error(ErrorCode::MalformedRow, "log belongs to participant '" + trace.participant_id() + "'",
                    it->second.string());
      ds.aligned[k / nv][k % nv] = align(trace, meta);
    } catch (const Error& e) {
      errors[k] = e.what();
    }
  });
  for (std::size_t k = 0; k < np * nv; ++k) {
    const auto label = m.participants[k / nv].participant_id + "/" + m.videos[k % nv].video_id;
    if (!errors[k].empty()) {
      ds.failures.push_back(label + ": " + errors[k]);
    } else if (ds.aligned[k / nv][k % nv]->valid_fraction() < kWarnValidFrameFraction) {
      ds.quality_warnings.push_back(label + ": valid frame fraction " +
                                    std::to_string(ds.aligned[k / nv][k % nv]->valid_fraction()));
    }
  }
  return ds;
}

std::vector<std::string> selected_videos(const DatasetManifest& manifest,
                                         const std::string& selection) {
  if (selection == "all") return manifest.video_order();
  manifest.video(selection);  // throws for an unknown id
  return {selection};
}

namespace {

std::size_t video_index(const DatasetManifest& m, const std::string& vid) {
  for (std::size_t v = 0; v < m.videos.size(); ++v)
    if (m.videos[v].video_id == vid) return v;
  throw Error(ErrorCode::InvalidConfig, "unknown video", vid);
}

}  // namespace

std::vector<LabeledFeatures> build_features(const LoadedDataset& ds, FeatureMode mode,
                                            std::span<const std::string> videos,
                                            std::span<const std::optional<Window>> windows,
                                            int jobs) {
  const auto& m = ds.manifest;
  std::vector<std::size_t> vidx;
  for (const auto& vid : videos) vidx.push_back(video_index(m, vid));
  std::vector<LabeledFeatures> out(m.participants.size());
  parallel_for(m.participants.size(), jobs, [&](std::size_t p) {
    const auto& part = m.participants[p];
    std::vector<FeatureVector> per_video;
    for (std::size_t k = 0; k < vidx.size(); ++k) {
      const auto& aligned = ds.aligned[p][vidx[k]];
      if (!aligned) continue;  // reported as MissingVideo by concat_videos
      const auto& meta = m.videos[vidx[k]];
      const Window w = (k < windows.size() && windows[k]) ? *windows[k] : Window::full(meta);
      per_video.push_back(extract(*aligned, ds.aoi[vidx[k]], w, mode));
    }
    if (per_video.empty())
      throw Error(ErrorCode::MissingFeatures, "no usable gaze logs", part.participant_id);
    const auto fv = concat_videos(per_video, videos);
    out[p] = {part.participant_id, part.group, fv.values};
  });
  return out;
}

std::vector<DurationPoint> run_duration_simulation(const LoadedDataset& ds,
                                                   const DurationConfig& config) {
  const auto& cv = config.cv;
  const auto videos = selected_videos(ds.manifest, cv.video_selection);
  std::vector<double> video_durations;
  for (const auto& vid : videos) video_durations.push_back(ds.manifest.video(vid).duration_s);
  const double shortest = *std::min_element(video_durations.begin(), video_durations.end());
  for (double d : config.durations) {
    if (!(d > 0.0)) throw Error(ErrorCode::InvalidConfig, "durations must be positive");
    if (d > shortest + 1e-9)
      throw Error(ErrorCode::DurationTooLong,
                  "duration " + std::to_string(d) + " s exceeds the shortest selected video (" +
                      std::to_string(shortest) + " s)");
  }
  std::vector<Group> groups;
  for (const auto& p : ds.manifest.participants) groups.push_back(p.group);
  const auto n_asd = static_cast<std::size_t>(std::count(groups.begin(), groups.end(), Group::ASD));
  cv.validate(n_asd, groups.size() - n_asd);

  std::vector<DurationPoint> curve;
  for (std::size_t di = 0; di < config.durations.size(); ++di) {
    const double d = config.durations[di];
    std::vector<std::vector<FoldResult>> per_rep(cv.repetitions);
    std::vector<std::size_t> retries(cv.repetitions, 0);
    parallel_for(cv.repetitions, cv.jobs, [&](std::size_t r) {
      Rng rng(window_seed(cv.seed, di, r));
      std::vector<LabeledFeatures> rows;
      for (std::size_t attempt = 0;; ++attempt) {
        std::vector<std::optional<Window>> windows;
        for (double dur : video_durations)
          windows.push_back(Window{dur > d ? rng.uniform(0.0, dur - d) : 0.0, d});
        try {
          rows = build_features(ds, cv.mode, videos, windows, 1);
          break;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoAoiInWindow && e.code() != ErrorCode::InsufficientData)
            throw;
          if (attempt >= config.max_window_retries) {
            if (cv.mode == FeatureMode::WITH_AOI)
              throw Error(ErrorCode::AoiNeverInAnyWindow,
                          "no usable " + std::to_string(d) + " s window after " +
                              std::to_string(attempt + 1) + " draws: " + e.what());
            throw;
          }
          ++retries[r];
        }
      }
      const auto fold_of = stratified_folds(groups, cv.folds, fold_seed(cv.seed, r));
      per_rep[r] = run_folds(rows, fold_of, cv.folds, r, cv.svm, svm_seed(cv.seed, r));
    });
    std::vector<FoldResult> all;
    for (auto& rep : per_rep) all.insert(all.end(), rep.begin(), rep.end());
    const auto s = summarize(all);
    DurationPoint pt;
    pt.duration_s = d;
    pt.mean_accuracy = s.mean_accuracy;
    pt.std_accuracy = s.std_accuracy;
    pt.n_runs = cv.repetitions;
    pt.folds = s.folds;
    pt.window_retries = std::accumulate(retries.begin(), retries.end(), std::size_t{0});
    curve.push_back(std::move(pt));
  }
  return curve;
}

SeveritySummary run_severity_loocv(std::span<const ScoredFeatures> data,
                                   const SeverityConfig& config) {
  const auto n = data.size();
  if (n < 3)
    throw Error(ErrorCode::TooFewParticipants,
                "severity estimation needs at least 3 participants with CARS scores, have " +
                    std::to_string(n));
  const auto d = data.front().values.size();
  for (const auto& row : data)
    if (row.values.size() != d || d == 0)
      throw Error(ErrorCode::MissingFeatures, "feature vector has the wrong length", row.participant_id);

  SeveritySummary s;
  s.rows.resize(n);
  parallel_for(n, config.jobs, [&](std::size_t held) {
    Matrix x(n - 1, d);
    std::vector<double> y;
    for (std::size_t i = 0, r = 0; i < n; ++i) {
      if (i == held) continue;
      std::copy(data[i].values.begin(), data[i].values.end(), x.row(r++).begin());
      y.push_back(static_cast<double>(data[i].cars));
    }
    const auto scaler = learn::Standardizer::fit(x);
    const auto model = learn::mlp_train(scaler.transform(x), y, config.mlp, mlp_seed(config.seed, held));
    const double pred = learn::mlp_predict(model, scaler.transform(data[held].values));
    s.rows[held] = {data[held].participant_id, data[held].cars, pred,
                    std::abs(pred - static_cast<double>(data[held].cars))};
  });
  double sum = 0.0;
  for (const auto& r : s.rows) sum += r.abs_err;
  s.mae = sum / static_cast<double>(n);
  double var = 0.0;
  for (const auto& r : s.rows) var += (r.abs_err - s.mae) * (r.abs_err - s.mae);
  s.std_abs_err = std::sqrt(var / static_cast<double>(n));

  std::vector<double> ys;
  for (const auto& r : data) ys.push_back(static_cast<double>(r.cars));
  std::sort(ys.begin(), ys.end());
  const double median = n % 2 ? ys[n / 2] : 0.5 * (ys[n / 2 - 1] + ys[n / 2]);
  double base = 0.0;
  for (double v : ys) base += std::abs(v - median);
  s.constant_baseline_mae = base / static_cast<double>(n);
  return s;
}

std::vector<LabeledFeatures> permute_labels(std::span<const LabeledFeatures> data, std::uint64_t seed) {
  std::vector<Group> groups;
  for (const auto& row : data) groups.push_back(row.group);
  Rng rng(seed);
  rng.shuffle(std::span<Group>(groups));
  std::vector<LabeledFeatures> out(data.begin(), data.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].group = groups[i];
  return out;
}

}  // namespace gazescreen::eval
