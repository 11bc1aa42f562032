#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazescreen/core.hpp"
#include "gazescreen/features.hpp"
#include "gazescreen/ingest.hpp"
#include "gazescreen/learn/mlp.hpp"
#include "gazescreen/learn/svm.hpp"

namespace gazescreen::eval {

// Per-participant classification input.
struct LabeledFeatures {
  std::string participant_id;
  Group group = Group::CONTROL;
  std::vector<double> values;
};

struct CvConfig {
  std::size_t folds = 3;
  std::size_t repetitions = 100;
  std::uint64_t seed = 0;
  FeatureMode mode = FeatureMode::WITH_AOI;
  std::string video_selection = "all";  // a video id or "all" (concatenated)
  learn::SvmParams svm;
  int jobs = 1;

  void validate(std::size_t n_asd, std::size_t n_control) const;
};

// Fold index per participant. Each class is shuffled with its own seeded stream
// and the classes are dealt round-robin into folds with one running counter
// (ASD first), so fold sizes also stay balanced.
std::vector<std::size_t> stratified_folds(std::span<const Group> groups, std::size_t folds,
                                          std::uint64_t seed);

struct FoldResult {
  std::size_t repetition = 0;
  std::size_t fold = 0;
  double accuracy = 0.0;
  std::size_t n_test = 0;
  std::size_t true_pos = 0, false_neg = 0, true_neg = 0, false_pos = 0;
  bool converged = true;
};

struct ClassificationSummary {
  std::vector<FoldResult> folds;  // ordered by (repetition, fold)
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population std over fold accuracies
  double sensitivity = 0.0;   // pooled over all folds
  double specificity = 0.0;
  std::size_t non_converged = 0;
};

ClassificationSummary summarize(std::vector<FoldResult> folds);

// One repetition of k-fold CV with a given fold assignment. Standardizer and
// SVM are fit on the training folds only.
std::vector<FoldResult> run_folds(std::span<const LabeledFeatures> data,
                                  std::span<const std::size_t> fold_of, std::size_t folds,
                                  std::size_t repetition, const learn::SvmParams& svm,
                                  std::uint64_t svm_seed);

// Seeds used by repetition r.
std::uint64_t fold_seed(std::uint64_t root, std::size_t repetition);
std::uint64_t svm_seed(std::uint64_t root, std::size_t repetition);

ClassificationSummary run_classification_cv(std::span<const LabeledFeatures> data,
                                            const CvConfig& config);

// Feature table for a whole dataset: aligned traces and AOI tracks loaded once.
struct LoadedDataset {
  DatasetManifest manifest;
  std::vector<AoiTrack> aoi;                    // by manifest video order
  std::vector<std::vector<std::optional<AlignedTrace>>> aligned;  // [participant][video]
  std::vector<std::string> quality_warnings;

  // Pairs that failed to load, as "participant/video: message".
  std::vector<std::string> failures;
};

// Loads and aligns every (participant, video) log. Parse failures are
// collected in `failures` rather than thrown.
LoadedDataset load_dataset(const std::filesystem::path& manifest_path, int jobs = 1);
LoadedDataset load_dataset(DatasetManifest manifest, int jobs = 1);

std::vector<std::string> selected_videos(const DatasetManifest& manifest,
                                         const std::string& selection);

// Feature rows on given windows (one per selected video, nullopt = full video).
std::vector<LabeledFeatures> build_features(const LoadedDataset& ds, FeatureMode mode,
                                            std::span<const std::string> videos,
                                            std::span<const std::optional<Window>> windows,
                                            int jobs = 1);

struct DurationPoint {
  double duration_s = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::size_t n_runs = 0;  // repetitions
  std::vector<FoldResult> folds;
  std::size_t window_retries = 0;
};

struct DurationConfig {
  CvConfig cv;
  std::vector<double> durations{3, 6, 9, 12, 15, 18};
  std::size_t max_window_retries = 100;
};

std::uint64_t window_seed(std::uint64_t root, std::size_t duration_index, std::size_t repetition);

std::vector<DurationPoint> run_duration_simulation(const LoadedDataset& ds,
                                                   const DurationConfig& config);

struct SeverityRow {
  std::string participant_id;
  int true_cars = 0;
  double predicted = 0.0;
  double abs_err = 0.0;
};

struct SeveritySummary {
  std::vector<SeverityRow> rows;
  double mae = 0.0;
  double std_abs_err = 0.0;
  double constant_baseline_mae = 0.0;  // mean |y - median(y)|
};

struct SeverityConfig {
  std::uint64_t seed = 0;
  FeatureMode mode = FeatureMode::WITH_AOI;
  std::string video_selection = "all";
  learn::MlpConfig mlp;
  int jobs = 1;
};

struct ScoredFeatures {
  std::string participant_id;
  int cars = 0;
  std::vector<double> values;
};

std::uint64_t mlp_seed(std::uint64_t root, std::size_t held_out);

SeveritySummary run_severity_loocv(std::span<const ScoredFeatures> data, const SeverityConfig& config);

// Labels shuffled (seeded) across participants for the null experiment.
std::vector<LabeledFeatures> permute_labels(std::span<const LabeledFeatures> data, std::uint64_t seed);

}  // namespace gazescreen::eval
