#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "gazescreen/core.hpp"
#include "gazescreen/ingest.hpp"

namespace gazescreen::synth {

// Multiplicative shifts applied to ASD participants: a parameter p becomes
// p * (1 + coef * (cars - 30)).
struct SeverityCoupling {
  double p_attend = -0.06;
  double latency_mean = 0.25;
  double fix_dur_bg = 0.10;
};

struct GroupParams {
  double p_attend = 0.75;
  double latency_mean_s = 0.4;
  double latency_sd_s = 0.15;
  double fix_dur_aoi_mean_s = 0.35;
  double fix_dur_bg_mean_s = 0.25;
  double jitter_sd = 0.008;
  double saccade_dur_s = 0.04;
  double offscreen_rate_hz = 0.02;
  SeverityCoupling severity_coupling{0.0, 0.0, 0.0};

  void validate() const;
  GroupParams coupled(int cars) const;
};

GroupParams default_control_params();
GroupParams default_asd_params();

struct VideoSpec {
  std::string video_id;
  double duration_s = 0.0;
  double fps = 30.0;
  int width_px = 1920;
  int height_px = 1080;

  VideoMeta meta() const { return {video_id, duration_s, fps, width_px, height_px}; }
};

// CARS histogram for scores 30..39 used to draw ASD severities.
inline constexpr std::array<int, 10> kCarsHistogram{3, 5, 6, 4, 5, 7, 3, 0, 1, 1};
inline constexpr int kCarsHistogramFirst = 30;

struct CohortSpec {
  std::size_t n_asd = 35;
  std::size_t n_control = 25;
  std::vector<VideoSpec> videos;
  double sample_rate_hz = 60.0;
  double dropout_rate_hz = 0.3;  // short tracker dropouts (blinks), both groups
  // Log-scale sd of per-participant multiplicative variation applied to
  // p_attend, latency and fixation durations.
  double between_subject_sd = 0.15;
  GroupParams asd = default_asd_params();
  GroupParams control = default_control_params();
  std::uint64_t seed = 0;

  static CohortSpec defaults();
  void validate() const;
};

nlohmann::json to_json(const CohortSpec& spec);
// Missing keys keep their default values.
CohortSpec cohort_spec_from_json(const nlohmann::json& j);

// One object on a piecewise-linear path, present in 2-4 occurrences covering
// at least 60% of the frames.
AoiTrack generate_aoi_path(const VideoSpec& video, std::uint64_t seed);

GazeTrace generate_trace(const Participant& participant, const GroupParams& params,
                         const VideoSpec& video, const AoiTrack& aoi, double sample_rate_hz,
                         double dropout_rate_hz, std::uint64_t seed);

// CARS scores for n ASD participants: histogram apportioned by largest
// remainder (exact for n = 35), then shuffled.
std::vector<int> draw_cars_scores(std::size_t n, std::uint64_t seed);

struct CohortSummary {
  std::size_t n_asd = 0;
  std::size_t n_control = 0;
  std::size_t gaze_logs = 0;
  std::vector<std::pair<std::string, double>> video_durations;
};

// Writes manifest.json, aoi/<video>.csv, gaze/<participant>_<video>.csv and
// generator_config.json under out_dir. IoFailure when out_dir is unwritable.
CohortSummary generate_cohort(const CohortSpec& spec, const std::filesystem::path& out_dir,
                              int jobs = 1);

// Seed streams
std::uint64_t aoi_seed(std::uint64_t root, std::size_t video_index);
std::uint64_t trace_seed(std::uint64_t root, std::size_t participant_index,
                         std::size_t video_index);
std::uint64_t participant_seed(std::uint64_t root, std::size_t participant_index);

// Group parameters for one participant: severity coupling for ASD, then
// between-subject variation drawn from participant_seed.
GroupParams participant_params(const CohortSpec& spec, const Participant& p,
                               std::size_t participant_index);
// Participants in manifest order (ASD first) with CARS for ASD only.
std::vector<Participant> cohort_participants(const CohortSpec& spec);

}  // namespace gazescreen::synth
