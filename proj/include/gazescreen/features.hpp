#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gazescreen/core.hpp"
#include "gazescreen/ingest.hpp"

namespace gazescreen {

struct AoiOccurrence {
  std::string object_id;
  std::size_t enter_frame = 0;
  std::size_t exit_frame = 0;  // inclusive
};

// Maximal contiguous annotated spans, ordered by (object_id, enter_frame).
std::vector<AoiOccurrence> find_occurrences(const AoiTrack& aoi);

struct Window {
  double start_s = 0.0;
  double duration_s = 0.0;

  static Window full(const VideoMeta& meta) { return {0.0, meta.duration_s}; }
  void validate(double video_duration_s) const;
};

// Frames whose timestamp f/fps lies in [start_s, start_s + duration_s),
// clipped to the trace length.
struct FrameRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};
FrameRange frames_in(const Window& w, double fps, std::size_t frame_count);

// Feature 1: sqrt of summed per-axis population variance of gaze points.
double feature_std_gaze(const AlignedTrace& aligned, const Window& w);
// Feature 2: population std of frame-to-frame displacement magnitudes over
// pairs that are both present and not separated by a gap flag.
double feature_std_diff(const AlignedTrace& aligned, const Window& w);
// Feature 3: population std of the Manhattan distance to the nearest AOI centre.
double feature_std_manhattan(const AlignedTrace& aligned, const AoiTrack& aoi, const Window& w);
// Feature 4: frame-paired RMS Euclidean distance to the nearest AOI centre.
double feature_rmse_aoi(const AlignedTrace& aligned, const AoiTrack& aoi, const Window& w);
// Feature 5: mean first-look delay (seconds) over AOI occurrences clipped to
// the window. Never-looked occurrences count as their full clipped duration.
double feature_delay(const AlignedTrace& aligned, const AoiTrack& aoi, const Window& w);

// Single-video vector: [F1..F5] in WITH_AOI mode, [F1, F2] in NO_AOI mode.
FeatureVector extract(const AlignedTrace& aligned, const AoiTrack& aoi, const Window& w,
                      FeatureMode mode);

// Concatenates one participant's per-video vectors in `video_order`.
// Throws MissingVideo when any video in the order has no vector.
FeatureVector concat_videos(std::span<const FeatureVector> per_video,
                            std::span<const std::string> video_order);

inline constexpr const char* kFeatureCsvHeader =
    "participant_id,video_id,mode,window_start_s,window_dur_s,f1,f2,f3,f4,f5";
std::string format_feature_row(const FeatureVector& single_video);

}  // namespace gazescreen
