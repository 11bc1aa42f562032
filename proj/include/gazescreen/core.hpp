#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gazescreen/error.hpp"

namespace gazescreen {

enum class Group { ASD, CONTROL };
enum class FeatureMode { WITH_AOI, NO_AOI };

std::string_view to_string(Group g);
std::string_view to_string(FeatureMode m);
Group parse_group(std::string_view s);
// Accepts "aoi"/"with_aoi" and "noaoi"/"no_aoi" (case-insensitive).
FeatureMode parse_mode(std::string_view s);

// Number of feature values contributed per video.
constexpr std::size_t features_per_video(FeatureMode m) {
  return m == FeatureMode::WITH_AOI ? 5 : 2;
}

// Class label used by the classifier: +1 = ASD, -1 = CONTROL.
constexpr int label_of(Group g) { return g == Group::ASD ? +1 : -1; }

struct GazeSample {
  double wall_ts = 0.0;   // ms since session start
  double video_ts = 0.0;  // ms of playback time
  double x = 0.0;         // normalized [0,1]
  double y = 0.0;
  bool valid = false;
};

struct VideoMeta {
  std::string video_id;
  double duration_s = 0.0;
  double fps = 0.0;
  int width_px = 0;
  int height_px = 0;

  std::size_t frame_count() const;
  void validate() const;
};

struct NormalizedPoint {
  double x = 0.0;
  double y = 0.0;
  bool valid = false;
};

// Pixel -> normalized coordinates. Points outside [0,1]^2 come back with
// valid = false; this is a flag, never an error.
NormalizedPoint normalize_coordinates(double raw_x, double raw_y, const VideoMeta& meta);
std::pair<double, double> denormalize_coordinates(double x, double y, const VideoMeta& meta);

// Immutable after construction. Rejects non-increasing wall_ts and
// decreasing video_ts.
class GazeTrace {
 public:
  GazeTrace(std::string participant_id, std::string video_id, std::vector<GazeSample> samples,
            double nominal_rate_hz = 60.0);

  const std::string& participant_id() const { return participant_id_; }
  const std::string& video_id() const { return video_id_; }
  std::span<const GazeSample> samples() const { return samples_; }
  double nominal_rate_hz() const { return nominal_rate_hz_; }

 private:
  std::string participant_id_;
  std::string video_id_;
  std::vector<GazeSample> samples_;
  double nominal_rate_hz_;
};

struct AoiBox {
  std::string object_id;
  std::size_t frame_index = 0;
  double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }
  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
};

// Boxes kept sorted by (frame_index, object_id) with at most one box per
// pair. Construction sorts and validates.
class AoiTrack {
 public:
  AoiTrack() = default;
  AoiTrack(std::string video_id, std::vector<AoiBox> boxes);

  const std::string& video_id() const { return video_id_; }
  std::span<const AoiBox> boxes() const { return boxes_; }
  bool empty() const { return boxes_.empty(); }

  // Boxes annotated on one frame; empty span when the frame has none.
  std::span<const AoiBox> boxes_at(std::size_t frame) const;
  // Distinct object ids, sorted.
  std::vector<std::string> object_ids() const;

 private:
  void build_index();

  std::string video_id_;
  std::vector<AoiBox> boxes_;
  // frame -> [begin, end) into boxes_
  std::vector<std::pair<std::size_t, std::size_t>> frame_index_;
};

struct Participant {
  std::string participant_id;
  Group group = Group::CONTROL;
  std::optional<int> cars;

  void validate() const;
};

struct WindowSpan {
  double start_s = 0.0;
  double duration_s = 0.0;
};

struct FeatureVector {
  std::string participant_id;
  std::vector<std::string> video_ids;
  FeatureMode mode = FeatureMode::WITH_AOI;
  std::vector<double> values;
  // One entry per video when produced from a sub-window of the video.
  std::vector<WindowSpan> windows;

  void validate() const;
};

}  // namespace gazescreen
