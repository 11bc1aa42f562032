#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gazescreen/core.hpp"

namespace gazescreen {

inline constexpr const char* kGazeLogHeader =
    "participant_id,video_id,wall_ts_ms,video_ts_ms,x_px,y_px,valid";
inline constexpr const char* kAoiHeader =
    "video_id,frame_index,object_id,x_min_px,y_min_px,x_max_px,y_max_px";
inline constexpr const char* kManifestFormat = "gazescreen-manifest/1";

// Hard floor on the fraction of frames that must receive a gaze sample.
inline constexpr double kMinValidFrameFraction = 0.10;
// Softer threshold below which reports record a quality warning.
inline constexpr double kWarnValidFrameFraction = 0.50;

GazeTrace parse_gaze_log(const std::filesystem::path& path, const VideoMeta& meta);
AoiTrack parse_aoi_track(const std::filesystem::path& path, const VideoMeta& meta);

// Writers emit exactly the formats the parsers accept.
std::string format_gaze_log(const GazeTrace& trace, const VideoMeta& meta);
std::string format_aoi_track(const AoiTrack& track, const VideoMeta& meta);

struct DatasetManifest {
  std::vector<VideoMeta> videos;  // order defines feature concatenation
  std::vector<Participant> participants;
  std::map<std::pair<std::string, std::string>, std::filesystem::path> gaze_log_paths;
  std::map<std::string, std::filesystem::path> aoi_paths;

  const VideoMeta& video(const std::string& video_id) const;
  const Participant& participant(const std::string& participant_id) const;
  std::vector<std::string> video_order() const;
  void validate() const;
};

// Relative paths in the manifest are resolved against the manifest's folder.
DatasetManifest load_manifest(const std::filesystem::path& path);
// Paths are written relative to `base_dir` when they live under it.
std::string format_manifest(const DatasetManifest& manifest, const std::filesystem::path& base_dir);

struct AlignedTrace {
  std::string participant_id;
  std::string video_id;
  double fps = 0.0;
  std::vector<std::optional<NormalizedPoint>> frames;
  // Wall-clock time of the sample chosen for each present frame.
  std::vector<double> frame_wall_ts;
  std::vector<bool> gap_flags;  // gap_flags[f]: a discontinuity begins at f

  std::size_t frame_count() const { return frames.size(); }
  bool present(std::size_t f) const { return frames[f].has_value(); }
  double valid_fraction() const;
};

// Maps gaze samples to video frames: frame f takes the valid sample whose
// video_ts is nearest f/fps within the half-open window [-1/(2 fps), +1/(2 fps)).
// Ties go to the earlier sample.
//
// Frame f > 0 is gap-flagged when frame f-1 is absent, or when the wall-clock
// spread between the samples of f-1 and f exceeds 2/fps + 0.5 s (playback
// paused in between).
AlignedTrace align(const GazeTrace& trace, const VideoMeta& meta);

}  // namespace gazescreen
