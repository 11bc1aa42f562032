#include "gazescreen/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace gazescreen {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::DegenerateBox: return "DegenerateBox";
    case ErrorCode::FrameOutOfRange: return "FrameOutOfRange";
    case ErrorCode::RateMismatch: return "RateMismatch";
    case ErrorCode::MalformedManifest: return "MalformedManifest";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NoAoiInWindow: return "NoAoiInWindow";
    case ErrorCode::MissingVideo: return "MissingVideo";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::TooFewPerClass: return "TooFewPerClass";
    case ErrorCode::MissingFeatures: return "MissingFeatures";
    case ErrorCode::DurationTooLong: return "DurationTooLong";
    case ErrorCode::AoiNeverInAnyWindow: return "AoiNeverInAnyWindow";
    case ErrorCode::TooFewParticipants: return "TooFewParticipants";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message, const std::string& context,
                    std::optional<std::size_t> line) {
  std::string out(to_string(code));
  if (!context.empty()) {
    out += " [" + context;
    if (line) out += ":" + std::to_string(*line);
    out += "]";
  } else if (line) {
    out += " [line " + std::to_string(*line) + "]";
  }
  out += ": " + message;
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string message, std::string context,
             std::optional<std::size_t> line)
    : std::runtime_error(compose(code, message, context, line)),
      code_(code),
      context_(std::move(context)),
      line_(line) {}

std::string_view to_string(Group g) { return g == Group::ASD ? "ASD" : "CONTROL"; }

std::string_view to_string(FeatureMode m) {
  return m == FeatureMode::WITH_AOI ? "WITH_AOI" : "NO_AOI";
}

Group parse_group(std::string_view s) {
  const auto v = lower(s);
  if (v == "asd") return Group::ASD;
  if (v == "control") return Group::CONTROL;
  throw Error(ErrorCode::InvalidConfig, "unknown group '" + std::string(s) + "'");
}

FeatureMode parse_mode(std::string_view s) {
  const auto v = lower(s);
  if (v == "aoi" || v == "with_aoi") return FeatureMode::WITH_AOI;
  if (v == "noaoi" || v == "no_aoi") return FeatureMode::NO_AOI;
  throw Error(ErrorCode::InvalidConfig, "unknown mode '" + std::string(s) + "'");
}

std::size_t VideoMeta::frame_count() const {
  // Guard against duration * fps landing a hair under an integer.
  return static_cast<std::size_t>(std::floor(duration_s * fps + 1e-9));
}

void VideoMeta::validate() const {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s))
    throw Error(ErrorCode::InvalidConfig, "duration_s must be positive", video_id);
  if (!(fps > 0.0) || !std::isfinite(fps))
    throw Error(ErrorCode::InvalidConfig, "fps must be positive", video_id);
  if (width_px <= 0 || height_px <= 0)
    throw Error(ErrorCode::InvalidConfig, "screen size must be positive", video_id);
}

NormalizedPoint normalize_coordinates(double raw_x, double raw_y, const VideoMeta& meta) {
  NormalizedPoint p;
  p.x = raw_x / meta.width_px;
  p.y = raw_y / meta.height_px;
  p.valid = std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0.0 && p.x <= 1.0 &&
            p.y >= 0.0 && p.y <= 1.0;
  return p;
}

std::pair<double, double> denormalize_coordinates(double x, double y, const VideoMeta& meta) {
  return {x * meta.width_px, y * meta.height_px};
}

GazeTrace::GazeTrace(std::string participant_id, std::string video_id,
                     std::vector<GazeSample> samples, double nominal_rate_hz)
    : participant_id_(std::move(participant_id)),
      video_id_(std::move(video_id)),
      samples_(std::move(samples)),
      nominal_rate_hz_(nominal_rate_hz) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (s.wall_ts < 0.0 || s.video_ts < 0.0)
      throw Error(ErrorCode::MalformedRow, "negative timestamp at sample " + std::to_string(i),
                  participant_id_ + "/" + video_id_);
    if (s.valid && !(s.x >= 0.0 && s.x <= 1.0 && s.y >= 0.0 && s.y <= 1.0))
      throw Error(ErrorCode::MalformedRow, "valid sample outside the unit square",
                  participant_id_ + "/" + video_id_);
    if (i > 0) {
      if (!(s.wall_ts > samples_[i - 1].wall_ts))
        throw Error(ErrorCode::NonMonotonicTimestamp,
                    "wall_ts not strictly increasing at sample " + std::to_string(i),
                    participant_id_ + "/" + video_id_);
      if (s.video_ts < samples_[i - 1].video_ts)
        throw Error(ErrorCode::NonMonotonicTimestamp,
                    "video_ts decreasing at sample " + std::to_string(i),
                    participant_id_ + "/" + video_id_);
    }
  }
}

AoiTrack::AoiTrack(std::string video_id, std::vector<AoiBox> boxes)
    : video_id_(std::move(video_id)), boxes_(std::move(boxes)) {
  for (const auto& b : boxes_) {
    if (!(b.x_min >= 0.0 && b.x_min < b.x_max && b.x_max <= 1.0 && b.y_min >= 0.0 &&
          b.y_min < b.y_max && b.y_max <= 1.0))
      throw Error(ErrorCode::DegenerateBox,
                  "box for object '" + b.object_id + "' at frame " + std::to_string(b.frame_index),
                  video_id_);
  }
  std::sort(boxes_.begin(), boxes_.end(), [](const AoiBox& a, const AoiBox& b) {
    return a.frame_index != b.frame_index ? a.frame_index < b.frame_index
                                          : a.object_id < b.object_id;
  });
  for (std::size_t i = 1; i < boxes_.size(); ++i) {
    if (boxes_[i].frame_index == boxes_[i - 1].frame_index &&
        boxes_[i].object_id == boxes_[i - 1].object_id)
      throw Error(ErrorCode::MalformedRow,
                  "duplicate box for object '" + boxes_[i].object_id + "' at frame " +
                      std::to_string(boxes_[i].frame_index),
                  video_id_);
  }
  build_index();
}

void AoiTrack::build_index() {
  if (boxes_.empty()) return;
  frame_index_.assign(boxes_.back().frame_index + 1, {0, 0});
  for (std::size_t i = 0; i < boxes_.size();) {
    std::size_t j = i;
    while (j < boxes_.size() && boxes_[j].frame_index == boxes_[i].frame_index) ++j;
    frame_index_[boxes_[i].frame_index] = {i, j};
    i = j;
  }
}

std::span<const AoiBox> AoiTrack::boxes_at(std::size_t frame) const {
  if (frame >= frame_index_.size()) return {};
  const auto [b, e] = frame_index_[frame];
  return std::span<const AoiBox>(boxes_).subspan(b, e - b);
}

std::vector<std::string> AoiTrack::object_ids() const {
  std::vector<std::string> ids;
  for (const auto& b : boxes_) ids.push_back(b.object_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

void Participant::validate() const {
  if (group == Group::CONTROL && cars)
    throw Error(ErrorCode::MalformedManifest, "control participants carry no CARS score",
                participant_id);
  if (cars && (*cars < 15 || *cars > 60))
    throw Error(ErrorCode::MalformedManifest, "CARS score outside 15..60", participant_id);
}

void FeatureVector::validate() const {
  if (values.size() != features_per_video(mode) * video_ids.size())
    throw Error(ErrorCode::DimensionMismatch, "feature length does not match mode x videos",
                participant_id);
  for (double v : values)
    if (!std::isfinite(v))
      throw Error(ErrorCode::NonFiniteFeature, "non-finite feature value", participant_id);
}

}  // namespace gazescreen
