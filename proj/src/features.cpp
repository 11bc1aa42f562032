#include "gazescreen/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "gazescreen/numfmt.hpp"

namespace gazescreen {

std::vector<AoiOccurrence> find_occurrences(const AoiTrack& aoi) {
  std::map<std::string, std::vector<std::size_t>> frames_by_object;
  for (const auto& b : aoi.boxes()) frames_by_object[b.object_id].push_back(b.frame_index);

  std::vector<AoiOccurrence> out;
  for (const auto& [id, frames] : frames_by_object) {
    // frames are ascending because the track is sorted by frame.
    std::size_t start = frames.front();
    for (std::size_t i = 1; i <= frames.size(); ++i) {
      if (i == frames.size() || frames[i] != frames[i - 1] + 1) {
        out.push_back({id, start, frames[i - 1]});
        if (i < frames.size()) start = frames[i];
      }
    }
  }
  return out;
}

void Window::validate(double video_duration_s) const {
  if (!(start_s >= 0.0) || !(duration_s > 0.0) ||
      start_s + duration_s > video_duration_s + 1e-9)
    throw Error(ErrorCode::InvalidConfig, "window [" + format_real(start_s) + ", +" +
                                              format_real(duration_s) +
                                              ") does not fit the video");
}

FrameRange frames_in(const Window& w, double fps, std::size_t frame_count) {
  auto first_at_or_after = [&](double t) {
    const double f = std::ceil(t * fps - 1e-9);
    return f <= 0.0 ? std::size_t{0} : static_cast<std::size_t>(f);
  };
  FrameRange r;
  r.begin = std::min(first_at_or_after(w.start_s), frame_count);
  r.end = std::min(first_at_or_after(w.start_s + w.duration_s), frame_count);
  return r;
}

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments population_moments(const std::vector<double>& v) {
  // Two-pass on values shifted by the first element: constant input gives
  // exactly zero variance.
  Moments m;
  const double shift = v.front();
  double mean_d = 0.0;
  for (double x : v) mean_d += x - shift;
  mean_d /= static_cast<double>(v.size());
  for (double x : v) m.var += (x - shift - mean_d) * (x - shift - mean_d);
  m.var /= static_cast<double>(v.size());
  m.mean = shift + mean_d;
  return m;
}

std::string ctx(const AlignedTrace& a) { return a.participant_id + "/" + a.video_id; }

// Nearest-centre distances over frames that carry both gaze and an AOI.
// Throws NoAoiInWindow when no frame of the window is annotated.
template <typename Dist>
std::vector<double> aoi_distances(const AlignedTrace& aligned, const AoiTrack& aoi,
                                  const Window& w, Dist dist) {
  const auto r = frames_in(w, aligned.fps, aligned.frame_count());
  std::vector<double> out;
  bool any_annotated = false;
  for (std::size_t f = r.begin; f < r.end; ++f) {
    const auto boxes = aoi.boxes_at(f);
    if (boxes.empty()) continue;
    any_annotated = true;
    if (!aligned.frames[f]) continue;
    const auto& p = *aligned.frames[f];
    double best = dist(p, boxes.front());
    for (const auto& b : boxes.subspan(1)) best = std::min(best, dist(p, b));
    out.push_back(best);
  }
  if (!any_annotated) throw Error(ErrorCode::NoAoiInWindow, "no annotated frame in window", ctx(aligned));
  return out;
}

}  // namespace

double feature_std_gaze(const AlignedTrace& aligned, const Window& w) {
  const auto r = frames_in(w, aligned.fps, aligned.frame_count());
  std::vector<double> xs, ys;
  for (std::size_t f = r.begin; f < r.end; ++f) {
    if (!aligned.frames[f]) continue;
    xs.push_back(aligned.frames[f]->x);
    ys.push_back(aligned.frames[f]->y);
  }
  if (xs.size() < 2)
    throw Error(ErrorCode::InsufficientData, "fewer than 2 gaze frames in window", ctx(aligned));
  return std::sqrt(population_moments(xs).var + population_moments(ys).var);
}

double feature_std_diff(const AlignedTrace& aligned, const Window& w) {
  const auto r = frames_in(w, aligned.fps, aligned.frame_count());
  std::vector<double> steps;
  for (std::size_t f = r.begin + 1; f < r.end; ++f) {
    if (!aligned.frames[f] || !aligned.frames[f - 1] || aligned.gap_flags[f]) continue;
    steps.push_back(std::hypot(aligned.frames[f]->x - aligned.frames[f - 1]->x,
                               aligned.frames[f]->y - aligned.frames[f - 1]->y));
  }
  if (steps.size() < 2)
    throw Error(ErrorCode::InsufficientData, "fewer than 2 consecutive gaze pairs in window",
                ctx(aligned));
  return std::sqrt(population_moments(steps).var);
}

double feature_std_manhattan(const AlignedTrace& aligned, const AoiTrack& aoi, const Window& w) {
  const auto d = aoi_distances(aligned, aoi, w, [](const NormalizedPoint& p, const AoiBox& b) {
    return std::abs(p.x - b.center_x()) + std::abs(p.y - b.center_y());
  });
  if (d.size() < 2)
    throw Error(ErrorCode::InsufficientData, "fewer than 2 annotated gaze frames in window",
                ctx(aligned));
  return std::sqrt(population_moments(d).var);
}

double feature_rmse_aoi(const AlignedTrace& aligned, const AoiTrack& aoi, const Window& w) {
  const auto d2 = aoi_distances(aligned, aoi, w, [](const NormalizedPoint& p, const AoiBox& b) {
    const double dx = p.x - b.center_x(), dy = p.y - b.center_y();
    return dx * dx + dy * dy;
  });
  if (d2.empty())
    throw Error(ErrorCode::NoAoiInWindow, "no annotated frame carries gaze", ctx(aligned));
  double sum = 0.0;
  for (double v : d2) sum += v;
  return std::sqrt(sum / static_cast<double>(d2.size()));
}

double feature_delay(const AlignedTrace& aligned, const AoiTrack& aoi, const Window& w) {
  const auto r = frames_in(w, aligned.fps, aligned.frame_count());
  double total_frames = 0.0;
  std::size_t count = 0;
  for (const auto& occ : find_occurrences(aoi)) {
    if (r.end == 0) break;
    const std::size_t enter = std::max(occ.enter_frame, r.begin);
    const std::size_t exit = std::min(occ.exit_frame, r.end - 1);
    if (enter > exit) continue;
    std::size_t delay = exit - enter + 1;  // censored
    for (std::size_t f = enter; f <= exit; ++f) {
      if (f >= aligned.frame_count() || !aligned.frames[f]) continue;
      const auto boxes = aoi.boxes_at(f);
      const auto it = std::find_if(boxes.begin(), boxes.end(),
                                   [&](const AoiBox& b) { return b.object_id == occ.object_id; });
      if (it != boxes.end() && it->contains(aligned.frames[f]->x, aligned.frames[f]->y)) {
        delay = f - enter;
        break;
      }
    }
    total_frames += static_cast<double>(delay);
    ++count;
  }
  if (count == 0)
    throw Error(ErrorCode::NoAoiInWindow, "no AOI occurrence overlaps the window", ctx(aligned));
  return total_frames / static_cast<double>(count) / aligned.fps;
}

FeatureVector extract(const AlignedTrace& aligned, const AoiTrack& aoi, const Window& w,
                      FeatureMode mode) {
  FeatureVector fv;
  fv.participant_id = aligned.participant_id;
  fv.video_ids = {aligned.video_id};
  fv.mode = mode;
  fv.windows = {{w.start_s, w.duration_s}};
  fv.values.push_back(feature_std_gaze(aligned, w));
  fv.values.push_back(feature_std_diff(aligned, w));
  if (mode == FeatureMode::WITH_AOI) {
    if (aoi.empty()) throw Error(ErrorCode::NoAoiInWindow, "AOI track is empty", ctx(aligned));
    fv.values.push_back(feature_std_manhattan(aligned, aoi, w));
    fv.values.push_back(feature_rmse_aoi(aligned, aoi, w));
    fv.values.push_back(feature_delay(aligned, aoi, w));
  }
  fv.validate();
  return fv;
}

FeatureVector concat_videos(std::span<const FeatureVector> per_video,
                            std::span<const std::string> video_order) {
  if (per_video.empty()) throw Error(ErrorCode::MissingVideo, "no feature vectors to concatenate");
  FeatureVector out;
  out.participant_id = per_video.front().participant_id;
  out.mode = per_video.front().mode;
  for (const auto& fv : per_video) {
    if (fv.participant_id != out.participant_id || fv.mode != out.mode)
      throw Error(ErrorCode::InvalidConfig, "vectors mix participants or modes", out.participant_id);
  }
  for (const auto& vid : video_order) {
    const auto it = std::find_if(per_video.begin(), per_video.end(), [&](const FeatureVector& fv) {
      return std::find(fv.video_ids.begin(), fv.video_ids.end(), vid) != fv.video_ids.end();
    });
    if (it == per_video.end())
      throw Error(ErrorCode::MissingVideo, "no features for video '" + vid + "'",
                  out.participant_id);
    if (it->video_ids.size() != 1)
      throw Error(ErrorCode::InvalidConfig, "expected single-video vectors", out.participant_id);
    out.video_ids.push_back(vid);
    out.values.insert(out.values.end(), it->values.begin(), it->values.end());
    if (!it->windows.empty()) out.windows.push_back(it->windows.front());
  }
  out.validate();
  return out;
}

std::string format_feature_row(const FeatureVector& fv) {
  const auto win = fv.windows.empty() ? WindowSpan{} : fv.windows.front();
  std::string row = fv.participant_id + ',' + (fv.video_ids.empty() ? "" : fv.video_ids.front()) +
                    ',' + std::string(to_string(fv.mode)) + ',' + format_real(win.start_s) + ',' +
                    format_real(win.duration_s);
  for (std::size_t k = 0; k < 5; ++k) {
    row += ',';
    if (k < fv.values.size()) row += format_real(fv.values[k]);
  }
  return row + '\n';
}

}  // namespace gazescreen
