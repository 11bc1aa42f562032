#pragma once

// Brute-force reference for the five gaze features. Deliberately shares no
// code with the library: variances come from the all-pairs identity
// var = sum_ij (a_i - a_j)^2 / (2 n^2), occurrences are rediscovered by
// scanning every frame, and windows are tested frame by frame.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gazescreen/error.hpp"
#include "gazescreen/features.hpp"

namespace oracle {

enum class Outcome { Value, InsufficientData, NoAoiInWindow };

struct Result {
  Outcome outcome = Outcome::Value;
  double value = 0.0;
};

inline double pairwise_variance(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  long double acc = 0.0L;
  for (double a : v)
    for (double b : v) acc += static_cast<long double>(a - b) * (a - b);
  return static_cast<double>(acc / (2.0L * n * n));
}

inline bool in_window(std::size_t f, const gazescreen::Window& w, double fps) {
  const double t = static_cast<double>(f);
  return t + 1e-9 >= w.start_s * fps && t + 1e-9 < (w.start_s + w.duration_s) * fps;
}

inline std::vector<std::size_t> window_frames(const gazescreen::AlignedTrace& a,
                                              const gazescreen::Window& w) {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < a.frames.size(); ++f)
    if (in_window(f, w, a.fps)) out.push_back(f);
  return out;
}

inline std::vector<gazescreen::AoiBox> boxes_on(const gazescreen::AoiTrack& aoi, std::size_t f) {
  std::vector<gazescreen::AoiBox> out;
  for (const auto& b : aoi.boxes())
    if (b.frame_index == f) out.push_back(b);
  return out;
}

inline Result std_gaze(const gazescreen::AlignedTrace& a, const gazescreen::Window& w) {
  std::vector<double> xs, ys;
  for (auto f : window_frames(a, w))
    if (a.frames[f]) {
      xs.push_back(a.frames[f]->x);
      ys.push_back(a.frames[f]->y);
    }
  if (xs.size() < 2) return {Outcome::InsufficientData};
  return {Outcome::Value, std::sqrt(pairwise_variance(xs) + pairwise_variance(ys))};
}

inline Result std_diff(const gazescreen::AlignedTrace& a, const gazescreen::Window& w) {
  std::vector<double> steps;
  const auto frames = window_frames(a, w);
  for (auto f : frames) {
    if (f == frames.front()) continue;
    if (!a.frames[f] || !a.frames[f - 1] || a.gap_flags[f]) continue;
    const double dx = a.frames[f]->x - a.frames[f - 1]->x;
    const double dy = a.frames[f]->y - a.frames[f - 1]->y;
    steps.push_back(std::sqrt(dx * dx + dy * dy));
  }
  if (steps.size() < 2) return {Outcome::InsufficientData};
  return {Outcome::Value, std::sqrt(pairwise_variance(steps))};
}

// Per present, annotated frame: minimum over boxes of `dist`.
template <typename Dist>
std::pair<bool, std::vector<double>> nearest_centre(const gazescreen::AlignedTrace& a,
                                                    const gazescreen::AoiTrack& aoi,
                                                    const gazescreen::Window& w, Dist dist) {
  bool annotated = false;
  std::vector<double> d;
  for (auto f : window_frames(a, w)) {
    const auto boxes = boxes_on(aoi, f);
    if (boxes.empty()) continue;
    annotated = true;
    if (!a.frames[f]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : boxes) {
      const double cx = (b.x_min + b.x_max) / 2.0, cy = (b.y_min + b.y_max) / 2.0;
      best = std::min(best, dist(a.frames[f]->x - cx, a.frames[f]->y - cy));
    }
    d.push_back(best);
  }
  return {annotated, d};
}

inline Result std_manhattan(const gazescreen::AlignedTrace& a, const gazescreen::AoiTrack& aoi,
                            const gazescreen::Window& w) {
  auto [annotated, d] =
      nearest_centre(a, aoi, w, [](double dx, double dy) { return std::fabs(dx) + std::fabs(dy); });
  if (!annotated) return {Outcome::NoAoiInWindow};
  if (d.size() < 2) return {Outcome::InsufficientData};
  return {Outcome::Value, std::sqrt(pairwise_variance(d))};
}

inline Result rmse_aoi(const gazescreen::AlignedTrace& a, const gazescreen::AoiTrack& aoi,
                       const gazescreen::Window& w) {
  auto [annotated, d] = nearest_centre(a, aoi, w, [](double dx, double dy) { return dx * dx + dy * dy; });
  if (!annotated || d.empty()) return {Outcome::NoAoiInWindow};
  double s = 0.0;
  for (double v : d) s += v;
  return {Outcome::Value, std::sqrt(s / static_cast<double>(d.size()))};
}

inline Result delay(const gazescreen::AlignedTrace& a, const gazescreen::AoiTrack& aoi,
                    const gazescreen::Window& w) {
  std::vector<std::string> ids;
  for (const auto& b : aoi.boxes())
    if (std::find(ids.begin(), ids.end(), b.object_id) == ids.end()) ids.push_back(b.object_id);
  std::size_t last = 0;
  for (const auto& b : aoi.boxes()) last = std::max(last, b.frame_index);

  auto box_of = [&](const std::string& id, std::size_t f) -> std::optional<gazescreen::AoiBox> {
    for (const auto& b : aoi.boxes())
      if (b.object_id == id && b.frame_index == f) return b;
    return std::nullopt;
  };

  double total = 0.0;
  int count = 0;
  for (const auto& id : ids) {
    // Occurrence = run of consecutive annotated frames; keep the in-window part.
    std::size_t f = 0;
    while (f <= last) {
      if (!box_of(id, f)) {
        ++f;
        continue;
      }
      std::size_t g = f;
      while (g + 1 <= last && box_of(id, g + 1)) ++g;
      std::vector<std::size_t> span;
      for (std::size_t k = f; k <= g; ++k)
        if (k < a.frames.size() && in_window(k, w, a.fps)) span.push_back(k);
      if (!span.empty()) {
        double d = static_cast<double>(span.size());
        for (auto k : span) {
          const auto b = box_of(id, k);
          const auto& p = a.frames[k];
          if (p && p->x >= b->x_min && p->x <= b->x_max && p->y >= b->y_min && p->y <= b->y_max) {
            d = static_cast<double>(k - span.front());
            break;
          }
        }
        total += d;
        ++count;
      }
      f = g + 1;
    }
  }
  if (count == 0) return {Outcome::NoAoiInWindow};
  return {Outcome::Value, total / count / a.fps};
}

}  // namespace oracle
