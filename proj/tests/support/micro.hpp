#pragma once

// Small random alignment/AOI instances shared by the feature tests and the
// acceptance runner.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gazescreen/core.hpp"
#include "gazescreen/features.hpp"
#include "gazescreen/ingest.hpp"
#include "gazescreen/random.hpp"

namespace testsupport {

struct MicroInstance {
  gazescreen::AlignedTrace aligned;
  gazescreen::AoiTrack aoi;
  gazescreen::Window window;
};

// Up to `max_frames` frames with roughly 15% absent, a few explicit pause
// gaps, and up to two objects whose presence toggles in runs.
inline MicroInstance random_micro_instance(std::uint64_t seed, std::size_t max_frames = 20) {
  using namespace gazescreen;
  Rng rng(seed);
  MicroInstance m;
  const std::size_t n = 4 + rng.index(max_frames - 3);
  const double fps = 10.0 + static_cast<double>(rng.index(21));
  auto& a = m.aligned;
  a.participant_id = "p";
  a.video_id = "v";
  a.fps = fps;
  a.frames.resize(n);
  a.frame_wall_ts.assign(n, 0.0);
  a.gap_flags.assign(n, false);
  double wall = 0.0;
  for (std::size_t f = 0; f < n; ++f) {
    wall += 1000.0 / fps;
    if (rng.bernoulli(0.85)) a.frames[f] = NormalizedPoint{rng.uniform(), rng.uniform(), true};
    a.frame_wall_ts[f] = wall;
    if (f > 0 && (!a.frames[f - 1] || rng.bernoulli(0.1))) a.gap_flags[f] = true;
  }

  std::vector<AoiBox> boxes;
  const std::size_t objects = rng.index(3);
  for (std::size_t o = 0; o < objects; ++o) {
    const std::string id = "obj" + std::to_string(o);
    bool on = rng.bernoulli(0.5);
    double cx = rng.uniform(0.2, 0.8), cy = rng.uniform(0.2, 0.8);
    for (std::size_t f = 0; f < n; ++f) {
      if (rng.bernoulli(0.2)) on = !on;
      if (!on) continue;
      cx = std::clamp(cx + rng.uniform(-0.03, 0.03), 0.2, 0.8);
      cy = std::clamp(cy + rng.uniform(-0.03, 0.03), 0.2, 0.8);
      const double hw = rng.uniform(0.05, 0.2), hh = rng.uniform(0.05, 0.2);
      boxes.push_back({id, f, cx - hw, cy - hh, cx + hw, cy + hh});
    }
  }
  m.aoi = AoiTrack("v", std::move(boxes));

  const double duration = static_cast<double>(n) / fps;
  if (rng.bernoulli(0.3)) {
    m.window = {0.0, duration};
  } else {
    const double start = rng.uniform(0.0, 0.4 * duration);
    m.window = {start, rng.uniform(0.3, 1.0) * (duration - start)};
  }
  return m;
}

}  // namespace testsupport
