#include "gazescreen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>

#include "gazescreen/features.hpp"
#include "gazescreen/parallel.hpp"
#include "gazescreen/random.hpp"
#include "gazescreen/report.hpp"

namespace gazescreen::synth {

namespace fs = std::filesystem;
using nlohmann::json;

GroupParams default_control_params() {
  GroupParams g;
  g.p_attend = 0.75;
  g.latency_mean_s = 0.4;
  g.latency_sd_s = 0.15;
  g.fix_dur_aoi_mean_s = 0.35;
  g.fix_dur_bg_mean_s = 0.25;
  g.jitter_sd = 0.008;
  g.saccade_dur_s = 0.04;
  g.offscreen_rate_hz = 0.02;
  return g;
}

GroupParams default_asd_params() {
  GroupParams g;
  g.p_attend = 0.45;
  g.latency_mean_s = 1.2;
  g.latency_sd_s = 0.4;
  g.fix_dur_aoi_mean_s = 0.40;
  g.fix_dur_bg_mean_s = 0.45;
  g.jitter_sd = 0.010;
  g.saccade_dur_s = 0.045;
  g.offscreen_rate_hz = 0.05;
  g.severity_coupling = SeverityCoupling{};
  return g;
}

void GroupParams::validate() const {
  if (!(p_attend >= 0.0 && p_attend <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "p_attend must lie in [0, 1]");
  for (double v : {latency_mean_s, latency_sd_s, fix_dur_aoi_mean_s, fix_dur_bg_mean_s, jitter_sd,
                   saccade_dur_s, offscreen_rate_hz})
    if (!(v >= 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::InvalidConfig, "durations, sds and rates must be >= 0");
}

GroupParams GroupParams::coupled(int cars) const {
  GroupParams g = *this;
  const double delta = static_cast<double>(cars - kCarsHistogramFirst);
  auto factor = [&](double coef) { return std::max(0.0, 1.0 + coef * delta); };
  g.p_attend = std::clamp(p_attend * factor(severity_coupling.p_attend), 0.0, 1.0);
  g.latency_mean_s = latency_mean_s * factor(severity_coupling.latency_mean);
  g.fix_dur_bg_mean_s = fix_dur_bg_mean_s * factor(severity_coupling.fix_dur_bg);
  return g;
}

CohortSpec CohortSpec::defaults() {
  CohortSpec s;
  s.videos = {{"car_pursuit", 24.0}, {"dialog", 18.0}, {"case_exchange", 26.0}, {"ball_game", 26.0}};
  return s;
}

void CohortSpec::validate() const {
  if (n_asd < 1 || n_control < 1)
    throw Error(ErrorCode::InvalidConfig, "cohort needs at least one participant per group");
  if (videos.empty()) throw Error(ErrorCode::InvalidConfig, "cohort needs at least one video");
  for (const auto& v : videos) v.meta().validate();
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorCode::InvalidConfig, "sample rate must be positive");
  if (!(dropout_rate_hz >= 0.0) || !(between_subject_sd >= 0.0))
    throw Error(ErrorCode::InvalidConfig, "dropout rate and between-subject sd must be >= 0");
  asd.validate();
  control.validate();
}

namespace {

json params_json(const GroupParams& g) {
  return {{"p_attend", g.p_attend},
          {"latency_mean_s", g.latency_mean_s},
          {"latency_sd_s", g.latency_sd_s},
          {"fix_dur_aoi_mean_s", g.fix_dur_aoi_mean_s},
          {"fix_dur_bg_mean_s", g.fix_dur_bg_mean_s},
          {"jitter_sd", g.jitter_sd},
          {"saccade_dur_s", g.saccade_dur_s},
          {"offscreen_rate_hz", g.offscreen_rate_hz},
          {"severity_coupling",
           {{"p_attend", g.severity_coupling.p_attend},
            {"latency_mean", g.severity_coupling.latency_mean},
            {"fix_dur_bg", g.severity_coupling.fix_dur_bg}}}};
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad value for '") + key + "'");
  }
}

GroupParams params_from(const json& j, GroupParams g) {
  read_opt(j, "p_attend", g.p_attend);
  read_opt(j, "latency_mean_s", g.latency_mean_s);
  read_opt(j, "latency_sd_s", g.latency_sd_s);
  read_opt(j, "fix_dur_aoi_mean_s", g.fix_dur_aoi_mean_s);
  read_opt(j, "fix_dur_bg_mean_s", g.fix_dur_bg_mean_s);
  read_opt(j, "jitter_sd", g.jitter_sd);
  read_opt(j, "saccade_dur_s", g.saccade_dur_s);
  read_opt(j, "offscreen_rate_hz", g.offscreen_rate_hz);
  if (j.contains("severity_coupling")) {
    const auto& c = j.at("severity_coupling");
    read_opt(c, "p_attend", g.severity_coupling.p_attend);
    read_opt(c, "latency_mean", g.severity_coupling.latency_mean);
    read_opt(c, "fix_dur_bg", g.severity_coupling.fix_dur_bg);
  }
  return g;
}

}  // namespace

json to_json(const CohortSpec& spec) {
  json videos = json::array();
  for (const auto& v : spec.videos)
    videos.push_back({{"id", v.video_id}, {"duration_s", v.duration_s}, {"fps", v.fps},
                      {"width_px", v.width_px}, {"height_px", v.height_px}});
  return {{"n_asd", spec.n_asd},
          {"n_control", spec.n_control},
          {"videos", videos},
          {"sample_rate_hz", spec.sample_rate_hz},
          {"dropout_rate_hz", spec.dropout_rate_hz},
          {"between_subject_sd", spec.between_subject_sd},
          {"asd", params_json(spec.asd)},
          {"control", params_json(spec.control)},
          {"seed", spec.seed}};
}

CohortSpec cohort_spec_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "cohort spec must be a JSON object");
  auto s = CohortSpec::defaults();
  read_opt(j, "n_asd", s.n_asd);
  read_opt(j, "n_control", s.n_control);
  read_opt(j, "sample_rate_hz", s.sample_rate_hz);
  read_opt(j, "dropout_rate_hz", s.dropout_rate_hz);
  read_opt(j, "between_subject_sd", s.between_subject_sd);
  read_opt(j, "seed", s.seed);
  if (j.contains("videos")) {
    s.videos.clear();
    for (const auto& v : j.at("videos")) {
      VideoSpec vs;
      read_opt(v, "id", vs.video_id);
      read_opt(v, "duration_s", vs.duration_s);
      read_opt(v, "fps", vs.fps);
      read_opt(v, "width_px", vs.width_px);
      read_opt(v, "height_px", vs.height_px);
      s.videos.push_back(vs);
    }
  }
  if (j.contains("asd")) s.asd = params_from(j.at("asd"), s.asd);
  if (j.contains("control")) s.control = params_from(j.at("control"), s.control);
  s.validate();
  return s;
}

std::uint64_t aoi_seed(std::uint64_t root, std::size_t video_index) {
  return derive_seed(root, {10, video_index});
}
std::uint64_t trace_seed(std::uint64_t root, std::size_t participant_index, std::size_t video_index) {
  return derive_seed(root, {11, participant_index, video_index});
}
std::uint64_t participant_seed(std::uint64_t root, std::size_t participant_index) {
  return derive_seed(root, {12, participant_index});
}

AoiTrack generate_aoi_path(const VideoSpec& video, std::uint64_t seed) {
  const auto meta = video.meta();
  meta.validate();
  Rng rng(seed);
  const std::size_t frames = meta.frame_count();
  const std::size_t k = 2 + rng.index(3);

  // Absent spans lead each occurrence so every occurrence has an entry event.
  const auto present = static_cast<std::size_t>(std::round(rng.uniform(0.65, 0.85) * frames));
  const std::size_t absent = frames - present;
  auto split = [&](std::size_t total) {
    std::vector<double> w(k);
    for (auto& x : w) x = rng.uniform(0.5, 1.5);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<std::size_t> parts(k);
    std::size_t used = 0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      parts[i] = std::max<std::size_t>(1, static_cast<std::size_t>(total * w[i] / sum));
      used += parts[i];
    }
    parts[k - 1] = total > used ? total - used : 1;
    return parts;
  };
  const auto gaps = split(absent);
  const auto spans = split(present);

  // Piecewise-linear centre path with a waypoint every ~1.5 s.
  const std::size_t step = std::max<std::size_t>(1, static_cast<std::size_t>(1.5 * meta.fps));
  std::vector<std::pair<double, double>> waypoints;
  for (std::size_t f = 0; f <= frames + step; f += step)
    waypoints.emplace_back(rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85));
  const double half_w = rng.uniform(0.045, 0.055);
  const double half_h = rng.uniform(0.045, 0.055);

  std::vector<AoiBox> boxes;
  std::size_t f = 0;
  for (std::size_t i = 0; i < k; ++i) {
    f += gaps[i];
    for (std::size_t j = 0; j < spans[i] && f < frames; ++j, ++f) {
      const std::size_t seg = f / step;
      const double t = static_cast<double>(f % step) / static_cast<double>(step);
      const double cx = waypoints[seg].first + t * (waypoints[seg + 1].first - waypoints[seg].first);
      const double cy = waypoints[seg].second + t * (waypoints[seg + 1].second - waypoints[seg].second);
      boxes.push_back({"object_1", f, cx - half_w, cy - half_h, cx + half_w, cy + half_h});
    }
  }
  return AoiTrack(video.video_id, std::move(boxes));
}

namespace {

constexpr double kPauseAfterMs = 500.0;

struct Occurrence {
  std::size_t enter = 0, exit = 0;
  double available_frame = 0.0;  // frame from which the viewer may look
};

}  // namespace

GazeTrace generate_trace(const Participant& participant, const GroupParams& params,
                         const VideoSpec& video, const AoiTrack& aoi, double sample_rate_hz,
                         double dropout_rate_hz, std::uint64_t seed) {
  params.validate();
  const auto meta = video.meta();
  Rng rng(seed);
  const double fps = meta.fps;
  const double dt_ms = 1000.0 / sample_rate_hz;
  const double duration_ms = meta.duration_s * 1000.0;

  std::vector<Occurrence> occ;
  for (const auto& o : find_occurrences(aoi)) {
    const double latency = std::max(0.0, rng.normal(params.latency_mean_s, params.latency_sd_s));
    occ.push_back({o.enter_frame, o.exit_frame, static_cast<double>(o.enter_frame) + latency * fps});
  }
  auto occurrence_at = [&](std::size_t frame) -> const Occurrence* {
    for (const auto& o : occ)
      if (frame >= o.enter && frame <= o.exit) return &o;
    return nullptr;
  };
  auto aoi_center = [&](std::size_t frame) -> std::optional<std::pair<double, double>> {
    const auto b = aoi.boxes_at(frame);
    if (b.empty()) return std::nullopt;
    return std::pair{b.front().center_x(), b.front().center_y()};
  };
  auto next_event = [&](double rate_hz) {
    return rate_hz > 0.0 ? rng.exponential(1000.0 / rate_hz) : std::numeric_limits<double>::infinity();
  };

  enum class Target { Aoi, Background };
  Target target = Target::Background;
  double gx = rng.uniform(0.3, 0.7), gy = rng.uniform(0.3, 0.7);  // current gaze
  double bx = gx, by = gy;               // background target
  double sx = gx, sy = gy;               // saccade origin
  double fix_end_ms = 0.0;               // wall time the current fixation ends
  double saccade_end_ms = -1.0;
  double saccade_dur_ms = params.saccade_dur_s * 1000.0;
  bool need_decision = true;
  const Occurrence* oriented = nullptr;  // occurrence whose onset was already acted on

  double next_lookaway = next_event(params.offscreen_rate_hz);
  double lookaway_end = -1.0, lookaway_start = -1.0;
  double next_dropout = next_event(dropout_rate_hz);
  double dropout_end = -1.0;

  std::vector<GazeSample> samples;
  double paused_ms = 0.0;
  double last_video = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double wall = std::round(k * dt_ms * 1000.0) / 1000.0;
    const double step_ms = k == 0 ? 0.0 : wall - samples.back().wall_ts;

    // Look-away: invalid samples; playback halts once 500 ms have elapsed.
    bool away = false;
    if (wall >= next_lookaway && lookaway_end < 0.0) {
      lookaway_start = wall;
      lookaway_end = wall + rng.uniform(300.0, 1500.0);
      next_lookaway = lookaway_end + next_event(params.offscreen_rate_hz);
    }
    if (lookaway_end >= 0.0) {
      if (wall < lookaway_end) {
        away = true;
        if (k > 0 && wall - lookaway_start > kPauseAfterMs) paused_ms += step_ms;
      } else {
        lookaway_end = -1.0;
        need_decision = true;
      }
    }
    const double video = std::max(last_video, std::round((wall - paused_ms) * 1000.0) / 1000.0);
    last_video = video;
    if (video > duration_ms) break;
    const auto frame = static_cast<std::size_t>(std::floor(video * fps / 1000.0 + 0.5));

    if (!away) {
      const Occurrence* o = occurrence_at(frame);
      const bool available = o && static_cast<double>(frame) >= o->available_frame;
      // A newly available object can pull gaze off a background fixation.
      if (available && o != oriented) {
        oriented = o;
        if (target == Target::Background && rng.bernoulli(params.p_attend)) {
          target = Target::Aoi;
          sx = gx, sy = gy;
          saccade_end_ms = wall + saccade_dur_ms;
          fix_end_ms = saccade_end_ms + rng.exponential(params.fix_dur_aoi_mean_s * 1000.0);
          need_decision = false;
        }
      }
      if (target == Target::Aoi && !aoi_center(frame)) need_decision = true;
      if (need_decision || wall >= fix_end_ms) {
        const bool to_aoi = available && aoi_center(frame) && rng.bernoulli(params.p_attend);
        target = to_aoi ? Target::Aoi : Target::Background;
        if (!to_aoi) bx = rng.uniform(0.05, 0.95), by = rng.uniform(0.05, 0.95);
        sx = gx, sy = gy;
        saccade_end_ms = wall + saccade_dur_ms;
        const double mean = to_aoi ? params.fix_dur_aoi_mean_s : params.fix_dur_bg_mean_s;
        fix_end_ms = saccade_end_ms + rng.exponential(mean * 1000.0);
        need_decision = false;
      }
      double tx = bx, ty = by;
      if (target == Target::Aoi) {
        const auto c = aoi_center(frame);
        tx = c->first, ty = c->second;
      }
      if (wall < saccade_end_ms && saccade_dur_ms > 0.0) {
        const double p = 1.0 - (saccade_end_ms - wall) / saccade_dur_ms;
        gx = sx + p * (tx - sx);
        gy = sy + p * (ty - sy);
      } else {
        gx = tx, gy = ty;
      }
    }

    if (wall >= next_dropout && dropout_end < 0.0) {
      dropout_end = wall + rng.uniform(50.0, 150.0);
      next_dropout = dropout_end + next_event(dropout_rate_hz);
    }
    const bool dropped = dropout_end >= 0.0 && wall < dropout_end;
    if (dropout_end >= 0.0 && wall >= dropout_end) dropout_end = -1.0;

    GazeSample s;
    s.wall_ts = wall;
    s.video_ts = video;
    if (away) {
      s.x = 1.15;  // off the right edge
      s.y = 0.5;
    } else {
      s.x = gx + rng.normal(0.0, params.jitter_sd);
      s.y = gy + rng.normal(0.0, params.jitter_sd);
      s.valid = !dropped && s.x >= 0.0 && s.x <= 1.0 && s.y >= 0.0 && s.y <= 1.0;
    }
    samples.push_back(s);
  }
  return GazeTrace(participant.participant_id, video.video_id, std::move(samples), sample_rate_hz);
}

std::vector<int> draw_cars_scores(std::size_t n, std::uint64_t seed) {
  const int total = std::accumulate(kCarsHistogram.begin(), kCarsHistogram.end(), 0);
  std::vector<std::size_t> counts(kCarsHistogram.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < kCarsHistogram.size(); ++i) {
    const double quota = static_cast<double>(n) * kCarsHistogram[i] / total;
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    assigned += counts[i];
    remainders.emplace_back(-(quota - std::floor(quota)), i);
  }
  std::sort(remainders.begin(), remainders.end());
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++counts[remainders[r].second];

  std::vector<int> scores;
  for (std::size_t i = 0; i < counts.size(); ++i)
    scores.insert(scores.end(), counts[i], kCarsHistogramFirst + static_cast<int>(i));
  Rng rng(seed);
  rng.shuffle(std::span<int>(scores));
  return scores;
}

std::vector<Participant> cohort_participants(const CohortSpec& spec) {
  auto id = [](const char* prefix, std::size_t i, std::size_t n) {
    const auto width = std::to_string(n).size();
    auto num = std::to_string(i + 1);
    return std::string(prefix) + std::string(width - std::min(width, num.size()), '0') + num;
  };
  const auto cars = draw_cars_scores(spec.n_asd, derive_seed(spec.seed, {13}));
  std::vector<Participant> out;
  for (std::size_t i = 0; i < spec.n_asd; ++i) out.push_back({id("asd_", i, spec.n_asd), Group::ASD, cars[i]});
  for (std::size_t i = 0; i < spec.n_control; ++i)
    out.push_back({id("ctl_", i, spec.n_control), Group::CONTROL, std::nullopt});
  return out;
}

GroupParams participant_params(const CohortSpec& spec, const Participant& p,
                               std::size_t participant_index) {
  GroupParams g = p.group == Group::ASD ? spec.asd.coupled(p.cars.value_or(kCarsHistogramFirst))
                                        : spec.control;
  Rng rng(participant_seed(spec.seed, participant_index));
  auto vary = [&] { return std::exp(rng.normal(0.0, spec.between_subject_sd)); };
  g.p_attend = std::clamp(g.p_attend * vary(), 0.0, 1.0);
  g.latency_mean_s *= vary();
  g.fix_dur_aoi_mean_s *= vary();
  g.fix_dur_bg_mean_s *= vary();
  return g;
}

CohortSummary generate_cohort(const CohortSpec& spec, const fs::path& out_dir, int jobs) {
  spec.validate();
  std::error_code ec;
  for (const auto& dir : {out_dir, out_dir / "gaze", out_dir / "aoi"}) {
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
      throw Error(ErrorCode::IoFailure, "cannot create directory: " + ec.message(), dir.string());
  }

  DatasetManifest manifest;
  manifest.participants = cohort_participants(spec);
  std::vector<AoiTrack> tracks;
  for (std::size_t v = 0; v < spec.videos.size(); ++v) {
    const auto& vs = spec.videos[v];
    manifest.videos.push_back(vs.meta());
    tracks.push_back(generate_aoi_path(vs, aoi_seed(spec.seed, v)));
    const auto path = out_dir / "aoi" / (vs.video_id + ".csv");
    report::write_text(path, format_aoi_track(tracks.back(), vs.meta()));
    manifest.aoi_paths[vs.video_id] = path;
  }

  const auto nv = spec.videos.size();
  const auto np = manifest.participants.size();
  std::vector<GroupParams> params;
  for (std::size_t p = 0; p < np; ++p) params.push_back(participant_params(spec, manifest.participants[p], p));
  std::vector<fs::path> paths(np * nv);
  parallel_for(np * nv, jobs, [&](std::size_t k) {
    const auto p = k / nv, v = k % nv;
    const auto& part = manifest.participants[p];
    const auto& vs = spec.videos[v];
    const auto trace = generate_trace(part, params[p], vs, tracks[v], spec.sample_rate_hz,
                                      spec.dropout_rate_hz, trace_seed(spec.seed, p, v));
    paths[k] = out_dir / "gaze" / (part.participant_id + "_" + vs.video_id + ".csv");
    report::write_text(paths[k], format_gaze_log(trace, vs.meta()));
  });
  for (std::size_t k = 0; k < np * nv; ++k)
    manifest.gaze_log_paths[{manifest.participants[k / nv].participant_id, spec.videos[k % nv].video_id}] =
        paths[k];

  report::write_text(out_dir / "manifest.json", format_manifest(manifest, out_dir));
  report::write_text(out_dir / "generator_config.json", to_json(spec).dump(2) + "\n");

  CohortSummary summary;
  summary.n_asd = spec.n_asd;
  summary.n_control = spec.n_control;
  summary.gaze_logs = np * nv;
  for (const auto& v : spec.videos) summary.video_durations.emplace_back(v.video_id, v.duration_s);
  return summary;
}

}  // namespace gazescreen::synth
