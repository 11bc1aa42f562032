#include "gazescreen/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "gazescreen/numfmt.hpp"

namespace gazescreen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open file", path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t") == std::string_view::npos;
}

struct RowParser {
  const fs::path& path;
  std::size_t line;

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::MalformedRow, msg, path.string(), line);
  }
  double real(std::string_view field, const char* name) const {
    try {
      const double v = parse_real(field);
      if (!std::isfinite(v)) fail(std::string(name) + " is not finite");
      return v;
    } catch (const std::invalid_argument&) {
      fail(std::string("bad ") + name + " '" + std::string(field) + "'");
    }
  }
  long long integer(std::string_view field, const char* name) const {
    try {
      return parse_int(field);
    } catch (const std::invalid_argument&) {
      fail(std::string("bad ") + name + " '" + std::string(field) + "'");
    }
  }
};

void expect_header(const std::vector<std::string>& lines, const fs::path& path,
                   std::string_view header) {
  if (lines.empty() || lines.front() != header)
    throw Error(ErrorCode::MalformedRow, "expected header '" + std::string(header) + "'",
                path.string(), 1);
}

}  // namespace

GazeTrace parse_gaze_log(const fs::path& path, const VideoMeta& meta) {
  meta.validate();
  const auto lines = read_lines(path);
  if (lines.empty()) throw Error(ErrorCode::EmptyLog, "file is empty", path.string());
  expect_header(lines, path, kGazeLogHeader);

  std::string participant;
  std::vector<GazeSample> samples;
  std::vector<double> wall_steps;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const RowParser row{path, i + 1};
    const auto f = split_csv(lines[i]);
    if (f.size() != 7) row.fail("expected 7 fields, got " + std::to_string(f.size()));
    if (f[1] != meta.video_id)
      row.fail("video_id '" + std::string(f[1]) + "' does not match '" + meta.video_id + "'");
    if (f[0].empty()) row.fail("empty participant_id");
    if (participant.empty()) {
      participant = std::string(f[0]);
    } else if (f[0] != participant) {
      row.fail("participant_id changes within one log");
    }
    GazeSample s;
    s.wall_ts = row.real(f[2], "wall_ts_ms");
    s.video_ts = row.real(f[3], "video_ts_ms");
    if (s.wall_ts < 0.0 || s.video_ts < 0.0) row.fail("negative timestamp");
    const auto flag = row.integer(f[6], "valid");
    if (flag != 0 && flag != 1) row.fail("valid must be 0 or 1");
    if (flag == 1 || !(blank(f[4]) && blank(f[5]))) {
      const auto p = normalize_coordinates(row.real(f[4], "x_px"), row.real(f[5], "y_px"), meta);
      s.x = p.x;
      s.y = p.y;
      s.valid = flag == 1 && p.valid;
    }
    if (!samples.empty()) {
      const auto& prev = samples.back();
      if (!(s.wall_ts > prev.wall_ts))
        throw Error(ErrorCode::NonMonotonicTimestamp, "wall_ts_ms not strictly increasing",
                    path.string(), i + 1);
      if (s.video_ts < prev.video_ts)
        throw Error(ErrorCode::NonMonotonicTimestamp, "video_ts_ms decreasing", path.string(),
                    i + 1);
      wall_steps.push_back(s.wall_ts - prev.wall_ts);
    }
    samples.push_back(s);
  }
  if (samples.empty()) throw Error(ErrorCode::EmptyLog, "no data rows", path.string());

  double rate = 0.0;
  if (!wall_steps.empty()) {
    auto mid = wall_steps.begin() + static_cast<std::ptrdiff_t>(wall_steps.size() / 2);
    std::nth_element(wall_steps.begin(), mid, wall_steps.end());
    rate = 1000.0 / *mid;
  }
  // Coordinates that fall off-screen are kept as invalid samples; a valid
  // sample always lies in the unit square.
  for (auto& s : samples)
    if (!s.valid) s.x = s.y = 0.0;
  return GazeTrace(participant, meta.video_id, std::move(samples), rate);
}

AoiTrack parse_aoi_track(const fs::path& path, const VideoMeta& meta) {
  meta.validate();
  const auto lines = read_lines(path);
  if (lines.empty()) return AoiTrack(meta.video_id, {});
  expect_header(lines, path, kAoiHeader);
  const auto frames = meta.frame_count();

  std::vector<AoiBox> boxes;
  std::set<std::pair<std::size_t, std::string>> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const RowParser row{path, i + 1};
    const auto f = split_csv(lines[i]);
    if (f.size() != 7) row.fail("expected 7 fields, got " + std::to_string(f.size()));
    if (f[0] != meta.video_id)
      row.fail("video_id '" + std::string(f[0]) + "' does not match '" + meta.video_id + "'");
    const auto frame = row.integer(f[1], "frame_index");
    if (frame < 0) row.fail("negative frame_index");
    if (static_cast<std::size_t>(frame) >= frames)
      throw Error(ErrorCode::FrameOutOfRange,
                  "frame " + std::to_string(frame) + " >= frame count " + std::to_string(frames),
                  path.string(), i + 1);
    if (f[2].empty()) row.fail("empty object_id");
    AoiBox b;
    b.object_id = std::string(f[2]);
    b.frame_index = static_cast<std::size_t>(frame);
    b.x_min = row.real(f[3], "x_min_px") / meta.width_px;
    b.y_min = row.real(f[4], "y_min_px") / meta.height_px;
    b.x_max = row.real(f[5], "x_max_px") / meta.width_px;
    b.y_max = row.real(f[6], "y_max_px") / meta.height_px;
    if (!(b.x_min < b.x_max) || !(b.y_min < b.y_max))
      throw Error(ErrorCode::DegenerateBox, "box has zero or negative extent", path.string(),
                  i + 1);
    // Boxes hanging over the screen edge are clipped to it.
    b.x_min = std::max(b.x_min, 0.0);
    b.y_min = std::max(b.y_min, 0.0);
    b.x_max = std::min(b.x_max, 1.0);
    b.y_max = std::min(b.y_max, 1.0);
    if (!(b.x_min < b.x_max) || !(b.y_min < b.y_max))
      throw Error(ErrorCode::DegenerateBox, "box lies outside the screen", path.string(), i + 1);
    if (!seen.emplace(b.frame_index, b.object_id).second)
      row.fail("duplicate box for object '" + b.object_id + "' at frame " +
               std::to_string(frame));
    boxes.push_back(std::move(b));
  }
  return AoiTrack(meta.video_id, std::move(boxes));
}

std::string format_gaze_log(const GazeTrace& trace, const VideoMeta& meta) {
  std::string out = kGazeLogHeader;
  out += '\n';
  for (const auto& s : trace.samples()) {
    const auto [px, py] = denormalize_coordinates(s.x, s.y, meta);
    out += trace.participant_id();
    out += ',';
    out += trace.video_id();
    out += ',' + format_real(s.wall_ts) + ',' + format_real(s.video_ts) + ',' + format_real(px) +
           ',' + format_real(py) + ',' + (s.valid ? '1' : '0') + '\n';
  }
  return out;
}

std::string format_aoi_track(const AoiTrack& track, const VideoMeta& meta) {
  std::string out = kAoiHeader;
  out += '\n';
  for (const auto& b : track.boxes()) {
    out += track.video_id() + ',' + std::to_string(b.frame_index) + ',' + b.object_id + ',' +
           format_real(b.x_min * meta.width_px) + ',' + format_real(b.y_min * meta.height_px) +
           ',' + format_real(b.x_max * meta.width_px) + ',' +
           format_real(b.y_max * meta.height_px) + '\n';
  }
  return out;
}

const VideoMeta& DatasetManifest::video(const std::string& video_id) const {
  for (const auto& v : videos)
    if (v.video_id == video_id) return v;
  throw Error(ErrorCode::MalformedManifest, "unknown video", video_id);
}

const Participant& DatasetManifest::participant(const std::string& participant_id) const {
  for (const auto& p : participants)
    if (p.participant_id == participant_id) return p;
  throw Error(ErrorCode::MalformedManifest, "unknown participant", participant_id);
}

std::vector<std::string> DatasetManifest::video_order() const {
  std::vector<std::string> ids;
  for (const auto& v : videos) ids.push_back(v.video_id);
  return ids;
}

void DatasetManifest::validate() const {
  std::set<std::string> vids, pids;
  for (const auto& v : videos) {
    if (v.video_id.empty()) throw Error(ErrorCode::MalformedManifest, "empty video id");
    if (!vids.insert(v.video_id).second)
      throw Error(ErrorCode::MalformedManifest, "duplicate video", v.video_id);
    try {
      v.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedManifest, e.what(), v.video_id);
    }
  }
  for (const auto& p : participants) {
    if (p.participant_id.empty()) throw Error(ErrorCode::MalformedManifest, "empty participant id");
    if (!pids.insert(p.participant_id).second)
      throw Error(ErrorCode::MalformedManifest, "duplicate participant", p.participant_id);
    p.validate();
  }
  for (const auto& [key, path] : gaze_log_paths) {
    if (!pids.count(key.first))
      throw Error(ErrorCode::MalformedManifest, "gaze log for undeclared participant", key.first);
    if (!vids.count(key.second))
      throw Error(ErrorCode::MalformedManifest, "gaze log for undeclared video", key.second);
  }
  for (const auto& [vid, path] : aoi_paths)
    if (!vids.count(vid))
      throw Error(ErrorCode::MalformedManifest, "AOI track for undeclared video", vid);
}

namespace {

template <typename T>
T field(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::MalformedManifest, std::string("missing key '") + key + "'", ctx);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::MalformedManifest, std::string("bad value for '") + key + "'", ctx);
  }
}

}  // namespace

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open manifest", path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedManifest, e.what(), path.string());
  }
  const auto ctx = path.string();
  if (field<std::string>(j, "format", ctx) != kManifestFormat)
    throw Error(ErrorCode::MalformedManifest, "unsupported manifest format", ctx);
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path q(p);
    return q.is_absolute() ? q : base / q;
  };

  DatasetManifest m;
  for (const auto& v : field<json>(j, "videos", ctx)) {
    VideoMeta meta;
    meta.video_id = field<std::string>(v, "id", ctx);
    meta.duration_s = field<double>(v, "duration_s", meta.video_id);
    meta.fps = field<double>(v, "fps", meta.video_id);
    meta.width_px = field<int>(v, "width_px", meta.video_id);
    meta.height_px = field<int>(v, "height_px", meta.video_id);
    m.videos.push_back(std::move(meta));
  }
  for (const auto& p : field<json>(j, "participants", ctx)) {
    Participant part;
    part.participant_id = field<std::string>(p, "id", ctx);
    part.group = [&] {
      try {
        return parse_group(field<std::string>(p, "group", part.participant_id));
      } catch (const Error& e) {
        throw Error(ErrorCode::MalformedManifest, e.what(), part.participant_id);
      }
    }();
    if (p.contains("cars") && !p.at("cars").is_null())
      part.cars = field<int>(p, "cars", part.participant_id);
    m.participants.push_back(std::move(part));
  }
  if (j.contains("aoi_tracks")) {
    for (const auto& a : j.at("aoi_tracks")) {
      const auto vid = field<std::string>(a, "video", ctx);
      if (!m.aoi_paths.emplace(vid, resolve(field<std::string>(a, "path", vid))).second)
        throw Error(ErrorCode::MalformedManifest, "duplicate AOI track", vid);
    }
  }
  for (const auto& g : field<json>(j, "gaze_logs", ctx)) {
    const auto pid = field<std::string>(g, "participant", ctx);
    const auto vid = field<std::string>(g, "video", pid);
    if (!m.gaze_log_paths.emplace(std::pair{pid, vid}, resolve(field<std::string>(g, "path", pid)))
             .second)
      throw Error(ErrorCode::MalformedManifest, "duplicate gaze log for " + vid, pid);
  }
  m.validate();
  return m;
}

std::string format_manifest(const DatasetManifest& manifest, const fs::path& base_dir) {
  auto rel = [&](const fs::path& p) {
    const auto r = p.lexically_relative(base_dir);
    return (r.empty() || r.native().starts_with("..")) ? p.generic_string() : r.generic_string();
  };
  json j;
  j["format"] = kManifestFormat;
  j["videos"] = json::array();
  for (const auto& v : manifest.videos)
    j["videos"].push_back({{"id", v.video_id},
                           {"duration_s", v.duration_s},
                           {"fps", v.fps},
                           {"width_px", v.width_px},
                           {"height_px", v.height_px}});
  j["participants"] = json::array();
  for (const auto& p : manifest.participants) {
    json e{{"id", p.participant_id}, {"group", std::string(to_string(p.group))}};
    e["cars"] = p.cars ? json(*p.cars) : json(nullptr);
    j["participants"].push_back(std::move(e));
  }
  j["aoi_tracks"] = json::array();
  for (const auto& v : manifest.videos) {
    const auto it = manifest.aoi_paths.find(v.video_id);
    if (it != manifest.aoi_paths.end())
      j["aoi_tracks"].push_back({{"video", v.video_id}, {"path", rel(it->second)}});
  }
  j["gaze_logs"] = json::array();
  for (const auto& p : manifest.participants)
    for (const auto& v : manifest.videos) {
      const auto it = manifest.gaze_log_paths.find({p.participant_id, v.video_id});
      if (it != manifest.gaze_log_paths.end())
        j["gaze_logs"].push_back(
            {{"participant", p.participant_id}, {"video", v.video_id}, {"path", rel(it->second)}});
    }
  return j.dump(2) + "\n";
}

double AlignedTrace::valid_fraction() const {
  if (frames.empty()) return 0.0;
  const auto n = std::count_if(frames.begin(), frames.end(), [](const auto& p) { return p.has_value(); });
  return static_cast<double>(n) / static_cast<double>(frames.size());
}

AlignedTrace align(const GazeTrace& trace, const VideoMeta& meta) {
  meta.validate();
  const auto ctx = trace.participant_id() + "/" + trace.video_id();
  if (trace.video_id() != meta.video_id)
    throw Error(ErrorCode::InvalidConfig, "trace belongs to video '" + trace.video_id() + "'",
                meta.video_id);

  std::vector<const GazeSample*> valid;
  for (const auto& s : trace.samples())
    if (s.valid) valid.push_back(&s);

  AlignedTrace out;
  out.participant_id = trace.participant_id();
  out.video_id = trace.video_id();
  out.fps = meta.fps;
  const auto n_frames = meta.frame_count();
  out.frames.assign(n_frames, std::nullopt);
  out.frame_wall_ts.assign(n_frames, 0.0);
  out.gap_flags.assign(n_frames, false);

  const double half_ms = 500.0 / meta.fps;
  std::size_t cursor = 0;
  for (std::size_t f = 0; f < n_frames; ++f) {
    const double center = 1000.0 * static_cast<double>(f) / meta.fps;
    // Both edges come from the same expression so adjacent frames share them exactly.
    const double lo = (2.0 * static_cast<double>(f) - 1.0) * half_ms;
    const double hi = (2.0 * static_cast<double>(f) + 1.0) * half_ms;
    while (cursor < valid.size() && valid[cursor]->video_ts < lo) ++cursor;
    const GazeSample* best = nullptr;
    double best_dist = 0.0;
    for (std::size_t k = cursor; k < valid.size() && valid[k]->video_ts < hi; ++k) {
      const double d = std::abs(valid[k]->video_ts - center);
      if (!best || d < best_dist) {
        best = valid[k];
        best_dist = d;
      }
    }
    if (best) {
      out.frames[f] = NormalizedPoint{best->x, best->y, true};
      out.frame_wall_ts[f] = best->wall_ts;
    }
  }

  const double max_spread_ms = (2.0 / meta.fps + 0.5) * 1000.0;
  std::size_t present = 0;
  for (std::size_t f = 0; f < n_frames; ++f) {
    if (out.frames[f]) ++present;
    if (f == 0) continue;
    if (!out.frames[f - 1]) {
      out.gap_flags[f] = true;
    } else if (out.frames[f] && out.frame_wall_ts[f] - out.frame_wall_ts[f - 1] > max_spread_ms) {
      out.gap_flags[f] = true;
    }
  }
  if (n_frames == 0 ||
      static_cast<double>(present) < kMinValidFrameFraction * static_cast<double>(n_frames))
    throw Error(ErrorCode::RateMismatch,
                std::to_string(present) + " of " + std::to_string(n_frames) +
                    " frames received a gaze sample",
                ctx);
  return out;
}

}  // namespace gazescreen
