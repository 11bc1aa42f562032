#include "doctest.h"

#include <algorithm>
#include <map>

#include "gazescreen/error.hpp"
#include "gazescreen/eval.hpp"
#include "gazescreen/features.hpp"
#include "gazescreen/synth.hpp"
#include "support/dirhash.hpp"
#include "support/tempdir.hpp"

using namespace gazescreen;
using namespace gazescreen::synth;

namespace {

const VideoSpec kVideo{"clip", 20.0, 30.0, 1920, 1080};

}  // namespace

TEST_CASE("AOI paths are valid, seeded and made of several occurrences") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto t = generate_aoi_path(kVideo, seed);  // AoiTrack validates every box
    const auto occ = find_occurrences(t);
    CHECK(occ.size() >= 2);
    CHECK(occ.size() <= 4);
    const double frames = static_cast<double>(kVideo.meta().frame_count());
    CHECK(static_cast<double>(t.boxes().size()) >= 0.6 * frames);
    CHECK(occ.front().enter_frame > 0);
    for (const auto& b : t.boxes()) CHECK(b.frame_index < kVideo.meta().frame_count());

    const auto again = generate_aoi_path(kVideo, seed);
    REQUIRE(again.boxes().size() == t.boxes().size());
    CHECK(format_aoi_track(again, kVideo.meta()) == format_aoi_track(t, kVideo.meta()));
  }
  CHECK(format_aoi_track(generate_aoi_path(kVideo, 1), kVideo.meta()) !=
        format_aoi_track(generate_aoi_path(kVideo, 2), kVideo.meta()));
}

TEST_CASE("traces are ordered, on schedule and reproducible") {
  const auto aoi = generate_aoi_path(kVideo, 4);
  const Participant p{"ctl_01", Group::CONTROL, std::nullopt};
  const auto params = default_control_params();
  const auto t = generate_trace(p, params, kVideo, aoi, 60.0, 0.3, 11);
  CHECK(t.samples().size() >= 1150);
  CHECK(t.samples().back().video_ts <= 20000.0);
  const auto a = format_gaze_log(t, kVideo.meta());
  const auto b = format_gaze_log(generate_trace(p, params, kVideo, aoi, 60.0, 0.3, 11), kVideo.meta());
  CHECK(a == b);
  CHECK(a != format_gaze_log(generate_trace(p, params, kVideo, aoi, 60.0, 0.3, 12), kVideo.meta()));
  const auto aligned = align(t, kVideo.meta());
  CHECK(aligned.valid_fraction() > 0.8);
}

TEST_CASE("perfect tracking gives zero AOI features") {
  GroupParams perfect = default_control_params();
  perfect.p_attend = 1.0;
  perfect.latency_mean_s = 0.0;
  perfect.latency_sd_s = 0.0;
  perfect.jitter_sd = 0.0;
  perfect.saccade_dur_s = 0.0;
  perfect.offscreen_rate_hz = 0.0;
  const auto aoi = generate_aoi_path(kVideo, 8);
  const auto t = generate_trace({"p", Group::CONTROL, std::nullopt}, perfect, kVideo, aoi, 60.0, 0.0, 5);
  const auto aligned = align(t, kVideo.meta());
  const auto w = Window::full(kVideo.meta());
  CHECK(feature_std_manhattan(aligned, aoi, w) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(feature_rmse_aoi(aligned, aoi, w) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(feature_delay(aligned, aoi, w) == 0.0);
}

TEST_CASE("CARS scores follow the histogram exactly for 35 participants") {
  const auto scores = draw_cars_scores(35, 1);
  std::map<int, int> counts;
  for (int s : scores) counts[s]++;
  for (std::size_t k = 0; k < kCarsHistogram.size(); ++k)
    CHECK(counts[kCarsHistogramFirst + static_cast<int>(k)] == kCarsHistogram[k]);
  CHECK(draw_cars_scores(35, 1) == scores);
  CHECK(draw_cars_scores(35, 2) != scores);
  CHECK(draw_cars_scores(70, 1).size() == 70);
}

TEST_CASE("severity coupling moves ASD parameters with CARS") {
  const auto asd = default_asd_params();
  const auto mild = asd.coupled(30), severe = asd.coupled(39);
  CHECK(mild.p_attend == asd.p_attend);
  CHECK(severe.p_attend < mild.p_attend);
  CHECK(severe.latency_mean_s > mild.latency_mean_s);
  CHECK(severe.fix_dur_bg_mean_s > mild.fix_dur_bg_mean_s);
  const auto ctl = default_control_params();
  CHECK(ctl.coupled(39).latency_mean_s == ctl.latency_mean_s);
}

TEST_CASE("cohort spec validation and JSON round trip") {
  auto spec = CohortSpec::defaults();
  CHECK(spec.videos.size() == 4);
  CHECK(spec.n_asd == 35);
  CHECK(spec.n_control == 25);
  spec.seed = 77;
  const auto back = cohort_spec_from_json(to_json(spec));
  CHECK(to_json(back) == to_json(spec));
  auto bad = spec;
  bad.asd.p_attend = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = spec;
  bad.videos.clear();
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("default cohort: counts, ingest round trip and group separation on delay") {
  testsupport::TempDir dir("synth_default");
  auto spec = CohortSpec::defaults();
  spec.seed = 7;
  const auto summary = generate_cohort(spec, dir.path());
  CHECK(summary.gaze_logs == 240);
  CHECK(summary.n_asd == 35);
  CHECK(summary.n_control == 25);

  const auto ds = eval::load_dataset(dir.path() / "manifest.json");
  CHECK(ds.failures.empty());
  std::map<int, int> cars;
  for (const auto& p : ds.manifest.participants)
    if (p.group == Group::ASD) cars[*p.cars]++;
  for (std::size_t k = 0; k < kCarsHistogram.size(); ++k)
    CHECK(cars[kCarsHistogramFirst + static_cast<int>(k)] == kCarsHistogram[k]);

  const auto videos = ds.manifest.video_order();
  const auto rows = eval::build_features(ds, FeatureMode::WITH_AOI, videos, {});
  double f5_asd = 0.0, f5_ctl = 0.0;
  for (const auto& r : rows)
    for (std::size_t v = 0; v < videos.size(); ++v)
      (r.group == Group::ASD ? f5_asd : f5_ctl) += r.values[5 * v + 4];
  f5_asd /= 35.0 * 4;
  f5_ctl /= 25.0 * 4;
  CHECK(f5_asd > f5_ctl);
}

TEST_CASE("generation is byte-identical across runs and job counts") {
  testsupport::TempDir a("synth_a"), b("synth_b");
  auto spec = CohortSpec::defaults();
  spec.n_asd = 6;
  spec.n_control = 4;
  spec.seed = 19;
  generate_cohort(spec, a.path(), 1);
  generate_cohort(spec, b.path(), 3);
  const auto sa = testsupport::snapshot(a.path()), sb = testsupport::snapshot(b.path());
  CHECK(sa.size() == 10 * 4 + 4 + 2);
  CHECK(sa == sb);
}

TEST_CASE("unwritable output directory") {
  auto spec = CohortSpec::defaults();
  spec.seed = 1;
  try {
    generate_cohort(spec, "/proc/gazescreen_cannot_write_here");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoFailure);
  }
}
