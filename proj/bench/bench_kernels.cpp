// Serial (jobs = 1) against OpenMP (jobs = N) timings for the parallel
// kernels: dataset loading/alignment, cross-validation repetitions and
// leave-one-out severity fits.

#include <benchmark/benchmark.h>

#include <filesystem>
#include <thread>

#include "gazescreen/eval.hpp"
#include "gazescreen/synth.hpp"

namespace fs = std::filesystem;
using namespace gazescreen;

namespace {

const fs::path& cohort_dir() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / "gazescreen_bench_cohort";
    fs::remove_all(d);
    auto spec = synth::CohortSpec::defaults();
    spec.seed = 7;
    synth::generate_cohort(spec, d, static_cast<int>(std::thread::hardware_concurrency()));
    return d;
  }();
  return dir;
}

const eval::LoadedDataset& dataset() {
  static const auto ds = eval::load_dataset(cohort_dir() / "manifest.json", 1);
  return ds;
}

int jobs_arg(const benchmark::State& state) { return static_cast<int>(state.range(0)); }

void BM_LoadDataset(benchmark::State& state) {
  const auto path = cohort_dir() / "manifest.json";
  for (auto _ : state) benchmark::DoNotOptimize(eval::load_dataset(path, jobs_arg(state)));
}

void BM_ClassificationCv(benchmark::State& state) {
  const auto& ds = dataset();
  const auto videos = ds.manifest.video_order();
  const auto rows = eval::build_features(ds, FeatureMode::WITH_AOI, videos, {});
  eval::CvConfig cfg;
  cfg.seed = 1;
  cfg.repetitions = 20;
  cfg.jobs = jobs_arg(state);
  for (auto _ : state) benchmark::DoNotOptimize(eval::run_classification_cv(rows, cfg));
}

void BM_SeverityLoocv(benchmark::State& state) {
  const auto& ds = dataset();
  const auto videos = ds.manifest.video_order();
  const auto rows = eval::build_features(ds, FeatureMode::WITH_AOI, videos, {});
  std::vector<eval::ScoredFeatures> scored;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (const auto& p = ds.manifest.participants[i]; p.cars) scored.push_back({p.participant_id, *p.cars, rows[i].values});
  eval::SeverityConfig cfg;
  cfg.seed = 1;
  cfg.jobs = jobs_arg(state);
  for (auto _ : state) benchmark::DoNotOptimize(eval::run_severity_loocv(scored, cfg));
}

void job_counts(benchmark::internal::Benchmark* b) {
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  b->Arg(1);
  if (hw > 1) b->Arg(hw);
  b->Unit(benchmark::kMillisecond)->UseRealTime();
}

}  // namespace

BENCHMARK(BM_LoadDataset)->Apply(job_counts);
BENCHMARK(BM_ClassificationCv)->Apply(job_counts);
BENCHMARK(BM_SeverityLoocv)->Apply(job_counts);

BENCHMARK_MAIN();
