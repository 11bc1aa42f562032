#pragma once

// Oracle comparison and symmetry checks over random micro-instances; used by
// the unit tests and by the acceptance runner.

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles/feature_oracle.hpp"
#include "support/micro.hpp"

namespace testsupport {

struct CheckReport {
  std::size_t compared = 0;      // feature values compared numerically
  std::size_t error_matches = 0; // both sides agreed on an error outcome
  double worst_rel_err = 0.0;
  std::vector<std::string> failures;
};

inline oracle::Outcome outcome_of(gazescreen::ErrorCode c) {
  switch (c) {
    case gazescreen::ErrorCode::InsufficientData: return oracle::Outcome::InsufficientData;
    case gazescreen::ErrorCode::NoAoiInWindow: return oracle::Outcome::NoAoiInWindow;
    default: return oracle::Outcome::Value;
  }
}

using LibFeature = std::function<double(const MicroInstance&)>;
using OracleFeature = std::function<oracle::Result(const MicroInstance&)>;

struct NamedFeature {
  const char* name;
  LibFeature lib;
  OracleFeature ref;
};

inline std::vector<NamedFeature> all_features() {
  using namespace gazescreen;
  return {
      {"F1", [](const MicroInstance& m) { return feature_std_gaze(m.aligned, m.window); },
       [](const MicroInstance& m) { return oracle::std_gaze(m.aligned, m.window); }},
      {"F2", [](const MicroInstance& m) { return feature_std_diff(m.aligned, m.window); },
       [](const MicroInstance& m) { return oracle::std_diff(m.aligned, m.window); }},
      {"F3", [](const MicroInstance& m) { return feature_std_manhattan(m.aligned, m.aoi, m.window); },
       [](const MicroInstance& m) { return oracle::std_manhattan(m.aligned, m.aoi, m.window); }},
      {"F4", [](const MicroInstance& m) { return feature_rmse_aoi(m.aligned, m.aoi, m.window); },
       [](const MicroInstance& m) { return oracle::rmse_aoi(m.aligned, m.aoi, m.window); }},
      {"F5", [](const MicroInstance& m) { return feature_delay(m.aligned, m.aoi, m.window); },
       [](const MicroInstance& m) { return oracle::delay(m.aligned, m.aoi, m.window); }},
  };
}

// Relative error with a floor of 1e-12 on the scale, so values that are zero
// up to rounding on both sides compare equal.
inline double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-12});
}

inline CheckReport compare_with_oracle(std::size_t instances, std::uint64_t seed, double tol) {
  CheckReport rep;
  const auto features = all_features();
  for (std::size_t i = 0; i < instances; ++i) {
    const auto m = random_micro_instance(gazescreen::derive_seed(seed, {i}));
    for (const auto& f : features) {
      const auto want = f.ref(m);
      std::ostringstream where;
      where << f.name << " instance " << i;
      try {
        const double got = f.lib(m);
        if (want.outcome != oracle::Outcome::Value) {
          rep.failures.push_back(where.str() + ": library returned a value, oracle an error");
          continue;
        }
        const double e = rel_err(got, want.value);
        rep.worst_rel_err = std::max(rep.worst_rel_err, e);
        ++rep.compared;
        if (e > tol) {
          where << ": " << got << " vs " << want.value;
          rep.failures.push_back(where.str());
        }
      } catch (const gazescreen::Error& err) {
        if (outcome_of(err.code()) != want.outcome || want.outcome == oracle::Outcome::Value)
          rep.failures.push_back(where.str() + ": unexpected " + err.what());
        else
          ++rep.error_matches;
      }
    }
  }
  return rep;
}

// Applies p -> s * p + (dx, dy) to gaze points and AOI boxes alike.
inline MicroInstance transformed(const MicroInstance& m, double s, double dx, double dy) {
  MicroInstance out = m;
  for (auto& f : out.aligned.frames)
    if (f) {
      f->x = s * f->x + dx;
      f->y = s * f->y + dy;
    }
  std::vector<gazescreen::AoiBox> boxes(m.aoi.boxes().begin(), m.aoi.boxes().end());
  for (auto& b : boxes) {
    b.x_min = s * b.x_min + dx;
    b.x_max = s * b.x_max + dx;
    b.y_min = s * b.y_min + dy;
    b.y_max = s * b.y_max + dy;
  }
  out.aoi = gazescreen::AoiTrack(m.aoi.video_id(), std::move(boxes));
  return out;
}

struct SymmetryReport {
  std::size_t checks = 0;
  double worst = 0.0;
  std::vector<std::string> failures;
};

// Checks F2 translation invariance, F1-F4 scale equivariance and F5 scale
// invariance on `instances` random micro-instances. Instances where a feature
// is undefined are skipped for that feature.
inline SymmetryReport check_symmetries(std::size_t instances, std::uint64_t seed, double tol) {
  SymmetryReport rep;
  const auto features = all_features();
  auto record = [&](const std::string& what, double lhs, double rhs, double scale) {
    const double e = std::fabs(lhs - rhs) / std::max(1.0, scale);
    rep.worst = std::max(rep.worst, e);
    ++rep.checks;
    if (e > tol) {
      std::ostringstream os;
      os << what << ": " << lhs << " vs " << rhs;
      rep.failures.push_back(os.str());
    }
  };
  for (std::size_t i = 0; i < instances; ++i) {
    gazescreen::Rng rng(gazescreen::derive_seed(seed, {i}));
    // Shrink into [0.1, 0.3]^2 first so every transform keeps boxes on screen.
    const auto m = transformed(random_micro_instance(gazescreen::derive_seed(seed, {i, 1})), 0.2, 0.1, 0.1);
    const double s = rng.uniform(0.5, 3.0);
    const double dx = rng.uniform(-0.1, 0.6), dy = rng.uniform(-0.1, 0.6);
    const auto moved = transformed(m, 1.0, dx, dy);
    const auto scaled = transformed(m, s, 0.0, 0.0);
    const std::string tag = " instance " + std::to_string(i);
    for (std::size_t k = 0; k < features.size(); ++k) {
      double base;
      try {
        base = features[k].lib(m);
      } catch (const gazescreen::Error&) {
        continue;
      }
      if (k == 1) record(std::string("F2 translation") + tag, features[k].lib(moved), base, base);
      if (k < 4)
        record(std::string(features[k].name) + " scale" + tag, features[k].lib(scaled), s * base, s * base);
      else
        record(std::string("F5 scale") + tag, features[k].lib(scaled), base, base);
    }
  }
  return rep;
}

}  // namespace testsupport
