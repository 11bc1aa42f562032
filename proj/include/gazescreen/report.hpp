#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "gazescreen/eval.hpp"

namespace gazescreen::report {

// Published accuracy and error figures on the original human cohort,
// carried in every report for side-by-side comparison.
nlohmann::json published_reference();

nlohmann::json to_json(const eval::ClassificationSummary& s);
nlohmann::json to_json(const std::vector<eval::DurationPoint>& curve);
nlohmann::json to_json(const eval::SeveritySummary& s);

std::string cv_folds_csv(const eval::ClassificationSummary& s);
std::string duration_curve_csv(const std::vector<eval::DurationPoint>& curve);
std::string severity_csv(const eval::SeveritySummary& s);

// Writes text with LF endings; IoFailure on error.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace gazescreen::report
