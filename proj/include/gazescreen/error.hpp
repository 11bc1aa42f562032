#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gazescreen {

enum class ErrorCode {
  MalformedRow,
  NonMonotonicTimestamp,
  EmptyLog,
  DegenerateBox,
  FrameOutOfRange,
  RateMismatch,
  MalformedManifest,
  InsufficientData,
  NoAoiInWindow,
  MissingVideo,
  DimensionMismatch,
  SingleClass,
  NonFiniteFeature,
  DivergenceDetected,
  TooFewPerClass,
  MissingFeatures,
  DurationTooLong,
  AoiNeverInAnyWindow,
  TooFewParticipants,
  InvalidConfig,
  IoFailure,
};

std::string_view to_string(ErrorCode code);

// Every recoverable failure in the library is reported through this type.
// `context` names the offending file, participant or video; `line` is the
// 1-based file line (header = line 1) for parse errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string context = {},
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  const std::string& context() const noexcept { return context_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::string context_;
  std::optional<std::size_t> line_;
};

}  // namespace gazescreen
