#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace p4p {

enum class ErrorCode {
  kSingularMatrix,
  kDegenerateColumns,
  kPointBehindCamera,
  kCollinearFeatures,
  kCollinearPixels,
  kDegenerateDepthRatio,
  kDepthSignError,
  kFrameMismatch,
  kInvalidCount,
  kInvalidArgument,
  kAllTrialsFailed,
};

std::string_view to_string(ErrorCode code);

// All library failures carry a code so callers can map them to exit statuses
// without parsing messages.
class PoseError : public std::runtime_error {
 public:
  PoseError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace p4p
