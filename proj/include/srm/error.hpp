#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace srm {

enum class ErrorCode {
  kDomain,
  kInfeasibleGeometry,
  kMeshFailure,
  kNonConvergence,
  kSingularSystem,
  kContourOutsideGap,
  kEnvelopeMismatch,
  kNoFeasibleStart,
  kMapRangeExceeded,
  kStepUnstable,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code plus optional structured detail
/// lines (constraint violations, residual history, offending polygon, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::vector<std::string> details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

}  // namespace srm
