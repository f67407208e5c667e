#include "srm/error.hpp"

namespace srm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomain: return "DOMAIN_ERROR";
    case ErrorCode::kInfeasibleGeometry: return "INFEASIBLE_GEOMETRY";
    case ErrorCode::kMeshFailure: return "MESH_FAILURE";
    case ErrorCode::kNonConvergence: return "NON_CONVERGENCE";
    case ErrorCode::kSingularSystem: return "SINGULAR_SYSTEM";
    case ErrorCode::kContourOutsideGap: return "CONTOUR_OUTSIDE_GAP";
    case ErrorCode::kEnvelopeMismatch: return "ENVELOPE_MISMATCH";
    case ErrorCode::kNoFeasibleStart: return "NO_FEASIBLE_START";
    case ErrorCode::kMapRangeExceeded: return "MAP_RANGE_EXCEEDED";
    case ErrorCode::kStepUnstable: return "STEP_UNSTABLE";
    case ErrorCode::kIo: return "IO_ERROR";
  }
  return "DOMAIN_ERROR";
}

}  // namespace srm
