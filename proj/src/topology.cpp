#include "srm/topology.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "srm/error.hpp"

namespace srm::topology {

namespace {

constexpr double kAlignTolDeg = 1e-9;

void require_positive(int value, const char* name) {
  if (value < 1) {
    throw Error(ErrorCode::kDomain,
                std::string(name) + " must be >= 1, got " + std::to_string(value));
  }
}

// Maps x into (-period/2, period/2].
double centered_mod(double x, double period) {
  double r = std::fmod(x, period);
  if (r <= -0.5 * period) r += period;
  if (r > 0.5 * period) r -= period;
  return r;
}

}  // namespace

std::string_view to_string(Infeasibility reason) {
  switch (reason) {
    case Infeasibility::kNone: return "NONE";
    case Infeasibility::kAdjacentPhaseIntersection: return "ADJACENT_PHASE_INTERSECTION";
    case Infeasibility::kFullAlignmentDegeneracy: return "FULL_ALIGNMENT_DEGENERACY";
  }
  return "NONE";
}

int stator_teeth_count(int phases, int cores_per_phase) {
  require_positive(phases, "phase count q");
  require_positive(cores_per_phase, "cores per phase m");
  return 2 * cores_per_phase * phases;
}

int rotor_teeth_count(int cores_per_phase, int rotor_index) {
  require_positive(cores_per_phase, "cores per phase m");
  require_positive(rotor_index, "rotor index n");
  return 2 * cores_per_phase + 2 * rotor_index;
}

double c_core_center_deg(int phases, int cores_per_phase, int /*rotor_teeth*/,
                         int core) {
  return core * 360.0 / (phases * cores_per_phase);
}

double c_core_angular_clearance_deg(int phases, int cores_per_phase,
                                    int rotor_teeth, double tooth_arc_deg) {
  const int cores = phases * cores_per_phase;
  const double pitch = 360.0 / rotor_teeth;
  std::vector<double> centers;
  centers.reserve(cores);
  for (int j = 0; j < cores; ++j) {
    centers.push_back(c_core_center_deg(phases, cores_per_phase, rotor_teeth, j));
  }
  std::sort(centers.begin(), centers.end());
  double clearance = 1e300;
  for (int j = 0; j < cores; ++j) {
    const double next = (j + 1 < cores) ? centers[j + 1] : centers[0] + 360.0;
    clearance = std::min(clearance, next - centers[j] - pitch - tooth_arc_deg);
  }
  return clearance;
}

ToothLayout c_core_tooth_layout(int phases, int cores_per_phase, int rotor_index) {
  const int n_r = rotor_teeth_count(cores_per_phase, rotor_index);
  require_positive(phases, "phase count q");
  ToothLayout layout;
  layout.rotor_pitch_deg = 360.0 / n_r;
  for (int j = 0; j < phases * cores_per_phase; ++j) {
    const double c = c_core_center_deg(phases, cores_per_phase, n_r, j);
    layout.stator_centers_deg.push_back(c - 0.5 * layout.rotor_pitch_deg);
    layout.stator_centers_deg.push_back(c + 0.5 * layout.rotor_pitch_deg);
  }
  return layout;
}

bool alignment_degeneracy_check(const TeethCombination& /*combination*/,
                                const ToothLayout& layout) {
  const double pitch = layout.rotor_pitch_deg;
  const auto& centers = layout.stator_centers_deg;
  if (centers.empty() || pitch <= 0.0) return false;
  // Any full alignment puts a rotor tooth on every stator tooth, so each
  // stator centre (mod pitch) is a candidate rotor offset.
  for (double candidate : centers) {
    const double offset = std::fmod(candidate, pitch);
    const bool all_aligned = std::all_of(centers.begin(), centers.end(), [&](double c) {
      return std::abs(centered_mod(c - offset, pitch)) <= kAlignTolDeg;
    });
    if (all_aligned) return true;
  }
  return false;
}

TeethCombination classify(int phases, int cores_per_phase, int rotor_index) {
  TeethCombination tc;
  tc.phases = phases;
  tc.cores_per_phase = cores_per_phase;
  tc.rotor_index = rotor_index;
  tc.stator_teeth = stator_teeth_count(phases, cores_per_phase);
  tc.rotor_teeth = rotor_teeth_count(cores_per_phase, rotor_index);

  // Zero-width teeth: cores collide when neighbouring tooth centres meet.
  const double clearance =
      c_core_angular_clearance_deg(phases, cores_per_phase, tc.rotor_teeth, 0.0);
  if (clearance <= kAlignTolDeg) {
    tc.feasible = false;
    tc.reason = Infeasibility::kAdjacentPhaseIntersection;
    return tc;
  }
  if (alignment_degeneracy_check(tc, c_core_tooth_layout(phases, cores_per_phase, rotor_index))) {
    tc.feasible = false;
    tc.reason = Infeasibility::kFullAlignmentDegeneracy;
    return tc;
  }
  tc.feasible = true;
  tc.reason = Infeasibility::kNone;
  return tc;
}

std::vector<TeethCombination> enumerate_feasible(int phases, int cores_per_phase,
                                                 int n_max) {
  require_positive(n_max, "n_max");
  std::vector<TeethCombination> out;
  out.reserve(n_max);
  for (int n = 1; n <= n_max; ++n) out.push_back(classify(phases, cores_per_phase, n));
  return out;
}

}  // namespace srm::topology
