#pragma once

#include <string_view>
#include <vector>

namespace srm::topology {

enum class Infeasibility {
  kNone,
  kAdjacentPhaseIntersection,
  kFullAlignmentDegeneracy,
};

std::string_view to_string(Infeasibility reason);

/// A stator/rotor teeth count combination for a C-core machine with
/// `phases` phases, `cores_per_phase` C-cores per phase and rotor index n.
struct TeethCombination {
  int phases = 0;
  int cores_per_phase = 0;
  int rotor_index = 0;
  int stator_teeth = 0;
  int rotor_teeth = 0;
  bool feasible = false;
  Infeasibility reason = Infeasibility::kNone;
};

/// Angular centres (mechanical degrees) of every stator tooth and the rotor
/// tooth pitch; rotor teeth are uniform at that pitch.
struct ToothLayout {
  std::vector<double> stator_centers_deg;
  double rotor_pitch_deg = 0.0;
};

int stator_teeth_count(int phases, int cores_per_phase);
int rotor_teeth_count(int cores_per_phase, int rotor_index);

/// Centre angle (deg) of C-core `core` (0 .. m*q-1); phase = core % q.
/// Cores are equally spaced, so the cores of one phase sit diametrically
/// for m = 2 and neighbouring phases are shifted by 360/(m q) deg, which is
/// a +-1/q rotor pitch electrical shift whenever N_r is not a multiple of
/// m q.
double c_core_center_deg(int phases, int cores_per_phase, int rotor_teeth,
                         int core);

/// Free angular space (deg) between neighbouring C-cores once each core spans
/// one rotor pitch plus one tooth arc. Negative or zero means the cores
/// collide.
double c_core_angular_clearance_deg(int phases, int cores_per_phase,
                                    int rotor_teeth, double tooth_arc_deg);

ToothLayout c_core_tooth_layout(int phases, int cores_per_phase,
                                int rotor_index);

/// True iff some rotor angle puts a rotor tooth centre on every stator tooth
/// centre simultaneously (within 1e-9 deg).
bool alignment_degeneracy_check(const TeethCombination& combination,
                                const ToothLayout& layout);

TeethCombination classify(int phases, int cores_per_phase, int rotor_index);

/// Every combination for n in [1, n_max], ascending n, feasible or not.
std::vector<TeethCombination> enumerate_feasible(int phases,
                                                 int cores_per_phase,
                                                 int n_max = 16);

}  // namespace srm::topology
