#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "srm/fieldsolver.hpp"
#include "srm/geometry.hpp"
#include "srm/topology.hpp"

namespace srm::optimizer {

/// Pole-geometry variables in search order. kRotorTeeth is only valid for
/// sensitivity sweeps.
enum class Variable { kStatorYoke, kStatorPoleHeight, kStatorPoleArc, kRotorPoleHeight, kRotorPoleArc, kRotorTeeth };
inline constexpr int kVariableCount = 5;

const char* to_string(Variable v);  // b_sy, h_s, beta_s, h_r, beta_r, N_r
std::optional<Variable> parse_variable(const std::string& name);

double get(const geometry::MotorDesign& d, Variable v);
void set(geometry::MotorDesign& d, Variable v, double value);

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

struct OptimizationSpec {
  // Fixed envelope.
  geometry::Family family = geometry::Family::kCCore;
  double outer_diameter = 82.0;  // mm
  double stack_length = 25.4;    // mm
  double shaft_diameter = 14.0;  // mm
  double air_gap = 0.17;         // mm
  std::string material = "M19-24G";
  geometry::WindingSpec winding{};

  // Variable bounds in mm / deg, indexed by Variable.
  std::array<Bounds, kVariableCount> bounds{{{1.5, 6.0}, {6.0, 16.0}, {5.0, 22.0}, {2.0, 8.0}, {5.0, 22.0}}};
  int turns_min = 1;  // recomputed T_pole must land in [turns_min, turns_max]
  int turns_max = 100000;

  double rated_current = 5.0;  // A
  int budget = 200;            // FEM evaluations in the search
  geometry::MeshPreset preset = geometry::MeshPreset::kCoarse;
  geometry::MeshPreset final_preset = geometry::MeshPreset::kFine;
  int final_candidates = 3;

  // Pattern search in variables normalized to [0, 1].
  double initial_step = 0.1;
  double min_step = 0.01;

  // Soft constraint on the aligned-position yoke flux density.
  double yoke_knee = 1.9;       // T
  double yoke_penalty = 1.0;    // N m per T above the knee

  std::optional<geometry::MotorDesign> seed;  // overrides the default start
  int threads = 0;
  fieldsolver::SolveOptions solve{};
};

/// Throws DOMAIN on empty bounds, a zero budget or bad step sizes.
void check(const OptimizationSpec& spec);
/// Optional "q", "m", "n" keys fill `topology` when given.
OptimizationSpec spec_from_json(const std::string& text, topology::TeethCombination* topology = nullptr);
std::string spec_to_json(const OptimizationSpec& spec);

/// Start point: the reference design for N_r = 10, 14, 16, the 12/8 design for
/// the conventional family, otherwise the 12/14 design with arcs scaled by
/// the rotor pitch. Envelope fields come from the spec and T_pole is
/// recomputed. Not clamped or validated.
geometry::MotorDesign initial_design(const OptimizationSpec& spec, const topology::TeethCombination& topology);

/// Applies the envelope and recomputes T_pole from the winding area.
geometry::MotorDesign with_envelope(geometry::MotorDesign design, const OptimizationSpec& spec);

struct Evaluation {
  int index = -1;  // position in the trace
  geometry::MotorDesign design;
  double mean_torque = 0.0;        // N m
  double yoke_flux_density = 0.0;  // T
  double objective = 0.0;
};

/// Replaces the FEM pipeline; returns the objective (reported as the mean
/// torque too).
using ObjectiveFn = std::function<double(const geometry::MotorDesign&)>;

/// Coarse or fine FEM evaluation of one design under the spec's objective.
Evaluation evaluate(const geometry::MotorDesign& design, const OptimizationSpec& spec,
                    geometry::MeshPreset preset);

struct OptimizationResult {
  geometry::MotorDesign best;
  Evaluation best_evaluation;  // final fidelity
  Evaluation search_best;      // in-loop fidelity
  Evaluation start;            // first trace entry
  std::vector<Evaluation> trace;
  int iterations = 0;
  double final_step = 0.0;
};

/// Compass pattern search. Every iterate passes geometry validation; the
/// best few are re-evaluated at the final preset unless an objective is
/// injected. Throws NO_FEASIBLE_START when neither the clamped start nor the
/// bounds midpoint validates.
OptimizationResult optimize(const OptimizationSpec& spec, const topology::TeethCombination& topology,
                            const ObjectiveFn& objective = {});

struct SensitivityOptions {
  topology::TeethCombination topology{3, 2, 5, 12, 14, true};
  bool evaluate_torque = true;
  bool reoptimize = false;  // N_r sweeps only
  int n_max = 6;            // N_r sweeps only
};

struct SensitivitySample {
  double value = 0.0;
  int rotor_teeth = 0;
  bool feasible = false;
  std::string reason;
  double winding_area = 0.0;  // mm^2
  int turns_per_pole = 0;
  double mean_torque = 0.0;   // N m, 0 when not evaluated
};

/// Uniform samples of one variable over its bounds around the start point
/// (a single sample evaluates the start point itself). For kRotorTeeth the
/// feasible combinations up to n_max are visited instead, at most
/// sample_count of them.
std::vector<SensitivitySample> sensitivity(const OptimizationSpec& spec, Variable variable, int sample_count,
                                           const SensitivityOptions& options = {});

std::string trace_csv(const std::vector<Evaluation>& trace);
std::string sensitivity_csv(const std::vector<SensitivitySample>& samples, Variable variable);

}  // namespace srm::optimizer
