#pragma once

#include <string>
#include <vector>

#include "srm/fieldsolver.hpp"
#include "srm/geometry.hpp"

namespace srm::characteristics {

enum class MeanConvention {
  kHalfStroke,          // unaligned -> aligned average of one phase
  kFullPeriod,          // average over the whole electrical period
  kCommutatedEnvelope,  // average of the max over all phases
};
const char* to_string(MeanConvention c);
MeanConvention parse_mean_convention(const std::string& name);

struct SweepOptions {
  geometry::MeshPreset preset = geometry::MeshPreset::kCoarse;
  int phase = 0;
  double delta_deg = 0.25;
  MeanConvention convention = MeanConvention::kHalfStroke;
  int threads = 0;  // <= 0: default pool size
  fieldsolver::SolveOptions solve{};
};

/// Machine mesh at theta = 0 for the design's family.
mesh::PlanarMesh machine_mesh(const geometry::MotorDesign& design, geometry::MeshPreset preset);

struct TorqueCurve {
  double current = 0.0;
  std::vector<double> theta_deg;  // unaligned + k * pitch / (count - 1)
  std::vector<double> torque;     // N m
  double mean = 0.0;
  double peak = 0.0;
};

struct MeanPeak {
  double mean = 0.0;
  double peak = 0.0;
};

/// peak = max |T|. The samples start at the unaligned position of the
/// excited phase and `period_deg` is the electrical period (defaults to
/// the sample span). Trapezoidal rule with linear interpolation at the
/// window ends.
MeanPeak mean_peak(const std::vector<double>& theta_deg, const std::vector<double>& torque,
                   MeanConvention convention = MeanConvention::kHalfStroke, double period_deg = 0.0,
                   int phases = 3);

/// Single-phase static torque over one electrical period per current.
std::vector<TorqueCurve> sweep_torque_angle(const geometry::MotorDesign& design,
                                            const std::vector<double>& currents, int theta_count = 31,
                                            const SweepOptions& options = {});

/// Half-stroke mean torque from the virtual-work identity
/// (W'(aligned) - W'(unaligned)) / (pitch / 2): two solves instead of a sweep.
double half_stroke_mean_torque(const geometry::MotorDesign& design, double current,
                               const SweepOptions& options = {});

/// Largest flux density in the stator yoke at the aligned position, taken as
/// the area-weighted 95th percentile so re-entrant corner peaks do not
/// dominate.
double aligned_yoke_flux_density(const geometry::MotorDesign& design, double current,
                                 const SweepOptions& options = {});

struct StrokeEvaluation {
  double mean_torque = 0.0;  // half-stroke, virtual work
  double yoke_flux_density = 0.0;
};
/// Both of the above from the same two solves.
StrokeEvaluation evaluate_half_stroke(const geometry::MotorDesign& design, double current,
                                      const SweepOptions& options = {});

struct FluxLinkageMap {
  int rotor_teeth = 0;
  int phases = 3;
  double period_deg = 0.0;            // mechanical
  double unaligned_deg = 0.0;         // theta of the first row
  std::vector<double> phase_unaligned_deg;  // every phase; the map is phase 0's
  std::vector<double> theta_deg;      // first and last rows are one period apart
  std::vector<double> current;        // A, starts at 0
  std::vector<std::vector<double>> lambda;  // [theta][current], excited phase
  std::vector<std::vector<double>> torque;  // [theta][current]
  /// d(lambda)/d(theta) in Wb/rad, which equals dT/di; empty for maps built
  /// elsewhere, in which case torque is bilinear in (theta, i).
  std::vector<std::vector<double>> torque_slope;

  /// Lookups wrap theta by the period and need the current in range. Flux
  /// linkage is bilinear; torque is linear in theta and cubic Hermite in i
  /// with the slopes above, so T ~ i^2 is exact below saturation.
  double lambda_at(double theta_deg, double current) const;
  double torque_at(double theta_deg, double current) const;
  /// Current for a given flux linkage at theta (inverse of lambda_at).
  double current_at(double theta_deg, double lambda) const;
  double max_current() const { return current.back(); }
};

FluxLinkageMap build_flux_map(const geometry::MotorDesign& design, int theta_count, int current_count,
                              double i_max, const SweepOptions& options = {});

struct CoreLossOptions {
  double current = 5.0;                // excitation used for the waveforms (A)
  int theta_count = 16;                // samples per electrical period
  double rotor_frequency_factor = 1.0; // rotor f = factor * (N_s / 2) * rpm / 60
  geometry::MeshPreset preset = geometry::MeshPreset::kCoarse;
  int threads = 0;
};

struct CoreLoss {
  double stator_hysteresis = 0.0;
  double stator_eddy = 0.0;
  double rotor_hysteresis = 0.0;
  double rotor_eddy = 0.0;
  double stator_frequency_hz = 0.0;
  double rotor_frequency_hz = 0.0;
  double total() const { return stator_hysteresis + stator_eddy + rotor_hysteresis + rotor_eddy; }
};

/// Per-element peak |B| over one electrical period with each phase excited
/// in turn, then Steinmetz density times element mass.
CoreLoss core_loss(const geometry::MotorDesign& design, double speed_rpm, const CoreLossOptions& options = {});
/// Same accounting from precomputed per-element peak flux densities.
CoreLoss core_loss_from_peaks(const mesh::PlanarMesh& mesh, const std::vector<double>& b_peak,
                              const materials::LossCoefficients& loss, double stack_length_m,
                              double stator_hz, double rotor_hz);

struct ComparisonRow {
  double current = 0.0;
  double mean_a = 0.0, mean_b = 0.0;
  double peak_a = 0.0, peak_b = 0.0;
  double mean_delta_pct = 0.0;  // (a - b) / a * 100
  double peak_delta_pct = 0.0;
};

/// Throws ENVELOPE_MISMATCH unless both designs share D_o and L.
std::vector<ComparisonRow> compare(const geometry::MotorDesign& a, const geometry::MotorDesign& b,
                                   const std::vector<double>& currents, int theta_count = 31,
                                   const SweepOptions& options = {});

std::string sweep_csv(const std::vector<TorqueCurve>& curves);
std::string flux_map_csv(const FluxLinkageMap& map);   // theta_deg,current_A,lambda_Wb
std::string torque_map_csv(const FluxLinkageMap& map); // theta_deg,current_A,torque_Nm
std::string comparison_csv(const std::vector<ComparisonRow>& rows);
std::string summary_csv(const std::vector<TorqueCurve>& curves);
std::string format_number(double value);  // 6 significant digits

}  // namespace srm::characteristics
