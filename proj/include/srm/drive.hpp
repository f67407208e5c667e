#pragma once

#include <string>
#include <vector>

#include "srm/characteristics.hpp"

namespace srm::drive {

enum class SpeedMode { kFixedSpeed, kDynamic };

/// Asymmetric half-bridge, single-pulse firing. Angles are electrical
/// degrees from each phase's unaligned position (180 = aligned).
struct DriveConfig {
  double v_dc = 120.0;        // V
  double r_phase = 0.0;       // ohm
  double turn_on_deg = 0.0;
  double turn_off_deg = 90.0;
  SpeedMode mode = SpeedMode::kFixedSpeed;
  double speed_rpm = 2000.0;  // held in fixed-speed mode, initial value otherwise
  double load_torque = 0.0;   // N m, dynamic mode
  double inertia = 1e-4;      // kg m^2, dynamic mode
  double step = 0.5e-6;       // s, upper bound; rounded to divide the cycle
};

/// Throws DOMAIN when an invariant fails.
void check(const DriveConfig& config);

struct DriveResult {
  DriveConfig config;
  int rotor_teeth = 0;
  double cycle_time = 0.0;  // electrical period at the nominal speed (s)
  double step = 0.0;        // step actually used (s)
  std::vector<double> t;          // s
  std::vector<double> theta_deg;  // mechanical
  std::vector<double> omega;      // rad/s
  // [phase][sample]; voltage is the step average actually applied.
  std::vector<std::vector<double>> current, voltage, lambda, torque;
  std::vector<double> total_torque;

  // Averages over the last electrical cycle.
  int window_begin = 0;  // first sample of the window
  double mean_torque = 0.0;
  double mean_speed = 0.0;     // rad/s
  double output_power = 0.0;   // mean_torque * mean_speed
  double copper_loss = 0.0;
  double electrical_input = 0.0;  // mean of sum v i
  std::vector<double> peak_current;
  /// Electrical angle (deg, from unaligned) at which each phase's current
  /// returns to zero after turn-off in the window; negative if it never does.
  std::vector<double> extinction_deg;
  bool extinguished_before_aligned = false;
};

/// λ-state integration: dλ/dt = v - R i with i from the inverse map.
/// Throws MAP_RANGE_EXCEEDED when a current leaves the map and STEP_UNSTABLE
/// when the flux update oscillates with growing amplitude.
DriveResult simulate(const DriveConfig& config, const characteristics::FluxLinkageMap& map, int cycles = 4);

enum class LossAccounting {
  kZeroCopper,  // input = output + core
  kWithCopper,  // input = output + copper + core
};
const char* to_string(LossAccounting a);

struct EfficiencyReport {
  LossAccounting accounting = LossAccounting::kZeroCopper;
  double torque = 0.0;
  double speed_rpm = 0.0;
  double output_power = 0.0;
  double copper_loss = 0.0;  // as counted
  double core_loss = 0.0;
  double input_power = 0.0;
  double efficiency_pct = 0.0;
};

EfficiencyReport efficiency_report(const DriveResult& result, double core_loss_w,
                                   LossAccounting accounting = LossAccounting::kZeroCopper);
/// Arithmetic form: efficiency = output / (output + copper + core).
EfficiencyReport efficiency_report(double torque, double speed_rpm, double output_w, double copper_w,
                                   double core_w);
std::string report_text(const EfficiencyReport& report);

struct TuneOptions {
  double target_torque = 0.783;  // N m
  std::vector<double> turn_on_deg{0.0, 10.0, 20.0, 30.0, 40.0};
  double max_turn_off_deg = 180.0;
  int cycles = 4;
  int bisections = 24;
  bool require_extinction = true;  // current gone before aligned
  int threads = 0;
};

struct TuneResult {
  DriveConfig config;
  DriveResult result;
};

/// For each turn-on angle, bisects turn-off to hit the target mean torque;
/// keeps the candidate with the lowest RMS phase current. Throws DOMAIN when
/// no candidate reaches the target.
TuneResult tune(const DriveConfig& base, const characteristics::FluxLinkageMap& map, const TuneOptions& options);

/// `t_s,theta_mech_deg,phase,i_A,v_V,lambda_Wb,torque_Nm`, one row per
/// sample and phase; `every` thins the samples.
std::string waveform_csv(const DriveResult& result, int every = 1);

}  // namespace srm::drive
