#include "srm/drive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "srm/error.hpp"
#include "srm/parallel.hpp"

namespace srm::drive {

namespace {

constexpr double kPi = 3.14159265358979323846;

double electrical_deg(double theta_mech, double unaligned, int rotor_teeth) {
  double e = std::fmod((theta_mech - unaligned) * rotor_teeth, 360.0);
  if (e < 0.0) e += 360.0;
  return e;
}

enum class PhaseMode { kOn, kDemag, kOff };

}  // namespace

void check(const DriveConfig& c) {
  if (!(c.v_dc > 0.0)) throw Error(ErrorCode::kDomain, "V_dc must be positive");
  if (!(c.r_phase >= 0.0)) throw Error(ErrorCode::kDomain, "R_phase must be non-negative");
  if (!(c.turn_on_deg >= 0.0 && c.turn_on_deg <= c.turn_off_deg && c.turn_off_deg < 360.0)) {
    throw Error(ErrorCode::kDomain, "firing angles must satisfy 0 <= turn_on <= turn_off < 360");
  }
  if (!(c.step > 0.0)) throw Error(ErrorCode::kDomain, "time step must be positive");
  if (!(c.speed_rpm > 0.0)) throw Error(ErrorCode::kDomain, "speed must be positive");
  if (c.mode == SpeedMode::kDynamic && !(c.inertia > 0.0)) {
    throw Error(ErrorCode::kDomain, "rotor inertia must be positive in dynamic mode");
  }
}

DriveResult simulate(const DriveConfig& config, const characteristics::FluxLinkageMap& map, int cycles) {
  check(config);
  if (cycles < 1) throw Error(ErrorCode::kDomain, "at least one cycle is required");
  if (map.theta_deg.empty() || map.phase_unaligned_deg.empty()) {
    throw Error(ErrorCode::kDomain, "flux map is empty");
  }
  const int phases = static_cast<int>(map.phase_unaligned_deg.size());
  const int nr = map.rotor_teeth;

  DriveResult r;
  r.config = config;
  r.rotor_teeth = nr;
  const double omega0 = config.speed_rpm * 2.0 * kPi / 60.0;
  r.cycle_time = 2.0 * kPi / (nr * omega0);
  const int steps_per_cycle = std::max(1, static_cast<int>(std::ceil(r.cycle_time / config.step - 1e-9)));
  const double dt = r.cycle_time / steps_per_cycle;
  r.step = dt;
  const int total = steps_per_cycle * cycles;

  r.current.assign(phases, {});
  r.voltage.assign(phases, {});
  r.lambda.assign(phases, {});
  r.torque.assign(phases, {});
  for (int p = 0; p < phases; ++p) {
    r.current[p].reserve(total + 1);
    r.voltage[p].reserve(total + 1);
    r.lambda[p].reserve(total + 1);
    r.torque[p].reserve(total + 1);
  }

  // Map coordinates of phase p at rotor angle theta.
  auto map_theta = [&](int p, double theta) { return theta - map.phase_unaligned_deg[p] + map.unaligned_deg; };

  std::vector<double> lam(phases, 0.0), prev_dl(phases, 0.0);
  std::vector<PhaseMode> prev_mode(phases, PhaseMode::kOff);
  std::vector<int> flips(phases, 0);
  double theta = map.unaligned_deg;
  double omega = omega0;
  double t = 0.0;
  for (int k = 0; k <= total; ++k) {
    double t_total = 0.0;
    std::vector<double> i(phases), v(phases), dl(phases, 0.0);
    for (int p = 0; p < phases; ++p) {
      const double mt = map_theta(p, theta);
      double cur;
      try {
        cur = map.current_at(mt, lam[p]);
      } catch (const Error& e) {
        throw Error(e.code(), fmt::format("phase {} at t = {:.6g} s: {}", p, t, e.what()), e.details());
      }
      i[p] = cur;
      const double tq = cur > 0.0 ? map.torque_at(mt, cur) : 0.0;
      r.torque[p].push_back(tq);
      t_total += tq;

      const double e = electrical_deg(theta, map.phase_unaligned_deg[p], nr);
      PhaseMode mode = PhaseMode::kOff;
      if (e >= config.turn_on_deg && e < config.turn_off_deg) {
        mode = PhaseMode::kOn;
      } else if (lam[p] > 0.0) {
        mode = PhaseMode::kDemag;
      }
      const double applied = mode == PhaseMode::kOn ? config.v_dc : mode == PhaseMode::kDemag ? -config.v_dc : 0.0;
      double rate = applied - config.r_phase * cur;
      if (mode == PhaseMode::kOff) rate = 0.0;
      double next = lam[p] + dt * rate;
      if (next < 0.0) next = 0.0;
      dl[p] = next - lam[p];
      // Step average so that the integral of (v - R i) is exactly the flux change.
      v[p] = mode == PhaseMode::kOff ? 0.0 : dl[p] / dt + config.r_phase * cur;
      // Within one switching state the flux moves monotonically, so repeated
      // sign flips of the update mean the explicit step is too long.
      if (mode == prev_mode[p] && mode != PhaseMode::kOff && dl[p] * prev_dl[p] < 0.0) {
        if (++flips[p] >= 3) {
          throw Error(ErrorCode::kStepUnstable,
                      fmt::format("flux update of phase {} oscillates at t = {:.6g} s; reduce the step", p, t));
        }
      } else {
        flips[p] = 0;
      }
      prev_dl[p] = dl[p];
      prev_mode[p] = mode;
    }
    r.t.push_back(t);
    r.theta_deg.push_back(theta);
    r.omega.push_back(omega);
    r.total_torque.push_back(t_total);
    for (int p = 0; p < phases; ++p) {
      r.current[p].push_back(i[p]);
      r.voltage[p].push_back(k == total ? 0.0 : v[p]);
      r.lambda[p].push_back(lam[p]);
    }
    if (k == total) break;
    for (int p = 0; p < phases; ++p) lam[p] += dl[p];
    if (config.mode == SpeedMode::kDynamic) {
      omega += dt * (t_total - config.load_torque) / config.inertia;
    }
    theta += omega * dt * 180.0 / kPi;
    t += dt;
  }

  // Last electrical cycle: samples [begin, total), rectangle rule per step.
  const int begin = total - steps_per_cycle;
  r.window_begin = begin;
  const double span = steps_per_cycle * dt;
  double torque_sum = 0.0, copper = 0.0, input = 0.0;
  r.peak_current.assign(phases, 0.0);
  for (int k = begin; k < total; ++k) {
    torque_sum += r.total_torque[k];
    for (int p = 0; p < phases; ++p) {
      const double cur = r.current[p][k];
      copper += config.r_phase * cur * cur;
      input += r.voltage[p][k] * cur;
      r.peak_current[p] = std::max(r.peak_current[p], cur);
    }
  }
  r.mean_torque = torque_sum / steps_per_cycle;
  r.mean_speed = (r.theta_deg[total] - r.theta_deg[begin]) * kPi / 180.0 / span;
  r.output_power = r.mean_torque * r.mean_speed;
  r.copper_loss = copper / steps_per_cycle;
  r.electrical_input = input / steps_per_cycle;

  // Extinction: the last conducting angle of each pulse. Current before
  // turn-on means the pulse wrapped into the next cycle.
  r.extinction_deg.assign(phases, -1.0);
  r.extinguished_before_aligned = true;
  for (int p = 0; p < phases; ++p) {
    bool wrapped = false;
    for (int k = begin; k < total; ++k) {
      if (r.current[p][k] <= 0.0) continue;
      const double e = electrical_deg(r.theta_deg[k], map.phase_unaligned_deg[p], nr);
      if (e < config.turn_on_deg) {
        wrapped = true;
      } else {
        r.extinction_deg[p] = std::max(r.extinction_deg[p], e + nr * r.omega[k] * dt * 180.0 / kPi);
      }
    }
    if (wrapped) r.extinction_deg[p] = -1.0;
    if (wrapped || r.extinction_deg[p] > 180.0) r.extinguished_before_aligned = false;
  }
  return r;
}

const char* to_string(LossAccounting a) {
  return a == LossAccounting::kZeroCopper ? "zero_copper" : "with_copper";
}

EfficiencyReport efficiency_report(double torque, double speed_rpm, double output_w, double copper_w,
                                   double core_w) {
  EfficiencyReport rep;
  rep.accounting = copper_w == 0.0 ? LossAccounting::kZeroCopper : LossAccounting::kWithCopper;
  rep.torque = torque;
  rep.speed_rpm = speed_rpm;
  rep.output_power = output_w;
  rep.copper_loss = copper_w;
  rep.core_loss = core_w;
  rep.input_power = output_w + copper_w + core_w;
  rep.efficiency_pct = rep.input_power > 0.0 ? 100.0 * output_w / rep.input_power : (output_w == 0.0 ? 100.0 : 0.0);
  return rep;
}

EfficiencyReport efficiency_report(const DriveResult& result, double core_loss_w, LossAccounting accounting) {
  const double copper = accounting == LossAccounting::kWithCopper ? result.copper_loss : 0.0;
  EfficiencyReport rep = efficiency_report(result.mean_torque, result.mean_speed * 60.0 / (2.0 * kPi),
                                           result.output_power, copper, core_loss_w);
  rep.accounting = accounting;
  return rep;
}

std::string report_text(const EfficiencyReport& r) {
  auto n = characteristics::format_number;
  std::string s;
  s += fmt::format("Speed, rpm: {}\n", n(r.speed_rpm));
  s += fmt::format("Torque, N.m: {}\n", n(r.torque));
  s += fmt::format("Output power, W: {}\n", n(r.output_power));
  s += fmt::format("Copper loss, W: {}\n", n(r.copper_loss));
  s += fmt::format("Core loss, W: {}\n", n(r.core_loss));
  s += fmt::format("Input power, W: {}\n", n(r.input_power));
  s += fmt::format("Efficiency, %: {}\n", n(r.efficiency_pct));
  s += fmt::format("Accounting: {}\n", to_string(r.accounting));
  return s;
}

TuneResult tune(const DriveConfig& base, const characteristics::FluxLinkageMap& map, const TuneOptions& options) {
  check(base);
  if (options.turn_on_deg.empty()) throw Error(ErrorCode::kDomain, "no turn-on angles to try");
  if (!(options.target_torque > 0.0)) throw Error(ErrorCode::kDomain, "target torque must be positive");

  struct Candidate {
    bool ok = false;
    double rms = 0.0;
    DriveConfig config;
    DriveResult result;
  };
  std::vector<Candidate> found(options.turn_on_deg.size());
  parallel_for(static_cast<int>(found.size()), options.threads, [&](int c) {
    DriveConfig cfg = base;
    cfg.turn_on_deg = options.turn_on_deg[c];
    auto run = [&](double off) {
      cfg.turn_off_deg = off;
      try {
        return std::optional<DriveResult>(simulate(cfg, map, options.cycles));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kMapRangeExceeded) return std::optional<DriveResult>();
        throw;
      }
    };
    double lo = cfg.turn_on_deg, hi = options.max_turn_off_deg;
    auto top = run(hi);
    // Shrink the window until the map covers the pulse.
    while (!top && hi - lo > 1e-3) {
      hi = 0.5 * (lo + hi);
      top = run(hi);
    }
    if (!top || top->mean_torque < options.target_torque) return;
    DriveResult best = *top;
    for (int k = 0; k < options.bisections; ++k) {
      const double mid = 0.5 * (lo + hi);
      const auto r = run(mid);
      if (r && r->mean_torque >= options.target_torque) {
        hi = mid;
        best = *r;
      } else {
        lo = mid;
      }
    }
    if (options.require_extinction && !best.extinguished_before_aligned) return;
    double sq = 0.0;
    for (const auto& ph : best.current) {
      for (std::size_t k = best.window_begin; k + 1 < ph.size(); ++k) sq += ph[k] * ph[k];
    }
    found[c].ok = true;
    found[c].rms = std::sqrt(sq / (best.current.size() * (best.current[0].size() - 1 - best.window_begin)));
    found[c].config = best.config;
    found[c].result = std::move(best);
  });
  const Candidate* pick = nullptr;
  for (const auto& c : found) {
    if (c.ok && (!pick || c.rms < pick->rms)) pick = &c;
  }
  if (!pick) {
    throw Error(ErrorCode::kDomain,
                fmt::format("no firing angles reach {:.6g} N m at {:.6g} rpm", options.target_torque, base.speed_rpm));
  }
  return {pick->config, pick->result};
}

std::string waveform_csv(const DriveResult& r, int every) {
  using characteristics::format_number;
  every = std::max(1, every);
  std::string s = "t_s,theta_mech_deg,phase,i_A,v_V,lambda_Wb,torque_Nm\n";
  for (std::size_t k = 0; k < r.t.size(); k += every) {
    for (std::size_t p = 0; p < r.current.size(); ++p) {
      s += fmt::format("{},{},{},{},{},{},{}\n", format_number(r.t[k]), format_number(r.theta_deg[k]), p,
                       format_number(r.current[p][k]), format_number(r.voltage[p][k]),
                       format_number(r.lambda[p][k]), format_number(r.torque[p][k]));
    }
  }
  return s;
}

}  // namespace srm::drive
