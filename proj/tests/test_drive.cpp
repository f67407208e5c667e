#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "srm/drive.hpp"
#include "srm/error.hpp"

using namespace srm;
using namespace srm::drive;

namespace {

const characteristics::FluxLinkageMap& map_12_14() {
  static const characteristics::FluxLinkageMap map =
      characteristics::build_flux_map(geometry::table1_12_14(), 19, 9, 15.0);
  return map;
}

DriveConfig operating_point() {
  DriveConfig c;
  c.v_dc = 120.0;
  c.r_phase = geometry::phase_resistance(geometry::table1_12_14(), {});
  c.turn_on_deg = 0.0;
  c.turn_off_deg = 85.0;
  c.speed_rpm = 2000.0;
  return c;
}

}  // namespace

TEST_CASE("no conduction window means no torque and no power") {
  DriveConfig c = operating_point();
  c.turn_off_deg = c.turn_on_deg;
  const auto r = simulate(c, map_12_14(), 3);
  CHECK(r.mean_torque == 0.0);
  CHECK(r.output_power == 0.0);
  CHECK(r.electrical_input == 0.0);
  for (const auto& ph : r.current) CHECK(std::all_of(ph.begin(), ph.end(), [](double i) { return i == 0.0; }));
}

TEST_CASE("single-pulse operating point") {
  const auto r = simulate(operating_point(), map_12_14(), 4);
  const double omega = 2000.0 * 2.0 * 3.14159265358979323846 / 60.0;
  SUBCASE("output power is torque times speed") {
    CHECK(r.mean_speed == doctest::Approx(omega).epsilon(1e-12));
    CHECK(r.output_power == r.mean_torque * r.mean_speed);
    CHECK(r.mean_torque > 0.3);
  }
  SUBCASE("unipolar currents") {
    for (const auto& ph : r.current) CHECK(*std::min_element(ph.begin(), ph.end()) >= 0.0);
  }
  SUBCASE("volt-second balance over the steady cycle") {
    for (std::size_t p = 0; p < r.current.size(); ++p) {
      double vs = 0.0;
      for (std::size_t k = r.window_begin; k + 1 < r.t.size(); ++k) {
        vs += (r.voltage[p][k] - r.config.r_phase * r.current[p][k]) * r.step;
      }
      CHECK(std::abs(vs) <= 1e-3 * r.config.v_dc * r.cycle_time);
    }
  }
  SUBCASE("waveforms repeat cycle over cycle") {
    const int n = static_cast<int>(r.t.size()) - 1 - r.window_begin;
    for (const auto& ph : r.current) {
      double diff = 0.0, norm = 0.0;
      for (int k = 0; k < n; ++k) {
        const double a = ph[r.window_begin + k], b = ph[r.window_begin - n + k];
        diff += (a - b) * (a - b);
        norm += a * a;
      }
      CHECK(std::sqrt(diff) <= 0.01 * std::sqrt(norm));
    }
  }
  SUBCASE("current is gone before the aligned position") {
    CHECK(r.extinguished_before_aligned);
    for (double e : r.extinction_deg) {
      CHECK(e > r.config.turn_off_deg);
      CHECK(e < 180.0);
    }
  }
  SUBCASE("energy balance between the electrical and mechanical sides") {
    CHECK(r.electrical_input - r.copper_loss == doctest::Approx(r.output_power).epsilon(0.1));
  }
  SUBCASE("phases carry identical pulses") {
    CHECK(r.peak_current[1] == doctest::Approx(r.peak_current[0]).epsilon(0.01));
    CHECK(r.peak_current[2] == doctest::Approx(r.peak_current[0]).epsilon(0.01));
  }
}

TEST_CASE("halving the step changes the mean torque by under 1%") {
  DriveConfig c = operating_point();
  c.step = 1e-6;
  const double coarse = simulate(c, map_12_14(), 3).mean_torque;
  c.step = 0.5e-6;
  const double fine = simulate(c, map_12_14(), 3).mean_torque;
  CHECK(fine == doctest::Approx(coarse).epsilon(0.01));
}

TEST_CASE("late turn-off drives current past the aligned position") {
  DriveConfig c = operating_point();
  c.v_dc = 48.0;
  c.turn_off_deg = 150.0;
  const auto r = simulate(c, map_12_14(), 4);
  CHECK_FALSE(r.extinguished_before_aligned);
}

TEST_CASE("drive error paths") {
  SUBCASE("current beyond the map") {
    DriveConfig c = operating_point();
    c.v_dc = 300.0;
    c.turn_off_deg = 150.0;
    try {
      simulate(c, map_12_14(), 2);
      FAIL("expected MAP_RANGE_EXCEEDED");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMapRangeExceeded);
    }
  }
  SUBCASE("step too long for the winding time constant") {
    DriveConfig c = operating_point();
    c.r_phase = 2000.0;
    c.step = 20e-6;
    try {
      simulate(c, map_12_14(), 2);
      FAIL("expected STEP_UNSTABLE");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kStepUnstable);
    }
  }
  SUBCASE("config invariants") {
    DriveConfig c = operating_point();
    c.turn_on_deg = 100.0;
    CHECK_THROWS_AS(check(c), Error);
    c = operating_point();
    c.v_dc = 0.0;
    CHECK_THROWS_AS(check(c), Error);
    c = operating_point();
    c.step = 0.0;
    CHECK_THROWS_AS(check(c), Error);
  }
}

TEST_CASE("dynamic mode accelerates an unloaded rotor") {
  DriveConfig c = operating_point();
  c.mode = SpeedMode::kDynamic;
  c.inertia = 1e-3;
  const auto r = simulate(c, map_12_14(), 4);
  CHECK(r.omega.back() > r.omega.front());
  CHECK(r.output_power == r.mean_torque * r.mean_speed);
}

TEST_CASE("efficiency arithmetic") {
  CHECK(efficiency_report(1.0, 1000.0, 100.0, 0.0, 0.0).efficiency_pct == doctest::Approx(100.0));
  const auto table = efficiency_report(0.783, 2000.0, 163.99, 0.0, 25.77);
  CHECK(table.input_power == doctest::Approx(189.76));
  CHECK(table.efficiency_pct == doctest::Approx(86.42).epsilon(1e-4));
  CHECK(table.accounting == LossAccounting::kZeroCopper);
  CHECK(efficiency_report(1.0, 1000.0, 100.0, 10.0, 10.0).efficiency_pct == doctest::Approx(83.333333));

  const auto r = simulate(operating_point(), map_12_14(), 3);
  const auto zero = efficiency_report(r, 20.0);
  CHECK(zero.copper_loss == 0.0);
  CHECK(zero.input_power == doctest::Approx(r.output_power + 20.0));
  const auto with = efficiency_report(r, 20.0, LossAccounting::kWithCopper);
  CHECK(with.copper_loss == r.copper_loss);
  CHECK(with.efficiency_pct < zero.efficiency_pct);
  const std::string text = report_text(zero);
  CHECK(text.find("Torque, N.m: ") != std::string::npos);
  CHECK(text.find("Efficiency, %: ") != std::string::npos);
  CHECK(text.find("Accounting: zero_copper") != std::string::npos);
}

TEST_CASE("tuning reaches the target torque") {
  TuneOptions o;
  o.target_torque = 0.5;
  o.turn_on_deg = {0.0, 20.0};
  o.cycles = 3;
  const auto t = tune(operating_point(), map_12_14(), o);
  CHECK(t.result.mean_torque == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(t.result.extinguished_before_aligned);
  CHECK(t.config.turn_off_deg > t.config.turn_on_deg);
  o.target_torque = 50.0;
  CHECK_THROWS_AS(tune(operating_point(), map_12_14(), o), Error);
}

TEST_CASE("waveform CSV") {
  const auto r = simulate(operating_point(), map_12_14(), 1);
  const std::string csv = waveform_csv(r, 10);
  CHECK(csv.rfind("t_s,theta_mech_deg,phase,i_A,v_V,lambda_Wb,torque_Nm\n", 0) == 0);
  const std::size_t samples = (r.t.size() + 9) / 10;
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == 1 + 3 * samples);
}
