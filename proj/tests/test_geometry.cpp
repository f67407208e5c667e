#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "srm/error.hpp"
#include "srm/geometry.hpp"

using namespace srm;
using namespace srm::geometry;

namespace {

bool has_violation(const std::vector<Violation>& v, const std::string& text) {
  return std::any_of(v.begin(), v.end(),
                     [&](const Violation& x) { return x.constraint.find(text) != std::string::npos; });
}

std::vector<Vec2> rotor_vertices(const RegionSet& set) {
  std::vector<Vec2> out;
  for (const auto& r : set.regions) {
    if (r.tag != RegionTag::kRotorCore) continue;
    for (const auto& loop : r.loops) out.insert(out.end(), loop.begin(), loop.end());
  }
  std::sort(out.begin(), out.end(), [](Vec2 a, Vec2 b) {
    const double ka = std::round(a.x * 1e9), kb = std::round(b.x * 1e9);
    if (ka != kb) return ka < kb;
    return a.y < b.y;
  });
  return out;
}

}  // namespace

TEST_CASE("reference designs validate and build") {
  for (const auto& d : {table1_12_10(), table1_12_14(), table1_12_16()}) {
    CHECK(validate(d).empty());
    const Radii r = radii(d);
    CHECK(r.bore == doctest::Approx(26.5e-3).epsilon(1e-12));
    CHECK(r.rotor_yoke() > 0.0);
  }
  const auto set = build_cross_section(table1_12_14());
  CHECK(set.stator_tooth_count() == 12);
  CHECK(set.rotor_tooth_count() == 14);
  CHECK(set.coil_count() == 12);
  const Radii r = set.layout->radii;
  CHECK((r.bore - r.rotor_outer) == doctest::Approx(0.17e-3));
}

TEST_CASE("regions tile the disc") {
  for (const auto& d : {table1_12_10(), table1_12_14(), table1_12_16(), conventional_12_8()}) {
    const auto set = build_cross_section(d);
    const double disc = kPi * std::pow(set.layout->radii.outer, 2);
    double total = 0.0;
    for (const auto& reg : set.regions) {
      CHECK(reg.area() > 0.0);
      total += reg.area();
      for (const auto& loop : reg.loops) {
        for (const Vec2& p : loop) CHECK(norm(p) <= set.layout->radii.outer * (1 + 1e-12));
      }
    }
    CHECK(total <= disc * (1 + 1e-9));
    CHECK(total == doctest::Approx(disc).epsilon(1e-5));
    // Sector areas as the analytic oracle.
    double analytic = 0.0;
    for (const auto& reg : set.regions) {
      const auto& s = *reg.sector;
      analytic += 0.5 * (s.phi_end - s.phi_start) * (s.r_outer * s.r_outer - s.r_inner * s.r_inner);
    }
    CHECK(analytic == doctest::Approx(disc).epsilon(1e-12));
  }
}

TEST_CASE("12/12 builds although it is degenerate") {
  MotorDesign d = table1_12_14();
  d.rotor_index = 4;
  d.rotor_pole_arc = 9.6;
  CHECK_NOTHROW(build_cross_section(d));
  topology::TeethCombination tc = topology::classify(3, 2, 4);
  CHECK(topology::alignment_degeneracy_check(tc, topology::c_core_tooth_layout(3, 2, 4)));
}

TEST_CASE("infeasible and invalid designs") {
  MotorDesign d = table1_12_14();
  d.stator_pole_arc = 30.0;
  CHECK_FALSE(validate(d).empty());
  try {
    build_cross_section(d);
    FAIL("expected INFEASIBLE_GEOMETRY");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInfeasibleGeometry);
    CHECK_FALSE(e.details().empty());
  }
  MotorDesign g = table1_12_14();
  g.air_gap = 0.0;
  CHECK(has_violation(validate(g), "air gap must be positive"));
  MotorDesign c = table1_12_14();
  c.stator_yoke = 20.0;
  c.stator_pole_height = 25.0;
  CHECK(has_violation(validate(c), "radial closure"));
  MotorDesign n1 = table1_12_14();
  n1.rotor_index = 1;
  CHECK(has_violation(validate(n1), "overlap"));
  MotorDesign floor = table1_12_14();
  floor.rotor_pole_arc = 4.0;
  CHECK(has_violation(validate(floor), "floor"));
}

TEST_CASE("winding area and turns") {
  const double a10 = winding_area(table1_12_10());
  const double a14 = winding_area(table1_12_14());
  const double a16 = winding_area(table1_12_16());
  CHECK(a14 > a16);
  CHECK(a16 > a10);
  const WindingSpec w{};
  const int t10 = turns_per_pole(a10, w.wire_diameter_mm, w.fill_factor);
  const int t14 = turns_per_pole(a14, w.wire_diameter_mm, w.fill_factor);
  const int t16 = turns_per_pole(a16, w.wire_diameter_mm, w.fill_factor);
  CHECK(t14 == 90);
  CHECK(t14 > t16);
  CHECK(t16 > t10);
  CHECK(turns_per_pole(100.0, 1.0, 0.4) == 50);
  CHECK(turns_per_pole(100.0, 1.0, 0.0) == 0);
}

TEST_CASE("winding area shrinks with the stator arc") {
  MotorDesign d = table1_12_14();
  double prev = 1e300;
  const double pitch = d.rotor_pitch_deg();
  for (int k = 0; k < 20; ++k) {
    d.stator_pole_arc = 6.0 + k * 0.25;
    const double a = winding_area(d);
    CHECK(a < prev);
    prev = a;
  }
  // Approaching the pitch limit the inner half-slot vanishes.
  d.stator_pole_arc = pitch - 1e-3;
  d.rotor_pole_arc = 9.6;
  const auto v = validate(d);
  CHECK_FALSE(v.empty());  // no room for the coil
}

TEST_CASE("doubling the pole height adds the annular strip") {
  MotorDesign d = table1_12_14();
  const double a0 = winding_area(d);
  const Radii r0 = radii(d);
  d.stator_pole_height *= 2.0;
  const double a1 = winding_area(d);
  const Radii r1 = radii(d);
  const double half = 0.5 * (d.rotor_pitch_deg() - d.stator_pole_arc) * kDegToRad;
  // Shoelace on the extra strip, finely discretized.
  std::vector<Vec2> strip;
  const int n = 2000;
  for (int k = 0; k <= n; ++k) strip.push_back(polar(r1.bore * 1e3, half * k / n));
  for (int k = n; k >= 0; --k) strip.push_back(polar(r0.bore * 1e3, half * k / n));
  const double strip_area = std::abs(signed_area(strip));
  CHECK((a1 - a0) == doctest::Approx(strip_area).epsilon(0.01));
}

TEST_CASE("rotate_rotor") {
  const auto set = build_cross_section(table1_12_14());
  const auto same = rotate_rotor(set, 0.0);
  for (std::size_t k = 0; k < set.regions.size(); ++k) {
    for (std::size_t l = 0; l < set.regions[k].loops.size(); ++l) {
      for (std::size_t v = 0; v < set.regions[k].loops[l].size(); ++v) {
        CHECK(same.regions[k].loops[l][v].x == set.regions[k].loops[l][v].x);
      }
    }
  }
  const auto there_back = rotate_rotor(rotate_rotor(set, 5.0), -5.0);
  double err = 0.0;
  for (std::size_t k = 0; k < set.regions.size(); ++k) {
    for (std::size_t l = 0; l < set.regions[k].loops.size(); ++l) {
      for (std::size_t v = 0; v < set.regions[k].loops[l].size(); ++v) {
        err = std::max(err, norm(there_back.regions[k].loops[l][v] - set.regions[k].loops[l][v]));
      }
    }
  }
  CHECK(err <= 1e-12 * set.layout->radii.outer);
  CHECK(there_back.theta_deg == doctest::Approx(0.0));

  const auto pitch = rotate_rotor(set, 360.0 / 14);
  const auto a = rotor_vertices(set), b = rotor_vertices(pitch);
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, norm(a[k] - b[k]));
  CHECK(worst <= 1e-12 * set.layout->radii.outer);
  // The stator does not move.
  for (std::size_t k = 0; k < set.regions.size(); ++k) {
    if (set.regions[k].rotor) continue;
    CHECK(pitch.regions[k].loops[0][0].x == set.regions[k].loops[0][0].x);
  }
}

TEST_CASE("phase symmetry of the stator layout") {
  const auto d = table1_12_14();
  const auto a = phase_tooth_centers(d, 0);
  const auto b = phase_tooth_centers(d, 1);
  const double offset = topology::c_core_center_deg(3, 2, 14, 1) - topology::c_core_center_deg(3, 2, 14, 0);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].angle_deg + offset == doctest::Approx(b[k].angle_deg).epsilon(1e-14));
    CHECK(a[k].polarity == b[k].polarity);
  }
  // Electrical shift of one third pitch.
  const double pitch = d.rotor_pitch_deg();
  const double e = std::fmod(phase_unaligned_deg(d, 1) - phase_unaligned_deg(d, 0) + pitch, pitch);
  CHECK(std::min(std::abs(e - pitch / 3), std::abs(e - 2 * pitch / 3)) < 1e-9);
}

TEST_CASE("conventional 12/8") {
  const auto d = conventional_12_8();
  CHECK(d.stator_teeth() == 12);
  CHECK(d.rotor_teeth() == 8);
  CHECK(validate(d).empty());
  const auto set = build_conventional(d);
  CHECK(set.stator_tooth_count() == 12);
  CHECK(set.rotor_tooth_count() == 8);
  CHECK(set.coil_count() == 12);
  CHECK_THROWS_AS(build_conventional(table1_12_14()), Error);
}

TEST_CASE("design JSON round trip") {
  const auto d = table1_12_16();
  const auto back = design_from_json(design_to_json(d));
  CHECK(back.rotor_index == 6);
  CHECK(back.stator_pole_arc == doctest::Approx(8.83));
  CHECK(back.turns_per_pole == 80);
  const auto parsed = design_from_json(
      R"({"family":"C_CORE","q":3,"m":2,"n":5,"D_o_mm":82.0,"b_sy_mm":2.55,"h_s_mm":11.95,)"
      R"("beta_s_deg":10.1,"h_r_mm":3.65,"D_sh_mm":14.0,"beta_r_deg":9.6,"l_g_mm":0.17,)"
      R"("L_mm":25.4,"T_pole":90,"material":"M19-24G"})");
  CHECK(parsed.rotor_teeth() == 14);
  CHECK(validate(parsed).empty());
  CHECK_THROWS_AS(design_from_json("{\"family\":\"C_CORE\"}"), Error);
  CHECK_THROWS_AS(design_from_json("not json"), Error);
}

TEST_CASE("phase resistance is plausible") {
  const double r = phase_resistance(table1_12_14(), WindingSpec{});
  CHECK(r > 0.5);
  CHECK(r < 10.0);
}
