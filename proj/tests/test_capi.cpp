#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include <json.hpp>

#include "srm/srm.h"

using json = nlohmann::json;

namespace {

std::string take(srm_text* t) {
  std::string s(srm_text_data(t), srm_text_size(t));
  srm_text_free(t);
  return s;
}

srm_design* builtin(const char* name) {
  srm_design* d = nullptr;
  REQUIRE(srm_design_builtin(name, &d) == SRM_OK);
  return d;
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::strlen(srm_version()) > 0);
  CHECK(std::string(srm_status_name(SRM_OK)) == "OK");
  CHECK(std::string(srm_status_name(SRM_E_NON_CONVERGENCE)) == "NON_CONVERGENCE");
  CHECK(std::string(srm_status_name(SRM_E_MAP_RANGE_EXCEEDED)) == "MAP_RANGE_EXCEEDED");
}

TEST_CASE("topology enumeration lists 12 combinations with 8 feasible") {
  srm_text* t = nullptr;
  REQUIRE(srm_topology_enumerate(3, 2, 12, 0, &t) == SRM_OK);
  const std::string csv = take(t);
  CHECK(csv.rfind("q,m,n,N_s,N_r,feasible,reason\n", 0) == 0);
  CHECK(count_lines(csv) == 13);

  REQUIRE(srm_topology_enumerate(3, 2, 12, 1, &t) == SRM_OK);
  const json rows = json::parse(take(t));
  REQUIRE(rows.size() == 12);
  CHECK(std::count_if(rows.begin(), rows.end(), [](const json& r) { return r.at("feasible").get<bool>(); }) == 8);
}

TEST_CASE("invalid arguments are reported without touching outputs") {
  srm_text* t = nullptr;
  CHECK(srm_topology_enumerate(3, 2, 12, 0, nullptr) == SRM_E_INVALID_ARGUMENT);
  CHECK(std::strlen(srm_last_error()) > 0);
  CHECK(srm_design_to_json(nullptr, &t) == SRM_E_INVALID_ARGUMENT);
  CHECK(t == nullptr);
  srm_design* d = nullptr;
  CHECK(srm_design_builtin("no_such_design", &d) != SRM_OK);
  CHECK(d == nullptr);
}

TEST_CASE("design JSON round trip through handles") {
  srm_design* a = builtin("table1_12_14");
  srm_text* t = nullptr;
  REQUIRE(srm_design_to_json(a, &t) == SRM_OK);
  const std::string first = take(t);
  srm_design* b = nullptr;
  REQUIRE(srm_design_from_json(first.c_str(), &b) == SRM_OK);
  REQUIRE(srm_design_to_json(b, &t) == SRM_OK);
  CHECK(take(t) == first);

  int nr = 0, q = 0;
  REQUIRE(srm_design_rotor_teeth(b, &nr) == SRM_OK);
  REQUIRE(srm_design_phases(b, &q) == SRM_OK);
  CHECK(nr == 14);
  CHECK(q == 3);

  int count = -1;
  REQUIRE(srm_design_validate(b, &t, &count) == SRM_OK);
  CHECK(count == 0);
  CHECK(json::parse(take(t)).empty());

  REQUIRE(srm_design_summary(b, &t) == SRM_OK);
  const json s = json::parse(take(t));
  CHECK(s.at("N_s") == 12);
  CHECK(s.at("winding_area_mm2").get<double>() > 0.0);
  srm_design_free(a);
  srm_design_free(b);
}

TEST_CASE("malformed and infeasible designs carry structured errors") {
  srm_design* d = nullptr;
  CHECK(srm_design_from_json("{not json", &d) == SRM_E_DOMAIN);
  CHECK(d == nullptr);

  srm_design* base = builtin("table1_12_14");
  srm_text* t = nullptr;
  REQUIRE(srm_design_to_json(base, &t) == SRM_OK);
  json j = json::parse(take(t));
  j["b_sy_mm"] = 30.0;
  REQUIRE(srm_design_from_json(j.dump().c_str(), &d) == SRM_OK);

  int count = 0;
  REQUIRE(srm_design_validate(d, &t, &count) == SRM_OK);
  const json v = json::parse(take(t));
  CHECK(count > 0);
  CHECK(static_cast<int>(v.size()) == count);
  CHECK(v.at(0).contains("constraint"));

  srm_mesh* m = nullptr;
  CHECK(srm_mesh_build(d, "coarse", 0.0, &m) == SRM_E_INFEASIBLE_GEOMETRY);
  CHECK(m == nullptr);
  CHECK(srm_last_error_detail_count() > 0);
  CHECK(std::strlen(srm_last_error_detail(0)) > 0);
  srm_design_free(d);
  srm_design_free(base);
}

TEST_CASE("solve on a built mesh peaks in the excited C-core") {
  srm_design* d = builtin("table1_12_14");
  srm_mesh* m = nullptr;
  REQUIRE(srm_mesh_build(d, "coarse", 0.0, &m) == SRM_OK);
  srm_mesh_stats ms{};
  REQUIRE(srm_mesh_stats_get(m, &ms) == SRM_OK);
  CHECK(ms.triangles > 0);
  CHECK(ms.gap_layers >= 3);

  const double currents[4] = {5.0, 0.0, 0.0, 0.0};
  srm_solution* s = nullptr;
  CHECK(srm_solve(d, m, currents, 4, &s) == SRM_E_INVALID_ARGUMENT);
  CHECK(s == nullptr);
  REQUIRE(srm_solve(d, m, currents, 1, &s) == SRM_OK);
  srm_solution_stats st{};
  REQUIRE(srm_solution_stats_get(s, &st) == SRM_OK);
  CHECK(st.iterations >= 1);
  CHECK(st.coenergy_j > 0.0);
  const std::string region = st.max_b_region;
  // Cores 0 and 3 carry phase A together with their teeth 0, 1, 6 and 7.
  const bool in_phase_a = region == "stator_yoke_0" || region == "stator_yoke_3" || region == "stator_tooth_0" ||
                          region == "stator_tooth_1" || region == "stator_tooth_6" || region == "stator_tooth_7";
  CHECK_MESSAGE(in_phase_a, region);

  double la = 0.0, lb = 0.0;
  REQUIRE(srm_solution_flux_linkage(s, 0, &la) == SRM_OK);
  REQUIRE(srm_solution_flux_linkage(s, 1, &lb) == SRM_OK);
  CHECK(la > 0.0);
  CHECK(std::abs(lb) < 0.1 * la);
  CHECK(srm_solution_flux_linkage(s, 3, &la) == SRM_E_INVALID_ARGUMENT);
  srm_solution_free(s);
  srm_mesh_free(m);
  srm_design_free(d);
}

TEST_CASE("sweep text is identical across thread counts") {
  srm_design* d = builtin("table1_12_14");
  const double currents[2] = {2.0, 5.0};
  srm_run_options o = srm_run_options_default();
  o.threads = 1;
  srm_text *a = nullptr, *as = nullptr, *b = nullptr, *bs = nullptr;
  REQUIRE(srm_sweep(d, currents, 2, 7, &o, &a, &as) == SRM_OK);
  o.threads = 3;
  REQUIRE(srm_sweep(d, currents, 2, 7, &o, &b, &bs) == SRM_OK);
  const std::string sa = take(a), sb = take(b);
  CHECK(sa == sb);
  CHECK(take(as) == take(bs));
  CHECK(sa.rfind("theta_deg,current_A,torque_Nm\n", 0) == 0);
  CHECK(count_lines(sa) == 1 + 2 * 7);
  srm_design_free(d);
}

TEST_CASE("drive on a small map reports a bounded current and positive torque") {
  srm_design* d = builtin("table1_12_14");
  srm_run_options o = srm_run_options_default();
  srm_flux_map* map = nullptr;
  REQUIRE(srm_flux_map_build(d, 13, 6, 15.0, &o, &map) == SRM_OK);
  srm_text* lam = nullptr;
  REQUIRE(srm_flux_map_lambda_csv(map, &lam) == SRM_OK);
  CHECK(count_lines(take(lam)) >= 13);

  srm_drive_options opt = srm_drive_options_default();
  opt.v_dc = 48.0;
  opt.turn_off_deg = 90.0;
  opt.step_s = 2e-6;
  opt.waveform_every = 50;
  srm_text *wave = nullptr, *report = nullptr, *summary = nullptr;
  REQUIRE(srm_drive_with_map(d, map, &opt, 0.0, &wave, &report, &summary) == SRM_OK);
  const json s = json::parse(take(summary));
  CHECK(s.at("mean_torque_Nm").get<double>() > 0.0);
  CHECK(s.at("peak_current_A").at(0).get<double>() < 15.0);
  CHECK(take(wave).rfind("t_s,theta_mech_deg,phase,i_A,v_V,lambda_Wb,torque_Nm\n", 0) == 0);
  CHECK(take(report).find("Efficiency, %: ") != std::string::npos);

  opt.v_dc = 2000.0;
  CHECK(srm_drive_with_map(d, map, &opt, 0.0, &wave, &report, &summary) == SRM_E_MAP_RANGE_EXCEEDED);
  srm_flux_map_free(map);
  srm_design_free(d);
}
