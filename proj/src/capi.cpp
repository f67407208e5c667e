#include "srm/srm.h"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "srm/characteristics.hpp"
#include "srm/drive.hpp"
#include "srm/error.hpp"
#include "srm/fieldsolver.hpp"
#include "srm/geometry.hpp"
#include "srm/mesh.hpp"
#include "srm/optimizer.hpp"
#include "srm/topology.hpp"

struct srm_text {
  std::string value;
};
struct srm_design {
  srm::geometry::MotorDesign value;
};
struct srm_mesh {
  std::shared_ptr<const srm::mesh::PlanarMesh> value;
};
struct srm_solution {
  srm::fieldsolver::FieldSolution value;
};
struct srm_flux_map {
  srm::characteristics::FluxLinkageMap value;
};

namespace {

using json = nlohmann::json;
namespace ch = srm::characteristics;

struct LastError {
  std::string message;
  std::vector<std::string> details;
};
thread_local LastError last_error;

srm_status code_of(srm::ErrorCode c) {
  using srm::ErrorCode;
  switch (c) {
    case ErrorCode::kDomain: return SRM_E_DOMAIN;
    case ErrorCode::kInfeasibleGeometry: return SRM_E_INFEASIBLE_GEOMETRY;
    case ErrorCode::kMeshFailure: return SRM_E_MESH_FAILURE;
    case ErrorCode::kNonConvergence: return SRM_E_NON_CONVERGENCE;
    case ErrorCode::kSingularSystem: return SRM_E_SINGULAR_SYSTEM;
    case ErrorCode::kContourOutsideGap: return SRM_E_CONTOUR_OUTSIDE_GAP;
    case ErrorCode::kEnvelopeMismatch: return SRM_E_ENVELOPE_MISMATCH;
    case ErrorCode::kNoFeasibleStart: return SRM_E_NO_FEASIBLE_START;
    case ErrorCode::kMapRangeExceeded: return SRM_E_MAP_RANGE_EXCEEDED;
    case ErrorCode::kStepUnstable: return SRM_E_STEP_UNSTABLE;
    case ErrorCode::kIo: return SRM_E_IO;
  }
  return SRM_E_INTERNAL;
}

srm_status fail(srm_status status, std::string message, std::vector<std::string> details = {}) {
  last_error.message = std::move(message);
  last_error.details = std::move(details);
  return status;
}

template <class F>
srm_status guard(F&& body) {
  try {
    body();
    return SRM_OK;
  } catch (const srm::Error& e) {
    return fail(code_of(e.code()), e.what(), e.details());
  } catch (const std::bad_alloc&) {
    return fail(SRM_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SRM_E_INTERNAL, e.what());
  }
}

#define SRM_REQUIRE(cond, msg)                    \
  do {                                            \
    if (!(cond)) return fail(SRM_E_INVALID_ARGUMENT, msg); \
  } while (0)

srm_text* text(std::string s) { return new srm_text{std::move(s)}; }

srm::geometry::MeshPreset preset_of(const char* name) {
  if (!name || !*name) return srm::geometry::MeshPreset::kCoarse;
  const auto p = srm::geometry::parse_mesh_preset(name);
  if (!p) throw srm::Error(srm::ErrorCode::kDomain, std::string("unknown mesh preset '") + name + "'");
  return *p;
}

ch::SweepOptions sweep_options(const srm_run_options* o) {
  ch::SweepOptions s;
  if (!o) return s;
  s.preset = preset_of(o->preset);
  if (o->convention && *o->convention) s.convention = ch::parse_mean_convention(o->convention);
  s.phase = o->phase;
  s.threads = o->threads;
  if (o->delta_deg > 0.0) s.delta_deg = o->delta_deg;
  return s;
}

std::vector<double> currents_of(const double* currents, int n) { return std::vector<double>(currents, currents + n); }

srm::topology::TeethCombination topology_of(const srm::geometry::MotorDesign& d) {
  return srm::topology::classify(d.phases, d.cores_per_phase, d.rotor_index);
}

srm::optimizer::OptimizationSpec spec_of(const char* spec_json, const srm_design* seed,
                                         srm::topology::TeethCombination& topology) {
  topology = srm::topology::classify(3, 2, 5);
  srm::optimizer::OptimizationSpec spec;
  if (spec_json && *spec_json) spec = srm::optimizer::spec_from_json(spec_json, &topology);
  if (seed) {
    topology = topology_of(seed->value);
    spec.family = seed->value.family;
    spec.seed = seed->value;
  } else {
    topology = srm::topology::classify(topology.phases, topology.cores_per_phase, topology.rotor_index);
  }
  return spec;
}

json design_summary(const srm::geometry::MotorDesign& d) {
  const auto r = srm::geometry::radii(d);
  json j;
  j["N_s"] = d.stator_teeth();
  j["N_r"] = d.rotor_teeth();
  j["winding_area_mm2"] = srm::geometry::winding_area(d);
  j["T_pole"] = d.turns_per_pole;
  j["T_pole_from_area"] =
      srm::geometry::turns_per_pole(srm::geometry::winding_area(d), d.winding.wire_diameter_mm, d.winding.fill_factor);
  j["phase_resistance_ohm"] = srm::geometry::phase_resistance(d, d.winding);
  j["bore_radius_mm"] = r.bore * 1e3;
  j["rotor_outer_radius_mm"] = r.rotor_outer * 1e3;
  j["rotor_yoke_mm"] = r.rotor_yoke() * 1e3;
  return j;
}

}  // namespace

extern "C" {

const char* srm_version(void) { return "1.0.0"; }

const char* srm_status_name(srm_status s) {
  switch (s) {
    case SRM_OK: return "OK";
    case SRM_E_DOMAIN: return "DOMAIN";
    case SRM_E_INFEASIBLE_GEOMETRY: return "INFEASIBLE_GEOMETRY";
    case SRM_E_MESH_FAILURE: return "MESH_FAILURE";
    case SRM_E_NON_CONVERGENCE: return "NON_CONVERGENCE";
    case SRM_E_SINGULAR_SYSTEM: return "SINGULAR_SYSTEM";
    case SRM_E_CONTOUR_OUTSIDE_GAP: return "CONTOUR_OUTSIDE_GAP";
    case SRM_E_ENVELOPE_MISMATCH: return "ENVELOPE_MISMATCH";
    case SRM_E_NO_FEASIBLE_START: return "NO_FEASIBLE_START";
    case SRM_E_MAP_RANGE_EXCEEDED: return "MAP_RANGE_EXCEEDED";
    case SRM_E_STEP_UNSTABLE: return "STEP_UNSTABLE";
    case SRM_E_IO: return "IO";
    case SRM_E_INVALID_ARGUMENT: return "INVALID_ARGUMENT";
    case SRM_E_INTERNAL: return "INTERNAL";
  }
  return "UNKNOWN";
}

const char* srm_last_error(void) { return last_error.message.c_str(); }
size_t srm_last_error_detail_count(void) { return last_error.details.size(); }
const char* srm_last_error_detail(size_t index) {
  return index < last_error.details.size() ? last_error.details[index].c_str() : nullptr;
}

const char* srm_text_data(const srm_text* t) { return t ? t->value.c_str() : nullptr; }
size_t srm_text_size(const srm_text* t) { return t ? t->value.size() : 0; }
void srm_text_free(srm_text* t) { delete t; }

srm_status srm_topology_enumerate(int phases, int cores_per_phase, int n_max, int as_json, srm_text** out) {
  SRM_REQUIRE(out, "out must not be NULL");
  return guard([&] {
    if (phases < 1 || cores_per_phase < 1 || n_max < 1) {
      throw srm::Error(srm::ErrorCode::kDomain, "phases, cores per phase and n_max must be positive");
    }
    const auto rows = srm::topology::enumerate_feasible(phases, cores_per_phase, n_max);
    std::string s;
    if (as_json) {
      json j = json::array();
      for (const auto& r : rows) {
        j.push_back({{"q", r.phases},
                     {"m", r.cores_per_phase},
                     {"n", r.rotor_index},
                     {"N_s", r.stator_teeth},
                     {"N_r", r.rotor_teeth},
                     {"feasible", r.feasible},
                     {"reason", std::string(srm::topology::to_string(r.reason))}});
      }
      s = j.dump(2) + "\n";
    } else {
      s = "q,m,n,N_s,N_r,feasible,reason\n";
      for (const auto& r : rows) {
        s += std::to_string(r.phases) + "," + std::to_string(r.cores_per_phase) + "," + std::to_string(r.rotor_index) +
             "," + std::to_string(r.stator_teeth) + "," + std::to_string(r.rotor_teeth) + "," +
             (r.feasible ? "1" : "0") + "," + std::string(srm::topology::to_string(r.reason)) + "\n";
      }
    }
    *out = text(std::move(s));
  });
}

srm_status srm_design_load(const char* path, srm_design** out) {
  SRM_REQUIRE(path && out, "path and out must not be NULL");
  return guard([&] { *out = new srm_design{srm::geometry::load_design(path)}; });
}

srm_status srm_design_from_json(const char* js, srm_design** out) {
  SRM_REQUIRE(js && out, "json and out must not be NULL");
  return guard([&] { *out = new srm_design{srm::geometry::design_from_json(js)}; });
}

srm_status srm_design_builtin(const char* name, srm_design** out) {
  SRM_REQUIRE(name && out, "name and out must not be NULL");
  const std::string n = name;
  srm::geometry::MotorDesign (*make)() = nullptr;
  if (n == "table1_12_10") make = srm::geometry::table1_12_10;
  if (n == "table1_12_14") make = srm::geometry::table1_12_14;
  if (n == "table1_12_16") make = srm::geometry::table1_12_16;
  if (n == "conventional_12_8") make = srm::geometry::conventional_12_8;
  if (!make) return fail(SRM_E_DOMAIN, "unknown builtin design '" + n + "'");
  return guard([&] { *out = new srm_design{make()}; });
}

srm_status srm_design_to_json(const srm_design* d, srm_text** out) {
  SRM_REQUIRE(d && out, "design and out must not be NULL");
  return guard([&] { *out = text(srm::geometry::design_to_json(d->value)); });
}

srm_status srm_design_validate(const srm_design* d, srm_text** violations, int* count) {
  SRM_REQUIRE(d && violations, "design and violations must not be NULL");
  return guard([&] {
    const auto v = srm::geometry::validate(d->value);
    json j = json::array();
    for (const auto& x : v) j.push_back({{"constraint", x.constraint}, {"detail", x.detail}});
    *violations = text(j.dump(2) + "\n");
    if (count) *count = static_cast<int>(v.size());
  });
}

srm_status srm_design_summary(const srm_design* d, srm_text** out) {
  SRM_REQUIRE(d && out, "design and out must not be NULL");
  return guard([&] { *out = text(design_summary(d->value).dump(2) + "\n"); });
}

srm_status srm_design_rotor_teeth(const srm_design* d, int* n) {
  SRM_REQUIRE(d && n, "design and output must not be NULL");
  *n = d->value.rotor_teeth();
  return SRM_OK;
}

srm_status srm_design_phases(const srm_design* d, int* n) {
  SRM_REQUIRE(d && n, "design and output must not be NULL");
  *n = d->value.phases;
  return SRM_OK;
}

void srm_design_free(srm_design* d) { delete d; }

srm_status srm_mesh_build(const srm_design* d, const char* preset, double theta_deg, srm_mesh** out) {
  SRM_REQUIRE(d && out, "design and out must not be NULL");
  return guard([&] {
    auto m = ch::machine_mesh(d->value, preset_of(preset));
    if (theta_deg != 0.0) m = srm::mesh::rotate_gap_band(m, theta_deg);
    *out = new srm_mesh{std::make_shared<const srm::mesh::PlanarMesh>(std::move(m))};
  });
}

srm_status srm_mesh_stats_get(const srm_mesh* m, srm_mesh_stats* stats) {
  SRM_REQUIRE(m && stats, "mesh and stats must not be NULL");
  return guard([&] {
    const auto q = srm::mesh::quality(*m->value);
    stats->nodes = q.nodes;
    stats->triangles = q.triangles;
    stats->gap_layers = std::max(0, static_cast<int>(m->value->gap_radii.size()) - 1);
    stats->min_angle_deg = q.min_angle_deg;
    stats->max_angle_deg = q.max_angle_deg;
    stats->total_area_m2 = m->value->total_area();
  });
}

srm_status srm_mesh_write_vtk(const srm_mesh* m, const char* path) {
  SRM_REQUIRE(m && path, "mesh and path must not be NULL");
  return guard([&] { srm::mesh::write_vtk(*m->value, path); });
}

void srm_mesh_free(srm_mesh* m) { delete m; }

srm_status srm_solve(const srm_design* d, const srm_mesh* m, const double* currents, int n, srm_solution** out) {
  SRM_REQUIRE(d && m && out && (currents || n == 0) && n >= 0, "invalid solve arguments");
  SRM_REQUIRE(n <= d->value.phases, "more currents than phases");
  return guard([&] {
    std::vector<double> i(d->value.phases, 0.0);
    std::copy(currents, currents + n, i.begin());
    const auto material = srm::materials::load_material(d->value.material);
    *out = new srm_solution{srm::fieldsolver::solve(m->value, material.bh, {i})};
  });
}

srm_status srm_solution_stats_get(const srm_solution* s, srm_solution_stats* stats) {
  SRM_REQUIRE(s && stats, "solution and stats must not be NULL");
  return guard([&] {
    const auto& sol = s->value;
    const auto& m = *sol.mesh;
    stats->iterations = sol.iterations;
    stats->final_residual = sol.residual_history.empty() ? 0.0 : sol.residual_history.back();
    stats->coenergy_j = srm::fieldsolver::coenergy(sol);
    stats->energy_j = srm::fieldsolver::field_energy(sol);
    stats->torque_maxwell_nm = m.has_band() ? srm::fieldsolver::torque_maxwell(sol) : 0.0;
    const auto f = srm::fieldsolver::flux_density(sol);
    int best = 0;
    for (int t = 1; t < static_cast<int>(f.bmag.size()); ++t) {
      if (f.bmag[t] > f.bmag[best]) best = t;
    }
    stats->max_b_t = f.bmag.empty() ? 0.0 : f.bmag[best];
    const auto& tri = m.triangles[best];
    stats->max_b_x_m = (m.nodes[tri[0]].x + m.nodes[tri[1]].x + m.nodes[tri[2]].x) / 3.0;
    stats->max_b_y_m = (m.nodes[tri[0]].y + m.nodes[tri[1]].y + m.nodes[tri[2]].y) / 3.0;
    const std::string& name = m.regions[m.triangle_region[best]].name;
    std::snprintf(stats->max_b_region, sizeof stats->max_b_region, "%s", name.c_str());
  });
}

srm_status srm_solution_flux_linkage(const srm_solution* s, int phase, double* lambda) {
  SRM_REQUIRE(s && lambda, "solution and output must not be NULL");
  SRM_REQUIRE(phase >= 0 && phase < static_cast<int>(s->value.phase_currents.size()), "phase index out of range");
  return guard([&] {
    *lambda = srm::fieldsolver::flux_linkage(s->value, phase);
  });
}

srm_status srm_solution_write_vtk(const srm_solution* s, const char* path) {
  SRM_REQUIRE(s && path, "solution and path must not be NULL");
  return guard([&] { srm::fieldsolver::write_field_vtk(s->value, path); });
}

void srm_solution_free(srm_solution* s) { delete s; }

srm_status srm_torque_coenergy(const srm_design* d, const char* preset, const double* currents, int n,
                               double theta_deg, double* torque) {
  SRM_REQUIRE(d && torque && (currents || n == 0) && n >= 0, "invalid torque arguments");
  return guard([&] {
    std::vector<double> i(d->value.phases, 0.0);
    if (n > d->value.phases) throw srm::Error(srm::ErrorCode::kDomain, "more currents than phases");
    std::copy(currents, currents + n, i.begin());
    const auto material = srm::materials::load_material(d->value.material);
    const auto m = ch::machine_mesh(d->value, preset_of(preset));
    *torque = srm::fieldsolver::torque_coenergy(m, material.bh, {i}, theta_deg);
  });
}

srm_run_options srm_run_options_default(void) { return srm_run_options{"coarse", "half_stroke", 0, 0, 0.25}; }

srm_status srm_sweep(const srm_design* d, const double* currents, int n, int theta_count,
                     const srm_run_options* options, srm_text** sweep_csv, srm_text** summary_csv) {
  SRM_REQUIRE(d && currents && n > 0 && sweep_csv, "invalid sweep arguments");
  return guard([&] {
    const auto curves = ch::sweep_torque_angle(d->value, currents_of(currents, n), theta_count, sweep_options(options));
    *sweep_csv = text(ch::sweep_csv(curves));
    if (summary_csv) *summary_csv = text(ch::summary_csv(curves));
  });
}

srm_status srm_flux_map_build(const srm_design* d, int theta_count, int current_count, double i_max,
                              const srm_run_options* options, srm_flux_map** out) {
  SRM_REQUIRE(d && out, "design and out must not be NULL");
  return guard([&] {
    *out = new srm_flux_map{ch::build_flux_map(d->value, theta_count, current_count, i_max, sweep_options(options))};
  });
}

srm_status srm_flux_map_lambda_csv(const srm_flux_map* m, srm_text** out) {
  SRM_REQUIRE(m && out, "map and out must not be NULL");
  return guard([&] { *out = text(ch::flux_map_csv(m->value)); });
}

srm_status srm_flux_map_torque_csv(const srm_flux_map* m, srm_text** out) {
  SRM_REQUIRE(m && out, "map and out must not be NULL");
  return guard([&] { *out = text(ch::torque_map_csv(m->value)); });
}

void srm_flux_map_free(srm_flux_map* m) { delete m; }

srm_status srm_compare(const srm_design* a, const srm_design* b, const double* currents, int n, int theta_count,
                       const srm_run_options* options, srm_text** csv) {
  SRM_REQUIRE(a && b && currents && n > 0 && csv, "invalid compare arguments");
  return guard([&] {
    const auto rows = ch::compare(a->value, b->value, currents_of(currents, n), theta_count, sweep_options(options));
    *csv = text(ch::comparison_csv(rows));
  });
}

srm_status srm_optimize(const char* spec_json, const srm_design* seed, const srm_optimize_options* options,
                        srm_text** trace_csv, srm_design** best, srm_text** summary_json) {
  SRM_REQUIRE(trace_csv && best, "trace and best must not be NULL");
  return guard([&] {
    srm::topology::TeethCombination topology;
    auto spec = spec_of(spec_json, seed, topology);
    if (options) {
      spec.threads = options->threads;
      if (options->budget > 0) spec.budget = options->budget;
    }
    const auto r = srm::optimizer::optimize(spec, topology);
    if (summary_json) {
      auto eval = [](const srm::optimizer::Evaluation& e) {
        return json{{"trace_index", e.index},
                    {"mean_torque_Nm", e.mean_torque},
                    {"yoke_flux_density_T", e.yoke_flux_density},
                    {"objective", e.objective}};
      };
      json j;
      j["N_s"] = r.best.stator_teeth();
      j["N_r"] = r.best.rotor_teeth();
      j["evaluations"] = r.trace.size();
      j["iterations"] = r.iterations;
      j["final_step"] = r.final_step;
      j["start"] = eval(r.start);
      j["search_best"] = eval(r.search_best);
      j["best"] = eval(r.best_evaluation);
      j["spec"] = json::parse(srm::optimizer::spec_to_json(spec));
      *summary_json = text(j.dump(2) + "\n");
    }
    *trace_csv = text(srm::optimizer::trace_csv(r.trace));
    *best = new srm_design{r.best};
  });
}

srm_status srm_sensitivity(const char* spec_json, const srm_design* seed, const char* variable, int sample_count,
                           int evaluate_torque, int threads, srm_text** csv) {
  SRM_REQUIRE(variable && csv, "variable and csv must not be NULL");
  return guard([&] {
    const auto v = srm::optimizer::parse_variable(variable);
    if (!v) throw srm::Error(srm::ErrorCode::kDomain, std::string("unknown variable '") + variable + "'");
    srm::topology::TeethCombination topology;
    auto spec = spec_of(spec_json, seed, topology);
    spec.threads = threads;
    srm::optimizer::SensitivityOptions o;
    o.topology = topology;
    o.evaluate_torque = evaluate_torque != 0;
    *csv = text(srm::optimizer::sensitivity_csv(srm::optimizer::sensitivity(spec, *v, sample_count, o), *v));
  });
}

srm_drive_options srm_drive_options_default(void) {
  srm_drive_options o{};
  const srm::drive::DriveConfig c;
  o.v_dc = c.v_dc;
  o.r_phase = -1.0;
  o.turn_on_deg = c.turn_on_deg;
  o.turn_off_deg = c.turn_off_deg;
  o.speed_rpm = c.speed_rpm;
  o.step_s = c.step;
  o.cycles = 4;
  o.target_torque_nm = 0.0;
  o.map_theta_count = 31;
  o.map_current_count = 11;
  o.map_i_max = 15.0;
  o.with_copper = 0;
  o.core_loss_current = 5.0;
  o.waveform_every = 1;
  o.run = srm_run_options_default();
  return o;
}

srm_status srm_drive_with_map(const srm_design* d, const srm_flux_map* map, const srm_drive_options* options,
                              double core_loss_w, srm_text** waveform_csv, srm_text** report, srm_text** summary_json) {
  SRM_REQUIRE(d && map && options, "design, map and options must not be NULL");
  return guard([&] {
    const auto& o = *options;
    srm::drive::DriveConfig c;
    c.v_dc = o.v_dc;
    c.r_phase = o.r_phase < 0.0 ? srm::geometry::phase_resistance(d->value, d->value.winding) : o.r_phase;
    c.turn_on_deg = o.turn_on_deg;
    c.turn_off_deg = o.turn_off_deg;
    c.speed_rpm = o.speed_rpm;
    if (o.step_s > 0.0) c.step = o.step_s;
    const int cycles = o.cycles > 0 ? o.cycles : 4;
    srm::drive::DriveResult r;
    if (o.target_torque_nm > 0.0) {
      srm::drive::TuneOptions t;
      t.target_torque = o.target_torque_nm;
      t.cycles = cycles;
      t.threads = o.run.threads;
      auto tuned = srm::drive::tune(c, map->value, t);
      c = tuned.config;
      r = std::move(tuned.result);
    } else {
      r = srm::drive::simulate(c, map->value, cycles);
    }
    double core = core_loss_w;
    std::optional<ch::CoreLoss> loss;
    if (core < 0.0) {
      ch::CoreLossOptions lo;
      lo.current = o.core_loss_current;
      lo.preset = preset_of(o.run.preset);
      lo.threads = o.run.threads;
      loss = ch::core_loss(d->value, c.speed_rpm, lo);
      core = loss->total();
    }
    const auto accounting =
        o.with_copper ? srm::drive::LossAccounting::kWithCopper : srm::drive::LossAccounting::kZeroCopper;
    const auto rep = srm::drive::efficiency_report(r, core, accounting);
    if (waveform_csv) *waveform_csv = text(srm::drive::waveform_csv(r, o.waveform_every));
    if (report) *report = text(srm::drive::report_text(rep));
    if (summary_json) {
      json j;
      j["v_dc_V"] = c.v_dc;
      j["r_phase_ohm"] = c.r_phase;
      j["turn_on_deg"] = c.turn_on_deg;
      j["turn_off_deg"] = c.turn_off_deg;
      j["speed_rpm"] = c.speed_rpm;
      j["step_s"] = r.step;
      j["cycles"] = cycles;
      j["mean_torque_Nm"] = r.mean_torque;
      j["output_power_W"] = r.output_power;
      j["electrical_input_W"] = r.electrical_input;
      j["copper_loss_W"] = r.copper_loss;
      j["core_loss_W"] = core;
      if (loss) {
        j["core_loss"] = {{"stator_hysteresis_W", loss->stator_hysteresis},
                          {"stator_eddy_W", loss->stator_eddy},
                          {"rotor_hysteresis_W", loss->rotor_hysteresis},
                          {"rotor_eddy_W", loss->rotor_eddy},
                          {"stator_frequency_Hz", loss->stator_frequency_hz},
                          {"rotor_frequency_Hz", loss->rotor_frequency_hz}};
      }
      j["input_power_W"] = rep.input_power;
      j["efficiency_pct"] = rep.efficiency_pct;
      j["accounting"] = srm::drive::to_string(accounting);
      j["peak_current_A"] = r.peak_current;
      j["extinction_deg"] = r.extinction_deg;
      j["extinguished_before_aligned"] = r.extinguished_before_aligned;
      *summary_json = text(j.dump(2) + "\n");
    }
  });
}

srm_status srm_drive(const srm_design* d, const srm_drive_options* options, srm_text** waveform_csv,
                     srm_text** report, srm_text** summary_json) {
  SRM_REQUIRE(d && options, "design and options must not be NULL");
  srm_flux_map* map = nullptr;
  srm_status s = srm_flux_map_build(d, options->map_theta_count, options->map_current_count, options->map_i_max,
                                    &options->run, &map);
  if (s != SRM_OK) return s;
  s = srm_drive_with_map(d, map, options, -1.0, waveform_csv, report, summary_json);
  srm_flux_map_free(map);
  return s;
}

srm_status srm_core_loss(const srm_design* d, double speed_rpm, double current, const srm_run_options* options,
                         srm_text** out) {
  SRM_REQUIRE(d && out, "design and out must not be NULL");
  return guard([&] {
    ch::CoreLossOptions lo;
    lo.current = current;
    if (options) {
      lo.preset = preset_of(options->preset);
      lo.threads = options->threads;
    }
    const auto l = ch::core_loss(d->value, speed_rpm, lo);
    json j{{"stator_hysteresis_W", l.stator_hysteresis}, {"stator_eddy_W", l.stator_eddy},
           {"rotor_hysteresis_W", l.rotor_hysteresis},   {"rotor_eddy_W", l.rotor_eddy},
           {"stator_frequency_Hz", l.stator_frequency_hz}, {"rotor_frequency_Hz", l.rotor_frequency_hz},
           {"total_W", l.total()}};
    *out = text(j.dump(2) + "\n");
  });
}

}  // extern "C"
