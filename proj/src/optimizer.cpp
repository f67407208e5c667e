#include "srm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>
#include <json.hpp>

#include "srm/characteristics.hpp"
#include "srm/error.hpp"
#include "srm/parallel.hpp"

namespace srm::optimizer {

namespace {

using geometry::MotorDesign;
using json = nlohmann::json;

constexpr Variable kSearchOrder[kVariableCount] = {Variable::kStatorYoke, Variable::kStatorPoleHeight,
                                                   Variable::kStatorPoleArc, Variable::kRotorPoleHeight,
                                                   Variable::kRotorPoleArc};

const char* preset_name(geometry::MeshPreset p) {
  switch (p) {
    case geometry::MeshPreset::kCoarse: return "coarse";
    case geometry::MeshPreset::kDefault: return "default";
    case geometry::MeshPreset::kFine: return "fine";
  }
  return "coarse";
}

const char* bound_key(Variable v) {
  switch (v) {
    case Variable::kStatorYoke: return "b_sy_mm";
    case Variable::kStatorPoleHeight: return "h_s_mm";
    case Variable::kStatorPoleArc: return "beta_s_deg";
    case Variable::kRotorPoleHeight: return "h_r_mm";
    case Variable::kRotorPoleArc: return "beta_r_deg";
    case Variable::kRotorTeeth: return "N_r";
  }
  return "";
}

std::string join_violations(const std::vector<geometry::Violation>& v) {
  std::string out;
  for (const auto& x : v) {
    if (!out.empty()) out += "; ";
    out += x.constraint + ": " + x.detail;
  }
  return out;
}

// Empty string when the design is usable by the search.
std::string feasibility(const MotorDesign& d, const OptimizationSpec& spec) {
  const auto violations = geometry::validate(d);
  if (!violations.empty()) return join_violations(violations);
  if (d.turns_per_pole < spec.turns_min || d.turns_per_pole > spec.turns_max) {
    return fmt::format("T_pole {} outside [{}, {}]", d.turns_per_pole, spec.turns_min, spec.turns_max);
  }
  return {};
}

struct Point {
  std::array<double, kVariableCount> x{};  // normalized
};

MotorDesign design_at(const MotorDesign& base, const Point& p, const OptimizationSpec& spec) {
  MotorDesign d = base;
  for (int k = 0; k < kVariableCount; ++k) {
    const Bounds& b = spec.bounds[k];
    set(d, kSearchOrder[k], b.lo + p.x[k] * (b.hi - b.lo));
  }
  return with_envelope(d, spec);
}

Point point_of(const MotorDesign& d, const OptimizationSpec& spec) {
  Point p;
  for (int k = 0; k < kVariableCount; ++k) {
    const Bounds& b = spec.bounds[k];
    p.x[k] = std::clamp((get(d, kSearchOrder[k]) - b.lo) / (b.hi - b.lo), 0.0, 1.0);
  }
  return p;
}

// Points on the search lattice are compared after rounding so that
// x + s - s lands on the same key as x.
std::array<long long, kVariableCount> key_of(const Point& p) {
  std::array<long long, kVariableCount> k{};
  for (int i = 0; i < kVariableCount; ++i) k[i] = std::llround(p.x[i] * 1e9);
  return k;
}

Evaluation evaluate_with(const MotorDesign& d, const OptimizationSpec& spec, geometry::MeshPreset preset,
                         const ObjectiveFn& objective) {
  Evaluation e;
  e.design = d;
  if (objective) {
    e.objective = e.mean_torque = objective(d);
    return e;
  }
  characteristics::SweepOptions opt;
  opt.preset = preset;
  opt.threads = 1;
  opt.solve = spec.solve;
  const auto s = characteristics::evaluate_half_stroke(d, spec.rated_current, opt);
  e.mean_torque = s.mean_torque;
  e.yoke_flux_density = s.yoke_flux_density;
  e.objective = s.mean_torque - spec.yoke_penalty * std::max(0.0, s.yoke_flux_density - spec.yoke_knee);
  return e;
}

}  // namespace

const char* to_string(Variable v) {
  switch (v) {
    case Variable::kStatorYoke: return "b_sy";
    case Variable::kStatorPoleHeight: return "h_s";
    case Variable::kStatorPoleArc: return "beta_s";
    case Variable::kRotorPoleHeight: return "h_r";
    case Variable::kRotorPoleArc: return "beta_r";
    case Variable::kRotorTeeth: return "N_r";
  }
  return "";
}

std::optional<Variable> parse_variable(const std::string& name) {
  for (Variable v : {Variable::kStatorYoke, Variable::kStatorPoleHeight, Variable::kStatorPoleArc,
                     Variable::kRotorPoleHeight, Variable::kRotorPoleArc, Variable::kRotorTeeth}) {
    if (name == to_string(v)) return v;
  }
  return std::nullopt;
}

double get(const MotorDesign& d, Variable v) {
  switch (v) {
    case Variable::kStatorYoke: return d.stator_yoke;
    case Variable::kStatorPoleHeight: return d.stator_pole_height;
    case Variable::kStatorPoleArc: return d.stator_pole_arc;
    case Variable::kRotorPoleHeight: return d.rotor_pole_height;
    case Variable::kRotorPoleArc: return d.rotor_pole_arc;
    case Variable::kRotorTeeth: return d.rotor_teeth();
  }
  return 0.0;
}

void set(MotorDesign& d, Variable v, double value) {
  switch (v) {
    case Variable::kStatorYoke: d.stator_yoke = value; break;
    case Variable::kStatorPoleHeight: d.stator_pole_height = value; break;
    case Variable::kStatorPoleArc: d.stator_pole_arc = value; break;
    case Variable::kRotorPoleHeight: d.rotor_pole_height = value; break;
    case Variable::kRotorPoleArc: d.rotor_pole_arc = value; break;
    case Variable::kRotorTeeth: throw Error(ErrorCode::kDomain, "N_r is not a continuous variable");
  }
}

void check(const OptimizationSpec& spec) {
  for (int k = 0; k < kVariableCount; ++k) {
    const Bounds& b = spec.bounds[k];
    if (!(std::isfinite(b.lo) && std::isfinite(b.hi) && b.lo < b.hi) || b.lo <= 0.0) {
      throw Error(ErrorCode::kDomain, fmt::format("bounds for {} must satisfy 0 < lo < hi", to_string(kSearchOrder[k])));
    }
  }
  if (spec.budget < 1) throw Error(ErrorCode::kDomain, "budget must be at least 1");
  if (!(spec.initial_step > 0.0 && spec.initial_step <= 1.0) || !(spec.min_step > 0.0)) {
    throw Error(ErrorCode::kDomain, "steps must satisfy 0 < min_step and 0 < initial_step <= 1");
  }
  if (spec.turns_min > spec.turns_max) throw Error(ErrorCode::kDomain, "T_pole bounds are empty");
  if (!(spec.rated_current > 0.0)) throw Error(ErrorCode::kDomain, "rated current must be positive");
  if (spec.final_candidates < 0) throw Error(ErrorCode::kDomain, "final_candidates must be non-negative");
  if (!(spec.yoke_penalty >= 0.0)) throw Error(ErrorCode::kDomain, "yoke penalty must be non-negative");
}

OptimizationSpec spec_from_json(const std::string& text, topology::TeethCombination* topology) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kDomain, std::string("spec file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kDomain, "spec file must be a JSON object");
  OptimizationSpec s;
  try {
    const std::string family = j.value("family", std::string("C_CORE"));
    if (family == "C_CORE") {
      s.family = geometry::Family::kCCore;
    } else if (family == "CONVENTIONAL") {
      s.family = geometry::Family::kConventional;
    } else {
      throw Error(ErrorCode::kDomain, "unknown design family '" + family + "'");
    }
    s.outer_diameter = j.value("D_o_mm", s.outer_diameter);
    s.stack_length = j.value("L_mm", s.stack_length);
    s.shaft_diameter = j.value("D_sh_mm", s.shaft_diameter);
    s.air_gap = j.value("l_g_mm", s.air_gap);
    s.material = j.value("material", s.material);
    s.winding.wire_diameter_mm = j.value("wire_diameter_mm", s.winding.wire_diameter_mm);
    s.winding.fill_factor = j.value("fill_factor", s.winding.fill_factor);
    if (j.contains("bounds")) {
      const json& b = j.at("bounds");
      for (int k = 0; k < kVariableCount; ++k) {
        const char* key = bound_key(kSearchOrder[k]);
        if (!b.contains(key)) continue;
        const auto pair = b.at(key).get<std::vector<double>>();
        if (pair.size() != 2) throw Error(ErrorCode::kDomain, fmt::format("bounds.{} must be [lo, hi]", key));
        s.bounds[k] = {pair[0], pair[1]};
      }
      if (b.contains("T_pole")) {
        const auto pair = b.at("T_pole").get<std::vector<int>>();
        if (pair.size() != 2) throw Error(ErrorCode::kDomain, "bounds.T_pole must be [lo, hi]");
        s.turns_min = pair[0];
        s.turns_max = pair[1];
      }
    }
    s.rated_current = j.value("rated_current_A", s.rated_current);
    s.budget = j.value("budget", s.budget);
    for (auto [key, target] : {std::pair{"mesh_preset", &s.preset}, std::pair{"final_mesh_preset", &s.final_preset}}) {
      if (!j.contains(key)) continue;
      const auto p = geometry::parse_mesh_preset(j.at(key).get<std::string>());
      if (!p) throw Error(ErrorCode::kDomain, fmt::format("{} must be coarse, default or fine", key));
      *target = *p;
    }
    s.final_candidates = j.value("final_candidates", s.final_candidates);
    s.initial_step = j.value("initial_step", s.initial_step);
    s.min_step = j.value("min_step", s.min_step);
    s.yoke_knee = j.value("yoke_knee_T", s.yoke_knee);
    s.yoke_penalty = j.value("yoke_penalty_Nm_per_T", s.yoke_penalty);
    if (topology) {
      topology->phases = j.value("q", topology->phases);
      topology->cores_per_phase = j.value("m", topology->cores_per_phase);
      topology->rotor_index = j.value("n", topology->rotor_index);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kDomain, std::string("bad spec field: ") + e.what());
  }
  check(s);
  return s;
}

std::string spec_to_json(const OptimizationSpec& s) {
  json j;
  j["family"] = s.family == geometry::Family::kCCore ? "C_CORE" : "CONVENTIONAL";
  j["D_o_mm"] = s.outer_diameter;
  j["L_mm"] = s.stack_length;
  j["D_sh_mm"] = s.shaft_diameter;
  j["l_g_mm"] = s.air_gap;
  j["material"] = s.material;
  j["wire_diameter_mm"] = s.winding.wire_diameter_mm;
  j["fill_factor"] = s.winding.fill_factor;
  json b;
  for (int k = 0; k < kVariableCount; ++k) b[bound_key(kSearchOrder[k])] = {s.bounds[k].lo, s.bounds[k].hi};
  b["T_pole"] = {s.turns_min, s.turns_max};
  j["bounds"] = b;
  j["rated_current_A"] = s.rated_current;
  j["budget"] = s.budget;
  j["mesh_preset"] = preset_name(s.preset);
  j["final_mesh_preset"] = preset_name(s.final_preset);
  j["final_candidates"] = s.final_candidates;
  j["initial_step"] = s.initial_step;
  j["min_step"] = s.min_step;
  j["yoke_knee_T"] = s.yoke_knee;
  j["yoke_penalty_Nm_per_T"] = s.yoke_penalty;
  return j.dump(2);
}

MotorDesign with_envelope(MotorDesign d, const OptimizationSpec& spec) {
  d.family = spec.family;
  d.outer_diameter = spec.outer_diameter;
  d.stack_length = spec.stack_length;
  d.shaft_diameter = spec.shaft_diameter;
  d.air_gap = spec.air_gap;
  d.material = spec.material;
  d.winding = spec.winding;
  d.turns_per_pole = geometry::validate(d).empty()
                         ? geometry::turns_per_pole(geometry::winding_area(d), d.winding.wire_diameter_mm,
                                                    d.winding.fill_factor)
                         : 0;
  return d;
}

MotorDesign initial_design(const OptimizationSpec& spec, const topology::TeethCombination& t) {
  MotorDesign d;
  if (spec.seed) {
    d = *spec.seed;
  } else if (spec.family == geometry::Family::kConventional) {
    d = geometry::conventional_12_8();
  } else if (t.phases == 3 && t.cores_per_phase == 2 && t.rotor_index == 3) {
    d = geometry::table1_12_10();
  } else if (t.phases == 3 && t.cores_per_phase == 2 && t.rotor_index == 6) {
    d = geometry::table1_12_16();
  } else {
    d = geometry::table1_12_14();
    const double scale = 14.0 / topology::rotor_teeth_count(t.cores_per_phase, t.rotor_index);
    d.stator_pole_arc *= scale;
    d.rotor_pole_arc *= scale;
  }
  d.phases = t.phases;
  d.cores_per_phase = t.cores_per_phase;
  d.rotor_index = t.rotor_index;
  return with_envelope(d, spec);
}

Evaluation evaluate(const MotorDesign& design, const OptimizationSpec& spec, geometry::MeshPreset preset) {
  return evaluate_with(design, spec, preset, {});
}

OptimizationResult optimize(const OptimizationSpec& spec, const topology::TeethCombination& topology,
                            const ObjectiveFn& objective) {
  check(spec);
  const auto classified = topology::classify(topology.phases, topology.cores_per_phase, topology.rotor_index);
  if (!classified.feasible) {
    throw Error(ErrorCode::kDomain, fmt::format("topology {}/{} is infeasible: {}", classified.stator_teeth,
                                                classified.rotor_teeth, topology::to_string(classified.reason)));
  }

  const MotorDesign base = initial_design(spec, topology);
  Point current = point_of(base, spec);
  MotorDesign start = design_at(base, current, spec);
  std::string why = feasibility(start, spec);
  if (!why.empty()) {
    Point mid;
    mid.x.fill(0.5);
    const MotorDesign m = design_at(base, mid, spec);
    const std::string why_mid = feasibility(m, spec);
    if (!why_mid.empty()) {
      throw Error(ErrorCode::kNoFeasibleStart, "neither the start point nor the bounds midpoint is feasible",
                  {"start: " + why, "midpoint: " + why_mid});
    }
    current = mid;
    start = m;
  }

  OptimizationResult result;
  std::map<std::array<long long, kVariableCount>, int> seen;  // key -> trace index, -1 infeasible
  auto run = [&](const std::vector<MotorDesign>& designs) {
    std::vector<Evaluation> out(designs.size());
    parallel_for(static_cast<int>(designs.size()), spec.threads,
                 [&](int k) { out[k] = evaluate_with(designs[k], spec, spec.preset, objective); });
    for (auto& e : out) {
      e.index = static_cast<int>(result.trace.size());
      result.trace.push_back(e);
    }
    return out;
  };

  Evaluation best = run({start}).front();
  seen[key_of(current)] = best.index;
  double step = spec.initial_step;
  while (step >= spec.min_step && static_cast<int>(result.trace.size()) < spec.budget) {
    ++result.iterations;
    std::vector<Point> points;
    std::vector<MotorDesign> designs;
    for (int k = 0; k < kVariableCount; ++k) {
      for (double dir : {1.0, -1.0}) {
        Point p = current;
        p.x[k] = std::clamp(p.x[k] + dir * step, 0.0, 1.0);
        const auto key = key_of(p);
        if (seen.count(key)) continue;
        const MotorDesign d = design_at(base, p, spec);
        if (!feasibility(d, spec).empty()) {
          seen[key] = -1;
          continue;
        }
        seen[key] = -2;  // reserved until evaluated
        points.push_back(p);
        designs.push_back(d);
      }
    }
    const int room = spec.budget - static_cast<int>(result.trace.size());
    if (static_cast<int>(designs.size()) > room) {
      for (std::size_t k = room; k < points.size(); ++k) seen.erase(key_of(points[k]));
      points.resize(room);
      designs.resize(room);
    }
    const auto evals = run(designs);
    int winner = -1;
    double winner_objective = best.objective;
    for (std::size_t k = 0; k < evals.size(); ++k) {
      seen[key_of(points[k])] = evals[k].index;
      if (evals[k].objective > winner_objective) {
        winner_objective = evals[k].objective;
        winner = static_cast<int>(k);
      }
    }
    if (winner >= 0) {
      current = points[winner];
      best = evals[winner];
    } else {
      step *= 0.5;
    }
  }
  result.final_step = step;
  result.start = result.trace.front();
  result.search_best = best;

  // Re-rank the leading candidates at the final fidelity.
  std::vector<int> order(result.trace.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return result.trace[a].objective > result.trace[b].objective; });
  if (objective || spec.final_candidates == 0) {
    result.best_evaluation = best;
  } else {
    order.resize(std::min<std::size_t>(order.size(), spec.final_candidates));
    std::vector<Evaluation> finals(order.size());
    parallel_for(static_cast<int>(order.size()), spec.threads, [&](int k) {
      finals[k] = evaluate_with(result.trace[order[k]].design, spec, spec.final_preset, {});
      finals[k].index = order[k];
    });
    result.best_evaluation = finals.front();
    for (const auto& f : finals) {
      if (f.objective > result.best_evaluation.objective) result.best_evaluation = f;
    }
  }
  result.best = result.best_evaluation.design;
  return result;
}

std::vector<SensitivitySample> sensitivity(const OptimizationSpec& spec, Variable variable, int sample_count,
                                           const SensitivityOptions& options) {
  check(spec);
  if (sample_count < 1) throw Error(ErrorCode::kDomain, "sample_count must be at least 1");

  std::vector<MotorDesign> designs;
  std::vector<SensitivitySample> out;
  if (variable == Variable::kRotorTeeth) {
    for (const auto& c : topology::enumerate_feasible(options.topology.phases, options.topology.cores_per_phase,
                                                      options.n_max)) {
      if (!c.feasible) continue;
      if (static_cast<int>(designs.size()) == sample_count) break;
      MotorDesign d;
      if (options.reoptimize) {
        d = optimize(spec, c).best;
      } else {
        OptimizationSpec unseeded = spec;
        unseeded.seed.reset();
        d = initial_design(unseeded, c);
      }
      designs.push_back(d);
      SensitivitySample s;
      s.value = c.rotor_teeth;
      out.push_back(s);
    }
  } else {
    const int k = static_cast<int>(variable);
    const MotorDesign base = initial_design(spec, options.topology);
    for (int i = 0; i < sample_count; ++i) {
      const Bounds& b = spec.bounds[k];
      const double value =
          sample_count == 1 ? get(base, variable) : b.lo + (b.hi - b.lo) * i / (sample_count - 1);
      MotorDesign d = base;
      set(d, variable, value);
      designs.push_back(with_envelope(d, spec));
      SensitivitySample s;
      s.value = value;
      out.push_back(s);
    }
  }

  for (std::size_t i = 0; i < designs.size(); ++i) {
    const MotorDesign& d = designs[i];
    auto& s = out[i];
    s.rotor_teeth = d.rotor_teeth();
    s.reason = feasibility(d, spec);
    s.feasible = s.reason.empty();
    if (!s.feasible) continue;
    s.winding_area = geometry::winding_area(d);
    s.turns_per_pole = d.turns_per_pole;
  }
  if (options.evaluate_torque) {
    parallel_for(static_cast<int>(designs.size()), spec.threads, [&](int i) {
      if (!out[i].feasible) return;
      out[i].mean_torque = evaluate_with(designs[i], spec, spec.preset, {}).mean_torque;
    });
  }
  return out;
}

std::string trace_csv(const std::vector<Evaluation>& trace) {
  using characteristics::format_number;
  std::string s = "eval_index,b_sy_mm,h_s_mm,beta_s_deg,h_r_mm,beta_r_deg,T_pole,mean_torque_Nm\n";
  for (const auto& e : trace) {
    const MotorDesign& d = e.design;
    s += fmt::format("{},{},{},{},{},{},{},{}\n", e.index, format_number(d.stator_yoke),
                     format_number(d.stator_pole_height), format_number(d.stator_pole_arc),
                     format_number(d.rotor_pole_height), format_number(d.rotor_pole_arc), d.turns_per_pole,
                     format_number(e.mean_torque));
  }
  return s;
}

std::string sensitivity_csv(const std::vector<SensitivitySample>& samples, Variable variable) {
  using characteristics::format_number;
  std::string s = fmt::format("{},N_r,feasible,winding_area_mm2,T_pole,mean_torque_Nm\n", bound_key(variable));
  for (const auto& x : samples) {
    s += fmt::format("{},{},{},{},{},{}\n", format_number(x.value), x.rotor_teeth, x.feasible ? 1 : 0,
                     format_number(x.winding_area), x.turns_per_pole, format_number(x.mean_torque));
  }
  return s;
}

}  // namespace srm::optimizer
