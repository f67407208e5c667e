#include "srm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "srm/error.hpp"

namespace srm::geometry {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 2.0 * kPi;
constexpr double kMm = 1e-3;
constexpr double kAngleTol = 1e-10;
constexpr double kCopperResistivity = 1.724e-8;  // ohm m at 20 C

double wrap(double phi) {
  double r = std::fmod(phi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi - kAngleTol) r = 0.0;
  return r;
}

Sector sector_deg(double r0, double r1, double center_deg, double width_deg) {
  Sector s;
  s.r_inner = r0;
  s.r_outer = r1;
  s.phi_start = wrap((center_deg - 0.5 * width_deg) * kDegToRad);
  s.phi_end = s.phi_start + width_deg * kDegToRad;
  return s;
}

Sector sector_rad(double r0, double r1, double start, double end) {
  Sector s;
  s.r_inner = r0;
  s.r_outer = r1;
  s.phi_start = wrap(start);
  s.phi_end = s.phi_start + (end - start);
  return s;
}

Sector full_sector(double r0, double r1) {
  Sector s;
  s.r_inner = r0;
  s.r_outer = r1;
  s.phi_start = 0.0;
  s.phi_end = kTwoPi;
  s.full = true;
  return s;
}

Region make_region(std::string name, RegionTag tag, Sector sector, bool rotor) {
  Region r;
  r.name = std::move(name);
  r.tag = tag;
  r.sector = sector;
  r.rotor = rotor;
  return r;
}

// Fills the angular complement of the solid sectors of one part with air
// sectors, band by band between consecutive radial breakpoints.
void add_air(std::vector<Region>& out, double r0, double r1, bool rotor,
             const std::string& prefix) {
  std::vector<double> breaks{r0, r1};
  std::vector<Sector> solids;
  for (const Region& reg : out) {
    if (reg.rotor != rotor || !reg.sector || reg.tag == RegionTag::kAir) continue;
    const Sector& s = *reg.sector;
    if (s.r_outer <= r0 || s.r_inner >= r1) continue;
    solids.push_back(s);
    breaks.push_back(s.r_inner);
    breaks.push_back(s.r_outer);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-15; }),
               breaks.end());
  int count = 0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k], b = breaks[k + 1];
    if (a < r0 || b > r1) continue;
    std::vector<std::pair<double, double>> spans;
    for (const Sector& s : solids) {
      if (s.r_inner <= a + 1e-15 && s.r_outer >= b - 1e-15) spans.emplace_back(s.phi_start, s.phi_end);
    }
    if (spans.empty()) {
      out.push_back(make_region(fmt::format("{}_{}", prefix, count++), RegionTag::kAir,
                                full_sector(a, b), rotor));
      continue;
    }
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 0; i < spans.size(); ++i) {
      const double gap_start = spans[i].second;
      const double gap_end =
          (i + 1 < spans.size()) ? spans[i + 1].first : spans[0].first + kTwoPi;
      if (gap_end - gap_start > kAngleTol) {
        out.push_back(make_region(fmt::format("{}_{}", prefix, count++), RegionTag::kAir,
                                  sector_rad(a, b, gap_start, gap_end), rotor));
      }
    }
  }
}

void add_coil_sides(std::vector<Region>& out, const MotorDesign& d, const Radii& rad,
                    const GeometryOptions& opt, int tooth, int phase, int polarity,
                    double tooth_center_deg, double left_slot_deg, double right_slot_deg) {
  const double c = opt.liner_clearance_mm * kMm;
  const double delta = c / rad.bore;
  const double half_tooth = 0.5 * d.stator_pole_arc * kDegToRad;
  const double center = tooth_center_deg * kDegToRad;
  const double r0 = rad.bore + c, r1 = rad.yoke_inner - c;
  // Left side: from the slot midline to the tooth edge.
  {
    const double start = center - half_tooth - 0.5 * left_slot_deg * kDegToRad + 0.5 * delta;
    const double end = center - half_tooth - delta;
    Region r = make_region(fmt::format("coil_{}_left", tooth), RegionTag::kCoil,
                           sector_rad(r0, r1, start, end), false);
    r.phase = phase;
    r.polarity = polarity;
    r.coil = tooth;
    out.push_back(r);
  }
  {
    const double start = center + half_tooth + delta;
    const double end = center + half_tooth + 0.5 * right_slot_deg * kDegToRad - 0.5 * delta;
    Region r = make_region(fmt::format("coil_{}_right", tooth), RegionTag::kCoil,
                           sector_rad(r0, r1, start, end), false);
    r.phase = phase;
    r.polarity = -polarity;
    r.coil = tooth;
    out.push_back(r);
  }
}

void add_rotor(std::vector<Region>& out, const MotorDesign& d, const Radii& rad) {
  out.push_back(make_region("shaft", RegionTag::kAir, full_sector(0.0, rad.shaft), true));
  out.push_back(make_region("rotor_yoke", RegionTag::kRotorCore,
                            full_sector(rad.shaft, rad.rotor_root), true));
  const double pitch = d.rotor_pitch_deg();
  for (int k = 0; k < d.rotor_teeth(); ++k) {
    out.push_back(make_region(fmt::format("rotor_tooth_{}", k), RegionTag::kRotorCore,
                              sector_deg(rad.rotor_root, rad.rotor_outer, k * pitch,
                                         d.rotor_pole_arc),
                              true));
  }
  add_air(out, rad.shaft, rad.rotor_outer, true, "rotor_slot");
}

Region airgap_region(const Radii& rad) {
  Region r = make_region("airgap", RegionTag::kAir, full_sector(rad.rotor_outer, rad.bore), false);
  r.hole_on_rotor = true;
  return r;
}

struct Slots {
  double inner_deg;  // between the teeth of one C-core
  double outer_deg;  // between neighbouring C-cores
};

Slots c_core_slots(const MotorDesign& d) {
  const double pitch = d.rotor_pitch_deg();
  const double spacing_clearance = topology::c_core_angular_clearance_deg(
      d.phases, d.cores_per_phase, d.rotor_teeth(), d.stator_pole_arc);
  return {pitch - d.stator_pole_arc, spacing_clearance};
}

double conventional_slot_deg(const MotorDesign& d) {
  return 360.0 / d.stator_teeth() - d.stator_pole_arc;
}

LayoutInfo make_layout_info(const MotorDesign& d, const GeometryOptions& opt) {
  LayoutInfo info;
  info.family = d.family;
  info.phases = d.phases;
  info.cores_per_phase = d.cores_per_phase;
  info.stator_teeth = d.stator_teeth();
  info.rotor_teeth = d.rotor_teeth();
  info.turns_per_pole = d.turns_per_pole;
  info.stack_length = d.stack_length * kMm;
  info.radii = radii(d);
  info.sizing = opt.sizing;
  for (int k = 0; k < d.phases; ++k) info.phase_unaligned_deg.push_back(phase_unaligned_deg(d, k));
  return info;
}

void build_loops(RegionSet& set) {
  const PolarLayout layout(set);
  for (Region& reg : set.regions) {
    if (!reg.sector) continue;
    const Sector& s = *reg.sector;
    reg.loops.clear();
    if (s.full) {
      const auto outer = layout.ring_angles(s.r_outer, reg.rotor);
      std::vector<Vec2> loop;
      for (double a : outer) loop.push_back(polar(s.r_outer, a));
      reg.loops.push_back(std::move(loop));
      if (s.r_inner > 0.0) {
        const auto inner = layout.ring_angles(s.r_inner, reg.rotor || reg.hole_on_rotor);
        std::vector<Vec2> hole;
        for (auto it = inner.rbegin(); it != inner.rend(); ++it) hole.push_back(polar(s.r_inner, *it));
        reg.loops.push_back(std::move(hole));
      }
      continue;
    }
    const auto outer = angles_in_span(layout.ring_angles(s.r_outer, reg.rotor), s.phi_start, s.phi_end);
    const auto inner = angles_in_span(layout.ring_angles(s.r_inner, reg.rotor), s.phi_start, s.phi_end);
    std::vector<Vec2> loop;
    for (double a : outer) loop.push_back(polar(s.r_outer, a));
    if (s.r_inner > 0.0) {
      for (auto it = inner.rbegin(); it != inner.rend(); ++it) loop.push_back(polar(s.r_inner, *it));
    } else {
      loop.push_back({0.0, 0.0});
    }
    reg.loops.push_back(std::move(loop));
  }
}

void throw_if_invalid(const MotorDesign& design, const GeometryOptions& options) {
  const auto violations = validate(design, options);
  if (violations.empty()) return;
  std::vector<std::string> details;
  for (const auto& v : violations) details.push_back(v.constraint + ": " + v.detail);
  throw Error(ErrorCode::kInfeasibleGeometry,
              fmt::format("design violates {} constraint(s); first: {}", violations.size(),
                          details.front()),
              details);
}

}  // namespace

// ---------------------------------------------------------------------------

MotorDesign table1_12_10() {
  MotorDesign d;
  d.rotor_index = 3;
  d.stator_yoke = 3.57;
  d.stator_pole_height = 10.93;
  d.stator_pole_arc = 14.14;
  d.rotor_pole_height = 3.06;
  d.rotor_pole_arc = 13.44;
  d.turns_per_pole = 60;
  return d;
}

MotorDesign table1_12_14() { return MotorDesign{}; }

MotorDesign table1_12_16() {
  MotorDesign d;
  d.rotor_index = 6;
  d.stator_yoke = 2.23;
  d.stator_pole_height = 12.27;
  d.stator_pole_arc = 8.83;
  d.rotor_pole_height = 4.17;
  d.rotor_pole_arc = 8.40;
  d.turns_per_pole = 80;
  return d;
}

MotorDesign conventional_12_8() {
  MotorDesign d;
  d.family = Family::kConventional;
  d.rotor_index = 2;
  d.stator_yoke = 4.5;
  d.stator_pole_height = 10.0;
  d.stator_pole_arc = 15.0;
  d.rotor_pole_height = 4.0;
  d.rotor_pole_arc = 16.0;
  d.turns_per_pole = turns_per_pole(winding_area(d), d.winding.wire_diameter_mm,
                                    d.winding.fill_factor);
  return d;
}

MotorDesign design_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kDomain, std::string("design file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kDomain, "design file must be a JSON object");
  MotorDesign d;
  try {
    const std::string family = j.value("family", std::string("C_CORE"));
    if (family == "C_CORE") {
      d.family = Family::kCCore;
    } else if (family == "CONVENTIONAL") {
      d.family = Family::kConventional;
    } else {
      throw Error(ErrorCode::kDomain, "unknown design family '" + family + "'");
    }
    d.phases = j.value("q", d.phases);
    d.cores_per_phase = j.value("m", d.cores_per_phase);
    d.rotor_index = j.value("n", d.rotor_index);
    const char* required[] = {"D_o_mm", "b_sy_mm", "h_s_mm", "beta_s_deg", "h_r_mm",
                              "D_sh_mm", "beta_r_deg", "l_g_mm", "L_mm"};
    for (const char* key : required) {
      if (!j.contains(key)) throw Error(ErrorCode::kDomain, std::string("design file lacks '") + key + "'");
    }
    d.outer_diameter = j.at("D_o_mm").get<double>();
    d.stator_yoke = j.at("b_sy_mm").get<double>();
    d.stator_pole_height = j.at("h_s_mm").get<double>();
    d.stator_pole_arc = j.at("beta_s_deg").get<double>();
    d.rotor_pole_height = j.at("h_r_mm").get<double>();
    d.shaft_diameter = j.at("D_sh_mm").get<double>();
    d.rotor_pole_arc = j.at("beta_r_deg").get<double>();
    d.air_gap = j.at("l_g_mm").get<double>();
    d.stack_length = j.at("L_mm").get<double>();
    d.material = j.value("material", d.material);
    d.winding.wire_diameter_mm = j.value("wire_diameter_mm", d.winding.wire_diameter_mm);
    d.winding.fill_factor = j.value("fill_factor", d.winding.fill_factor);
    if (j.contains("T_pole")) {
      d.turns_per_pole = j.at("T_pole").get<int>();
    } else {
      d.turns_per_pole = turns_per_pole(winding_area(d), d.winding.wire_diameter_mm,
                                        d.winding.fill_factor);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kDomain, std::string("bad design field: ") + e.what());
  }
  return d;
}

std::string design_to_json(const MotorDesign& d) {
  json j = json::object();
  j["family"] = d.family == Family::kCCore ? "C_CORE" : "CONVENTIONAL";
  j["q"] = d.phases;
  j["m"] = d.cores_per_phase;
  j["n"] = d.rotor_index;
  j["D_o_mm"] = d.outer_diameter;
  j["b_sy_mm"] = d.stator_yoke;
  j["h_s_mm"] = d.stator_pole_height;
  j["beta_s_deg"] = d.stator_pole_arc;
  j["h_r_mm"] = d.rotor_pole_height;
  j["D_sh_mm"] = d.shaft_diameter;
  j["beta_r_deg"] = d.rotor_pole_arc;
  j["l_g_mm"] = d.air_gap;
  j["L_mm"] = d.stack_length;
  j["T_pole"] = d.turns_per_pole;
  j["material"] = d.material;
  j["wire_diameter_mm"] = d.winding.wire_diameter_mm;
  j["fill_factor"] = d.winding.fill_factor;
  return j.dump(2);
}

MotorDesign load_design(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open design file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return design_from_json(ss.str());
}

Radii radii(const MotorDesign& d) {
  Radii r;
  r.outer = 0.5 * d.outer_diameter * kMm;
  r.yoke_inner = r.outer - d.stator_yoke * kMm;
  r.bore = r.yoke_inner - d.stator_pole_height * kMm;
  r.rotor_outer = r.bore - d.air_gap * kMm;
  r.rotor_root = r.rotor_outer - d.rotor_pole_height * kMm;
  r.shaft = 0.5 * d.shaft_diameter * kMm;
  return r;
}

MeshSizing sizing_for(const MotorDesign& d, MeshPreset preset) {
  MeshSizing s;
  switch (preset) {
    case MeshPreset::kCoarse:
      s.h_gap = d.air_gap;
      s.h_coarse = d.outer_diameter / 40.0;
      break;
    case MeshPreset::kDefault:
      s.h_gap = d.air_gap / 3.0;
      s.h_coarse = d.outer_diameter / 40.0;
      break;
    case MeshPreset::kFine:
      s.h_gap = d.air_gap / 6.0;
      s.h_coarse = d.outer_diameter / 80.0;
      break;
  }
  return s;
}

std::optional<MeshPreset> parse_mesh_preset(const std::string& name) {
  if (name == "coarse") return MeshPreset::kCoarse;
  if (name == "default") return MeshPreset::kDefault;
  if (name == "fine") return MeshPreset::kFine;
  return std::nullopt;
}

const char* to_string(RegionTag tag) {
  switch (tag) {
    case RegionTag::kAir: return "AIR";
    case RegionTag::kStatorCore: return "STATOR_CORE";
    case RegionTag::kRotorCore: return "ROTOR_CORE";
    case RegionTag::kCoil: return "COIL";
  }
  return "AIR";
}

double Region::area() const {
  double a = 0.0;
  for (const auto& loop : loops) a += signed_area(loop);
  return a;
}

int RegionSet::coil_count() const {
  std::vector<int> coils;
  for (const Region& r : regions) {
    if (r.tag == RegionTag::kCoil) coils.push_back(r.coil);
  }
  std::sort(coils.begin(), coils.end());
  return static_cast<int>(std::unique(coils.begin(), coils.end()) - coils.begin());
}

int RegionSet::stator_tooth_count() const {
  return static_cast<int>(std::count_if(regions.begin(), regions.end(), [](const Region& r) {
    return r.name.rfind("stator_tooth_", 0) == 0;
  }));
}

int RegionSet::rotor_tooth_count() const {
  return static_cast<int>(std::count_if(regions.begin(), regions.end(), [](const Region& r) {
    return r.name.rfind("rotor_tooth_", 0) == 0;
  }));
}

// ---------------------------------------------------------------------------

std::vector<Violation> validate(const MotorDesign& d, const GeometryOptions& opt) {
  std::vector<Violation> out;
  auto fail = [&](std::string constraint, std::string detail) {
    out.push_back({std::move(constraint), std::move(detail)});
  };
  if (d.phases < 1) fail("phase count must be >= 1", fmt::format("q = {}", d.phases));
  if (d.cores_per_phase < 1) fail("cores per phase must be >= 1", fmt::format("m = {}", d.cores_per_phase));
  if (d.rotor_index < 1) fail("rotor index must be >= 1", fmt::format("n = {}", d.rotor_index));
  const struct {
    const char* what;
    const char* name;
    double value;
  } lengths[] = {
      {"outer diameter must be positive", "D_o", d.outer_diameter},
      {"stator yoke thickness must be positive", "b_sy", d.stator_yoke},
      {"stator pole height must be positive", "h_s", d.stator_pole_height},
      {"rotor pole height must be positive", "h_r", d.rotor_pole_height},
      {"shaft diameter must be positive", "D_sh", d.shaft_diameter},
      {"air gap must be positive", "l_g", d.air_gap},
      {"stack length must be positive", "L", d.stack_length},
  };
  for (const auto& l : lengths) {
    if (!(l.value > 0.0)) fail(l.what, fmt::format("{} = {} mm", l.name, l.value));
  }
  if (d.turns_per_pole < 1) fail("turns per pole must be >= 1", fmt::format("T_pole = {}", d.turns_per_pole));
  if (!out.empty() && (d.phases < 1 || d.cores_per_phase < 1 || d.rotor_index < 1)) return out;

  const double pitch = d.rotor_pitch_deg();
  if (!(d.stator_pole_arc > 0.0) || !(d.stator_pole_arc < pitch)) {
    fail("stator pole arc must lie inside (0, rotor pole pitch)",
         fmt::format("beta_s = {} deg, pitch = {:.6g} deg", d.stator_pole_arc, pitch));
  }
  if (!(d.rotor_pole_arc > 0.0) || !(d.rotor_pole_arc < pitch)) {
    fail("rotor pole arc must lie inside (0, rotor pole pitch)",
         fmt::format("beta_r = {} deg, pitch = {:.6g} deg", d.rotor_pole_arc, pitch));
  }
  if (d.rotor_pole_arc < opt.rotor_arc_floor * d.stator_pole_arc) {
    fail("rotor pole arc below floor",
         fmt::format("beta_r = {} deg < {} * beta_s = {:.6g} deg", d.rotor_pole_arc,
                     opt.rotor_arc_floor, opt.rotor_arc_floor * d.stator_pole_arc));
  }
  double outer_slot_deg = 0.0;
  if (d.family == Family::kCCore) {
    outer_slot_deg = topology::c_core_angular_clearance_deg(d.phases, d.cores_per_phase,
                                                            d.rotor_teeth(), d.stator_pole_arc);
    if (!(outer_slot_deg > 0.0)) {
      fail("adjacent C-cores overlap",
           fmt::format("angular clearance = {:.6g} deg with beta_s = {} deg", outer_slot_deg,
                       d.stator_pole_arc));
    }
  } else {
    outer_slot_deg = conventional_slot_deg(d);
    if (!(outer_slot_deg > 0.0)) {
      fail("stator pole arc must be below stator tooth pitch",
           fmt::format("beta_s = {} deg, tooth pitch = {:.6g} deg", d.stator_pole_arc,
                       360.0 / d.stator_teeth()));
    }
  }
  const double stack = d.stator_yoke + d.stator_pole_height + d.air_gap + d.rotor_pole_height +
                       0.5 * d.shaft_diameter;
  const double rotor_yoke = 0.5 * d.outer_diameter - stack;
  if (!(rotor_yoke > 0.0)) {
    fail("radial closure violated (rotor yoke must be positive)",
         fmt::format("b_sy + h_s + l_g + h_r + D_sh/2 = {:.6g} mm >= D_o/2 = {:.6g} mm", stack,
                     0.5 * d.outer_diameter));
  }
  if (out.empty()) {
    const Radii rad = radii(d);
    const double c = opt.liner_clearance_mm * kMm;
    const double inner_slot_deg =
        d.family == Family::kCCore ? pitch - d.stator_pole_arc : outer_slot_deg;
    const double min_half_rad = 0.5 * std::min(inner_slot_deg, outer_slot_deg) * kDegToRad;
    if (!(min_half_rad * rad.bore > 1.5 * c) || !(d.stator_pole_height * kMm > 2.0 * c)) {
      fail("coil does not fit its slot with the liner clearance",
           fmt::format("half-slot arc at bore = {:.6g} mm, h_s = {} mm, clearance = {} mm",
                       min_half_rad * rad.bore / kMm, d.stator_pole_height, opt.liner_clearance_mm));
    }
  }
  return out;
}

std::vector<ToothCenter> phase_tooth_centers(const MotorDesign& d, int phase) {
  std::vector<ToothCenter> out;
  const double pitch = d.rotor_pitch_deg();
  if (d.family == Family::kCCore) {
    for (int j = phase; j < d.phases * d.cores_per_phase; j += d.phases) {
      const double c = topology::c_core_center_deg(d.phases, d.cores_per_phase, d.rotor_teeth(), j);
      out.push_back({c - 0.5 * pitch, +1});
      out.push_back({c + 0.5 * pitch, -1});
    }
  } else {
    const double tp = 360.0 / d.stator_teeth();
    for (int j = phase; j < d.stator_teeth(); j += d.phases) {
      out.push_back({j * tp + 0.5 * pitch, ((j / d.phases) % 2 == 0) ? +1 : -1});
    }
  }
  return out;
}

double phase_unaligned_deg(const MotorDesign& d, int phase) {
  const double pitch = d.rotor_pitch_deg();
  double u = 0.0;
  if (d.family == Family::kCCore) {
    u = topology::c_core_center_deg(d.phases, d.cores_per_phase, d.rotor_teeth(), phase);
  } else {
    u = phase * 360.0 / d.stator_teeth();
  }
  u = std::fmod(u, pitch);
  if (u < 0.0) u += pitch;
  if (u > pitch - 1e-9) u = 0.0;
  return u;
}

RegionSet build_cross_section(const MotorDesign& design, const GeometryOptions& options) {
  if (design.family == Family::kConventional) return build_conventional(design, options);
  throw_if_invalid(design, options);
  const Radii rad = radii(design);
  const double pitch = design.rotor_pitch_deg();
  const Slots slots = c_core_slots(design);
  RegionSet set;
  const int cores = design.phases * design.cores_per_phase;
  for (int j = 0; j < cores; ++j) {
    const double c =
        topology::c_core_center_deg(design.phases, design.cores_per_phase, design.rotor_teeth(), j);
    const int phase = j % design.phases;
    set.regions.push_back(make_region(fmt::format("stator_yoke_{}", j), RegionTag::kStatorCore,
                                      sector_deg(rad.yoke_inner, rad.outer, c,
                                                 pitch + design.stator_pole_arc),
                                      false));
    for (int side = 0; side < 2; ++side) {
      const int tooth = 2 * j + side;
      const double tc = c + (side == 0 ? -0.5 : 0.5) * pitch;
      Region t = make_region(fmt::format("stator_tooth_{}", tooth), RegionTag::kStatorCore,
                             sector_deg(rad.bore, rad.yoke_inner, tc, design.stator_pole_arc), false);
      t.phase = phase;
      set.regions.push_back(t);
      const double left = side == 0 ? slots.outer_deg : slots.inner_deg;
      const double right = side == 0 ? slots.inner_deg : slots.outer_deg;
      add_coil_sides(set.regions, design, rad, options, tooth, phase, side == 0 ? +1 : -1, tc, left,
                     right);
    }
  }
  add_air(set.regions, rad.bore, rad.outer, false, "stator_air");
  set.regions.push_back(airgap_region(rad));
  add_rotor(set.regions, design, rad);
  set.layout = make_layout_info(design, options);
  build_loops(set);
  return set;
}

RegionSet build_conventional(const MotorDesign& design, const GeometryOptions& options) {
  if (design.family != Family::kConventional) {
    throw Error(ErrorCode::kDomain, "build_conventional requires family CONVENTIONAL");
  }
  throw_if_invalid(design, options);
  const Radii rad = radii(design);
  const double slot = conventional_slot_deg(design);
  RegionSet set;
  set.regions.push_back(make_region("stator_yoke", RegionTag::kStatorCore,
                                    full_sector(rad.yoke_inner, rad.outer), false));
  const auto tp = 360.0 / design.stator_teeth();
  for (int j = 0; j < design.stator_teeth(); ++j) {
    const double tc = j * tp + 0.5 * design.rotor_pitch_deg();
    const int phase = j % design.phases;
    const int polarity = ((j / design.phases) % 2 == 0) ? +1 : -1;
    Region t = make_region(fmt::format("stator_tooth_{}", j), RegionTag::kStatorCore,
                           sector_deg(rad.bore, rad.yoke_inner, tc, design.stator_pole_arc), false);
    t.phase = phase;
    set.regions.push_back(t);
    add_coil_sides(set.regions, design, rad, options, j, phase, polarity, tc, slot, slot);
  }
  add_air(set.regions, rad.bore, rad.yoke_inner, false, "stator_air");
  set.regions.push_back(airgap_region(rad));
  add_rotor(set.regions, design, rad);
  set.layout = make_layout_info(design, options);
  build_loops(set);
  return set;
}

RegionSet rotate_rotor(const RegionSet& regions, double theta_deg) {
  RegionSet out = regions;
  out.theta_deg = regions.theta_deg + theta_deg;
  if (theta_deg == 0.0) return out;
  const double a = theta_deg * kDegToRad;
  const double ca = std::cos(a), sa = std::sin(a);
  for (Region& r : out.regions) {
    if (!r.rotor && !r.hole_on_rotor) continue;
    for (std::size_t l = r.rotor ? 0 : 1; l < r.loops.size(); ++l) {
      for (Vec2& p : r.loops[l]) p = rotate(p, ca, sa);
    }
  }
  return out;
}

double winding_area(const MotorDesign& d, const GeometryOptions& options) {
  throw_if_invalid(d, options);
  const Radii rad = radii(d);
  double slot_deg = 0.0;
  if (d.family == Family::kCCore) {
    const Slots s = c_core_slots(d);
    slot_deg = std::min(s.inner_deg, s.outer_deg);
  } else {
    slot_deg = conventional_slot_deg(d);
  }
  const double half = 0.5 * slot_deg * kDegToRad;
  return 0.5 * half * (rad.yoke_inner * rad.yoke_inner - rad.bore * rad.bore) / (kMm * kMm);
}

int turns_per_pole(double area_mm2, double wire_diameter_mm, double fill_factor) {
  if (!(area_mm2 > 0.0) || !(fill_factor > 0.0) || !(wire_diameter_mm > 0.0)) return 0;
  const double wire = 0.25 * kPi * wire_diameter_mm * wire_diameter_mm;
  return static_cast<int>(std::floor(area_mm2 * fill_factor / wire + 1e-9));
}

double phase_resistance(const MotorDesign& d, const WindingSpec& winding,
                        const GeometryOptions& options) {
  const double area = winding_area(d, options);
  const Radii rad = radii(d);
  const double r_mid = 0.5 * (rad.bore + rad.yoke_inner);
  const double tooth_width = d.stator_pole_arc * kDegToRad * r_mid;
  const double side_width = area * kMm * kMm / (rad.yoke_inner - rad.bore);
  const double turn_length = 2.0 * (d.stack_length * kMm + tooth_width) + kPi * side_width;
  const double wire = 0.25 * kPi * std::pow(winding.wire_diameter_mm * kMm, 2);
  const double coils = 2.0 * d.cores_per_phase;
  return kCopperResistivity * turn_length * d.turns_per_pole * coils / wire;
}

// ---------------------------------------------------------------------------

std::vector<double> angles_in_span(const std::vector<double>& ring, double phi_start,
                                   double phi_end) {
  std::vector<double> out;
  const double width = phi_end - phi_start;
  const double start = wrap(phi_start);
  std::vector<std::pair<double, double>> hits;
  for (double a : ring) {
    double rel = a - start;
    if (rel < -kAngleTol) rel += kTwoPi;
    if (rel > kTwoPi - kAngleTol && width < kTwoPi - kAngleTol) rel -= kTwoPi;
    if (rel >= -kAngleTol && rel <= width + kAngleTol) hits.emplace_back(rel, a);
  }
  std::sort(hits.begin(), hits.end());
  for (const auto& h : hits) out.push_back(h.second);
  return out;
}

PolarLayout::PolarLayout(const RegionSet& regions) {
  if (!regions.layout) throw Error(ErrorCode::kDomain, "region set carries no machine layout");
  const LayoutInfo& info = *regions.layout;
  const Radii& rad = info.radii;
  const double l_g = rad.bore - rad.rotor_outer;
  const MeshSizing& sz = info.sizing;
  outer_ = rad.outer;
  h_gap_ = (sz.h_gap > 0.0 ? sz.h_gap * kMm : l_g / 3.0);
  h_coarse_ = (sz.h_coarse > 0.0 ? sz.h_coarse * kMm : 2.0 * rad.outer / 40.0);
  h_rim_ = (sz.h_rim > 0.0 ? sz.h_rim * kMm : kTwoPi * rad.outer / 2880.0);
  grading_ = sz.grading;
  rim_grading_ = sz.rim_grading;
  rotor_teeth_ = info.rotor_teeth;

  for (const Region& r : regions.regions) {
    if (!r.sector || r.name == "airgap") continue;
    (r.rotor ? rotor_sectors_ : stator_sectors_).push_back(*r.sector);
  }
  const int layers = std::max(sz.min_gap_layers, static_cast<int>(std::lround(l_g / h_gap_)));
  for (int k = 0; k <= layers; ++k) {
    gap_radii_.push_back(k == layers ? rad.bore : rad.rotor_outer + k * l_g / layers);
  }
  band_layer_ = layers / 2;
  const double r_mid = 0.5 * (gap_radii_[band_layer_] + gap_radii_[band_layer_ + 1]);
  const int per_tooth = std::max(1, static_cast<int>(std::lround(kTwoPi * r_mid / (h_gap_ * info.rotor_teeth))));
  band_nodes_ = per_tooth * info.rotor_teeth;

  aspect_ = sz.aspect_limit;
  for (bool rotor : {true, false}) {
    const auto radii_list = interfaces(rotor);
    for (std::size_t k = 0; k + 1 < radii_list.size(); ++k) {
      const double r0 = radii_list[k], r1 = radii_list[k + 1];
      if (r0 >= rad.rotor_outer - 1e-15 && r1 <= rad.bore + 1e-15) continue;
      const auto angles = band_constraints(r0, r1, rotor);
      double narrowest = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < angles.size(); ++i) {
        const double next = (i + 1 < angles.size()) ? angles[i + 1] : angles[0] + kTwoPi;
        narrowest = std::min(narrowest, (next - angles[i]) * std::max(r0, 1e-300));
      }
      zones_.push_back({r0, r1, aspect_ * std::min(narrowest, r1 - r0)});
    }
  }
}

double PolarLayout::size(double r) const {
  const double r_ro = gap_radii_.front(), r_si = gap_radii_.back();
  double h = h_coarse_;
  const double d_gap = r < r_ro ? r_ro - r : (r > r_si ? r - r_si : 0.0);
  h = std::min(h, h_gap_ + grading_ * d_gap);
  h = std::min(h, h_rim_ + rim_grading_ * std::max(0.0, outer_ - r));
  for (const Zone& z : zones_) {
    const double d = r < z.r0 ? z.r0 - r : (r > z.r1 ? r - z.r1 : 0.0);
    h = std::min(h, z.feature + grading_ * d);
  }
  return h;
}

std::vector<double> PolarLayout::interfaces(bool rotor_part) const {
  std::vector<double> out;
  for (const Sector& s : sectors(rotor_part)) {
    out.push_back(s.r_inner);
    out.push_back(s.r_outer);
  }
  for (int k = 0; k < static_cast<int>(gap_radii_.size()); ++k) {
    if (rotor_part ? k <= band_layer_ : k > band_layer_) out.push_back(gap_radii_[k]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-15; }),
            out.end());
  return out;
}

std::vector<double> PolarLayout::band_constraints(double r0, double r1, bool rotor_part) const {
  std::vector<double> out;
  for (const Sector& s : sectors(rotor_part)) {
    if (s.full) continue;
    if (s.r_inner <= r0 + 1e-15 && s.r_outer >= r1 - 1e-15) {
      out.push_back(wrap(s.phi_start));
      out.push_back(wrap(s.phi_end));
    }
  }
  return unique_angles(std::move(out));
}

std::vector<double> PolarLayout::constraint_angles(double r, bool rotor_part) const {
  std::vector<double> out;
  for (const Sector& s : sectors(rotor_part)) {
    if (s.full) continue;
    if (s.r_inner <= r + 1e-15 && s.r_outer >= r - 1e-15) {
      out.push_back(wrap(s.phi_start));
      out.push_back(wrap(s.phi_end));
    }
  }
  return unique_angles(std::move(out));
}

std::vector<double> PolarLayout::unique_angles(std::vector<double> a) {
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end(), [](double x, double y) { return y - x < kAngleTol; }),
          a.end());
  if (a.size() > 1 && a.back() > kTwoPi - kAngleTol + a.front()) a.pop_back();
  return a;
}

bool PolarLayout::is_uniform_gap_ring(double r) const {
  for (std::size_t k = 1; k + 1 < gap_radii_.size(); ++k) {
    if (std::abs(r - gap_radii_[k]) < 1e-15) return true;
  }
  return false;
}

std::vector<double> PolarLayout::ring_angles(double r, bool rotor_part) const {
  std::vector<double> out;
  if (is_uniform_gap_ring(r)) {
    out.reserve(band_nodes_);
    for (int k = 0; k < band_nodes_; ++k) out.push_back(kTwoPi * k / band_nodes_);
    return out;
  }
  const double h = size(r);
  const auto c = constraint_angles(r, rotor_part);
  if (c.empty()) {
    int n = std::max(6, static_cast<int>(std::lround(kTwoPi * r / h)));
    // Rotor rings repeat with the rotor pitch wherever they are dense enough.
    if (rotor_part && n >= rotor_teeth_) n = rotor_teeth_ * static_cast<int>(std::lround(double(n) / rotor_teeth_));
    out.reserve(n);
    for (int k = 0; k < n; ++k) out.push_back(kTwoPi * k / n);
    return out;
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double a0 = c[i];
    const double a1 = (i + 1 < c.size()) ? c[i + 1] : c[0] + kTwoPi;
    const int n = std::max(1, static_cast<int>(std::lround((a1 - a0) * r / h)));
    for (int k = 0; k < n; ++k) out.push_back(k == 0 ? a0 : wrap(a0 + (a1 - a0) * k / n));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> PolarLayout::ring_radii(bool rotor_part) const {
  const auto itf = interfaces(rotor_part);
  std::vector<double> out;
  const double r_ro = gap_radii_.front(), r_si = gap_radii_.back();
  for (std::size_t k = 0; k + 1 < itf.size(); ++k) {
    const double a = itf[k], b = itf[k + 1];
    out.push_back(a);
    if (a >= r_ro - 1e-15 && b <= r_si + 1e-15) continue;
    // Equal partition of the integral of dr / h(r).
    constexpr int kSamples = 400;
    std::vector<double> cum(kSamples + 1, 0.0);
    for (int s = 1; s <= kSamples; ++s) {
      const double ra = a + (b - a) * (s - 1) / kSamples;
      const double rb = a + (b - a) * s / kSamples;
      cum[s] = cum[s - 1] + 0.5 * (rb - ra) * (1.0 / size(ra) + 1.0 / size(rb));
    }
    const int n = std::max(1, static_cast<int>(std::ceil(cum.back() - 0.15)));
    for (int m = 1; m < n; ++m) {
      const double target = cum.back() * m / n;
      const auto it = std::lower_bound(cum.begin(), cum.end(), target);
      const int s = static_cast<int>(it - cum.begin());
      const double f = (target - cum[s - 1]) / (cum[s] - cum[s - 1]);
      out.push_back(a + (b - a) * (s - 1 + f) / kSamples);
    }
  }
  out.push_back(itf.back());
  if (rotor_part && out.front() > 0.0) out.insert(out.begin(), 0.0);
  return out;
}

}  // namespace srm::geometry
