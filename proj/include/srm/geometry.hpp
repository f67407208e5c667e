#pragma once

#include <optional>
#include <string>
#include <vector>

#include "srm/topology.hpp"
#include "srm/vec2.hpp"

namespace srm::geometry {

enum class Family { kCCore, kConventional };

struct WindingSpec {
  double wire_diameter_mm = 0.5;
  double fill_factor = 0.335;
};

/// Motor cross-section parameters. Lengths in mm and arcs in mechanical
/// degrees at this interface; everything downstream works in SI.
struct MotorDesign {
  Family family = Family::kCCore;
  int phases = 3;           // q
  int cores_per_phase = 2;  // m
  int rotor_index = 5;      // n
  double outer_diameter = 82.0;     // D_o
  double stator_yoke = 2.55;        // b_sy
  double stator_pole_height = 11.95;  // h_s
  double stator_pole_arc = 10.1;    // beta_s
  double rotor_pole_height = 3.65;  // h_r
  double shaft_diameter = 14.0;     // D_sh
  double rotor_pole_arc = 9.6;      // beta_r
  double air_gap = 0.17;            // l_g
  double stack_length = 25.4;       // L
  int turns_per_pole = 90;          // T_pole
  std::string material = "M19-24G";
  WindingSpec winding{};

  int stator_teeth() const { return 2 * cores_per_phase * phases; }
  int rotor_teeth() const { return 2 * cores_per_phase + 2 * rotor_index; }
  double rotor_pitch_deg() const { return 360.0 / rotor_teeth(); }
};

/// Design files use the dimension symbols with unit suffixes, e.g. "D_o_mm".
MotorDesign design_from_json(const std::string& text);
std::string design_to_json(const MotorDesign& design);
MotorDesign load_design(const std::string& path);

/// The three reference C-core machines and the 12/8 conventional starting point.
MotorDesign table1_12_10();
MotorDesign table1_12_14();
MotorDesign table1_12_16();
MotorDesign conventional_12_8();

/// Radial stack, all in metres.
struct Radii {
  double outer;        // D_o / 2
  double yoke_inner;   // outer - b_sy
  double bore;         // yoke_inner - h_s
  double rotor_outer;  // bore - l_g
  double rotor_root;   // rotor_outer - h_r
  double shaft;        // D_sh / 2
  double rotor_yoke() const { return rotor_root - shaft; }
};
Radii radii(const MotorDesign& design);

/// Mesh-size targets shared by polygon arc discretization and the mesher so
/// that polygon vertices and mesh ring nodes coincide. Lengths in mm.
struct MeshSizing {
  double h_gap = 0.0;     // tangential size in the air gap; 0 -> l_g / 3
  double h_coarse = 0.0;  // 0 -> D_o / 40
  double h_rim = 0.0;     // 0 -> 2 pi R / 2880
  double grading = 0.3;
  double rim_grading = 0.5;
  int min_gap_layers = 3;
  double aspect_limit = 3.0;
};

enum class MeshPreset { kCoarse, kDefault, kFine };
MeshSizing sizing_for(const MotorDesign& design, MeshPreset preset);
std::optional<MeshPreset> parse_mesh_preset(const std::string& name);

struct GeometryOptions {
  double liner_clearance_mm = 0.5;
  double rotor_arc_floor = 0.5;  // beta_r >= floor * beta_s
  MeshSizing sizing{};
};

enum class RegionTag { kAir = 0, kStatorCore = 1, kRotorCore = 2, kCoil = 3 };
const char* to_string(RegionTag tag);

/// Annular sector in the machine frame, metres and radians. `full` marks a
/// complete annulus (or disc when r_inner == 0).
struct Sector {
  double r_inner = 0.0;
  double r_outer = 0.0;
  double phi_start = 0.0;
  double phi_end = 0.0;
  bool full = false;
};

struct Region {
  std::string name;
  RegionTag tag = RegionTag::kAir;
  int phase = -1;
  int polarity = 0;  // +1 / -1 current direction along +z for coil sides
  int coil = -1;     // coil (tooth winding) index for coil sides
  bool rotor = false;
  bool hole_on_rotor = false;  // air gap: the inner loop turns with the rotor
  std::optional<Sector> sector;
  /// Outer boundary CCW, holes CW.
  std::vector<std::vector<Vec2>> loops;

  double area() const;
};

/// Machine-level facts the mesher, solver and sweeps need.
struct LayoutInfo {
  Family family = Family::kCCore;
  int phases = 0;
  int cores_per_phase = 0;
  int stator_teeth = 0;
  int rotor_teeth = 0;
  int turns_per_pole = 0;
  double stack_length = 0.0;  // m
  Radii radii{};
  MeshSizing sizing{};
  /// Rotor angle (deg) at which each phase sits unaligned.
  std::vector<double> phase_unaligned_deg;
};

struct RegionSet {
  std::vector<Region> regions;
  double theta_deg = 0.0;
  std::optional<LayoutInfo> layout;

  int coil_count() const;
  int stator_tooth_count() const;
  int rotor_tooth_count() const;
};

struct Violation {
  std::string constraint;
  std::string detail;
};

std::vector<Violation> validate(const MotorDesign& design, const GeometryOptions& options = {});

/// C-core or conventional cross-section depending on `design.family`.
/// Throws INFEASIBLE_GEOMETRY carrying the violations.
RegionSet build_cross_section(const MotorDesign& design, const GeometryOptions& options = {});
/// Standard stator with a full annular yoke (12/8 for q=3, m=2, n=2).
RegionSet build_conventional(const MotorDesign& design, const GeometryOptions& options = {});

RegionSet rotate_rotor(const RegionSet& regions, double theta_deg);

/// Open slot area (mm^2) available to one coil side: the smaller of a
/// half-slot inside a C-core and a half-slot between neighbouring cores.
double winding_area(const MotorDesign& design, const GeometryOptions& options = {});
int turns_per_pole(double area_mm2, double wire_diameter_mm, double fill_factor);
/// Estimated DC resistance of one phase (ohm) with copper at 20 C.
double phase_resistance(const MotorDesign& design, const WindingSpec& winding,
                        const GeometryOptions& options = {});

/// Stator tooth centres (deg) and polarities of one phase.
struct ToothCenter {
  double angle_deg;
  int polarity;
};
std::vector<ToothCenter> phase_tooth_centers(const MotorDesign& design, int phase);
/// Rotor angle (deg) where `phase` is unaligned.
double phase_unaligned_deg(const MotorDesign& design, int phase);

// ---------------------------------------------------------------------------
// Polar ring layout shared by polygon generation and the mesher.

class PolarLayout {
 public:
  PolarLayout(const RegionSet& regions);

  /// Target element size (m) at radius r.
  double size(double r) const;
  /// Node angles (radians, ascending in [0, 2pi)) of the ring at radius r.
  std::vector<double> ring_angles(double r, bool rotor_part) const;
  /// Ring radii for one part, ascending; the rotor starts at 0 (centre node).
  std::vector<double> ring_radii(bool rotor_part) const;
  /// Radii whose rings carry the uniform moving-band node sets.
  bool is_uniform_gap_ring(double r) const;
  /// Sector edge angles active over the whole band [r0, r1].
  std::vector<double> band_constraint_angles(double r0, double r1, bool rotor_part) const {
    return band_constraints(r0, r1, rotor_part);
  }

  const std::vector<double>& gap_radii() const { return gap_radii_; }
  int band_layer() const { return band_layer_; }
  int band_nodes() const { return band_nodes_; }
  /// Sectors of one part in the theta = 0 frame.
  const std::vector<Sector>& sectors(bool rotor_part) const {
    return rotor_part ? rotor_sectors_ : stator_sectors_;
  }

 private:
  struct Zone {
    double r0, r1, feature;
  };
  std::vector<double> constraint_angles(double r, bool rotor_part) const;
  std::vector<double> band_constraints(double r0, double r1, bool rotor_part) const;
  std::vector<double> interfaces(bool rotor_part) const;
  static std::vector<double> unique_angles(std::vector<double> a);

  std::vector<Sector> rotor_sectors_, stator_sectors_;
  std::vector<double> gap_radii_;
  std::vector<Zone> zones_;
  int band_layer_ = 1;
  int band_nodes_ = 0;
  int rotor_teeth_ = 1;
  double aspect_ = 3.0;
  double outer_ = 0.0, h_gap_ = 0.0, h_coarse_ = 0.0, h_rim_ = 0.0;
  double grading_ = 0.3, rim_grading_ = 0.5;
};

/// Angles of `ring` that fall inside [phi_start, phi_end] (with wrap), in
/// increasing order starting at phi_start.
std::vector<double> angles_in_span(const std::vector<double>& ring, double phi_start,
                                   double phi_end);

}  // namespace srm::geometry
