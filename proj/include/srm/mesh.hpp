#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "srm/geometry.hpp"

namespace srm::mesh {

using geometry::RegionTag;

struct MeshControls {
  double min_angle_deg = 15.0;  // quality floor
};

/// Region metadata carried by the mesh (polygons are not needed once meshed).
struct RegionInfo {
  std::string name;
  RegionTag tag = RegionTag::kAir;
  int phase = -1;
  int polarity = 0;
  int coil = -1;
  bool rotor = false;
};

struct PlanarMesh {
  std::vector<Vec2> nodes;                     // m
  std::vector<std::array<int, 3>> triangles;   // CCW
  std::vector<int> triangle_region;            // index into regions
  std::vector<RegionInfo> regions;
  std::vector<int> boundary_nodes;             // outer rim

  // Moving band. Band triangles occupy [band_first_triangle, end).
  std::vector<int> band_rotor_ring;            // rotor-side ring, ascending angle at theta = 0
  std::vector<int> band_stator_ring;
  int band_first_triangle = -1;
  std::vector<int> rotor_nodes;
  std::vector<Vec2> rotor_reference;           // rotor node coordinates at theta = 0
  double theta_deg = 0.0;

  std::optional<geometry::LayoutInfo> layout;
  std::vector<double> gap_radii;               // rings inside the air gap, ascending
  int band_layer = -1;
  int airgap_region = -1;
  double min_angle_floor_deg = 15.0;
  std::uint64_t id = 0;

  bool has_band() const { return band_first_triangle >= 0; }
  RegionTag tag(int triangle) const { return regions[triangle_region[triangle]].tag; }
  double triangle_area(int t) const;
  /// Area per region summed over triangles.
  std::vector<double> region_areas() const;
  double total_area() const;
};

/// Polar ring mesher for machine cross-sections (regions carrying sectors),
/// ear clipping plus Delaunay flips for plain polygons. Throws MESH_FAILURE
/// naming the region whose elements fall below the quality floor.
PlanarMesh triangulate(const geometry::RegionSet& regions, const MeshControls& controls = {});

/// Rotates rotor nodes by `theta_deg` relative to the current mesh angle and
/// re-stitches the band annulus only.
PlanarMesh rotate_gap_band(const PlanarMesh& mesh, double theta_deg);

/// Tensor-product grid over [xs] x [ys] split into triangles; `classify`
/// maps a cell centre to a region index. The outer rectangle is the
/// Dirichlet boundary.
PlanarMesh rectilinear_mesh(const std::vector<double>& xs, const std::vector<double>& ys,
                            std::vector<RegionInfo> regions,
                            const std::function<int(Vec2)>& classify);

struct QualityStats {
  int nodes = 0;
  int triangles = 0;
  double min_angle_deg = 0.0;
  double max_angle_deg = 0.0;
  double mean_min_angle_deg = 0.0;
  double min_area = 0.0;
  double max_area = 0.0;
};
QualityStats quality(const PlanarMesh& mesh);
double min_angle_deg(const PlanarMesh& mesh, int triangle);

/// Number of air-gap triangles cut by the ray at angle phi (radians).
int gap_crossing_count(const PlanarMesh& mesh, double phi);

/// Edges used by exactly one triangle, as sorted node pairs.
std::vector<std::array<int, 2>> boundary_edges(const PlanarMesh& mesh);

void write_vtk(const PlanarMesh& mesh, const std::string& path);

}  // namespace srm::mesh
