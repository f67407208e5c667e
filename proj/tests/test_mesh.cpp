#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "srm/error.hpp"
#include "srm/mesh.hpp"

using namespace srm;
using namespace srm::geometry;
using namespace srm::mesh;

namespace {

PlanarMesh machine_mesh(const MotorDesign& d, MeshPreset preset) {
  GeometryOptions opt;
  opt.sizing = sizing_for(d, preset);
  return triangulate(d.family == Family::kConventional ? build_conventional(d, opt)
                                                       : build_cross_section(d, opt));
}

const PlanarMesh& mesh_12_14() {
  static const PlanarMesh m = machine_mesh(table1_12_14(), MeshPreset::kDefault);
  return m;
}

Region polygon_region(std::string name, std::vector<std::vector<Vec2>> loops, RegionTag tag = RegionTag::kAir) {
  Region r;
  r.name = std::move(name);
  r.tag = tag;
  r.loops = std::move(loops);
  return r;
}

std::vector<Vec2> square(double x0, double y0, double side, bool ccw = true) {
  std::vector<Vec2> s{{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}};
  if (!ccw) std::reverse(s.begin(), s.end());
  return s;
}

// Every interior edge is shared by exactly two triangles.
bool conforming(const PlanarMesh& m) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : m.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      ++count[{std::min(a, b), std::max(a, b)}];
    }
  }
  return std::all_of(count.begin(), count.end(), [](const auto& e) { return e.second <= 2; });
}

bool all_ccw(const PlanarMesh& m) {
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    if (!(m.triangle_area(t) > 0.0)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("unit square meshes with exact area") {
  RegionSet set;
  set.regions.push_back(polygon_region("square", {square(0, 0, 1)}));
  const PlanarMesh m = triangulate(set);
  CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(all_ccw(m));
  CHECK(conforming(m));
  CHECK(quality(m).min_angle_deg >= 15.0);
}

TEST_CASE("adjacent polygons share their interface") {
  RegionSet set;
  set.regions.push_back(polygon_region("left", {square(0, 0, 1)}));
  set.regions.push_back(polygon_region("right", {{{1, 0}, {3, 0}, {3, 1}, {1, 1}}}, RegionTag::kStatorCore));
  const PlanarMesh m = triangulate(set);
  const auto areas = m.region_areas();
  CHECK(areas[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(areas[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(conforming(m));
  CHECK(all_ccw(m));
  // The shared edge is interior, so only the outer rectangle is boundary.
  CHECK(boundary_edges(m).size() >= 4);
  for (const auto& e : boundary_edges(m)) {
    const Vec2 a = m.nodes[e[0]], b = m.nodes[e[1]];
    const bool interface = std::abs(a.x - 1) < 1e-12 && std::abs(b.x - 1) < 1e-12;
    CHECK_FALSE(interface);
  }
}

TEST_CASE("12/14 default mesh resolves the gap and meets the quality floor") {
  const PlanarMesh& m = mesh_12_14();
  CHECK(m.gap_radii.size() >= 4);  // at least three element layers
  CHECK(quality(m).min_angle_deg >= 15.0);
  CHECK(all_ccw(m));
  CHECK(conforming(m));
  CHECK(m.has_band());
}

TEST_CASE("region areas match the exact cross-section") {
  const MotorDesign d = table1_12_14();
  GeometryOptions opt;
  opt.sizing = sizing_for(d, MeshPreset::kDefault);
  const RegionSet set = build_cross_section(d, opt);
  const PlanarMesh& m = mesh_12_14();
  REQUIRE(m.regions.size() == set.regions.size());
  const auto areas = m.region_areas();
  for (std::size_t k = 0; k < areas.size(); ++k) {
    CHECK(areas[k] == doctest::Approx(set.regions[k].area()).epsilon(1e-6));
  }
  const double r = 0.5 * d.outer_diameter * 1e-3;
  CHECK(m.total_area() == doctest::Approx(kPi * r * r).epsilon(1e-6));
}

TEST_CASE("boundary nodes lie on the outer circle") {
  const PlanarMesh& m = mesh_12_14();
  const double r = 0.5 * table1_12_14().outer_diameter * 1e-3;
  REQUIRE(!m.boundary_nodes.empty());
  for (int b : m.boundary_nodes) CHECK(norm(m.nodes[b]) == doctest::Approx(r).epsilon(1e-12));
  CHECK(boundary_edges(m).size() == m.boundary_nodes.size());
}

TEST_CASE("every reference design and the 12/8 mesh at every preset") {
  for (const auto& d : {table1_12_10(), table1_12_14(), table1_12_16(), conventional_12_8()}) {
    for (auto preset : {MeshPreset::kCoarse, MeshPreset::kFine}) {
      const PlanarMesh m = machine_mesh(d, preset);
      CHECK(quality(m).min_angle_deg >= 15.0);
      CHECK(all_ccw(m));
      const double r = 0.5 * d.outer_diameter * 1e-3;
      CHECK(m.total_area() == doctest::Approx(kPi * r * r).epsilon(1e-6));
    }
  }
}

TEST_CASE("rotating the band") {
  const PlanarMesh& m = mesh_12_14();
  SUBCASE("zero rotation is the identity") {
    const PlanarMesh r = rotate_gap_band(m, 0.0);
    REQUIRE(r.nodes.size() == m.nodes.size());
    for (std::size_t k = 0; k < m.nodes.size(); ++k) {
      CHECK(r.nodes[k].x == m.nodes[k].x);
      CHECK(r.nodes[k].y == m.nodes[k].y);
    }
    CHECK(r.triangles == m.triangles);
  }
  SUBCASE("one rotor pitch reproduces the quality statistics") {
    const PlanarMesh r = rotate_gap_band(m, 360.0 / 14.0);
    const QualityStats a = quality(m), b = quality(r);
    CHECK(a.triangles == b.triangles);
    CHECK(b.min_angle_deg == doctest::Approx(a.min_angle_deg).epsilon(1e-12));
    CHECK(b.max_angle_deg == doctest::Approx(a.max_angle_deg).epsilon(1e-12));
    CHECK(b.min_area == doctest::Approx(a.min_area).epsilon(1e-12));
  }
  SUBCASE("half a pitch keeps all band elements positive") {
    const PlanarMesh r = rotate_gap_band(m, 180.0 / 14.0);
    CHECK(all_ccw(r));
    CHECK(conforming(r));
    CHECK(r.theta_deg == doctest::Approx(180.0 / 14.0));
    CHECK(r.total_area() == doctest::Approx(m.total_area()).epsilon(1e-9));
  }
  SUBCASE("rotation composes") {
    const PlanarMesh a = rotate_gap_band(rotate_gap_band(m, 3.0), 4.0);
    const PlanarMesh b = rotate_gap_band(m, 7.0);
    for (int v : m.rotor_nodes) {
      CHECK(a.nodes[v].x == doctest::Approx(b.nodes[v].x).epsilon(1e-12));
      CHECK(a.nodes[v].y == doctest::Approx(b.nodes[v].y).epsilon(1e-12));
    }
  }
  SUBCASE("rotor nodes turn rigidly") {
    const PlanarMesh r = rotate_gap_band(m, 5.0);
    const double c = std::cos(5.0 * kDegToRad), s = std::sin(5.0 * kDegToRad);
    for (int v : m.rotor_nodes) {
      const Vec2 e = rotate(m.nodes[v], c, s);
      CHECK(r.nodes[v].x == doctest::Approx(e.x).epsilon(1e-12));
      CHECK(r.nodes[v].y == doctest::Approx(e.y).epsilon(1e-12));
    }
  }
}

TEST_CASE("refinement doubles the gap crossing count") {
  const PlanarMesh coarse = machine_mesh(table1_12_14(), MeshPreset::kDefault);
  const PlanarMesh fine = machine_mesh(table1_12_14(), MeshPreset::kFine);
  const double ratio = static_cast<double>(gap_crossing_count(fine, 0.1)) / gap_crossing_count(coarse, 0.1);
  CHECK(ratio >= 1.6);
  CHECK(ratio <= 2.5);
}

TEST_CASE("rectilinear grids") {
  std::vector<RegionInfo> regions(2);
  regions[0].name = "left";
  regions[1].name = "right";
  regions[1].tag = RegionTag::kStatorCore;
  const PlanarMesh m = rectilinear_mesh({0, 1, 2, 4}, {0, 1, 3}, regions,
                                        [](Vec2 p) { return p.x < 2 ? 0 : 1; });
  CHECK(m.nodes.size() == 12);
  CHECK(m.triangles.size() == 12);
  CHECK(m.boundary_nodes.size() == 10);
  const auto areas = m.region_areas();
  CHECK(areas[0] == doctest::Approx(6.0));
  CHECK(areas[1] == doctest::Approx(6.0));
  CHECK(all_ccw(m));
  CHECK_THROWS_AS(rectilinear_mesh({0}, {0, 1}, regions, [](Vec2) { return 0; }), Error);
}

TEST_CASE("mesh id tracks geometry") {
  const PlanarMesh& m = mesh_12_14();
  CHECK(rotate_gap_band(m, 0.0).id == m.id);
  CHECK(rotate_gap_band(m, 1.0).id != m.id);
}

TEST_CASE("VTK export") {
  const std::string path = "test_mesh_export.vtk";
  write_vtk(mesh_12_14(), path);
  std::FILE* f = std::fopen(path.c_str(), "r");
  REQUIRE(f != nullptr);
  char header[32] = {};
  CHECK(std::fgets(header, sizeof header, f) != nullptr);
  std::fclose(f);
  CHECK(std::string(header).rfind("# vtk DataFile", 0) == 0);
  std::remove(path.c_str());
  CHECK_THROWS_AS(write_vtk(mesh_12_14(), "/nonexistent-dir/x.vtk"), Error);
}
