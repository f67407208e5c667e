#include "srm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <unordered_map>

#include <fmt/format.h>

#include "srm/error.hpp"

namespace srm::mesh {

namespace {

using geometry::PolarLayout;
using geometry::Region;
using geometry::RegionSet;
using geometry::Sector;

constexpr double kTwoPi = 2.0 * kPi;

struct Ring {
  double r = 0.0;
  std::vector<double> angles;
  std::vector<int> nodes;
};

double tri_area(const std::vector<Vec2>& x, const std::array<int, 3>& t) {
  return 0.5 * cross(x[t[1]] - x[t[0]], x[t[2]] - x[t[0]]);
}

void push_ccw(std::vector<std::array<int, 3>>& out, const std::vector<Vec2>& x, int a, int b, int c) {
  std::array<int, 3> t{a, b, c};
  if (tri_area(x, t) < 0.0) std::swap(t[1], t[2]);
  out.push_back(t);
}

// Stitches two open chains whose first and last nodes share angles.
void zip(const std::vector<int>& a, const std::vector<int>& b, const std::vector<Vec2>& x,
         std::vector<std::array<int, 3>>& out) {
  const std::size_t m = a.size() - 1, n = b.size() - 1;
  std::size_t i = 0, j = 0;
  while (i < m || j < n) {
    bool advance_a;
    if (i == m) {
      advance_a = false;
    } else if (j == n) {
      advance_a = true;
    } else {
      advance_a = norm(x[a[i + 1]] - x[b[j]]) <= norm(x[a[i]] - x[b[j + 1]]);
    }
    if (advance_a) {
      push_ccw(out, x, a[i], a[i + 1], b[j]);
      ++i;
    } else {
      push_ccw(out, x, a[i], b[j + 1], b[j]);
      ++j;
    }
  }
}

double angle_of(Vec2 p) {
  double a = std::atan2(p.y, p.x);
  if (a < 0.0) a += kTwoPi;
  return a;
}

double circular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

// Closed rings: cut both at a seam near the first inner node and zip.
void zip_cyclic(const std::vector<int>& inner, const std::vector<int>& outer,
                const std::vector<Vec2>& x, std::vector<std::array<int, 3>>& out) {
  const double a0 = angle_of(x[inner[0]]);
  std::size_t j0 = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < outer.size(); ++j) {
    const double d = circular_distance(angle_of(x[outer[j]]), a0);
    if (d < best) {
      best = d;
      j0 = j;
    }
  }
  std::vector<int> a(inner.begin(), inner.end());
  a.push_back(inner[0]);
  std::vector<int> b;
  b.reserve(outer.size() + 1);
  for (std::size_t k = 0; k <= outer.size(); ++k) b.push_back(outer[(j0 + k) % outer.size()]);
  zip(a, b, x, out);
}

// Nodes of `ring` lying in the interval [c0, c1] (c1 may exceed 2 pi).
std::vector<int> chain(const Ring& ring, double c0, double c1) {
  std::vector<std::pair<double, int>> hits;
  for (std::size_t k = 0; k < ring.angles.size(); ++k) {
    double rel = ring.angles[k] - c0;
    if (rel < -1e-10) rel += kTwoPi;
    if (rel <= (c1 - c0) + 1e-10) hits.emplace_back(rel, ring.nodes[k]);
  }
  std::sort(hits.begin(), hits.end());
  std::vector<int> out;
  for (const auto& h : hits) out.push_back(h.second);
  return out;
}

bool sector_contains(const Sector& s, double r, double phi) {
  if (r < s.r_inner - 1e-12 || r > s.r_outer + 1e-12) return false;
  if (s.full) return true;
  double rel = phi - s.phi_start;
  rel = std::fmod(rel, kTwoPi);
  if (rel < 0.0) rel += kTwoPi;
  return rel <= (s.phi_end - s.phi_start) + 1e-12;
}

double triangle_min_angle(const std::vector<Vec2>& x, const std::array<int, 3>& t) {
  double min_a = 180.0;
  for (int k = 0; k < 3; ++k) {
    const Vec2 p = x[t[k]], q = x[t[(k + 1) % 3]], r = x[t[(k + 2) % 3]];
    const Vec2 u = q - p, v = r - p;
    const double ang = std::atan2(std::abs(cross(u, v)), dot(u, v)) / kDegToRad;
    min_a = std::min(min_a, ang);
  }
  return min_a;
}

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < n; ++k) {
    h ^= p[k];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t mesh_id(const PlanarMesh& m) {
  std::uint64_t h = fnv1a(m.nodes.data(), m.nodes.size() * sizeof(Vec2));
  return fnv1a(m.triangles.data(), m.triangles.size() * sizeof(std::array<int, 3>), h);
}

void stitch_band(PlanarMesh& m) {
  m.triangles.resize(m.band_first_triangle);
  m.triangle_region.resize(m.band_first_triangle);
  std::vector<std::array<int, 3>> band;
  zip_cyclic(m.band_rotor_ring, m.band_stator_ring, m.nodes, band);
  for (const auto& t : band) {
    if (!(tri_area(m.nodes, t) > 0.0)) {
      throw Error(ErrorCode::kMeshFailure,
                  fmt::format("moving-band element inverted at theta = {} deg", m.theta_deg),
                  {"airgap"});
    }
    m.triangles.push_back(t);
    m.triangle_region.push_back(m.airgap_region);
  }
}

std::vector<RegionInfo> region_infos(const RegionSet& set) {
  std::vector<RegionInfo> out;
  for (const Region& r : set.regions) out.push_back({r.name, r.tag, r.phase, r.polarity, r.coil, r.rotor});
  return out;
}

void check_quality(const PlanarMesh& m, int end) {
  for (int t = 0; t < end; ++t) {
    const double a = triangle_min_angle(m.nodes, m.triangles[t]);
    if (a < m.min_angle_floor_deg) {
      const auto& name = m.regions[m.triangle_region[t]].name;
      throw Error(ErrorCode::kMeshFailure,
                  fmt::format("element in region '{}' has minimum angle {:.3g} deg below floor {} deg",
                              name, a, m.min_angle_floor_deg),
                  {name});
    }
  }
}

PlanarMesh triangulate_polar(const RegionSet& set, const MeshControls& controls) {
  const PolarLayout layout(set);
  PlanarMesh m;
  m.regions = region_infos(set);
  m.layout = set.layout;
  m.min_angle_floor_deg = controls.min_angle_deg;
  m.gap_radii = layout.gap_radii();
  m.band_layer = layout.band_layer();
  for (std::size_t k = 0; k < set.regions.size(); ++k) {
    if (set.regions[k].name == "airgap") m.airgap_region = static_cast<int>(k);
  }
  if (m.airgap_region < 0) throw Error(ErrorCode::kMeshFailure, "region set has no air gap", {"airgap"});

  std::vector<std::pair<int, Sector>> sectors;
  for (std::size_t k = 0; k < set.regions.size(); ++k) {
    if (set.regions[k].sector) sectors.emplace_back(static_cast<int>(k), *set.regions[k].sector);
  }
  auto classify = [&](const std::array<int, 3>& t) {
    const Vec2 c = (1.0 / 3.0) * (m.nodes[t[0]] + m.nodes[t[1]] + m.nodes[t[2]]);
    const double r = norm(c), phi = angle_of(c);
    for (const auto& [idx, s] : sectors) {
      if (sector_contains(s, r, phi)) return idx;
    }
    throw Error(ErrorCode::kMeshFailure,
                fmt::format("element centroid ({:.6g}, {:.6g}) lies in no region", c.x, c.y));
  };

  std::vector<Ring> part_rings[2];
  for (int part = 0; part < 2; ++part) {
    const bool rotor = part == 0;
    const auto radii = layout.ring_radii(rotor);
    auto& rings = part_rings[part];
    for (double r : radii) {
      Ring ring;
      ring.r = r;
      if (r == 0.0) {
        ring.angles = {0.0};
        ring.nodes = {static_cast<int>(m.nodes.size())};
        m.nodes.push_back({0.0, 0.0});
      } else {
        ring.angles = layout.ring_angles(r, rotor);
        for (double a : ring.angles) {
          ring.nodes.push_back(static_cast<int>(m.nodes.size()));
          m.nodes.push_back(polar(r, a));
        }
      }
      rings.push_back(std::move(ring));
    }
    const std::size_t first_tri = m.triangles.size();
    for (std::size_t k = 0; k + 1 < rings.size(); ++k) {
      const Ring& in = rings[k];
      const Ring& out = rings[k + 1];
      if (in.r == 0.0) {
        for (std::size_t j = 0; j < out.nodes.size(); ++j) {
          push_ccw(m.triangles, m.nodes, in.nodes[0], out.nodes[j],
                   out.nodes[(j + 1) % out.nodes.size()]);
        }
        continue;
      }
      const auto c = layout.band_constraint_angles(in.r, out.r, rotor);
      if (c.empty()) {
        zip_cyclic(in.nodes, out.nodes, m.nodes, m.triangles);
        continue;
      }
      for (std::size_t i = 0; i < c.size(); ++i) {
        const double c0 = c[i];
        const double c1 = (i + 1 < c.size()) ? c[i + 1] : c[0] + kTwoPi;
        zip(chain(in, c0, c1), chain(out, c0, c1), m.nodes, m.triangles);
      }
    }
    for (std::size_t t = first_tri; t < m.triangles.size(); ++t) {
      m.triangle_region.push_back(classify(m.triangles[t]));
    }
    if (rotor) {
      for (int n = 0; n < static_cast<int>(m.nodes.size()); ++n) m.rotor_nodes.push_back(n);
      m.rotor_reference = m.nodes;
    }
  }
  m.band_rotor_ring = part_rings[0].back().nodes;
  m.band_stator_ring = part_rings[1].front().nodes;
  m.boundary_nodes = part_rings[1].back().nodes;
  m.band_first_triangle = static_cast<int>(m.triangles.size());
  check_quality(m, m.band_first_triangle);
  stitch_band(m);
  m.id = mesh_id(m);
  if (set.theta_deg != 0.0) return rotate_gap_band(m, set.theta_deg);
  return m;
}

// --- plain polygons --------------------------------------------------------

bool point_in_triangle(Vec2 p, Vec2 a, Vec2 b, Vec2 c) {
  return cross(b - a, p - a) >= 0.0 && cross(c - b, p - b) >= 0.0 && cross(a - c, p - c) >= 0.0;
}

std::vector<std::array<int, 3>> ear_clip(const std::vector<int>& loop, const std::vector<Vec2>& x,
                                         const std::string& name) {
  std::vector<int> poly = loop;
  std::vector<Vec2> pts;
  for (int v : poly) pts.push_back(x[v]);
  if (signed_area(pts) < 0.0) std::reverse(poly.begin(), poly.end());
  std::vector<std::array<int, 3>> out;
  std::size_t guard = 0;
  while (poly.size() > 3) {
    bool clipped = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const int a = poly[(i + n - 1) % n], b = poly[i], c = poly[(i + 1) % n];
      if (cross(x[b] - x[a], x[c] - x[b]) <= 0.0) continue;
      bool empty = true;
      for (int v : poly) {
        if (v == a || v == b || v == c) continue;
        if (point_in_triangle(x[v], x[a], x[b], x[c])) {
          empty = false;
          break;
        }
      }
      if (!empty) continue;
      out.push_back({a, b, c});
      poly.erase(poly.begin() + static_cast<long>(i));
      clipped = true;
      break;
    }
    if (!clipped || ++guard > 100000) {
      throw Error(ErrorCode::kMeshFailure, "cannot triangulate polygon '" + name + "'", {name});
    }
  }
  out.push_back({poly[0], poly[1], poly[2]});
  return out;
}

double in_circle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double adx = a.x - d.x, ady = a.y - d.y, bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  return (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) -
         (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
         (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
}

void lawson_flips(std::vector<std::array<int, 3>>& tris, const std::vector<Vec2>& x) {
  for (int pass = 0; pass < 1000; ++pass) {
    std::map<std::pair<int, int>, std::pair<int, int>> edges;  // edge -> (tri, opposite slot)
    bool flipped = false;
    for (int t = 0; t < static_cast<int>(tris.size()) && !flipped; ++t) {
      for (int k = 0; k < 3 && !flipped; ++k) {
        int u = tris[t][(k + 1) % 3], v = tris[t][(k + 2) % 3];
        const auto key = std::minmax(u, v);
        auto it = edges.find(key);
        if (it == edges.end()) {
          edges[key] = {t, k};
          continue;
        }
        const auto [s, ks] = it->second;
        const int p = tris[t][k], q = tris[s][ks];
        const auto& T = tris[t];
        if (in_circle(x[T[0]], x[T[1]], x[T[2]], x[q]) > 1e-30) {
          // Replace edge u-v by p-q when the quad is convex.
          const std::array<int, 3> t1{p, u, q}, t2{p, q, v};
          if (tri_area(x, t1) > 0.0 && tri_area(x, t2) > 0.0) {
            tris[t] = t1;
            tris[s] = t2;
            flipped = true;
          }
        }
      }
    }
    if (!flipped) return;
  }
}

PlanarMesh triangulate_plain(const RegionSet& set, const MeshControls& controls) {
  PlanarMesh m;
  m.regions = region_infos(set);
  m.min_angle_floor_deg = controls.min_angle_deg;
  std::map<std::pair<double, double>, int> index;
  for (std::size_t k = 0; k < set.regions.size(); ++k) {
    const Region& reg = set.regions[k];
    if (reg.loops.size() != 1) {
      throw Error(ErrorCode::kMeshFailure,
                  "polygon '" + reg.name + "' must be a single loop without holes", {reg.name});
    }
    std::vector<int> loop;
    for (const Vec2& p : reg.loops[0]) {
      auto [it, inserted] = index.emplace(std::make_pair(p.x, p.y), static_cast<int>(m.nodes.size()));
      if (inserted) m.nodes.push_back(p);
      loop.push_back(it->second);
    }
    auto tris = ear_clip(loop, m.nodes, reg.name);
    lawson_flips(tris, m.nodes);
    for (const auto& t : tris) {
      m.triangles.push_back(t);
      m.triangle_region.push_back(static_cast<int>(k));
    }
  }
  check_quality(m, static_cast<int>(m.triangles.size()));
  std::vector<char> on_boundary(m.nodes.size(), 0);
  for (const auto& e : boundary_edges(m)) on_boundary[e[0]] = on_boundary[e[1]] = 1;
  for (int n = 0; n < static_cast<int>(m.nodes.size()); ++n) {
    if (on_boundary[n]) m.boundary_nodes.push_back(n);
  }
  m.id = mesh_id(m);
  return m;
}

}  // namespace

double PlanarMesh::triangle_area(int t) const { return tri_area(nodes, triangles[t]); }

std::vector<double> PlanarMesh::region_areas() const {
  std::vector<double> a(regions.size(), 0.0);
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) a[triangle_region[t]] += triangle_area(t);
  return a;
}

double PlanarMesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) a += triangle_area(t);
  return a;
}

PlanarMesh triangulate(const RegionSet& regions, const MeshControls& controls) {
  if (regions.layout) return triangulate_polar(regions, controls);
  return triangulate_plain(regions, controls);
}

PlanarMesh rotate_gap_band(const PlanarMesh& mesh, double theta_deg) {
  if (!mesh.has_band()) throw Error(ErrorCode::kMeshFailure, "mesh has no moving band");
  PlanarMesh m = mesh;
  m.theta_deg = mesh.theta_deg + theta_deg;
  const double a = m.theta_deg * kDegToRad;
  const double ca = std::cos(a), sa = std::sin(a);
  for (std::size_t k = 0; k < m.rotor_nodes.size(); ++k) {
    m.nodes[m.rotor_nodes[k]] = rotate(m.rotor_reference[k], ca, sa);
  }
  stitch_band(m);
  m.id = mesh_id(m);
  return m;
}

PlanarMesh rectilinear_mesh(const std::vector<double>& xs, const std::vector<double>& ys,
                            std::vector<RegionInfo> regions,
                            const std::function<int(Vec2)>& classify) {
  if (xs.size() < 2 || ys.size() < 2) throw Error(ErrorCode::kMeshFailure, "grid needs two lines per axis");
  PlanarMesh m;
  m.regions = std::move(regions);
  const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());
  auto id = [nx](int i, int j) { return j * nx + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) m.nodes.push_back({xs[i], ys[j]});
  }
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const int region = classify({0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])});
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      m.triangles.push_back({a, b, c});
      m.triangles.push_back({a, c, d});
      m.triangle_region.push_back(region);
      m.triangle_region.push_back(region);
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) m.boundary_nodes.push_back(id(i, j));
    }
  }
  m.min_angle_floor_deg = 0.0;
  m.id = mesh_id(m);
  return m;
}

double min_angle_deg(const PlanarMesh& mesh, int triangle) {
  return triangle_min_angle(mesh.nodes, mesh.triangles[triangle]);
}

QualityStats quality(const PlanarMesh& mesh) {
  QualityStats q;
  q.nodes = static_cast<int>(mesh.nodes.size());
  q.triangles = static_cast<int>(mesh.triangles.size());
  q.min_angle_deg = 180.0;
  q.min_area = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int t = 0; t < q.triangles; ++t) {
    const auto& tri = mesh.triangles[t];
    double mn = 180.0, mx = 0.0;
    for (int k = 0; k < 3; ++k) {
      const Vec2 p = mesh.nodes[tri[k]];
      const Vec2 u = mesh.nodes[tri[(k + 1) % 3]] - p, v = mesh.nodes[tri[(k + 2) % 3]] - p;
      const double ang = std::atan2(std::abs(cross(u, v)), dot(u, v)) / kDegToRad;
      mn = std::min(mn, ang);
      mx = std::max(mx, ang);
    }
    q.min_angle_deg = std::min(q.min_angle_deg, mn);
    q.max_angle_deg = std::max(q.max_angle_deg, mx);
    sum += mn;
    const double a = mesh.triangle_area(t);
    q.min_area = std::min(q.min_area, a);
    q.max_area = std::max(q.max_area, a);
  }
  if (q.triangles > 0) q.mean_min_angle_deg = sum / q.triangles;
  return q;
}

int gap_crossing_count(const PlanarMesh& mesh, double phi) {
  const Vec2 dir{std::cos(phi), std::sin(phi)};
  int count = 0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    if (mesh.triangle_region[t] != mesh.airgap_region) continue;
    const auto& tri = mesh.triangles[t];
    // The ray crosses the triangle iff its vertices are not all on one side
    // and the triangle lies ahead of the origin.
    int pos = 0, neg = 0;
    bool ahead = false;
    for (int k = 0; k < 3; ++k) {
      const double s = cross(dir, mesh.nodes[tri[k]]);
      if (s > 0.0) ++pos;
      if (s < 0.0) ++neg;
      if (dot(dir, mesh.nodes[tri[k]]) > 0.0) ahead = true;
    }
    if (ahead && pos > 0 && neg > 0) ++count;
  }
  return count;
}

std::vector<std::array<int, 2>> boundary_edges(const PlanarMesh& mesh) {
  std::map<std::pair<int, int>, int> uses;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) ++uses[std::minmax(t[k], t[(k + 1) % 3])];
  }
  std::vector<std::array<int, 2>> out;
  for (const auto& [e, n] : uses) {
    if (n == 1) out.push_back({e.first, e.second});
  }
  return out;
}

void write_vtk(const PlanarMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << "# vtk DataFile Version 3.0\nsrm_lab mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.nodes.size() << " double\n";
  for (const Vec2& p : mesh.nodes) out << fmt::format("{:.9g} {:.9g} 0\n", p.x, p.y);
  out << "CELLS " << mesh.triangles.size() << ' ' << 4 * mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) out << fmt::format("3 {} {} {}\n", t[0], t[1], t[2]);
  out << "CELL_TYPES " << mesh.triangles.size() << '\n';
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) out << "5\n";
  out << "CELL_DATA " << mesh.triangles.size() << "\nSCALARS region_tag int 1\nLOOKUP_TABLE default\n";
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    out << static_cast<int>(mesh.tag(static_cast<int>(t))) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path + "'");
}

}  // namespace srm::mesh
