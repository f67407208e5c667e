#include "srm/fieldsolver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <fmt/format.h>

#include "srm/error.hpp"

namespace srm::fieldsolver {

namespace {

using materials::kMu0;
using mesh::PlanarMesh;
using mesh::RegionTag;
using SpMat = Eigen::SparseMatrix<double>;

struct ElementGeometry {
  std::array<double, 3> b, c;  // shape-function gradient numerators
  double area;
};

ElementGeometry element_geometry(const PlanarMesh& m, int t) {
  const auto& tri = m.triangles[t];
  const Vec2 p0 = m.nodes[tri[0]], p1 = m.nodes[tri[1]], p2 = m.nodes[tri[2]];
  ElementGeometry g;
  g.b = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
  g.c = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
  g.area = 0.5 * cross(p1 - p0, p2 - p0);
  return g;
}

bool is_iron(RegionTag tag) { return tag == RegionTag::kStatorCore || tag == RegionTag::kRotorCore; }

int resolve_turns(const PlanarMesh& m, const Excitation& ex) {
  if (ex.turns_per_pole >= 0) return ex.turns_per_pole;
  if (m.layout) return m.layout->turns_per_pole;
  return 1;
}

// Element-constant (B_x, B_y) for nodal potential `a`.
std::array<double, 2> element_b(const ElementGeometry& g, const std::array<int, 3>& tri,
                                const std::vector<double>& a) {
  double dx = 0.0, dy = 0.0;
  for (int k = 0; k < 3; ++k) {
    dx += g.b[k] * a[tri[k]];
    dy += g.c[k] * a[tri[k]];
  }
  const double inv = 1.0 / (2.0 * g.area);
  return {dy * inv, -dx * inv};
}

class Assembler {
 public:
  Assembler(const PlanarMesh& m, const materials::BHCurve& bh) : m_(m), bh_(bh) {
    const int n = static_cast<int>(m.nodes.size());
    free_index_.assign(n, 0);
    for (int b : m.boundary_nodes) free_index_[b] = -1;
    nfree_ = 0;
    for (int k = 0; k < n; ++k) {
      if (free_index_[k] == 0) free_index_[k] = nfree_++;
    }
    const int nt = static_cast<int>(m.triangles.size());
    geom_.resize(nt);
    iron_.resize(nt);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(9 * static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) {
      geom_[t] = element_geometry(m, t);
      iron_[t] = is_iron(m.tag(t)) ? 1 : 0;
      if (!(geom_[t].area > 0.0)) {
        throw Error(ErrorCode::kSingularSystem, fmt::format("element {} has non-positive area", t));
      }
      for (int i = 0; i < 3; ++i) {
        const int fi = free_index_[m.triangles[t][i]];
        if (fi < 0) continue;
        for (int j = 0; j < 3; ++j) {
          const int fj = free_index_[m.triangles[t][j]];
          if (fj >= 0) trips.emplace_back(fi, fj, 1.0);
        }
      }
    }
    matrix_.resize(nfree_, nfree_);
    matrix_.setFromTriplets(trips.begin(), trips.end());
    matrix_.makeCompressed();
    pos_.assign(9 * static_cast<std::size_t>(nt), -1);
    const int* outer = matrix_.outerIndexPtr();
    const int* inner = matrix_.innerIndexPtr();
    for (int t = 0; t < nt; ++t) {
      for (int i = 0; i < 3; ++i) {
        const int fi = free_index_[m.triangles[t][i]];
        if (fi < 0) continue;
        for (int j = 0; j < 3; ++j) {
          const int fj = free_index_[m.triangles[t][j]];
          if (fj < 0) continue;
          const int* first = inner + outer[fj];
          const int* last = inner + outer[fj + 1];
          pos_[9 * t + 3 * i + j] = static_cast<int>(std::lower_bound(first, last, fi) - inner);
        }
      }
    }
  }

  int free_count() const { return nfree_; }
  const std::vector<int>& free_index() const { return free_index_; }
  const ElementGeometry& geometry(int t) const { return geom_[t]; }

  /// Residual r = K(nu) a - f; when `jacobian` is set the tangent matrix too.
  Eigen::VectorXd residual(const std::vector<double>& a, const Eigen::VectorXd& f, bool jacobian) {
    Eigen::VectorXd r = -f;
    double* values = matrix_.valuePtr();
    if (jacobian) std::fill(values, values + matrix_.nonZeros(), 0.0);
    const double nu0 = 1.0 / kMu0;
    const int nt = static_cast<int>(m_.triangles.size());
    for (int t = 0; t < nt; ++t) {
      const auto& tri = m_.triangles[t];
      const ElementGeometry& g = geom_[t];
      double nu = nu0, dnu = 0.0;
      std::array<double, 3> ka{};
      const double inv4a = 1.0 / (4.0 * g.area);
      for (int i = 0; i < 3; ++i) {
        double s = 0.0;
        for (int j = 0; j < 3; ++j) s += (g.b[i] * g.b[j] + g.c[i] * g.c[j]) * inv4a * a[tri[j]];
        ka[i] = s;
      }
      if (iron_[t]) {
        const double b2 = (ka[0] * a[tri[0]] + ka[1] * a[tri[1]] + ka[2] * a[tri[2]]) / g.area;
        const auto rel = bh_.reluctivity(std::max(0.0, b2));
        nu = rel.nu;
        dnu = rel.dnu_db2;
      }
      for (int i = 0; i < 3; ++i) {
        const int fi = free_index_[tri[i]];
        if (fi < 0) continue;
        r[fi] += nu * ka[i];
        if (!jacobian) continue;
        for (int j = 0; j < 3; ++j) {
          const int p = pos_[9 * t + 3 * i + j];
          if (p < 0) continue;
          const double k0 = (g.b[i] * g.b[j] + g.c[i] * g.c[j]) * inv4a;
          values[p] += nu * k0 + 2.0 * dnu / g.area * ka[i] * ka[j];
        }
      }
    }
    return r;
  }

  const SpMat& matrix() const { return matrix_; }

 private:
  const PlanarMesh& m_;
  const materials::BHCurve& bh_;
  std::vector<int> free_index_;
  int nfree_ = 0;
  std::vector<ElementGeometry> geom_;
  std::vector<char> iron_;
  SpMat matrix_;
  std::vector<int> pos_;
};

class LinearSolver {
 public:
  explicit LinearSolver(int unknowns, int direct_limit) : direct_(unknowns <= direct_limit) {}

  Eigen::VectorXd solve(const SpMat& k, const Eigen::VectorXd& rhs) {
    if (direct_) {
      if (!analyzed_) {
        ldlt_.analyzePattern(k);
        analyzed_ = true;
      }
      ldlt_.factorize(k);
      if (ldlt_.info() != Eigen::Success || (ldlt_.vectorD().array() <= 0.0).any()) {
        throw Error(ErrorCode::kSingularSystem, "tangent stiffness is not positive definite");
      }
      return ldlt_.solve(rhs);
    }
    cg_.setTolerance(1e-12);
    cg_.setMaxIterations(20000);
    cg_.compute(k);
    if (cg_.info() != Eigen::Success) {
      throw Error(ErrorCode::kSingularSystem, "incomplete Cholesky preconditioner failed");
    }
    Eigen::VectorXd x = cg_.solve(rhs);
    if (cg_.info() != Eigen::Success) {
      throw Error(ErrorCode::kSingularSystem, "conjugate gradient did not converge");
    }
    return x;
  }

 private:
  bool direct_;
  bool analyzed_ = false;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg_;
};

double integrate_brbt(double bx, double by, double phi0, double phi1) {
  // Antiderivative of B_r B_t = 1/2 (By^2 - Bx^2) sin 2phi + Bx By cos 2phi.
  auto prim = [&](double p) {
    return -0.25 * (by * by - bx * bx) * std::cos(2.0 * p) + 0.5 * bx * by * std::sin(2.0 * p);
  };
  return prim(phi1) - prim(phi0);
}

}  // namespace

FieldSolution solve(std::shared_ptr<const PlanarMesh> mesh_ptr, const materials::BHCurve& material,
                    const Excitation& excitation, const SolveOptions& options) {
  if (!mesh_ptr) throw Error(ErrorCode::kDomain, "solve needs a mesh");
  const PlanarMesh& m = *mesh_ptr;
  if (m.boundary_nodes.empty()) {
    throw Error(ErrorCode::kSingularSystem, "mesh has no Dirichlet boundary nodes");
  }
  FieldSolution sol;
  sol.mesh = mesh_ptr;
  sol.material = material;
  sol.theta_deg = m.theta_deg;
  sol.phase_currents = excitation.phase_currents;
  sol.turns_per_pole = resolve_turns(m, excitation);
  sol.mesh_id = m.id;

  Assembler asmb(m, material);
  const int nf = asmb.free_count();
  const auto& free_index = asmb.free_index();

  // Load vector from uniform coil current densities.
  const auto areas = m.region_areas();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(nf);
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const auto& info = m.regions[m.triangle_region[t]];
    if (info.tag != RegionTag::kCoil || info.phase < 0) continue;
    if (info.phase >= static_cast<int>(excitation.phase_currents.size())) continue;
    const double i = excitation.phase_currents[info.phase];
    if (i == 0.0) continue;
    const double j = info.polarity * sol.turns_per_pole * i / areas[m.triangle_region[t]];
    const double load = j * asmb.geometry(t).area / 3.0;
    for (int v : m.triangles[t]) {
      if (free_index[v] >= 0) f[free_index[v]] += load;
    }
  }

  const int n = static_cast<int>(m.nodes.size());
  sol.a.assign(n, 0.0);
  const double fnorm = f.norm();
  if (fnorm == 0.0) {
    sol.iterations = 1;
    sol.residual_history = {0.0};
    return sol;
  }
  if (options.warm_start && static_cast<int>(options.warm_start->size()) == n) {
    for (int k = 0; k < n; ++k) {
      if (free_index[k] >= 0) sol.a[k] = (*options.warm_start)[k];
    }
  }

  LinearSolver linear(nf, options.direct_solver_limit);
  Eigen::VectorXd r = asmb.residual(sol.a, f, false);
  double rnorm = r.norm();
  sol.residual_history.push_back(rnorm);
  std::vector<double> trial(n, 0.0);
  int steps = 0;
  while (rnorm > options.tolerance * fnorm) {
    if (steps >= options.max_iterations) {
      std::vector<std::string> details;
      for (double h : sol.residual_history) details.push_back(fmt::format("{:.6e}", h));
      throw Error(ErrorCode::kNonConvergence,
                  fmt::format("Newton did not converge in {} iterations (relative residual {:.3e})",
                              options.max_iterations, rnorm / fnorm),
                  details);
    }
    asmb.residual(sol.a, f, true);
    const Eigen::VectorXd delta = linear.solve(asmb.matrix(), -r);
    double step = 1.0;
    Eigen::VectorXd r_trial;
    double trial_norm = 0.0;
    for (int halving = 0;; ++halving) {
      trial = sol.a;
      for (int k = 0; k < n; ++k) {
        if (free_index[k] >= 0) trial[k] += step * delta[free_index[k]];
      }
      r_trial = asmb.residual(trial, f, false);
      trial_norm = r_trial.norm();
      if (trial_norm <= rnorm || halving >= 30) break;
      step *= 0.5;
    }
    if (trial_norm > rnorm) {
      std::vector<std::string> details;
      for (double h : sol.residual_history) details.push_back(fmt::format("{:.6e}", h));
      throw Error(ErrorCode::kNonConvergence, "damped Newton step failed to reduce the residual", details);
    }
    sol.a.swap(trial);
    r = std::move(r_trial);
    rnorm = trial_norm;
    sol.residual_history.push_back(rnorm);
    ++steps;
  }
  sol.iterations = std::max(1, steps);
  return sol;
}

ElementField flux_density(const FieldSolution& s) {
  const PlanarMesh& m = *s.mesh;
  const int nt = static_cast<int>(m.triangles.size());
  ElementField out;
  out.bx.resize(nt);
  out.by.resize(nt);
  out.bmag.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const auto b = element_b(element_geometry(m, t), m.triangles[t], s.a);
    out.bx[t] = b[0];
    out.by[t] = b[1];
    out.bmag[t] = std::hypot(b[0], b[1]);
  }
  return out;
}

double flux_linkage(const FieldSolution& s, int phase) {
  const PlanarMesh& m = *s.mesh;
  const auto areas = m.region_areas();
  const double length = m.layout ? m.layout->stack_length : 1.0;
  double lambda = 0.0;
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const int reg = m.triangle_region[t];
    const auto& info = m.regions[reg];
    if (info.tag != RegionTag::kCoil || info.phase != phase) continue;
    const auto& tri = m.triangles[t];
    const double mean_a = (s.a[tri[0]] + s.a[tri[1]] + s.a[tri[2]]) / 3.0;
    lambda += info.polarity * s.turns_per_pole / areas[reg] * m.triangle_area(t) * mean_a;
  }
  return lambda * length;
}

double coenergy(const FieldSolution& s) {
  const PlanarMesh& m = *s.mesh;
  const double length = m.layout ? m.layout->stack_length : 1.0;
  double w = 0.0;
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const ElementGeometry g = element_geometry(m, t);
    const auto b = element_b(g, m.triangles[t], s.a);
    const double bm = std::hypot(b[0], b[1]);
    const double density = is_iron(m.tag(t)) ? s.material.coenergy_density(bm) : 0.5 * bm * bm / kMu0;
    w += g.area * density;
  }
  return w * length;
}

double field_energy(const FieldSolution& s) {
  const PlanarMesh& m = *s.mesh;
  const double length = m.layout ? m.layout->stack_length : 1.0;
  double w = 0.0;
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const ElementGeometry g = element_geometry(m, t);
    const auto b = element_b(g, m.triangles[t], s.a);
    const double bm = std::hypot(b[0], b[1]);
    const double density = is_iron(m.tag(t)) ? s.material.energy_density(bm) : 0.5 * bm * bm / kMu0;
    w += g.area * density;
  }
  return w * length;
}

double torque_coenergy(const PlanarMesh& mesh, const materials::BHCurve& material,
                       const Excitation& excitation, double theta_deg, double delta_deg,
                       const SolveOptions& options) {
  if (!(delta_deg > 0.0)) throw Error(ErrorCode::kDomain, "torque step must be positive");
  auto plus = std::make_shared<const PlanarMesh>(
      mesh::rotate_gap_band(mesh, theta_deg + delta_deg - mesh.theta_deg));
  auto minus = std::make_shared<const PlanarMesh>(
      mesh::rotate_gap_band(mesh, theta_deg - delta_deg - mesh.theta_deg));
  const FieldSolution sp = solve(plus, material, excitation, options);
  SolveOptions warm = options;
  warm.warm_start = &sp.a;
  const FieldSolution sm = solve(minus, material, excitation, warm);
  return (coenergy(sp) - coenergy(sm)) / (2.0 * delta_deg * kDegToRad);
}

double gap_layer_mid_radius(const PlanarMesh& m, int layer) {
  if (layer < 0 || layer + 1 >= static_cast<int>(m.gap_radii.size())) {
    throw Error(ErrorCode::kContourOutsideGap, fmt::format("gap layer {} does not exist", layer));
  }
  return 0.5 * (m.gap_radii[layer] + m.gap_radii[layer + 1]);
}

double torque_maxwell(const FieldSolution& s, std::optional<double> contour_radius) {
  const PlanarMesh& m = *s.mesh;
  if (m.gap_radii.size() < 2) throw Error(ErrorCode::kContourOutsideGap, "mesh has no air gap");
  const double rc = contour_radius ? *contour_radius : gap_layer_mid_radius(m, m.band_layer);
  const double r_in = m.gap_radii.front(), r_out = m.gap_radii.back();
  if (!(rc > r_in) || !(rc < r_out)) {
    throw Error(ErrorCode::kContourOutsideGap,
                fmt::format("contour radius {:.6g} m is outside the air gap ({:.6g}, {:.6g})", rc, r_in,
                            r_out));
  }
  const double length = m.layout ? m.layout->stack_length : 1.0;
  double integral = 0.0;
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    if (m.triangle_region[t] != m.airgap_region) continue;
    const auto& tri = m.triangles[t];
    double angles[3];
    int hits = 0;
    for (int k = 0; k < 3 && hits < 3; ++k) {
      const Vec2 p = m.nodes[tri[k]], q = m.nodes[tri[(k + 1) % 3]];
      const bool pin = norm(p) < rc, qin = norm(q) < rc;
      if (pin == qin) continue;
      // |p + u (q - p)| = rc
      const Vec2 d = q - p;
      const double A = dot(d, d), B = 2.0 * dot(p, d), C = dot(p, p) - rc * rc;
      const double disc = std::sqrt(std::max(0.0, B * B - 4.0 * A * C));
      double u = (-B + disc) / (2.0 * A);
      if (u < 0.0 || u > 1.0) u = (-B - disc) / (2.0 * A);
      u = std::clamp(u, 0.0, 1.0);
      const Vec2 x = p + u * d;
      angles[hits++] = std::atan2(x.y, x.x);
    }
    if (hits != 2) continue;
    double span = angles[1] - angles[0];
    while (span > kPi) span -= 2.0 * kPi;
    while (span <= -kPi) span += 2.0 * kPi;
    const double phi0 = span >= 0.0 ? angles[0] : angles[1];
    const auto b = element_b(element_geometry(m, t), tri, s.a);
    integral += integrate_brbt(b[0], b[1], phi0, phi0 + std::abs(span));
  }
  return length / kMu0 * rc * rc * integral;
}

void write_field_vtk(const FieldSolution& s, const std::string& path) {
  const PlanarMesh& m = *s.mesh;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << "# vtk DataFile Version 3.0\n";
  out << fmt::format("srm_lab field theta_deg={:.6g}\n", s.theta_deg);
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << m.nodes.size() << " double\n";
  for (const Vec2& p : m.nodes) out << fmt::format("{:.9g} {:.9g} 0\n", p.x, p.y);
  out << "CELLS " << m.triangles.size() << ' ' << 4 * m.triangles.size() << '\n';
  for (const auto& t : m.triangles) out << fmt::format("3 {} {} {}\n", t[0], t[1], t[2]);
  out << "CELL_TYPES " << m.triangles.size() << '\n';
  for (std::size_t t = 0; t < m.triangles.size(); ++t) out << "5\n";
  out << "POINT_DATA " << m.nodes.size() << "\nSCALARS A_z double 1\nLOOKUP_TABLE default\n";
  for (double a : s.a) out << fmt::format("{:.9g}\n", a);
  const auto field = flux_density(s);
  out << "CELL_DATA " << m.triangles.size() << '\n';
  auto scalar = [&](const char* name, const std::vector<double>& v) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double x : v) out << fmt::format("{:.6g}\n", x);
  };
  scalar("B_mag", field.bmag);
  scalar("B_x", field.bx);
  scalar("B_y", field.by);
  out << "SCALARS region_tag int 1\nLOOKUP_TABLE default\n";
  for (std::size_t t = 0; t < m.triangles.size(); ++t) out << static_cast<int>(m.tag(static_cast<int>(t))) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path + "'");
}

}  // namespace srm::fieldsolver
