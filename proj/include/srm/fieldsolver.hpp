#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "srm/materials.hpp"
#include "srm/mesh.hpp"

namespace srm::fieldsolver {

struct Excitation {
  std::vector<double> phase_currents;  // A, indexed by phase
  int turns_per_pole = -1;             // -1: take it from the mesh layout
};

struct SolveOptions {
  double tolerance = 1e-6;  // on ||r|| relative to the load-vector norm
  int max_iterations = 50;
  int direct_solver_limit = 200000;  // unknowns; CG above
  const std::vector<double>* warm_start = nullptr;
};

struct FieldSolution {
  std::shared_ptr<const mesh::PlanarMesh> mesh;
  materials::BHCurve material;
  std::vector<double> a;  // Wb/m per node
  double theta_deg = 0.0;
  std::vector<double> phase_currents;
  int turns_per_pole = 0;
  int iterations = 0;
  std::vector<double> residual_history;
  std::uint64_t mesh_id = 0;
};

/// Nonlinear magnetostatics with A = 0 on the outer boundary. Iron regions
/// follow `material`; air and coils are free space. Throws NON_CONVERGENCE
/// or SINGULAR_SYSTEM.
FieldSolution solve(std::shared_ptr<const mesh::PlanarMesh> mesh, const materials::BHCurve& material,
                    const Excitation& excitation, const SolveOptions& options = {});

struct ElementField {
  std::vector<double> bx, by, bmag;
};
ElementField flux_density(const FieldSolution& solution);

/// Flux linkage (Wb) of one phase per its coil polarity map.
double flux_linkage(const FieldSolution& solution, int phase);
/// Magnetic coenergy (J) over the stack length.
double coenergy(const FieldSolution& solution);
/// Stored field energy (J) over the stack length.
double field_energy(const FieldSolution& solution);

/// Central difference of coenergy at fixed currents; angles in mechanical
/// degrees, positive torque drives theta upward.
double torque_coenergy(const mesh::PlanarMesh& mesh, const materials::BHCurve& material,
                       const Excitation& excitation, double theta_deg, double delta_deg = 0.25,
                       const SolveOptions& options = {});

/// Maxwell stress torque on a circle inside the air gap, integrated
/// exactly over each element the circle crosses. Default radius: middle of
/// the moving-band layer. Throws CONTOUR_OUTSIDE_GAP.
double torque_maxwell(const FieldSolution& solution, std::optional<double> contour_radius = std::nullopt);

/// Radius (m) in the middle of gap layer `layer`.
double gap_layer_mid_radius(const mesh::PlanarMesh& mesh, int layer);

void write_field_vtk(const FieldSolution& solution, const std::string& path);

}  // namespace srm::fieldsolver
