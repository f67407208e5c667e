#pragma once

#include <span>
#include <string>
#include <vector>

namespace srm::materials {

inline constexpr double kMu0 = 4.0e-7 * 3.14159265358979323846;

struct BHSample {
  double h;  // A/m
  double b;  // T
};

struct Reluctivity {
  double nu;        // m/H
  double dnu_db2;   // d(nu)/d(B^2)
};

/// Single-valued, saturating B-H characteristic.
///
/// H(B) is a C1 convexity-preserving quadratic spline through the samples
/// (one Schumaker knot per interval where needed). The first segment is
/// exactly linear, and beyond the last sample the curve continues with
/// dB/dH = mu0 and a derivative-matched join. Convex H(B) keeps
/// nu = H/B non-decreasing in B^2, so the Newton Jacobian stays SPD.
class BHCurve {
 public:
  BHCurve() = default;

  /// Samples must start at (0, 0) with H and B strictly increasing and
  /// secant slopes dH/dB non-decreasing (convex H(B)).
  static BHCurve from_samples(std::vector<BHSample> samples, double knee_b);

  /// Constant-permeability material (no saturation), e.g. air for mu_r = 1.
  static BHCurve linear(double relative_permeability);

  Reluctivity reluctivity(double b_squared) const;
  double h_of_b(double b) const;
  /// dH/dB at |B| = b.
  double dh_db(double b) const;
  /// w(B) = integral_0^B H dB'  (J/m^3)
  double energy_density(double b) const;
  /// w'(B) = B H(B) - w(B)      (J/m^3)
  double coenergy_density(double b) const;

  std::span<const BHSample> samples() const { return samples_; }
  double knee_b() const { return knee_b_; }
  bool is_linear() const { return linear_; }
  double initial_reluctivity() const;

 private:
  struct Piece {
    double b0, b1;  // validity range
    double h0;      // H(b0)
    double s0;      // H'(b0)
    double c;       // quadratic coefficient: H = h0 + s0 t + c t^2
    double w0;      // energy density at b0
  };
  const Piece* find_piece(double b) const;

  std::vector<BHSample> samples_;
  std::vector<Piece> pieces_;
  double knee_b_ = 0.0;
  bool linear_ = false;
  double linear_nu_ = 0.0;
  double h_last_ = 0.0, b_last_ = 0.0, w_last_ = 0.0;
};

struct LossCoefficients {
  double k_h = 0.0;      // W/kg per Hz per T^alpha
  double alpha = 2.0;    // Steinmetz exponent
  double k_e = 0.0;      // W/kg per Hz^2 per T^2
  double density = 7650.0;  // kg/m^3
};

struct LossDatum {
  double frequency_hz;
  double b_peak;
  double watts_per_kg;
};

/// k_h f B^alpha + k_e (f B)^2  in W/kg.
double core_loss_density(double b_peak, double frequency_hz,
                         const LossCoefficients& coeffs);

/// Least-squares fit (relative residuals) of the two-term Steinmetz model.
/// alpha is found by a bracketed 1-D search; k_h, k_e by non-negative linear
/// least squares for each trial alpha.
LossCoefficients fit_steinmetz(std::span<const LossDatum> data, double density);

struct Material {
  std::string name;
  BHCurve bh;
  LossCoefficients loss;
  std::vector<LossDatum> loss_table;
};

/// Built-in M19-24G lamination steel (30-point curve to 2.2 T, knee 1.9 T).
const Material& m19_24g();

/// Resolves a library name ("M19-24G") or a path to a material JSON file.
Material load_material(const std::string& name_or_path);
Material parse_material_json(const std::string& text);
std::string material_to_json(const Material& material);

}  // namespace srm::materials
