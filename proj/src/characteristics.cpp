#include "srm/characteristics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "srm/error.hpp"
#include "srm/parallel.hpp"

namespace srm::characteristics {

namespace {

using geometry::MotorDesign;
using mesh::PlanarMesh;
using geometry::RegionTag;

std::vector<double> single_phase(int phases, int phase, double current) {
  std::vector<double> i(phases, 0.0);
  i.at(phase) = current;
  return i;
}

// Trapezoid of the piecewise-linear sample curve over [a, b].
double integrate_samples(const std::vector<double>& x, const std::vector<double>& y, double a, double b) {
  auto value_at = [&](double t) {
    if (t <= x.front()) return y.front();
    if (t >= x.back()) return y.back();
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - x.begin());
    const double u = (t - x[k - 1]) / (x[k] - x[k - 1]);
    return y[k - 1] + u * (y[k] - y[k - 1]);
  };
  double sum = 0.0;
  double prev_x = a, prev_y = value_at(a);
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] <= a) continue;
    if (x[k] >= b) break;
    sum += 0.5 * (prev_y + y[k]) * (x[k] - prev_x);
    prev_x = x[k];
    prev_y = y[k];
  }
  sum += 0.5 * (prev_y + value_at(b)) * (b - prev_x);
  return sum;
}

double wrap(double theta, double start, double period) {
  double t = std::fmod(theta - start, period);
  if (t < 0.0) t += period;
  return start + t;
}

void check_currents(const std::vector<double>& currents) {
  if (currents.empty()) throw Error(ErrorCode::kDomain, "at least one current is required");
  for (double i : currents) {
    if (!std::isfinite(i)) throw Error(ErrorCode::kDomain, "currents must be finite");
  }
}

const materials::Material& design_material(const MotorDesign& d, materials::Material& storage) {
  storage = materials::load_material(d.material);
  return storage;
}

}  // namespace

const char* to_string(MeanConvention c) {
  switch (c) {
    case MeanConvention::kHalfStroke: return "half_stroke";
    case MeanConvention::kFullPeriod: return "full_period";
    case MeanConvention::kCommutatedEnvelope: return "commutated_envelope";
  }
  return "?";
}

MeanConvention parse_mean_convention(const std::string& name) {
  if (name == "half_stroke") return MeanConvention::kHalfStroke;
  if (name == "full_period") return MeanConvention::kFullPeriod;
  if (name == "commutated_envelope") return MeanConvention::kCommutatedEnvelope;
  throw Error(ErrorCode::kDomain, "unknown mean-torque convention '" + name + "'");
}

PlanarMesh machine_mesh(const MotorDesign& design, geometry::MeshPreset preset) {
  geometry::GeometryOptions opt;
  opt.sizing = geometry::sizing_for(design, preset);
  return mesh::triangulate(geometry::build_cross_section(design, opt));
}

MeanPeak mean_peak(const std::vector<double>& theta, const std::vector<double>& torque,
                   MeanConvention convention, double period_deg, int phases) {
  if (theta.size() < 2 || theta.size() != torque.size()) {
    throw Error(ErrorCode::kDomain, "mean_peak needs at least two paired samples");
  }
  for (std::size_t k = 1; k < theta.size(); ++k) {
    if (!(theta[k] > theta[k - 1])) throw Error(ErrorCode::kDomain, "theta samples must increase strictly");
  }
  MeanPeak out;
  for (double t : torque) out.peak = std::max(out.peak, std::abs(t));
  const double span = theta.back() - theta.front();
  const double period = period_deg > 0.0 ? period_deg : span;
  const double t0 = theta.front();
  switch (convention) {
    case MeanConvention::kHalfStroke: {
      const double end = t0 + 0.5 * period;
      out.mean = integrate_samples(theta, torque, t0, end) / (end - t0);
      break;
    }
    case MeanConvention::kFullPeriod:
      out.mean = integrate_samples(theta, torque, t0, t0 + period) / period;
      break;
    case MeanConvention::kCommutatedEnvelope: {
      if (phases < 1) throw Error(ErrorCode::kDomain, "phase count must be positive");
      auto value_at = [&](double t) {
        t = wrap(t, t0, period);
        const auto it = std::upper_bound(theta.begin(), theta.end(), t);
        if (it == theta.end()) return torque.back();
        if (it == theta.begin()) return torque.front();
        const std::size_t k = static_cast<std::size_t>(it - theta.begin());
        const double u = (t - theta[k - 1]) / (theta[k] - theta[k - 1]);
        return torque[k - 1] + u * (torque[k] - torque[k - 1]);
      };
      const double stroke = period / phases;
      const int n = 64 * static_cast<int>(theta.size());
      double sum = 0.0;
      for (int k = 0; k <= n; ++k) {
        const double t = t0 + stroke * k / n;
        double best = value_at(t);
        for (int p = 1; p < phases; ++p) best = std::max(best, value_at(t + p * stroke));
        sum += (k == 0 || k == n ? 0.5 : 1.0) * best;
      }
      out.mean = sum / n;
      break;
    }
  }
  return out;
}

std::vector<TorqueCurve> sweep_torque_angle(const MotorDesign& design, const std::vector<double>& currents,
                                            int theta_count, const SweepOptions& options) {
  check_currents(currents);
  if (theta_count < 2) throw Error(ErrorCode::kDomain, "theta_count must be at least 2");
  if (options.phase < 0 || options.phase >= design.phases) throw Error(ErrorCode::kDomain, "phase out of range");
  materials::Material material_storage;
  const auto& material = design_material(design, material_storage);
  const PlanarMesh base = machine_mesh(design, options.preset);
  const double pitch = design.rotor_pitch_deg();
  const double start = base.layout->phase_unaligned_deg.at(options.phase);

  std::vector<TorqueCurve> curves(currents.size());
  for (std::size_t c = 0; c < currents.size(); ++c) {
    curves[c].current = currents[c];
    curves[c].torque.assign(theta_count, 0.0);
    for (int k = 0; k < theta_count; ++k) curves[c].theta_deg.push_back(start + pitch * k / (theta_count - 1));
  }
  const int tasks = static_cast<int>(currents.size()) * theta_count;
  parallel_for(tasks, options.threads, [&](int task) {
    const int c = task / theta_count, k = task % theta_count;
    const double theta = curves[c].theta_deg[k];
    const fieldsolver::Excitation ex{single_phase(design.phases, options.phase, currents[c])};
    try {
      curves[c].torque[k] =
          fieldsolver::torque_coenergy(base, material.bh, ex, theta, options.delta_deg, options.solve);
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("at theta = {:.6g} deg, i = {:.6g} A: {}", theta, currents[c], e.what()),
                  e.details());
    }
  });
  for (auto& curve : curves) {
    const MeanPeak mp = mean_peak(curve.theta_deg, curve.torque, options.convention, pitch, design.phases);
    curve.mean = mp.mean;
    curve.peak = mp.peak;
  }
  return curves;
}

namespace {

double yoke_percentile(const PlanarMesh& m, const fieldsolver::FieldSolution& sol) {
  const auto field = fieldsolver::flux_density(sol);
  // Per yoke region: (|B|, area) pairs, then the area-weighted 95th percentile.
  std::vector<std::vector<std::pair<double, double>>> per_region(m.regions.size());
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const int r = m.triangle_region[t];
    if (m.regions[r].name.rfind("stator_yoke", 0) != 0) continue;
    per_region[r].emplace_back(field.bmag[t], m.triangle_area(t));
  }
  double worst = 0.0;
  for (auto& samples : per_region) {
    if (samples.empty()) continue;
    std::sort(samples.begin(), samples.end());
    double total = 0.0;
    for (const auto& s : samples) total += s.second;
    double acc = 0.0;
    for (const auto& s : samples) {
      acc += s.second;
      if (acc >= 0.95 * total) {
        worst = std::max(worst, s.first);
        break;
      }
    }
  }
  return worst;
}

}  // namespace

StrokeEvaluation evaluate_half_stroke(const MotorDesign& design, double current, const SweepOptions& options) {
  materials::Material material_storage;
  const auto& material = design_material(design, material_storage);
  const PlanarMesh base = machine_mesh(design, options.preset);
  const double pitch = design.rotor_pitch_deg();
  const double unaligned = base.layout->phase_unaligned_deg.at(options.phase);
  const fieldsolver::Excitation ex{single_phase(design.phases, options.phase, current)};
  double w[2] = {0.0, 0.0};
  double yoke = 0.0;
  parallel_for(2, options.threads, [&](int k) {
    auto m = std::make_shared<const PlanarMesh>(mesh::rotate_gap_band(base, unaligned + 0.5 * pitch * k));
    const auto sol = fieldsolver::solve(m, material.bh, ex, options.solve);
    w[k] = fieldsolver::coenergy(sol);
    if (k == 1) yoke = yoke_percentile(*m, sol);
  });
  return {(w[1] - w[0]) / (0.5 * pitch * kDegToRad), yoke};
}

double half_stroke_mean_torque(const MotorDesign& design, double current, const SweepOptions& options) {
  return evaluate_half_stroke(design, current, options).mean_torque;
}

double aligned_yoke_flux_density(const MotorDesign& design, double current, const SweepOptions& options) {
  return evaluate_half_stroke(design, current, options).yoke_flux_density;
}

namespace {

struct GridPos {
  int k;
  double u;
};

// Running integral of the monotone cubic (Fritsch-Carlson) interpolant of
// y(x). Exact for quadratics; equals the trapezoid rule for straight lines.
std::vector<double> cumulative_hermite_integral(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> slope(n - 1), d(n, 0.0), out(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) slope[k] = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
  d[0] = slope[0];
  d[n - 1] = slope[n - 2];
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (slope[k - 1] * slope[k] <= 0.0) continue;
    const double h0 = x[k] - x[k - 1], h1 = x[k + 1] - x[k];
    const double w0 = 2.0 * h1 + h0, w1 = h1 + 2.0 * h0;
    d[k] = (w0 + w1) / (w0 / slope[k - 1] + w1 / slope[k]);
  }
  if (n > 2) {
    // Three-point end slopes, clipped to keep the interpolant monotone.
    auto end_slope = [](double h0, double h1, double s0, double s1) {
      double e = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
      if (e * s0 <= 0.0) e = 0.0;
      else if (s0 * s1 <= 0.0 && std::abs(e) > 3.0 * std::abs(s0)) e = 3.0 * s0;
      return e;
    };
    d[0] = end_slope(x[1] - x[0], x[2] - x[1], slope[0], slope[1]);
    d[n - 1] = end_slope(x[n - 1] - x[n - 2], x[n - 2] - x[n - 3], slope[n - 2], slope[n - 3]);
  }
  for (std::size_t k = 1; k < n; ++k) {
    const double h = x[k] - x[k - 1];
    out[k] = out[k - 1] + h * 0.5 * (y[k - 1] + y[k]) + h * h * (d[k - 1] - d[k]) / 12.0;
  }
  return out;
}

GridPos locate(const std::vector<double>& grid, double x) {
  const int n = static_cast<int>(grid.size());
  if (x <= grid.front()) return {0, 0.0};
  if (x >= grid.back()) return {n - 2, 1.0};
  const int k = static_cast<int>(std::upper_bound(grid.begin(), grid.end(), x) - grid.begin()) - 1;
  return {k, (x - grid[k]) / (grid[k + 1] - grid[k])};
}

double bilinear(const std::vector<std::vector<double>>& table, GridPos r, GridPos c) {
  const double a = table[r.k][c.k] + c.u * (table[r.k][c.k + 1] - table[r.k][c.k]);
  const double b = table[r.k + 1][c.k] + c.u * (table[r.k + 1][c.k + 1] - table[r.k + 1][c.k]);
  return a + r.u * (b - a);
}

}  // namespace

double FluxLinkageMap::lambda_at(double theta, double i) const {
  if (i < -1e-12 || i > max_current() * (1.0 + 1e-12)) {
    throw Error(ErrorCode::kMapRangeExceeded,
                fmt::format("current {:.6g} A lies outside the flux map (0..{:.6g} A)", i, max_current()));
  }
  return bilinear(lambda, locate(theta_deg, wrap(theta, unaligned_deg, period_deg)), locate(current, i));
}

double FluxLinkageMap::torque_at(double theta, double i) const {
  if (i < -1e-12 || i > max_current() * (1.0 + 1e-12)) {
    throw Error(ErrorCode::kMapRangeExceeded,
                fmt::format("current {:.6g} A lies outside the flux map (0..{:.6g} A)", i, max_current()));
  }
  const GridPos r = locate(theta_deg, wrap(theta, unaligned_deg, period_deg));
  const GridPos c = locate(current, i);
  if (torque_slope.empty()) return bilinear(torque, r, c);
  const double h = current[c.k + 1] - current[c.k];
  const double u = c.u;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  auto row = [&](int k) {
    return h00 * torque[k][c.k] + h10 * h * torque_slope[k][c.k] + h01 * torque[k][c.k + 1] +
           h11 * h * torque_slope[k][c.k + 1];
  };
  const double a = row(r.k), b = row(r.k + 1);
  return a + r.u * (b - a);
}

double FluxLinkageMap::current_at(double theta, double flux) const {
  if (flux <= 0.0) return 0.0;
  const GridPos r = locate(theta_deg, wrap(theta, unaligned_deg, period_deg));
  double prev = 0.0;
  for (std::size_t c = 1; c < current.size(); ++c) {
    const double lam = lambda[r.k][c] + r.u * (lambda[r.k + 1][c] - lambda[r.k][c]);
    if (flux <= lam) {
      return current[c - 1] + (current[c] - current[c - 1]) * (flux - prev) / (lam - prev);
    }
    prev = lam;
  }
  throw Error(ErrorCode::kMapRangeExceeded,
              fmt::format("flux linkage {:.6g} Wb needs more than the map's {:.6g} A", flux, max_current()));
}

FluxLinkageMap build_flux_map(const MotorDesign& design, int theta_count, int current_count, double i_max,
                              const SweepOptions& options) {
  if (!(i_max > 0.0)) throw Error(ErrorCode::kDomain, "i_max must be positive");
  if (theta_count < 3 || current_count < 2) throw Error(ErrorCode::kDomain, "flux map grid is too small");
  materials::Material material_storage;
  const auto& material = design_material(design, material_storage);
  const PlanarMesh base = machine_mesh(design, options.preset);
  FluxLinkageMap map;
  map.rotor_teeth = design.rotor_teeth();
  map.phases = design.phases;
  map.period_deg = design.rotor_pitch_deg();
  map.unaligned_deg = base.layout->phase_unaligned_deg.at(options.phase);
  map.phase_unaligned_deg = base.layout->phase_unaligned_deg;
  for (int k = 0; k < theta_count; ++k) {
    map.theta_deg.push_back(map.unaligned_deg + map.period_deg * k / (theta_count - 1));
  }
  for (int c = 0; c < current_count; ++c) map.current.push_back(i_max * c / (current_count - 1));
  map.lambda.assign(theta_count, std::vector<double>(current_count, 0.0));
  map.torque.assign(theta_count, std::vector<double>(current_count, 0.0));
  map.torque_slope.assign(theta_count, {});

  // Rows 0..n-2 are distinct; the last row repeats the first by periodicity.
  // Each row also solves at theta +- delta so the torque column is the
  // theta-derivative of W'(theta, i) = integral of lambda di at that row.
  const int rows = theta_count - 1;
  const double delta = options.delta_deg;
  std::vector<std::vector<double>> lambda_plus(rows), lambda_minus(rows);
  parallel_for(rows, options.threads, [&](int r) {
    const double theta = map.theta_deg[r];
    auto at = [&](double t) { return std::make_shared<const PlanarMesh>(mesh::rotate_gap_band(base, t)); };
    const auto m0 = at(theta), mp = at(theta + delta), mm = at(theta - delta);
    lambda_plus[r].assign(current_count, 0.0);
    lambda_minus[r].assign(current_count, 0.0);
    std::vector<double> warm;
    for (int c = 1; c < current_count; ++c) {
      const fieldsolver::Excitation ex{single_phase(design.phases, options.phase, map.current[c])};
      fieldsolver::SolveOptions opt = options.solve;
      try {
        if (!warm.empty()) opt.warm_start = &warm;
        const auto s0 = fieldsolver::solve(m0, material.bh, ex, opt);
        map.lambda[r][c] = fieldsolver::flux_linkage(s0, options.phase);
        opt.warm_start = &s0.a;
        lambda_plus[r][c] = fieldsolver::flux_linkage(fieldsolver::solve(mp, material.bh, ex, opt), options.phase);
        lambda_minus[r][c] = fieldsolver::flux_linkage(fieldsolver::solve(mm, material.bh, ex, opt), options.phase);
        warm = s0.a;
      } catch (const Error& e) {
        throw Error(e.code(),
                    fmt::format("at theta = {:.6g} deg, i = {:.6g} A: {}", theta, map.current[c], e.what()),
                    e.details());
      }
    }
  });
  map.lambda[rows] = map.lambda[0];
  const double step = 2.0 * delta * kDegToRad;
  for (int r = 0; r < rows; ++r) {
    const auto wp = cumulative_hermite_integral(map.current, lambda_plus[r]);
    const auto wm = cumulative_hermite_integral(map.current, lambda_minus[r]);
    map.torque_slope[r].resize(current_count);
    for (int c = 0; c < current_count; ++c) {
      map.torque[r][c] = (wp[c] - wm[c]) / step;
      map.torque_slope[r][c] = (lambda_plus[r][c] - lambda_minus[r][c]) / step;
    }
  }
  map.torque[rows] = map.torque[0];
  map.torque_slope[rows] = map.torque_slope[0];
  return map;
}

CoreLoss core_loss_from_peaks(const PlanarMesh& m, const std::vector<double>& b_peak,
                              const materials::LossCoefficients& loss, double stack_length_m, double stator_hz,
                              double rotor_hz) {
  CoreLoss out;
  out.stator_frequency_hz = stator_hz;
  out.rotor_frequency_hz = rotor_hz;
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const auto tag = m.tag(t);
    if (tag != RegionTag::kStatorCore && tag != RegionTag::kRotorCore) continue;
    const double mass = m.triangle_area(t) * stack_length_m * loss.density;
    const double f = tag == RegionTag::kStatorCore ? stator_hz : rotor_hz;
    const double b = b_peak[t];
    if (f <= 0.0 || b <= 0.0) continue;
    const double hyst = loss.k_h * f * std::pow(b, loss.alpha) * mass;
    const double eddy = loss.k_e * (f * b) * (f * b) * mass;
    if (tag == RegionTag::kStatorCore) {
      out.stator_hysteresis += hyst;
      out.stator_eddy += eddy;
    } else {
      out.rotor_hysteresis += hyst;
      out.rotor_eddy += eddy;
    }
  }
  return out;
}

CoreLoss core_loss(const MotorDesign& design, double speed_rpm, const CoreLossOptions& options) {
  if (speed_rpm < 0.0) throw Error(ErrorCode::kDomain, "speed must be non-negative");
  if (options.theta_count < 1) throw Error(ErrorCode::kDomain, "theta_count must be positive");
  materials::Material material_storage;
  const auto& material = design_material(design, material_storage);
  const PlanarMesh base = machine_mesh(design, options.preset);
  const int nt = static_cast<int>(base.triangles.size());
  const double pitch = design.rotor_pitch_deg();
  const int tasks = design.phases * options.theta_count;
  std::vector<std::vector<double>> bmag(tasks);
  parallel_for(tasks, options.threads, [&](int task) {
    const int phase = task / options.theta_count, k = task % options.theta_count;
    auto m = std::make_shared<const PlanarMesh>(mesh::rotate_gap_band(base, pitch * k / options.theta_count));
    const auto sol = fieldsolver::solve(m, material.bh, {single_phase(design.phases, phase, options.current)});
    bmag[task] = fieldsolver::flux_density(sol).bmag;
  });
  std::vector<double> peak(nt, 0.0);
  for (const auto& b : bmag) {
    for (int t = 0; t < nt; ++t) peak[t] = std::max(peak[t], b[t]);
  }
  const double stator_hz = design.rotor_teeth() * speed_rpm / 60.0;
  const double rotor_hz = options.rotor_frequency_factor * 0.5 * design.stator_teeth() * speed_rpm / 60.0;
  return core_loss_from_peaks(base, peak, material.loss, design.stack_length * 1e-3, stator_hz, rotor_hz);
}

std::vector<ComparisonRow> compare(const MotorDesign& a, const MotorDesign& b, const std::vector<double>& currents,
                                   int theta_count, const SweepOptions& options) {
  if (std::abs(a.outer_diameter - b.outer_diameter) > 1e-9 || std::abs(a.stack_length - b.stack_length) > 1e-9) {
    throw Error(ErrorCode::kEnvelopeMismatch,
                fmt::format("designs do not share an envelope (D_o {:.6g} vs {:.6g} mm, L {:.6g} vs {:.6g} mm)",
                            a.outer_diameter, b.outer_diameter, a.stack_length, b.stack_length));
  }
  const auto ca = sweep_torque_angle(a, currents, theta_count, options);
  const auto cb = sweep_torque_angle(b, currents, theta_count, options);
  std::vector<ComparisonRow> rows;
  for (std::size_t k = 0; k < currents.size(); ++k) {
    ComparisonRow row;
    row.current = currents[k];
    row.mean_a = ca[k].mean;
    row.mean_b = cb[k].mean;
    row.peak_a = ca[k].peak;
    row.peak_b = cb[k].peak;
    row.mean_delta_pct = row.mean_a != 0.0 ? 100.0 * (row.mean_a - row.mean_b) / row.mean_a : 0.0;
    row.peak_delta_pct = row.peak_a != 0.0 ? 100.0 * (row.peak_a - row.peak_b) / row.peak_a : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  return fmt::format("{:.6g}", value);
}

std::string sweep_csv(const std::vector<TorqueCurve>& curves) {
  std::string out = "theta_deg,current_A,torque_Nm\n";
  for (const auto& c : curves) {
    for (std::size_t k = 0; k < c.theta_deg.size(); ++k) {
      out += format_number(c.theta_deg[k]) + ',' + format_number(c.current) + ',' + format_number(c.torque[k]) + '\n';
    }
  }
  return out;
}

std::string summary_csv(const std::vector<TorqueCurve>& curves) {
  std::string out = "current_A,mean_torque_Nm,peak_torque_Nm\n";
  for (const auto& c : curves) {
    out += format_number(c.current) + ',' + format_number(c.mean) + ',' + format_number(c.peak) + '\n';
  }
  return out;
}

namespace {

std::string map_csv(const FluxLinkageMap& map, const std::vector<std::vector<double>>& table, const char* column) {
  std::string out = std::string("theta_deg,current_A,") + column + '\n';
  for (std::size_t r = 0; r < map.theta_deg.size(); ++r) {
    for (std::size_t c = 0; c < map.current.size(); ++c) {
      out += format_number(map.theta_deg[r]) + ',' + format_number(map.current[c]) + ',' +
             format_number(table[r][c]) + '\n';
    }
  }
  return out;
}

}  // namespace

std::string flux_map_csv(const FluxLinkageMap& map) { return map_csv(map, map.lambda, "lambda_Wb"); }
std::string torque_map_csv(const FluxLinkageMap& map) { return map_csv(map, map.torque, "torque_Nm"); }

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out =
      "current_A,mean_a_Nm,mean_b_Nm,peak_a_Nm,peak_b_Nm,mean_torque_increase_pct,peak_torque_increase_pct\n";
  for (const auto& r : rows) {
    out += format_number(r.current) + ',' + format_number(r.mean_a) + ',' + format_number(r.mean_b) + ',' +
           format_number(r.peak_a) + ',' + format_number(r.peak_b) + ',' + format_number(r.mean_delta_pct) + ',' +
           format_number(r.peak_delta_pct) + '\n';
  }
  return out;
}

}  // namespace srm::characteristics
