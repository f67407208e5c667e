#include "srm/materials.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "srm/error.hpp"

namespace srm::materials {

namespace {

using nlohmann::json;

// Representative M19-24G (0.635 mm, fully processed) magnetization curve.
// The low-field S-bend is replaced by the secant line to 0.8 T so that the
// characteristic is convex in H(B).
constexpr BHSample kM19Samples[] = {
    {0.0, 0.00},          {120.574235, 0.80},   {131.549476, 0.85},
    {144.245023, 0.90},   {159.260604, 0.95},   {177.403105, 1.00},
    {199.800644, 1.05},   {228.544159, 1.10},   {266.791172, 1.15},
    {318.784352, 1.20},   {389.759106, 1.25},   {484.196783, 1.30},
    {604.838883, 1.35},   {754.355603, 1.40},   {937.516356, 1.45},
    {1163.621346, 1.50},  {1448.244321, 1.55},  {1818.683563, 1.60},
    {2308.299753, 1.65},  {2950.281417, 1.70},  {3780.055656, 1.75},
    {4837.571155, 1.80},  {6172.041903, 1.85},  {7848.936266, 1.90},
    {9958.815425, 1.95},  {12658.870924, 2.00}, {16179.145409, 2.05},
    {20840.071242, 2.10}, {27098.318698, 2.15}, {35593.917422, 2.20},
};

// Representative 50/60/400 Hz specific core loss (W/kg) for M19-24G.
constexpr LossDatum kM19Loss[] = {
    {50, 0.5, 0.440},  {50, 0.7, 0.821},  {50, 1.0, 1.59},  {50, 1.2, 2.24},
    {50, 1.5, 3.39},   {50, 1.7, 4.29},   {60, 0.5, 0.554}, {60, 0.7, 1.04},
    {60, 1.0, 2.01},   {60, 1.2, 2.83},   {60, 1.5, 4.29},  {60, 1.7, 5.42},
    {400, 0.5, 9.15},  {400, 0.7, 17.4},  {400, 1.0, 34.6}, {400, 1.2, 49.2},
    {400, 1.5, 75.7},  {400, 1.7, 96.4},
};

constexpr double kM19Density = 7650.0;

}  // namespace

BHCurve BHCurve::from_samples(std::vector<BHSample> samples, double knee_b) {
  if (samples.size() < 2) throw Error(ErrorCode::kDomain, "B-H curve needs at least 2 samples");
  if (samples.front().h != 0.0 || samples.front().b != 0.0) {
    throw Error(ErrorCode::kDomain, "B-H curve must start at (0, 0)");
  }
  const std::size_t n = samples.size();
  std::vector<double> slope(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double db = samples[k + 1].b - samples[k].b;
    const double dh = samples[k + 1].h - samples[k].h;
    if (!(db > 0.0) || !(dh > 0.0)) {
      throw Error(ErrorCode::kDomain, "B-H samples must be strictly increasing in H and B");
    }
    slope[k] = dh / db;
    if (k > 0 && slope[k] < slope[k - 1] * (1.0 - 1e-12)) {
      throw Error(ErrorCode::kDomain,
                  "B-H samples must have non-decreasing dH/dB (convex H(B)) at B=" +
                      std::to_string(samples[k].b));
    }
  }
  const double mu0_slope = 1.0 / kMu0;
  if (slope.back() > mu0_slope) {
    throw Error(ErrorCode::kDomain, "B-H curve is steeper than free space at its last sample");
  }

  // Knot derivatives: linear first segment, three-point estimate inside,
  // free-space slope at the end so the saturated extension joins with C1.
  std::vector<double> d(n);
  d[0] = slope[0];
  d[1] = slope[0];
  for (std::size_t k = 2; k + 1 < n; ++k) {
    const double h0 = samples[k].b - samples[k - 1].b;
    const double h1 = samples[k + 1].b - samples[k].b;
    d[k] = (h1 * slope[k - 1] + h0 * slope[k]) / (h0 + h1);
  }
  d[n - 1] = (n > 2) ? mu0_slope : slope[0];
  if (n == 2) d[1] = slope[0];

  BHCurve curve;
  curve.samples_ = std::move(samples);
  curve.knee_b_ = knee_b;
  double w = 0.0;
  auto add_piece = [&](double b0, double b1, double h0, double s0, double c) {
    Piece p{b0, b1, h0, s0, c, w};
    const double t = b1 - b0;
    w += h0 * t + s0 * t * t / 2.0 + c * t * t * t / 3.0;
    curve.pieces_.push_back(p);
  };
  const auto& s = curve.samples_;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double x0 = s[k].b, x1 = s[k + 1].b;
    const double y0 = s[k].h;
    const double h = x1 - x0;
    const double s0 = d[k], s1 = d[k + 1], delta = slope[k];
    const double scale = std::max({std::abs(s0), std::abs(s1), std::abs(delta)});
    if (std::abs(s0 + s1 - 2.0 * delta) <= 1e-12 * scale) {
      add_piece(x0, x1, y0, s0, (s1 - s0) / (2.0 * h));
      continue;
    }
    // Schumaker split: the knot position keeps the mid slope inside [s0, s1].
    const double span = s1 - s0;
    const double lo = std::max(0.0, (s0 + s1 - 2.0 * delta) / span);
    const double hi = std::min(1.0, 2.0 * (s1 - delta) / span);
    const double frac = 0.5 * (lo + hi);
    const double a = frac * h, b = h - a;
    const double s_mid = (2.0 * (s[k + 1].h - y0) - a * s0 - b * s1) / h;
    add_piece(x0, x0 + a, y0, s0, (s_mid - s0) / (2.0 * a));
    add_piece(x0 + a, x1, y0 + a * (s0 + s_mid) / 2.0, s_mid, (s1 - s_mid) / (2.0 * b));
  }
  curve.b_last_ = s.back().b;
  curve.h_last_ = s.back().h;
  curve.w_last_ = w;
  return curve;
}

BHCurve BHCurve::linear(double relative_permeability) {
  if (!(relative_permeability > 0.0)) {
    throw Error(ErrorCode::kDomain, "relative permeability must be positive");
  }
  BHCurve curve;
  curve.linear_ = true;
  curve.linear_nu_ = 1.0 / (kMu0 * relative_permeability);
  curve.samples_ = {{0.0, 0.0}, {curve.linear_nu_, 1.0}};
  curve.knee_b_ = 1e300;
  return curve;
}

double BHCurve::initial_reluctivity() const {
  return linear_ ? linear_nu_ : pieces_.front().s0;
}

const BHCurve::Piece* BHCurve::find_piece(double b) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), b,
                             [](double v, const Piece& p) { return v < p.b1; });
  if (it == pieces_.end()) return nullptr;
  return &*it;
}

double BHCurve::h_of_b(double b) const {
  b = std::abs(b);
  if (linear_) return linear_nu_ * b;
  if (b >= b_last_) return h_last_ + (b - b_last_) / kMu0;
  const Piece* p = find_piece(b);
  const double t = b - p->b0;
  return p->h0 + p->s0 * t + p->c * t * t;
}

double BHCurve::dh_db(double b) const {
  b = std::abs(b);
  if (linear_) return linear_nu_;
  if (b >= b_last_) return 1.0 / kMu0;
  const Piece* p = find_piece(b);
  return p->s0 + 2.0 * p->c * (b - p->b0);
}

Reluctivity BHCurve::reluctivity(double b_squared) const {
  if (linear_) return {linear_nu_, 0.0};
  const double b = std::sqrt(std::max(0.0, b_squared));
  if (b < pieces_.front().b1) return {pieces_.front().s0, 0.0};
  const double h = h_of_b(b);
  const double hp = dh_db(b);
  return {h / b, (hp * b - h) / (2.0 * b * b * b)};
}

double BHCurve::energy_density(double b) const {
  b = std::abs(b);
  if (linear_) return 0.5 * linear_nu_ * b * b;
  if (b >= b_last_) {
    const double t = b - b_last_;
    return w_last_ + h_last_ * t + t * t / (2.0 * kMu0);
  }
  const Piece* p = find_piece(b);
  const double t = b - p->b0;
  return p->w0 + p->h0 * t + p->s0 * t * t / 2.0 + p->c * t * t * t / 3.0;
}

double BHCurve::coenergy_density(double b) const {
  b = std::abs(b);
  return b * h_of_b(b) - energy_density(b);
}

double core_loss_density(double b_peak, double frequency_hz, const LossCoefficients& coeffs) {
  if (b_peak <= 0.0 || frequency_hz <= 0.0) return 0.0;
  const double fb = frequency_hz * b_peak;
  return coeffs.k_h * frequency_hz * std::pow(b_peak, coeffs.alpha) + coeffs.k_e * fb * fb;
}

namespace {

struct FitResult {
  double k_h, k_e, residual;
};

FitResult fit_for_alpha(std::span<const LossDatum> data, double alpha) {
  // Rows: [f B^a / P, (f B)^2 / P] x = 1
  double a11 = 0, a12 = 0, a22 = 0, r1 = 0, r2 = 0;
  for (const auto& d : data) {
    const double u = d.frequency_hz * std::pow(d.b_peak, alpha) / d.watts_per_kg;
    const double v = std::pow(d.frequency_hz * d.b_peak, 2) / d.watts_per_kg;
    a11 += u * u; a12 += u * v; a22 += v * v; r1 += u; r2 += v;
  }
  const double det = a11 * a22 - a12 * a12;
  double kh = (r1 * a22 - r2 * a12) / det;
  double ke = (a11 * r2 - a12 * r1) / det;
  if (kh < 0.0) { kh = 0.0; ke = r2 / a22; }
  if (ke < 0.0) { ke = 0.0; kh = r1 / a11; }
  double res = 0.0;
  for (const auto& d : data) {
    const double model = kh * d.frequency_hz * std::pow(d.b_peak, alpha) +
                         ke * std::pow(d.frequency_hz * d.b_peak, 2);
    const double e = model / d.watts_per_kg - 1.0;
    res += e * e;
  }
  return {kh, ke, res};
}

}  // namespace

LossCoefficients fit_steinmetz(std::span<const LossDatum> data, double density) {
  if (data.size() < 3) throw Error(ErrorCode::kDomain, "Steinmetz fit needs at least 3 loss data");
  double best_alpha = 1.0;
  double best_res = 1e300;
  for (int i = 0; i <= 400; ++i) {
    const double alpha = 1.0 + 0.005 * i;
    const double res = fit_for_alpha(data, alpha).residual;
    if (res < best_res) { best_res = res; best_alpha = alpha; }
  }
  // Golden-section refinement inside the bracketing grid cell.
  double lo = std::max(1.0, best_alpha - 0.005), hi = std::min(3.0, best_alpha + 0.005);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = fit_for_alpha(data, x1).residual, f2 = fit_for_alpha(data, x2).residual;
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) { hi = x2; x2 = x1; f2 = f1; x1 = hi - g * (hi - lo); f1 = fit_for_alpha(data, x1).residual; }
    else { lo = x1; x1 = x2; f1 = f2; x2 = lo + g * (hi - lo); f2 = fit_for_alpha(data, x2).residual; }
  }
  const double alpha = 0.5 * (lo + hi);
  const FitResult fr = fit_for_alpha(data, alpha);
  return {fr.k_h, alpha, fr.k_e, density};
}

const Material& m19_24g() {
  static const Material material = [] {
    Material m;
    m.name = "M19-24G";
    m.bh = BHCurve::from_samples({std::begin(kM19Samples), std::end(kM19Samples)}, 1.9);
    m.loss_table.assign(std::begin(kM19Loss), std::end(kM19Loss));
    m.loss = fit_steinmetz(m.loss_table, kM19Density);
    return m;
  }();
  return material;
}

Material parse_material_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("material file is not valid JSON: ") + e.what());
  }
  try {
    Material m;
    m.name = j.at("name").get<std::string>();
    std::vector<BHSample> samples;
    for (const auto& row : j.at("bh")) samples.push_back({row.at(0).get<double>(), row.at(1).get<double>()});
    const double knee = j.value("knee_B", samples.back().b);
    m.bh = BHCurve::from_samples(std::move(samples), knee);
    if (j.contains("loss_table")) {
      for (const auto& row : j.at("loss_table")) {
        m.loss_table.push_back({row.at(0).get<double>(), row.at(1).get<double>(), row.at(2).get<double>()});
      }
    }
    const auto& loss = j.at("loss");
    m.loss.k_h = loss.at("k_h").get<double>();
    m.loss.alpha = loss.at("alpha").get<double>();
    m.loss.k_e = loss.at("k_e").get<double>();
    m.loss.density = loss.at("density").get<double>();
    if (m.loss.k_h < 0 || m.loss.k_e < 0 || m.loss.alpha < 0 || !(m.loss.density > 0)) {
      throw Error(ErrorCode::kDomain, "loss coefficients must be non-negative with positive density");
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("material file is missing a field: ") + e.what());
  }
}

std::string material_to_json(const Material& material) {
  json j;
  j["name"] = material.name;
  j["knee_B"] = material.bh.knee_b();
  j["bh"] = json::array();
  for (const auto& s : material.bh.samples()) j["bh"].push_back({s.h, s.b});
  j["loss"] = {{"k_h", material.loss.k_h},
               {"alpha", material.loss.alpha},
               {"k_e", material.loss.k_e},
               {"density", material.loss.density}};
  if (!material.loss_table.empty()) {
    j["loss_table"] = json::array();
    for (const auto& d : material.loss_table) j["loss_table"].push_back({d.frequency_hz, d.b_peak, d.watts_per_kg});
  }
  return j.dump(2);
}

Material load_material(const std::string& name_or_path) {
  if (name_or_path == "M19-24G" || name_or_path == "m19-24g" || name_or_path.empty()) return m19_24g();
  std::ifstream in(name_or_path);
  if (!in) {
    throw Error(ErrorCode::kIo, "unknown material '" + name_or_path +
                                    "' (not a library name and not a readable file)");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_material_json(ss.str());
}

}  // namespace srm::materials
