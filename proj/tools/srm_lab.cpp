// srm_lab: command-line front end over the srm C API.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "srm/srm.h"

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Domain failure reported by the library or by output handling.
struct DomainError {
  std::string status;
  std::string message;
  std::vector<std::string> details;
};

struct UsageError {
  std::string message;
};

void check(srm_status s) {
  if (s == SRM_OK) return;
  DomainError e{srm_status_name(s), srm_last_error(), {}};
  for (size_t k = 0; k < srm_last_error_detail_count(); ++k) e.details.emplace_back(srm_last_error_detail(k));
  throw e;
}

// Owning wrappers for the opaque handles.
template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (p) Free(p);
  }
  T** out() { return &p; }
  T* get() const { return p; }
};
using Text = Handle<srm_text, srm_text_free>;
using Design = Handle<srm_design, srm_design_free>;
using Mesh = Handle<srm_mesh, srm_mesh_free>;
using Solution = Handle<srm_solution, srm_solution_free>;
using FluxMap = Handle<srm_flux_map, srm_flux_map_free>;

std::string str(const Text& t) { return std::string(srm_text_data(t.get()), srm_text_size(t.get())); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError{"IO", "cannot read '" + path + "'", {}};
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string num(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Collects outputs and writes the manifest last, only on success.
class Run {
 public:
  Run(std::string command, std::vector<std::string> argv)
      : command_(std::move(command)), argv_(std::move(argv)), start_(std::chrono::steady_clock::now()) {}

  void set_out(const std::string& dir) { out_ = dir; }
  bool has_out() const { return !out_.empty(); }
  json& options() { return options_; }

  void add_input(const std::string& role, const std::string& path) {
    inputs_.push_back({{"role", role}, {"path", path}, {"hash", fnv1a64(read_file(path))}});
  }

  void write(const std::string& name, const std::string& content) {
    if (out_.empty()) return;
    std::error_code ec;
    fs::create_directories(out_, ec);
    const fs::path path = fs::path(out_) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << content)) throw DomainError{"IO", "cannot write '" + path.string() + "'", {}};
    outputs_.push_back(name);
  }

  // Records a file the library wrote into the output directory.
  void note(const std::string& name) { outputs_.push_back(name); }

  std::string path(const std::string& name) const {
    std::error_code ec;
    fs::create_directories(out_, ec);
    return (fs::path(out_) / name).string();
  }

  void finish() {
    if (out_.empty()) return;
    json m;
    m["command"] = command_;
    m["argv"] = argv_;
    m["inputs"] = inputs_;
    if (!inputs_.empty()) m["design_hash"] = inputs_.front()["hash"];
    m["options"] = options_;
    m["tool_version"] = srm_version();
    m["outputs"] = outputs_;
    m["wall_clock_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const fs::path path = fs::path(out_) / "manifest.json";
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << m.dump(2) << "\n")) throw DomainError{"IO", "cannot write '" + path.string() + "'", {}};
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::string out_;
  json options_ = json::object();
  json inputs_ = json::array();
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

int phase_index(const std::string& label) {
  if (label.size() == 1 && label[0] >= 'A' && label[0] <= 'Z') return label[0] - 'A';
  if (label.size() == 1 && label[0] >= 'a' && label[0] <= 'z') return label[0] - 'a';
  throw UsageError{"phase label '" + label + "' must be a letter (A, B, C, ...)"};
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError{"'" + text + "' is not a comma-separated list of numbers"};
    }
  }
  if (out.empty()) throw UsageError{"empty number list"};
  return out;
}

void load_design(Design& d, const std::string& path, Run& run, const std::string& role = "design") {
  check(srm_design_load(path.c_str(), d.out()));
  run.add_input(role, path);
}

struct Common {
  std::string design;
  std::string out;
  std::string preset = "coarse";
  int threads = 0;
};

void add_common(CLI::App* sub, Common& c, bool needs_design = true) {
  auto* opt = sub->add_option("--design", c.design, "design JSON file");
  if (needs_design) opt->required();
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--mesh-preset", c.preset, "coarse | default | fine")
      ->check(CLI::IsMember({"coarse", "default", "fine"}));
  sub->add_option("--threads", c.threads, "worker threads (default: SRM_LAB_THREADS or all cores)");
}

srm_run_options run_options(const Common& c) {
  srm_run_options o = srm_run_options_default();
  o.preset = c.preset.c_str();
  o.threads = c.threads;
  return o;
}

void record_common(Run& run, const Common& c) {
  run.set_out(c.out);
  run.options()["mesh_preset"] = c.preset;
  run.options()["threads"] = c.threads;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"srm_lab: C-core switched reluctance motor design and simulation"};
  app.require_subcommand(1);
  std::vector<std::string> args(argv, argv + argc);

  int env_threads = 0;
  if (const char* env = std::getenv("SRM_LAB_THREADS")) env_threads = std::atoi(env);

  // topology enumerate
  auto* topology = app.add_subcommand("topology", "teeth-combination feasibility");
  topology->require_subcommand(1);
  auto* enumerate = topology->add_subcommand("enumerate", "list combinations for n = 1..n_max");
  Common topo_common;
  int phases = 3, cores = 2, n_max = 16;
  std::string format = "csv";
  enumerate->add_option("--phases", phases, "q");
  enumerate->add_option("--cores-per-phase", cores, "m");
  enumerate->add_option("--n-max", n_max, "largest rotor index n");
  enumerate->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  add_common(enumerate, topo_common, false);

  // design validate
  auto* design = app.add_subcommand("design", "design files");
  design->require_subcommand(1);
  auto* validate = design->add_subcommand("validate", "check a design against its constraints");
  Common val_common;
  add_common(validate, val_common);

  // mesh
  auto* mesh = app.add_subcommand("mesh", "mesh a cross-section and export VTK");
  Common mesh_common;
  double mesh_theta = 0.0;
  add_common(mesh, mesh_common);
  mesh->add_option("--theta", mesh_theta, "rotor angle (mechanical deg)");

  // solve
  auto* solve = app.add_subcommand("solve", "static field solve");
  Common solve_common;
  std::vector<std::string> current_specs;
  double solve_theta = 0.0;
  add_common(solve, solve_common);
  solve->add_option("--current", current_specs, "phase current, e.g. A=5 (repeatable)");
  solve->add_option("--theta", solve_theta, "rotor angle (mechanical deg)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "static torque-angle curves");
  Common sweep_common;
  std::string sweep_currents = "1,2,3,4,5", sweep_phase = "A", convention = "half_stroke";
  int sweep_thetas = 31;
  add_common(sweep, sweep_common);
  sweep->add_option("--currents", sweep_currents, "comma-separated currents (A)");
  sweep->add_option("--theta-count", sweep_thetas, "angles per electrical period");
  sweep->add_option("--phase", sweep_phase, "excited phase");
  sweep->add_option("--convention", convention, "half_stroke | full_period | commutated_envelope")
      ->check(CLI::IsMember({"half_stroke", "full_period", "commutated_envelope"}));

  // fluxmap
  auto* fluxmap = app.add_subcommand("fluxmap", "flux-linkage and torque maps");
  Common map_common;
  int map_thetas = 31, map_currents = 11;
  double map_imax = 15.0;
  add_common(fluxmap, map_common);
  fluxmap->add_option("--theta-count", map_thetas, "angles per electrical period, ends included");
  fluxmap->add_option("--current-count", map_currents, "current levels from 0");
  fluxmap->add_option("--i-max", map_imax, "largest current (A)");

  // optimize
  auto* optimize = app.add_subcommand("optimize", "fixed-volume pole-geometry optimization");
  Common opt_common;
  std::string spec_path, sensitivity_var;
  int budget = 0, samples = 9;
  bool no_torque = false;
  add_common(optimize, opt_common, false);
  optimize->add_option("--spec", spec_path, "optimization spec JSON");
  optimize->add_option("--budget", budget, "override the evaluation budget");
  optimize->add_option("--sensitivity", sensitivity_var, "sweep one variable instead: b_sy h_s beta_s h_r beta_r N_r");
  optimize->add_option("--samples", samples, "sensitivity sample count");
  optimize->add_flag("--no-torque", no_torque, "sensitivity without FEM evaluations");

  // drive
  auto* drive = app.add_subcommand("drive", "single-pulse drive simulation");
  Common drive_common;
  srm_drive_options dopt = srm_drive_options_default();
  add_common(drive, drive_common);
  drive->add_option("--rpm", dopt.speed_rpm, "shaft speed");
  drive->add_option("--v-dc", dopt.v_dc, "bus voltage (V)");
  drive->add_option("--r-phase", dopt.r_phase, "phase resistance (ohm); negative: estimate from the winding");
  drive->add_option("--turn-on", dopt.turn_on_deg, "turn-on angle (electrical deg from unaligned)");
  drive->add_option("--turn-off", dopt.turn_off_deg, "turn-off angle (electrical deg from unaligned)");
  drive->add_option("--target-torque", dopt.target_torque_nm, "tune the firing angles for this mean torque");
  drive->add_option("--cycles", dopt.cycles, "electrical cycles to simulate");
  drive->add_option("--step", dopt.step_s, "time step upper bound (s)");
  drive->add_option("--map-theta-count", dopt.map_theta_count, "flux map angles");
  drive->add_option("--map-current-count", dopt.map_current_count, "flux map current levels");
  drive->add_option("--map-i-max", dopt.map_i_max, "flux map largest current (A)");
  drive->add_option("--core-loss-current", dopt.core_loss_current, "excitation for the core-loss waveforms (A)");
  drive->add_option("--waveform-every", dopt.waveform_every, "write every k-th sample");
  bool with_copper = false;
  drive->add_flag("--with-copper", with_copper, "count copper loss in the input power");

  // compare
  auto* compare = app.add_subcommand("compare", "mean and peak torque of two designs");
  Common cmp_common;
  std::string baseline, cmp_currents = "1,2,3,4,5";
  int cmp_thetas = 31;
  add_common(compare, cmp_common);
  compare->add_option("--baseline", baseline, "baseline design JSON (b in (a - b) / a)")->required();
  compare->add_option("--currents", cmp_currents, "comma-separated currents (A)");
  compare->add_option("--theta-count", cmp_thetas, "angles per electrical period");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  auto effective = [&](Common& c) {
    if (c.threads <= 0) c.threads = env_threads;
  };

  try {
    if (*enumerate) {
      effective(topo_common);
      Run run("topology enumerate", args);
      record_common(run, topo_common);
      run.options()["phases"] = phases;
      run.options()["cores_per_phase"] = cores;
      run.options()["n_max"] = n_max;
      run.options()["format"] = format;
      Text t;
      check(srm_topology_enumerate(phases, cores, n_max, format == "json", t.out()));
      std::cout << str(t);
      run.write(format == "json" ? "topology.json" : "topology.csv", str(t));
      run.finish();
    } else if (*validate) {
      effective(val_common);
      Run run("design validate", args);
      record_common(run, val_common);
      Design d;
      load_design(d, val_common.design, run);
      Text violations;
      int count = 0;
      check(srm_design_validate(d.get(), violations.out(), &count));
      std::cout << str(violations);
      if (count > 0) {
        throw DomainError{"INFEASIBLE_GEOMETRY", "design violates " + std::to_string(count) + " constraint(s)", {}};
      }
      Text summary;
      check(srm_design_summary(d.get(), summary.out()));
      run.write("violations.json", str(violations));
      run.write("design_summary.json", str(summary));
      run.finish();
    } else if (*mesh) {
      effective(mesh_common);
      Run run("mesh", args);
      record_common(run, mesh_common);
      run.options()["theta_deg"] = mesh_theta;
      Design d;
      load_design(d, mesh_common.design, run);
      Mesh m;
      check(srm_mesh_build(d.get(), mesh_common.preset.c_str(), mesh_theta, m.out()));
      srm_mesh_stats st{};
      check(srm_mesh_stats_get(m.get(), &st));
      json j{{"nodes", st.nodes},
             {"triangles", st.triangles},
             {"gap_layers", st.gap_layers},
             {"min_angle_deg", st.min_angle_deg},
             {"max_angle_deg", st.max_angle_deg},
             {"total_area_m2", st.total_area_m2}};
      std::cout << "nodes " << st.nodes << ", triangles " << st.triangles << ", gap layers " << st.gap_layers
                << ", min angle " << num(st.min_angle_deg) << " deg\n";
      if (run.has_out()) {
        check(srm_mesh_write_vtk(m.get(), run.path("mesh.vtk").c_str()));
        run.note("mesh.vtk");
        run.write("mesh_stats.json", j.dump(2) + "\n");
      }
      run.finish();
    } else if (*solve) {
      effective(solve_common);
      Run run("solve", args);
      record_common(run, solve_common);
      run.options()["theta_deg"] = solve_theta;
      run.options()["currents"] = current_specs;
      Design d;
      load_design(d, solve_common.design, run);
      int q = 0;
      check(srm_design_phases(d.get(), &q));
      std::vector<double> currents(q, 0.0);
      for (const auto& spec : current_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw UsageError{"--current expects PHASE=AMPS, got '" + spec + "'"};
        const int p = phase_index(spec.substr(0, eq));
        if (p >= q) throw UsageError{"phase " + spec.substr(0, eq) + " does not exist"};
        currents[p] = parse_list(spec.substr(eq + 1)).at(0);
      }
      Mesh m;
      check(srm_mesh_build(d.get(), solve_common.preset.c_str(), solve_theta, m.out()));
      Solution s;
      check(srm_solve(d.get(), m.get(), currents.data(), q, s.out()));
      srm_solution_stats st{};
      check(srm_solution_stats_get(s.get(), &st));
      json j;
      j["theta_deg"] = solve_theta;
      j["phase_currents_A"] = currents;
      j["iterations"] = st.iterations;
      j["final_residual"] = st.final_residual;
      j["coenergy_J"] = st.coenergy_j;
      j["energy_J"] = st.energy_j;
      j["torque_maxwell_Nm"] = st.torque_maxwell_nm;
      std::vector<double> lambda(q);
      for (int p = 0; p < q; ++p) check(srm_solution_flux_linkage(s.get(), p, &lambda[p]));
      j["flux_linkage_Wb"] = lambda;
      j["max_B"] = {{"value_T", st.max_b_t}, {"x_m", st.max_b_x_m}, {"y_m", st.max_b_y_m}, {"region", st.max_b_region}};
      std::cout << "iterations " << st.iterations << ", Maxwell torque " << num(st.torque_maxwell_nm)
                << " N m, max |B| " << num(st.max_b_t) << " T in " << st.max_b_region << "\n";
      if (run.has_out()) {
        check(srm_solution_write_vtk(s.get(), run.path("field.vtk").c_str()));
        run.note("field.vtk");
        run.write("solution.json", j.dump(2) + "\n");
      }
      run.finish();
    } else if (*sweep) {
      effective(sweep_common);
      Run run("sweep", args);
      record_common(run, sweep_common);
      const auto currents = parse_list(sweep_currents);
      run.options()["currents"] = currents;
      run.options()["theta_count"] = sweep_thetas;
      run.options()["phase"] = sweep_phase;
      run.options()["convention"] = convention;
      Design d;
      load_design(d, sweep_common.design, run);
      srm_run_options o = run_options(sweep_common);
      o.phase = phase_index(sweep_phase);
      o.convention = convention.c_str();
      Text csv, summary;
      check(srm_sweep(d.get(), currents.data(), static_cast<int>(currents.size()), sweep_thetas, &o, csv.out(),
                      summary.out()));
      std::cout << str(summary);
      run.write("sweep.csv", str(csv));
      run.write("summary.csv", str(summary));
      run.finish();
    } else if (*fluxmap) {
      effective(map_common);
      Run run("fluxmap", args);
      record_common(run, map_common);
      run.options()["theta_count"] = map_thetas;
      run.options()["current_count"] = map_currents;
      run.options()["i_max_A"] = map_imax;
      Design d;
      load_design(d, map_common.design, run);
      srm_run_options o = run_options(map_common);
      FluxMap fm;
      check(srm_flux_map_build(d.get(), map_thetas, map_currents, map_imax, &o, fm.out()));
      Text lam, tq;
      check(srm_flux_map_lambda_csv(fm.get(), lam.out()));
      check(srm_flux_map_torque_csv(fm.get(), tq.out()));
      std::cout << "flux map " << map_thetas << " x " << map_currents << " up to " << num(map_imax) << " A\n";
      run.write("flux_map.csv", str(lam));
      run.write("torque_map.csv", str(tq));
      run.finish();
    } else if (*optimize) {
      effective(opt_common);
      Run run("optimize", args);
      record_common(run, opt_common);
      std::string spec_text;
      if (!spec_path.empty()) {
        spec_text = read_file(spec_path);
        run.add_input("spec", spec_path);
      }
      Design seed;
      if (!opt_common.design.empty()) load_design(seed, opt_common.design, run, "seed");
      run.options()["budget"] = budget;
      if (!sensitivity_var.empty()) {
        run.options()["sensitivity"] = sensitivity_var;
        run.options()["samples"] = samples;
        run.options()["evaluate_torque"] = !no_torque;
        Text csv;
        check(srm_sensitivity(spec_text.c_str(), seed.get(), sensitivity_var.c_str(), samples, !no_torque,
                              opt_common.threads, csv.out()));
        std::cout << str(csv);
        run.write("sensitivity.csv", str(csv));
      } else {
        srm_optimize_options o{opt_common.threads, budget};
        Text trace, summary, best_json;
        Design best;
        check(srm_optimize(spec_text.c_str(), seed.get(), &o, trace.out(), best.out(), summary.out()));
        check(srm_design_to_json(best.get(), best_json.out()));
        std::cout << str(summary);
        run.write("trace.csv", str(trace));
        run.write("best_design.json", str(best_json));
        run.write("optimization.json", str(summary));
      }
      run.finish();
    } else if (*drive) {
      effective(drive_common);
      Run run("drive", args);
      record_common(run, drive_common);
      dopt.with_copper = with_copper ? 1 : 0;
      dopt.run = run_options(drive_common);
      run.options()["rpm"] = dopt.speed_rpm;
      run.options()["v_dc"] = dopt.v_dc;
      run.options()["r_phase"] = dopt.r_phase;
      run.options()["turn_on_deg"] = dopt.turn_on_deg;
      run.options()["turn_off_deg"] = dopt.turn_off_deg;
      run.options()["target_torque_Nm"] = dopt.target_torque_nm;
      run.options()["cycles"] = dopt.cycles;
      run.options()["step_s"] = dopt.step_s;
      run.options()["map"] = {dopt.map_theta_count, dopt.map_current_count, dopt.map_i_max};
      run.options()["with_copper"] = with_copper;
      Design d;
      load_design(d, drive_common.design, run);
      Text wave, report, summary;
      check(srm_drive(d.get(), &dopt, wave.out(), report.out(), summary.out()));
      std::cout << str(report);
      run.write("waveforms.csv", str(wave));
      run.write("report.txt", str(report));
      run.write("drive.json", str(summary));
      run.finish();
    } else if (*compare) {
      effective(cmp_common);
      Run run("compare", args);
      record_common(run, cmp_common);
      const auto currents = parse_list(cmp_currents);
      run.options()["currents"] = currents;
      run.options()["theta_count"] = cmp_thetas;
      Design a, b;
      load_design(a, cmp_common.design, run);
      load_design(b, baseline, run, "baseline");
      srm_run_options o = run_options(cmp_common);
      Text csv;
      check(srm_compare(a.get(), b.get(), currents.data(), static_cast<int>(currents.size()), cmp_thetas, &o,
                        csv.out()));
      std::cout << str(csv);
      run.write("comparison.csv", str(csv));
      run.finish();
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.message << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.status << ": " << e.message << "\n";
    for (const auto& d : e.details) std::cerr << "  " << d << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
