#ifndef SRM_SRM_H
#define SRM_SRM_H

/* C interface to the srm toolkit. Objects are opaque handles released with
 * their *_free function; every call returns an srm_status and fills outputs
 * only on SRM_OK. The message and detail lines of the last failure on the
 * calling thread stay readable until the next failing call. */

#include <stddef.h>

#if defined(_WIN32)
#define SRM_API __declspec(dllexport)
#else
#define SRM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum srm_status {
  SRM_OK = 0,
  SRM_E_DOMAIN,
  SRM_E_INFEASIBLE_GEOMETRY,
  SRM_E_MESH_FAILURE,
  SRM_E_NON_CONVERGENCE,
  SRM_E_SINGULAR_SYSTEM,
  SRM_E_CONTOUR_OUTSIDE_GAP,
  SRM_E_ENVELOPE_MISMATCH,
  SRM_E_NO_FEASIBLE_START,
  SRM_E_MAP_RANGE_EXCEEDED,
  SRM_E_STEP_UNSTABLE,
  SRM_E_IO,
  SRM_E_INVALID_ARGUMENT,
  SRM_E_INTERNAL
} srm_status;

typedef struct srm_text srm_text;
typedef struct srm_design srm_design;
typedef struct srm_mesh srm_mesh;
typedef struct srm_solution srm_solution;
typedef struct srm_flux_map srm_flux_map;

SRM_API const char* srm_version(void);
SRM_API const char* srm_status_name(srm_status status); /* e.g. "NON_CONVERGENCE" */
SRM_API const char* srm_last_error(void);
SRM_API size_t srm_last_error_detail_count(void);
SRM_API const char* srm_last_error_detail(size_t index);

/* Owned strings (CSV, JSON, report text). */
SRM_API const char* srm_text_data(const srm_text* text);
SRM_API size_t srm_text_size(const srm_text* text);
SRM_API void srm_text_free(srm_text* text);

/* Rows q,m,n,N_s,N_r,feasible,reason for n = 1..n_max, as CSV or JSON. */
SRM_API srm_status srm_topology_enumerate(int phases, int cores_per_phase, int n_max, int as_json,
                                          srm_text** out);

/* Designs. Builtin names: table1_12_10, table1_12_14, table1_12_16,
 * conventional_12_8. */
SRM_API srm_status srm_design_load(const char* path, srm_design** out);
SRM_API srm_status srm_design_from_json(const char* json, srm_design** out);
SRM_API srm_status srm_design_builtin(const char* name, srm_design** out);
SRM_API srm_status srm_design_to_json(const srm_design* design, srm_text** out);
/* JSON array of {"constraint", "detail"}; *count receives its length. */
SRM_API srm_status srm_design_validate(const srm_design* design, srm_text** violations, int* count);
/* Derived quantities: winding area, turns, radii, resistance, teeth. */
SRM_API srm_status srm_design_summary(const srm_design* design, srm_text** json);
SRM_API srm_status srm_design_rotor_teeth(const srm_design* design, int* rotor_teeth);
SRM_API srm_status srm_design_phases(const srm_design* design, int* phases);
SRM_API void srm_design_free(srm_design* design);

/* Meshes. preset: "coarse", "default" or "fine". */
typedef struct srm_mesh_stats {
  int nodes;
  int triangles;
  int gap_layers;
  double min_angle_deg;
  double max_angle_deg;
  double total_area_m2;
} srm_mesh_stats;

SRM_API srm_status srm_mesh_build(const srm_design* design, const char* preset, double theta_deg, srm_mesh** out);
SRM_API srm_status srm_mesh_stats_get(const srm_mesh* mesh, srm_mesh_stats* stats);
SRM_API srm_status srm_mesh_write_vtk(const srm_mesh* mesh, const char* path);
SRM_API void srm_mesh_free(srm_mesh* mesh);

/* Static field solves on a mesh built from `design`. Phases past
 * phase_count carry no current. */
typedef struct srm_solution_stats {
  int iterations;
  double final_residual;
  double coenergy_j;
  double energy_j;
  double torque_maxwell_nm;
  double max_b_t;
  double max_b_x_m;
  double max_b_y_m;
  char max_b_region[64];
} srm_solution_stats;

SRM_API srm_status srm_solve(const srm_design* design, const srm_mesh* mesh, const double* phase_currents,
                             int phase_count, srm_solution** out);
SRM_API srm_status srm_solution_stats_get(const srm_solution* solution, srm_solution_stats* stats);
SRM_API srm_status srm_solution_flux_linkage(const srm_solution* solution, int phase, double* lambda_wb);
SRM_API srm_status srm_solution_write_vtk(const srm_solution* solution, const char* path);
SRM_API void srm_solution_free(srm_solution* solution);
/* Coenergy torque by central difference around theta. */
SRM_API srm_status srm_torque_coenergy(const srm_design* design, const char* preset, const double* phase_currents,
                                       int phase_count, double theta_deg, double* torque_nm);

/* Sweep settings shared by sweep, flux map, compare and drive. Zero or
 * NULL fields take the defaults. */
typedef struct srm_run_options {
  const char* preset;      /* default "coarse" */
  const char* convention;  /* half_stroke | full_period | commutated_envelope */
  int phase;               /* excited phase */
  int threads;             /* <= 0: SRM_LAB_THREADS or hardware */
  double delta_deg;        /* coenergy difference step, default 0.25 */
} srm_run_options;

SRM_API srm_run_options srm_run_options_default(void);

/* theta_deg,current_A,torque_Nm plus current_A,mean_torque_Nm,peak_torque_Nm. */
SRM_API srm_status srm_sweep(const srm_design* design, const double* currents, int current_count, int theta_count,
                             const srm_run_options* options, srm_text** sweep_csv, srm_text** summary_csv);

SRM_API srm_status srm_flux_map_build(const srm_design* design, int theta_count, int current_count, double i_max,
                                      const srm_run_options* options, srm_flux_map** out);
SRM_API srm_status srm_flux_map_lambda_csv(const srm_flux_map* map, srm_text** out);
SRM_API srm_status srm_flux_map_torque_csv(const srm_flux_map* map, srm_text** out);
SRM_API void srm_flux_map_free(srm_flux_map* map);

/* current_A,mean_a_Nm,mean_b_Nm,peak_a_Nm,peak_b_Nm and the two deltas,
 * each (a - b) / a * 100. */
SRM_API srm_status srm_compare(const srm_design* a, const srm_design* b, const double* currents, int current_count,
                               int theta_count, const srm_run_options* options, srm_text** csv);

/* Optimization. spec_json may be NULL for the defaults; seed may be NULL.
 * The topology comes from the seed, else from the spec's q, m, n. */
typedef struct srm_optimize_options {
  int threads;
  int budget; /* > 0 overrides the spec */
} srm_optimize_options;

SRM_API srm_status srm_optimize(const char* spec_json, const srm_design* seed, const srm_optimize_options* options,
                                srm_text** trace_csv, srm_design** best, srm_text** summary_json);
/* variable: b_sy, h_s, beta_s, h_r, beta_r or N_r. */
SRM_API srm_status srm_sensitivity(const char* spec_json, const srm_design* seed, const char* variable,
                                   int sample_count, int evaluate_torque, int threads, srm_text** csv);

/* Single-pulse drive at fixed speed. A positive target torque tunes the
 * firing angles; a negative r_phase takes the winding estimate. */
typedef struct srm_drive_options {
  double v_dc;
  double r_phase;
  double turn_on_deg;
  double turn_off_deg;
  double speed_rpm;
  double step_s;
  int cycles;
  double target_torque_nm;
  int map_theta_count;
  int map_current_count;
  double map_i_max;
  int with_copper; /* 0: input = output + core */
  double core_loss_current;
  int waveform_every;
  srm_run_options run;
} srm_drive_options;

SRM_API srm_drive_options srm_drive_options_default(void);
SRM_API srm_status srm_drive(const srm_design* design, const srm_drive_options* options, srm_text** waveform_csv,
                             srm_text** report, srm_text** summary_json);
/* Same with a prebuilt map; core_loss_w < 0 computes it. */
SRM_API srm_status srm_drive_with_map(const srm_design* design, const srm_flux_map* map,
                                      const srm_drive_options* options, double core_loss_w,
                                      srm_text** waveform_csv, srm_text** report, srm_text** summary_json);

/* Core loss at speed with each phase excited at `current`. JSON object with
 * the four components, frequencies and total. */
SRM_API srm_status srm_core_loss(const srm_design* design, double speed_rpm, double current,
                                 const srm_run_options* options, srm_text** json);

#ifdef __cplusplus
}
#endif

#endif
