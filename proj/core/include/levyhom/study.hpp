#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "levyhom/config.hpp"
#include "levyhom/ergodic.hpp"
#include "levyhom/hjb.hpp"

namespace levyhom {

/// Everything a pipeline run needs, parsed from one config file. Validation
/// is fail-fast: no solve starts until every referenced sub-spec validates.
struct StudyConfig {
  // problem
  CellCase kase = CellCase::III;
  double alpha = 1.5;
  CoefficientField a = CoefficientField::constant(1.0);
  ControlField controls{{Control{}}};
  MultiscaleForcing forcing;

  // domain and exterior data h(x) = sum of amp*cos(2 pi freq x + phase)
  double omega_left = 0.0, omega_right = 1.0;
  std::vector<std::array<double, 3>> h_terms;

  // kernel
  double nu_over_h = 4.0;
  double far_radius = 2.0;
  double fold_horizon = 64.0;

  // grids
  int n_torus = 512;
  int n_torus2 = 48;
  int n_eps = 512;

  // schedules
  std::vector<double> lambda_schedule{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  std::vector<double> eps_schedule{0.125, 0.0625, 0.03125};
  std::vector<int> M_schedule{1, 3, 5};

  // table box
  std::vector<double> table_x{0.5}, table_p{0.0}, table_I;
  std::string table_file;  // when set, solve-effective loads instead of tabulating

  // frozen cell point
  double cell_x = 0.5, cell_p = 0.0, cell_I = 0.0;

  // tolerances
  double solver_tol = 1e-9;
  int nonres_denominator = 50;

  // property suite knobs
  double orbit_gamma = 1.6180339887498948482;
  double orbit_delta = 0.1;
  double orbit_tmax = 2000.0;
  double weak_mu = 1e-2;
  bool corrupt_table = false;  // negative control for the subellipticity check
  int comparison_trials = 100;
  int comparison_n = 256;

  // almost-periodic chain
  bool effective_chain = false;
  double big_period = 4.0;
  std::vector<double> chain_lambdas{1e-1, 1e-2};

  // run
  std::string out_dir = "out";
  std::uint64_t seed = 12345;
  int workers = 2;

  static StudyConfig from_config(const Config& cfg);

  std::function<double(double)> exterior_data() const;
  LevyKernel kernel_for(double h) const;
  CellFamily cell_family() const;
  void validate() const;
};

struct ConvergenceRow {
  double eps1 = 0.0;
  double sup_err = 0.0;       // sup over Omega of |u_eps - ubar|
  double interior_err = 0.0;  // excluding a 2 eps1 collar near the boundary
  double runtime_sec = 0.0;
  int M = 0;                  // almost-periodic rows
  double c_M = 0.0;
  double trunc_gap = 0.0;     // sup |u_eps - u_eps^M|
  double chain_d = 0.0;       // effective-operator chain value at the cell point
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  bool pass = false;
  double solver_tol = 0.0;
  double tail_bound = 0.0;
  std::string note;

  /// Deterministic content (no wall-clock columns).
  void write_csv(std::ostream& os, bool almost) const;
  /// Wall-clock per row, written separately so reports stay byte-identical
  /// across reruns of the same config and seed.
  void write_timing_csv(std::ostream& os) const;
};

/// Solves u_eps along the schedule, tabulates the effective operator, solves
/// the limit equation once and reports the interior errors. Passing requires
/// the interior error to be non-increasing along the schedule.
ConvergenceReport run_homogenization_study(const StudyConfig& cfg);

/// Truncation study per (eps, M): solves the full-series and truncated
/// problems and asserts the pointwise sandwich |u_eps - u_eps^M| <= c_M + 2 tol.
ConvergenceReport run_almost_periodic_study(const StudyConfig& cfg);

struct PropertySuiteReport {
  struct Item {
    std::string name;
    bool pass = false;
    std::string detail;
  };
  std::vector<Item> items;
  bool pass = false;
};

/// Aggregated structural checks: strong maximum principle, randomized
/// comparison, Hoelder sweep, subellipticity, weak-solution residual and
/// orbit equidistribution. Artifacts are written under cfg.out_dir.
PropertySuiteReport run_property_suite(const StudyConfig& cfg, std::uint64_t seed);

/// Helpers shared by the CLI.
GridFunction study_solve_eps(const StudyConfig& cfg, double eps1, SolveDiagnostics* diag = nullptr);
TabulateResult study_tabulate(const StudyConfig& cfg);
GridFunction study_solve_effective(const StudyConfig& cfg, const EffectiveOperatorTable& table,
                                   SolveDiagnostics* diag = nullptr);
void write_solution_csv(std::ostream& os, const GridFunction& u);
void write_trace_csv(std::ostream& os, const ErgodicResult& res);

}  // namespace levyhom
