#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "levyhom/fields.hpp"
#include "levyhom/forcing.hpp"
#include "levyhom/grid.hpp"
#include "levyhom/kernel.hpp"
#include "levyhom/table.hpp"

namespace levyhom {

struct SolverOptions {
  double tol = 1e-9;         // residual sup-norm target
  int max_policy_iters = 80;
  int max_fixed_point_iters = 400;  // effective-equation outer loop
  int refine_steps = 2;             // iterative refinement passes per linear solve
  double damping = 1.0;             // effective-equation update damping
};

struct SolveDiagnostics {
  std::vector<double> residual_history;
  int iterations = 0;
  double residual = 0.0;
  double tail_bound = 0.0;     // far-field budget in effect for this solve
  double apriori_bound = 0.0;  // ||g|| + ||a|| |I| + max|c| where applicable
};

class SolveFailure : public std::runtime_error {
 public:
  SolveFailure(const std::string& msg, std::vector<double> history)
      : std::runtime_error(msg), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// Discounted problem on the 1-torus:
///
///   lambda v + sup_a { -beta(a) v' - c(a) } - a(y) I[v] - a(y) I0 - g(y) = 0.
///
/// Leave `kernel` empty for the first-order problem (alpha in (0,1) with
/// drift): the nonlocal term then drops and only the source a(y) I0 + g
/// remains. The scheme is upwind in the drift, with the explicit supremum
/// over the finite control set; monotone by construction.
struct DiscountedProblem {
  double lambda = 0.1;
  std::optional<LevyKernel> kernel;
  std::vector<double> beta;  // frozen drifts, one per control
  std::vector<double> cost;  // running costs, one per control
  CoefficientField a = CoefficientField::constant(1.0);
  std::function<double(double)> forcing;  // g(y)
  double frozen_I = 0.0;
  int n = 512;
  double period = 1.0;

  void validate() const;
};

GridFunction solve_discounted(const DiscountedProblem& prob, const SolverOptions& opts = {},
                              SolveDiagnostics* diag = nullptr);

/// Residual of the discrete discounted operator at v (sup over interior).
std::vector<double> discounted_residual(const DiscountedProblem& prob, const GridFunction& v);

/// Lifted discounted problem on the 2-torus with drift B(a) = (g1 b, g2 b)
/// and jumps along the line Gz. a depends on the first coordinate only.
struct LiftedProblem {
  double lambda = 0.1;
  std::optional<LevyKernel> kernel;
  LiftedDirection dir;
  std::vector<double> beta;
  std::vector<double> cost;
  CoefficientField a = CoefficientField::constant(1.0);
  MultiscaleForcing forcing;
  double frozen_I = 0.0;
  int n1 = 48, n2 = 48;

  void validate() const;
};

TorusGrid2 solve_discounted_lifted(const LiftedProblem& prob, const SolverOptions& opts = {},
                                   SolveDiagnostics* diag = nullptr);

std::vector<double> lifted_residual(const LiftedProblem& prob, const TorusGrid2& w);

/// The eps-scaled exterior problem on Omega = (left, right):
///
///   u + sup_a { -b(x,a) u' } - a(x/eps1) I[u] - g_M(x/eps1,...,x/epsM) = 0,
///   u = h on the complement.
///
/// The collar carries h sampled out to far_radius + 1. Refuses to run unless
/// the grid resolves the fastest oscillation (h_grid <= eps1 / 16).
struct EpsProblem {
  double eps1 = 0.125;
  LevyKernel kernel;
  ControlField controls;
  CoefficientField a = CoefficientField::constant(1.0);
  MultiscaleForcing forcing;
  double omega_left = 0.0, omega_right = 1.0;
  std::function<double(double)> exterior_data;  // h(x)
  int n = 512;

  double grid_h() const { return (omega_right - omega_left) / n; }
  void validate() const;
};

GridFunction solve_eps_problem(const EpsProblem& prob, const SolverOptions& opts = {},
                               SolveDiagnostics* diag = nullptr);

std::vector<double> eps_residual(const EpsProblem& prob, const GridFunction& u);

/// Effective equation u + I(x, u', I[u]) = 0 on Omega with exterior data,
/// the nonlocal slot evaluated on the iterate and the table queried by
/// interpolation. Lax-Friedrichs dissipation handles the gradient slot; the
/// nonlocal slot is advanced semi-implicitly with the table's worst I-slope.
struct EffectiveProblem {
  const EffectiveOperatorTable* table = nullptr;
  LevyKernel kernel;
  double omega_left = 0.0, omega_right = 1.0;
  std::function<double(double)> exterior_data;
  int n = 512;

  double grid_h() const { return (omega_right - omega_left) / n; }
  void validate() const;
};

GridFunction solve_effective(const EffectiveProblem& prob, const SolverOptions& opts = {},
                             SolveDiagnostics* diag = nullptr);

std::vector<double> effective_residual(const EffectiveProblem& prob, const GridFunction& u);

struct ComparisonReport {
  bool pass = false;
  bool preconditions_ok = false;
  double worst_gap = 0.0;  // max_i (sub_i - super_i); passes when <= 2 tol
  int violations = 0;
  double max_sub_residual = 0.0;
  double min_super_residual = 0.0;
  std::string note;
};

/// Checks sub <= super + 2 tol for a discrete subsolution / supersolution
/// pair (residual signs verified against tol first).
ComparisonReport check_comparison(const GridFunction& sub, const GridFunction& super,
                                  const DiscountedProblem& prob, double tol);
ComparisonReport check_comparison(const GridFunction& sub, const GridFunction& super,
                                  const EpsProblem& prob, double tol);

struct MaxPrincipleReport {
  bool pass = false;
  double oscillation = 0.0;    // of the constant-data solve
  double min_abs_shift = 0.0;  // smallest |change| under the bump
  bool sign_consistent = false;
  std::string note;
};

/// Solves the constant-forcing, zero-drift problem (oscillation must be at
/// most 10x the solver tolerance), then adds a localized forcing bump and
/// verifies the solution moves at every node with the sign of the bump.
MaxPrincipleReport strong_max_principle_check(const DiscountedProblem& base, double bump_height,
                                              double bump_fraction, const SolverOptions& opts = {});

}  // namespace levyhom
