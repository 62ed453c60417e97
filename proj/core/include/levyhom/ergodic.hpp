#pragma once

#include <optional>
#include <string>
#include <vector>

#include "levyhom/hjb.hpp"
#include "levyhom/table.hpp"

namespace levyhom {

/// Case classification of the cell problem:
///   I:   alpha in (0,1) with nonzero drift; no nonlocal term on the corrector.
///   II:  alpha = 1 with nonzero drift; requires constant a.
///   III: alpha in (1,2), or alpha in (0,1] with zero drift.
enum class CellCase { I, II, III };

/// A frozen (x, p, I) cell problem. The drift is frozen to beta(a) = b(x,a)
/// and the running cost to c(a) = b(x,a) * p. Quasi-periodic forcings with
/// one scale are solved on the unit torus; two scales solve the lifted
/// problem on the 2-torus and sample back along the line.
struct CellProblemSpec {
  CellCase kase = CellCase::III;
  double alpha = 1.5;
  double frozen_x = 0.0;
  double frozen_p = 0.0;
  double frozen_I = 0.0;
  ControlField controls;
  CoefficientField coeffs = CoefficientField::constant(1.0);
  MultiscaleForcing forcing;
  std::optional<LevyKernel> kernel;  // absent in case I
  int n_torus = 512;
  int n1 = 48, n2 = 48;
  double solver_tol = 1e-9;

  std::vector<double> frozen_beta() const;
  std::vector<double> frozen_cost() const;
  void validate() const;
};

struct ErgodicResult {
  double d = 0.0;               // torus mean of lambda*v at the smallest lambda
  double d_extrapolated = 0.0;  // intercept of the least-squares fit mean ~ d + k*lambda

  struct TracePoint {
    double lambda = 0.0;
    double sup_m = 0.0, inf_m = 0.0, mean_m = 0.0;  // statistics of m = lambda*v
    double holder_quotient = 0.0;
  };
  std::vector<TracePoint> trace;

  GridFunction corrector;  // v at the smallest lambda, mean-normalized
  double holder_quotient = 0.0;
  double uncertainty = 0.0;  // oscillation of lambda*v plus the kernel tail budget
  bool ergodic = true;       // false when the oscillation fails to shrink
  bool controllability_ok = true;  // case-I sign-spanning check
  double apriori_bound = 0.0;      // ||g|| + ||a|| |I| + max|c|
  double max_sup_m = 0.0;          // largest ||lambda v|| seen across the sweep
};

/// Vanishing-discount sweep. The schedule must be decreasing with the last
/// entry >= 1e-4. The oscillation of lambda*v must shrink along the schedule
/// or the result is flagged non-ergodic.
ErgodicResult ergodic_constant(const CellProblemSpec& spec,
                               const std::vector<double>& lambda_schedule, double tol);

/// Case-I oracle: the discounted value inf over controls of
/// int_0^inf e^{-lambda t} (f(Y(t)) + c(a(t))) dt for dY/dt = beta(a), with
/// f = a(y) I + g. Solved by a semi-Lagrangian dynamic-programming iteration
/// on an independent fine grid; returns the value at y0.
double control_value_oracle(const CellProblemSpec& spec, double lambda, double y0,
                            int n_dp = 5000);

/// max over grid pairs within half a period of |m(y)-m(y')| / |y-y'|^theta.
double holder_diagnostic(const GridFunction& m, double theta);
double holder_diagnostic(const TorusGrid2& m, double theta);

struct WeakSolutionReport {
  bool pass = false;
  double mu = 0.0;
  double mu_achieved = 0.0;
  double lambda_used = 0.0;
  double tail_budget = 0.0;
  std::string note;
};

/// Exhibits v_lambda at small lambda as a mu-approximate solution of the cell
/// equation with constant d: evaluates the discrete residual and passes when
/// its sup-norm is at most mu.
WeakSolutionReport verify_weak_solution(const CellProblemSpec& spec, double d, double mu,
                                        double lambda_floor = 1e-3);

/// A cell-problem family: everything but the frozen (x, p, I).
struct CellFamily {
  CellCase kase = CellCase::III;
  double alpha = 1.5;
  ControlField controls;
  CoefficientField coeffs = CoefficientField::constant(1.0);
  MultiscaleForcing forcing;
  std::optional<LevyKernel> kernel;
  int n_torus = 512;
  int n1 = 48, n2 = 48;
  std::vector<double> lambda_schedule{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  double tol = 1e-9;
};

CellProblemSpec make_cell_spec(const CellFamily& family, double x, double p, double I);

/// Adapter feeding tabulate(): each sample is -d_extrapolated with the sweep
/// uncertainty plus the raw/extrapolated disagreement as its error bar.
CellEvaluator make_cell_evaluator(const CellFamily& family);

}  // namespace levyhom
