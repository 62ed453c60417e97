#include "levyhom/hjb.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace levyhom {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Iterative refinement with the residual accumulated in extended precision:
// the expanded rows carry near-singular quadrature weights, so the plain
// double residual would floor well above the solver tolerance.
VectorXd lu_solve_refined(const Eigen::PartialPivLU<MatrixXd>& lu, const MatrixXd& A,
                          const VectorXd& b, int steps) {
  const Eigen::Index n = A.rows();
  VectorXd x = lu.solve(b);
  VectorXd r(n);
  for (int s = 0; s < steps; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) {
      long double acc = b(i);
      const double* row = A.data() + i;  // column-major: stride n
      for (Eigen::Index j = 0; j < n; ++j) acc -= (long double)row[j * n] * (long double)x(j);
      r(i) = double(acc);
    }
    x += lu.solve(r);
  }
  return x;
}

// Zeroth-order diagonal from the negated off-diagonal row sum, so constants
// lie in the kernel of (A - zeroth Id) exactly.
void set_rowsum_exact_diagonal(MatrixXd& K, double zeroth) {
  const Eigen::Index n = K.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    long double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) s += (long double)K(i, j);
    K(i, i) = zeroth - double(s);
  }
}

double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

// Upwind difference of the drift term -beta * v' at node i on the torus.
double upwind_drift_torus(const GridFunction& v, int i, double beta, double h) {
  if (beta > 0.0) return -beta * (v.at(i + 1) - v.at(i)) / h;
  if (beta < 0.0) return -beta * (v.at(i) - v.at(i - 1)) / h;
  return 0.0;
}

// Discrete Levy application on the torus matching the solver matrices: folded
// class weights plus the uniform remainder, written as node differences.
std::vector<double> levy_apply_torus(const LevyKernel& kernel, const GridFunction& v) {
  const int n = v.n();
  const std::vector<double> w = kernel.torus_class_weights(n);
  const double u0 = 2.0 * kernel.remainder_mass() / n;
  std::vector<double> out(std::size_t(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const double vi = v.at(i);
    double acc = 0.0;
    for (int j = 1; j < n; ++j)
      acc += w[std::size_t(j)] * ((v.at(i + j) - vi) + (v.at(i - j) - vi));
    double unif = 0.0;
    for (int k = 0; k < n; ++k) unif += v.at(k) - vi;
    out[std::size_t(i)] = acc + u0 * unif;
  }
  return out;
}

struct PolicyLoopResult {
  VectorXd v;
  int iterations = 0;
  std::vector<double> history;
};

}  // namespace

void DiscountedProblem::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("DiscountedProblem: lambda must be positive");
  if (n < 8) throw std::invalid_argument("DiscountedProblem: grid too coarse");
  if (!(period > 0.0)) throw std::invalid_argument("DiscountedProblem: period must be positive");
  if (beta.empty() || beta.size() != cost.size())
    throw std::invalid_argument("DiscountedProblem: control vectors empty or mismatched");
  if (beta.size() > 8) throw std::invalid_argument("DiscountedProblem: more than 8 controls");
  if (!forcing) throw std::invalid_argument("DiscountedProblem: forcing not set");
  a.validate();
  if (kernel) {
    if (std::abs(kernel->h - period / n) > 1e-12 * kernel->h)
      throw std::invalid_argument("DiscountedProblem: kernel spacing does not match the grid");
    const bool drifted = std::any_of(beta.begin(), beta.end(), [](double b) { return b != 0.0; });
    if (std::abs(kernel->alpha - 1.0) < 1e-12 && drifted && !a.is_constant())
      throw std::invalid_argument(
          "DiscountedProblem: alpha = 1 with nonzero drift requires constant a");
  }
}

std::vector<double> discounted_residual(const DiscountedProblem& prob, const GridFunction& v) {
  const int n = prob.n;
  const double h = prob.period / n;
  std::vector<double> levy(std::size_t(n), 0.0);
  if (prob.kernel) levy = levy_apply_torus(*prob.kernel, v);

  std::vector<double> res(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double y = v.node(i);
    double ham = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < prob.beta.size(); ++j)
      ham = std::max(ham, upwind_drift_torus(v, i, prob.beta[j], h) - prob.cost[j]);
    const double ai = prob.a.eval(y);
    res[std::size_t(i)] = prob.lambda * v.at(i) + ham - ai * levy[std::size_t(i)] -
                          ai * prob.frozen_I - prob.forcing(y);
  }
  return res;
}

GridFunction solve_discounted(const DiscountedProblem& prob, const SolverOptions& opts,
                              SolveDiagnostics* diag) {
  prob.validate();
  const int n = prob.n;
  const double h = prob.period / n;
  const int nctrl = int(prob.beta.size());

  std::vector<double> avals(static_cast<std::size_t>(n)), gvals(static_cast<std::size_t>(n));
  GridFunction v = GridFunction::torus(n, prob.period);
  for (int i = 0; i < n; ++i) {
    avals[std::size_t(i)] = prob.a.eval(v.node(i));
    gvals[std::size_t(i)] = prob.forcing(v.node(i));
  }

  // lambda Id - a o L, assembled once; the upwind part is policy-dependent.
  MatrixXd K = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) K(i, i) = prob.lambda;
  if (prob.kernel) {
    const std::vector<double> w = prob.kernel->torus_class_weights(n);
    const double u0 = 2.0 * prob.kernel->remainder_mass() / n;
    for (int i = 0; i < n; ++i) {
      const double ai = avals[std::size_t(i)];
      for (int j = 1; j < n; ++j) {
        K(i, (i + j) % n) -= ai * w[std::size_t(j)];
        K(i, (i - j + n) % n) -= ai * w[std::size_t(j)];
        K(i, i) += 2.0 * ai * w[std::size_t(j)];
      }
      for (int k = 0; k < n; ++k) K(i, k) -= ai * u0;
      K(i, i) += ai * u0 * n;
    }
  }

  std::vector<int> policy(std::size_t(n), 0);
  auto improve = [&](const GridFunction& cur) {
    std::vector<int> next(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int j = 0; j < nctrl; ++j) {
        double q = upwind_drift_torus(cur, i, prob.beta[std::size_t(j)], h) -
                   prob.cost[std::size_t(j)];
        if (q > best) {
          best = q;
          arg = j;
        }
      }
      next[std::size_t(i)] = arg;
    }
    return next;
  };

  policy = improve(v);
  std::vector<double> history;
  MatrixXd A(n, n);
  VectorXd rhs(n);
  for (int iter = 0; iter < opts.max_policy_iters; ++iter) {
    A = K;
    for (int i = 0; i < n; ++i) {
      const double b = prob.beta[std::size_t(policy[std::size_t(i)])];
      if (b > 0.0) {
        A(i, i) += b / h;
        A(i, (i + 1) % n) -= b / h;
      } else if (b < 0.0) {
        A(i, i) += -b / h;
        A(i, (i - 1 + n) % n) -= -b / h;
      }
      rhs(i) = gvals[std::size_t(i)] + avals[std::size_t(i)] * prob.frozen_I +
               prob.cost[std::size_t(policy[std::size_t(i)])];
    }
    Eigen::PartialPivLU<MatrixXd> lu(A);
    VectorXd x = lu_solve_refined(lu, A, rhs, opts.refine_steps);
    for (int i = 0; i < n; ++i) v.at(i) = x(i);

    std::vector<double> res = discounted_residual(prob, v);
    const double rnorm = sup_abs(res);
    history.push_back(rnorm);
    std::vector<int> next = improve(v);
    if (rnorm <= opts.tol) {
      if (diag) {
        diag->residual_history = history;
        diag->iterations = iter + 1;
        diag->residual = rnorm;
        diag->tail_bound = prob.kernel ? prob.a.sup() *
                                             prob.kernel->fold_residual_bound(prob.period) *
                                             v.oscillation()
                                       : 0.0;
        double gsup = sup_abs(gvals);
        double cmax = 0.0;
        for (double c : prob.cost) cmax = std::max(cmax, std::abs(c));
        diag->apriori_bound = gsup + prob.a.sup() * std::abs(prob.frozen_I) + cmax;
      }
      return v;
    }
    if (next == policy && iter > 0)
      throw SolveFailure("solve_discounted: stalled above tolerance (residual " +
                             std::to_string(rnorm) + ")",
                         history);
    policy = next;
  }
  throw SolveFailure("solve_discounted: policy iteration did not converge", history);
}

void LiftedProblem::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("LiftedProblem: lambda must be positive");
  if (n1 < 8 || n2 < 2) throw std::invalid_argument("LiftedProblem: grid too coarse");
  if (beta.empty() || beta.size() != cost.size())
    throw std::invalid_argument("LiftedProblem: control vectors empty or mismatched");
  dir.validate();
  if (dir.gammas_inv.size() != 2)
    throw std::invalid_argument("LiftedProblem: two lifted components expected");
  if (forcing.num_scales() > 2)
    throw std::invalid_argument("LiftedProblem: more than two scales is out of desk scope");
  a.validate();
  if (kernel) {
    if (std::abs(kernel->h * n1 - 1.0) > 1e-9)
      throw std::invalid_argument("LiftedProblem: kernel spacing must match the first axis");
    const bool drifted = std::any_of(beta.begin(), beta.end(), [](double b) { return b != 0.0; });
    if (std::abs(kernel->alpha - 1.0) < 1e-12 && drifted && !a.is_constant())
      throw std::invalid_argument("LiftedProblem: alpha = 1 with nonzero drift requires constant a");
  }
}

namespace {

// Corner stencil of one lifted jump offset, shared by every node.
struct JumpStencil {
  int o1 = 0, o2 = 0;   // integer offsets of the lower-left corner
  double f1 = 0, f2 = 0;  // fractional parts
  double weight = 0.0;
};

std::vector<JumpStencil> lifted_stencils(const LevyKernel& kernel, const LiftedDirection& dir,
                                         int n1, int n2, int sign) {
  const double g1 = dir.gammas_inv[0], g2 = dir.gammas_inv[1];
  const int mf = kernel.fold_count();
  std::vector<JumpStencil> st;
  st.reserve(std::size_t(mf));
  for (int m = 1; m <= mf; ++m) {
    const double z = sign * m * kernel.h;
    double u = g1 * z * n1, vv = g2 * z * n2;
    u -= std::floor(u / n1) * n1;
    vv -= std::floor(vv / n2) * n2;
    JumpStencil s;
    s.o1 = int(u);
    s.o2 = int(vv);
    s.f1 = u - s.o1;
    s.f2 = vv - s.o2;
    s.weight = kernel.offset_weight(m);
    st.push_back(s);
  }
  return st;
}

double lifted_ham(const TorusGrid2& w, int i1, int i2, double B1, double B2, double h1, double h2,
                  double cost) {
  double t = 0.0;
  if (B1 > 0.0)
    t += -B1 * (w.at(i1 + 1, i2) - w.at(i1, i2)) / h1;
  else if (B1 < 0.0)
    t += -B1 * (w.at(i1, i2) - w.at(i1 - 1, i2)) / h1;
  if (B2 > 0.0)
    t += -B2 * (w.at(i1, i2 + 1) - w.at(i1, i2)) / h2;
  else if (B2 < 0.0)
    t += -B2 * (w.at(i1, i2) - w.at(i1, i2 - 1)) / h2;
  return t - cost;
}

std::vector<double> levy_apply_lifted(const LevyKernel& kernel, const LiftedDirection& dir,
                                      const TorusGrid2& w) {
  const int n1 = w.n1(), n2 = w.n2();
  auto plus = lifted_stencils(kernel, dir, n1, n2, +1);
  auto minus = lifted_stencils(kernel, dir, n1, n2, -1);
  const double u0 = 2.0 * kernel.remainder_mass() / double(w.size());
  std::vector<double> out(w.size(), 0.0);
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i2 = 0; i2 < n2; ++i2) {
      const double wij = w.at(i1, i2);
      double acc = 0.0;
      for (const auto& sgn : {std::cref(plus), std::cref(minus)}) {
        for (const auto& s : sgn.get()) {
          const int a1 = i1 + s.o1, a2 = i2 + s.o2;
          double d = (1 - s.f1) * ((1 - s.f2) * (w.at(a1, a2) - wij) +
                                   s.f2 * (w.at(a1, a2 + 1) - wij)) +
                     s.f1 * ((1 - s.f2) * (w.at(a1 + 1, a2) - wij) +
                             s.f2 * (w.at(a1 + 1, a2 + 1) - wij));
          acc += s.weight * d;
        }
      }
      double unif = 0.0;
      for (double x : w.values()) unif += x - wij;
      out[w.wrap_index(i1, i2)] = acc + u0 * unif;
    }
  }
  return out;
}

}  // namespace

std::vector<double> lifted_residual(const LiftedProblem& prob, const TorusGrid2& w) {
  const int n1 = prob.n1, n2 = prob.n2;
  const double h1 = 1.0 / n1, h2 = 1.0 / n2;
  std::vector<double> levy(w.size(), 0.0);
  if (prob.kernel) levy = levy_apply_lifted(*prob.kernel, prob.dir, w);

  std::vector<double> res(w.size());
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i2 = 0; i2 < n2; ++i2) {
      const double y1 = i1 * h1, y2 = i2 * h2;
      double ham = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < prob.beta.size(); ++j) {
        const double B1 = prob.dir.gammas_inv[0] * prob.beta[j];
        const double B2 = prob.dir.gammas_inv[1] * prob.beta[j];
        ham = std::max(ham, lifted_ham(w, i1, i2, B1, B2, h1, h2, prob.cost[j]));
      }
      const double ai = prob.a.eval(y1);
      res[w.wrap_index(i1, i2)] = prob.lambda * w.at(i1, i2) + ham -
                                  ai * levy[w.wrap_index(i1, i2)] - ai * prob.frozen_I -
                                  prob.forcing.eval_lifted2(y1, y2);
    }
  }
  return res;
}

TorusGrid2 solve_discounted_lifted(const LiftedProblem& prob, const SolverOptions& opts,
                                   SolveDiagnostics* diag) {
  prob.validate();
  const int n1 = prob.n1, n2 = prob.n2;
  const int N = n1 * n2;
  const double h1 = 1.0 / n1, h2 = 1.0 / n2;
  const int nctrl = int(prob.beta.size());

  TorusGrid2 w(n1, n2);
  std::vector<double> avals(static_cast<std::size_t>(n1));
  for (int i1 = 0; i1 < n1; ++i1) avals[std::size_t(i1)] = prob.a.eval(i1 * h1);

  MatrixXd K = MatrixXd::Zero(N, N);
  for (int r = 0; r < N; ++r) K(r, r) = prob.lambda;
  if (prob.kernel) {
    auto plus = lifted_stencils(*prob.kernel, prob.dir, n1, n2, +1);
    auto minus = lifted_stencils(*prob.kernel, prob.dir, n1, n2, -1);
    const double u0 = 2.0 * prob.kernel->remainder_mass() / double(N);
    for (int i1 = 0; i1 < n1; ++i1) {
      const double ai = avals[std::size_t(i1)];
      for (int i2 = 0; i2 < n2; ++i2) {
        const int row = int(w.wrap_index(i1, i2));
        for (const auto& sgn : {std::cref(plus), std::cref(minus)}) {
          for (const auto& s : sgn.get()) {
            const int a1 = i1 + s.o1, a2 = i2 + s.o2;
            const double c00 = (1 - s.f1) * (1 - s.f2), c01 = (1 - s.f1) * s.f2;
            const double c10 = s.f1 * (1 - s.f2), c11 = s.f1 * s.f2;
            K(row, int(w.wrap_index(a1, a2))) -= ai * s.weight * c00;
            K(row, int(w.wrap_index(a1, a2 + 1))) -= ai * s.weight * c01;
            K(row, int(w.wrap_index(a1 + 1, a2))) -= ai * s.weight * c10;
            K(row, int(w.wrap_index(a1 + 1, a2 + 1))) -= ai * s.weight * c11;
            K(row, row) += ai * s.weight;
          }
        }
        for (int c = 0; c < N; ++c) K(row, c) -= ai * u0;
        K(row, row) += ai * u0 * N;
      }
    }
  }

  std::vector<int> policy(std::size_t(N), 0);
  auto improve = [&](const TorusGrid2& cur) {
    std::vector<int> next(static_cast<std::size_t>(N));
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 < n2; ++i2) {
        double best = -std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int j = 0; j < nctrl; ++j) {
          const double B1 = prob.dir.gammas_inv[0] * prob.beta[std::size_t(j)];
          const double B2 = prob.dir.gammas_inv[1] * prob.beta[std::size_t(j)];
          double q = lifted_ham(cur, i1, i2, B1, B2, h1, h2, prob.cost[std::size_t(j)]);
          if (q > best) {
            best = q;
            arg = j;
          }
        }
        next[cur.wrap_index(i1, i2)] = arg;
      }
    return next;
  };

  policy = improve(w);
  std::vector<double> history;
  MatrixXd A(N, N);
  VectorXd rhs(N);
  for (int iter = 0; iter < opts.max_policy_iters; ++iter) {
    A = K;
    for (int i1 = 0; i1 < n1; ++i1) {
      for (int i2 = 0; i2 < n2; ++i2) {
        const int row = int(w.wrap_index(i1, i2));
        const int j = policy[std::size_t(row)];
        const double B1 = prob.dir.gammas_inv[0] * prob.beta[std::size_t(j)];
        const double B2 = prob.dir.gammas_inv[1] * prob.beta[std::size_t(j)];
        if (B1 > 0.0) {
          A(row, row) += B1 / h1;
          A(row, int(w.wrap_index(i1 + 1, i2))) -= B1 / h1;
        } else if (B1 < 0.0) {
          A(row, row) += -B1 / h1;
          A(row, int(w.wrap_index(i1 - 1, i2))) -= -B1 / h1;
        }
        if (B2 > 0.0) {
          A(row, row) += B2 / h2;
          A(row, int(w.wrap_index(i1, i2 + 1))) -= B2 / h2;
        } else if (B2 < 0.0) {
          A(row, row) += -B2 / h2;
          A(row, int(w.wrap_index(i1, i2 - 1))) -= -B2 / h2;
        }
        rhs(row) = prob.forcing.eval_lifted2(i1 * h1, i2 * h2) +
                   avals[std::size_t(i1)] * prob.frozen_I + prob.cost[std::size_t(j)];
      }
    }
    Eigen::PartialPivLU<MatrixXd> lu(A);
    VectorXd x = lu_solve_refined(lu, A, rhs, opts.refine_steps);
    for (int r = 0; r < N; ++r) w.values()[std::size_t(r)] = x(r);

    std::vector<double> res = lifted_residual(prob, w);
    const double rnorm = sup_abs(res);
    history.push_back(rnorm);
    std::vector<int> next = improve(w);
    if (rnorm <= opts.tol) {
      if (diag) {
        diag->residual_history = history;
        diag->iterations = iter + 1;
        diag->residual = rnorm;
        diag->tail_bound =
            prob.kernel ? prob.a.sup() * prob.kernel->fold_residual_bound(1.0) * w.oscillation()
                        : 0.0;
        double cmax = 0.0;
        for (double c : prob.cost) cmax = std::max(cmax, std::abs(c));
        diag->apriori_bound =
            prob.forcing.sup_bound() + prob.a.sup() * std::abs(prob.frozen_I) + cmax;
      }
      return w;
    }
    if (next == policy && iter > 0)
      throw SolveFailure("solve_discounted_lifted: stalled above tolerance (residual " +
                             std::to_string(rnorm) + ")",
                         history);
    policy = next;
  }
  throw SolveFailure("solve_discounted_lifted: policy iteration did not converge", history);
}

void EpsProblem::validate() const {
  if (!(eps1 > 0.0)) throw std::invalid_argument("EpsProblem: eps1 must be positive");
  if (n < 8) throw std::invalid_argument("EpsProblem: grid too coarse");
  if (!(omega_right > omega_left)) throw std::invalid_argument("EpsProblem: empty domain");
  if (!exterior_data) throw std::invalid_argument("EpsProblem: exterior data not set");
  if (grid_h() > eps1 / 16.0 + 1e-15)
    throw std::invalid_argument(
        "EpsProblem: grid spacing does not resolve the oscillation (need h <= eps1/16)");
  if (std::abs(kernel.h - grid_h()) > 1e-12 * kernel.h)
    throw std::invalid_argument("EpsProblem: kernel spacing does not match the grid");
  controls.validate();
  a.validate();
  forcing.validate();
  if (std::abs(kernel.alpha - 1.0) < 1e-12 && controls.has_drift() && !a.is_constant())
    throw std::invalid_argument("EpsProblem: alpha = 1 with nonzero drift requires constant a");
}

namespace {

int eps_collar(const LevyKernel& kernel, double h) {
  // Data out to far_radius + 1 per the boundary-condition contract.
  return kernel.near_count() + kernel.far_count() + int(std::ceil(1.0 / h));
}

// Truncated Levy application on the exterior lattice (collar supplies data).
double levy_apply_exterior_at(const LevyKernel& kernel, const GridFunction& u, int i) {
  const int m_far = kernel.near_count() + kernel.far_count();
  const double ui = u.at(i);
  double acc = 0.0;
  for (int m = 1; m <= m_far; ++m)
    acc += kernel.offset_weight(m) * ((u.at(i + m) - ui) + (u.at(i - m) - ui));
  return acc;
}

double upwind_drift_lattice(const GridFunction& u, int i, double b, double h) {
  if (b > 0.0) return -b * (u.at(i + 1) - u.at(i)) / h;
  if (b < 0.0) return -b * (u.at(i) - u.at(i - 1)) / h;
  return 0.0;
}

GridFunction eps_lattice_with_data(const EpsProblem& prob) {
  const double h = prob.grid_h();
  const int collar = eps_collar(prob.kernel, h);
  GridFunction u = GridFunction::exterior(prob.n, h, prob.omega_left, collar);
  for (int i = -collar; i < prob.n + collar; ++i)
    if (i < 0 || i >= prob.n) u.at(i) = prob.exterior_data(u.node(i));
  return u;
}

}  // namespace

std::vector<double> eps_residual(const EpsProblem& prob, const GridFunction& u) {
  const int n = prob.n;
  const double h = prob.grid_h();
  std::vector<double> res(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = u.node(i);
    double ham = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < prob.controls.size(); ++j)
      ham = std::max(ham, upwind_drift_lattice(u, i, prob.controls.drift(j, x), h));
    const double ai = prob.a.eval(x / prob.eps1);
    res[std::size_t(i)] = u.at(i) + ham - ai * levy_apply_exterior_at(prob.kernel, u, i) -
                          prob.forcing.eval_scaled(x, prob.eps1);
  }
  return res;
}

GridFunction solve_eps_problem(const EpsProblem& prob, const SolverOptions& opts,
                               SolveDiagnostics* diag) {
  prob.validate();
  const int n = prob.n;
  const double h = prob.grid_h();
  const int nctrl = prob.controls.size();

  GridFunction u = eps_lattice_with_data(prob);
  const int m_far = prob.kernel.near_count() + prob.kernel.far_count();

  std::vector<double> avals(static_cast<std::size_t>(n)), gvals(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    avals[std::size_t(i)] = prob.a.eval(u.node(i) / prob.eps1);
    gvals[std::size_t(i)] = prob.forcing.eval_scaled(u.node(i), prob.eps1);
  }

  // Zeroth order + truncated Levy part; collar columns fold into the rhs.
  MatrixXd K = MatrixXd::Zero(n, n);
  VectorXd rhs_levy = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = 1.0;
    const double ai = avals[std::size_t(i)];
    for (int m = 1; m <= m_far; ++m) {
      const double wm = prob.kernel.offset_weight(m);
      for (int sgn : {+1, -1}) {
        const int t = i + sgn * m;
        K(i, i) += ai * wm;
        if (t >= 0 && t < n)
          K(i, t) -= ai * wm;
        else
          rhs_levy(i) += ai * wm * u.at(t);
      }
    }
  }

  std::vector<int> policy(std::size_t(n), 0);
  auto improve = [&](const GridFunction& cur) {
    std::vector<int> next(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double x = cur.node(i);
      double best = -std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int j = 0; j < nctrl; ++j) {
        double q = upwind_drift_lattice(cur, i, prob.controls.drift(j, x), h);
        if (q > best) {
          best = q;
          arg = j;
        }
      }
      next[std::size_t(i)] = arg;
    }
    return next;
  };

  policy = improve(u);
  std::vector<double> history;
  MatrixXd A(n, n);
  VectorXd rhs(n);
  for (int iter = 0; iter < opts.max_policy_iters; ++iter) {
    A = K;
    rhs = rhs_levy;
    for (int i = 0; i < n; ++i) {
      rhs(i) += gvals[std::size_t(i)];
      const double x = u.node(i);
      const double b = prob.controls.drift(policy[std::size_t(i)], x);
      if (b != 0.0) {
        const int t = (b > 0.0) ? i + 1 : i - 1;
        A(i, i) += std::abs(b) / h;
        if (t >= 0 && t < n)
          A(i, t) -= std::abs(b) / h;
        else
          rhs(i) += std::abs(b) / h * u.at(t);
      }
    }
    Eigen::PartialPivLU<MatrixXd> lu(A);
    VectorXd x = lu_solve_refined(lu, A, rhs, opts.refine_steps);
    for (int i = 0; i < n; ++i) u.at(i) = x(i);

    std::vector<double> res = eps_residual(prob, u);
    const double rnorm = sup_abs(res);
    history.push_back(rnorm);
    std::vector<int> next = improve(u);
    if (rnorm <= opts.tol) {
      if (diag) {
        diag->residual_history = history;
        diag->iterations = iter + 1;
        diag->residual = rnorm;
        diag->tail_bound = prob.a.sup() * prob.kernel.tail_constant * u.sup_norm();
        diag->apriori_bound = std::max(sup_abs(gvals), u.sup_norm());
      }
      return u;
    }
    if (next == policy && iter > 0)
      throw SolveFailure("solve_eps_problem: stalled above tolerance (residual " +
                             std::to_string(rnorm) + ")",
                         history);
    policy = next;
  }
  throw SolveFailure("solve_eps_problem: policy iteration did not converge", history);
}

void EffectiveProblem::validate() const {
  if (table == nullptr) throw std::invalid_argument("EffectiveProblem: table not set");
  if (n < 8) throw std::invalid_argument("EffectiveProblem: grid too coarse");
  if (!(omega_right > omega_left)) throw std::invalid_argument("EffectiveProblem: empty domain");
  if (!exterior_data) throw std::invalid_argument("EffectiveProblem: exterior data not set");
  if (std::abs(kernel.h - grid_h()) > 1e-12 * kernel.h)
    throw std::invalid_argument("EffectiveProblem: kernel spacing does not match the grid");
  if (table->I_grid().size() >= 2 && table->max_I_quotient() > -1e-12)
    throw std::invalid_argument("EffectiveProblem: table is not decreasing in the nonlocal slot");
}

std::vector<double> effective_residual(const EffectiveProblem& prob, const GridFunction& u) {
  const int n = prob.n;
  const double h = prob.grid_h();
  const double theta_p = prob.table->max_abs_slope_p();
  std::vector<double> res(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = u.node(i);
    const double p = (u.at(i + 1) - u.at(i - 1)) / (2.0 * h);
    const double I = levy_apply_exterior_at(prob.kernel, u, i);
    const double lf = (u.at(i + 1) - 2.0 * u.at(i) + u.at(i - 1)) / h;
    res[std::size_t(i)] = u.at(i) + prob.table->query(x, p, I) - 0.5 * theta_p * lf;
  }
  return res;
}

GridFunction solve_effective(const EffectiveProblem& prob, const SolverOptions& opts,
                             SolveDiagnostics* diag) {
  prob.validate();
  const int n = prob.n;
  const double h = prob.grid_h();
  const int m_far = prob.kernel.near_count() + prob.kernel.far_count();
  const int collar = eps_collar(prob.kernel, h);

  GridFunction u = GridFunction::exterior(n, h, prob.omega_left, collar);
  for (int i = -collar; i < n + collar; ++i) u.at(i) = prob.exterior_data(u.node(i));

  const double sI = std::max(prob.table->max_abs_slope_I(), prob.table->a0());
  const double theta_p = prob.table->max_abs_slope_p();

  // Semi-implicit preconditioner: Id + sI (-L) + Lax-Friedrichs dissipation.
  MatrixXd A = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = 1.0;
    for (int m = 1; m <= m_far; ++m) {
      const double wm = prob.kernel.offset_weight(m);
      for (int sgn : {+1, -1}) {
        const int t = i + sgn * m;
        A(i, i) += sI * wm;
        if (t >= 0 && t < n) A(i, t) -= sI * wm;
      }
    }
    if (theta_p > 0.0) {
      A(i, i) += theta_p / h;
      for (int sgn : {+1, -1}) {
        const int t = i + sgn;
        if (t >= 0 && t < n) A(i, t) -= 0.5 * theta_p / h;
      }
    }
  }
  Eigen::PartialPivLU<MatrixXd> lu(A);

  std::vector<double> history;
  for (int iter = 0; iter < opts.max_fixed_point_iters; ++iter) {
    std::vector<double> res = effective_residual(prob, u);
    const double rnorm = sup_abs(res);
    history.push_back(rnorm);
    if (rnorm <= opts.tol) {
      if (diag) {
        diag->residual_history = history;
        diag->iterations = iter;
        diag->residual = rnorm;
        diag->tail_bound = prob.kernel.tail_constant * u.sup_norm();
        diag->apriori_bound = 0.0;
      }
      return u;
    }
    VectorXd F(n);
    for (int i = 0; i < n; ++i) F(i) = res[std::size_t(i)];
    VectorXd delta = lu.solve(-F);
    for (int i = 0; i < n; ++i) u.at(i) += opts.damping * delta(i);
  }
  throw SolveFailure("solve_effective: fixed point did not reach tolerance", history);
}

namespace {

template <typename Prob>
ComparisonReport compare_impl(const GridFunction& sub, const GridFunction& super, const Prob& prob,
                              double tol, std::vector<double> res_sub,
                              std::vector<double> res_super, int n) {
  ComparisonReport rep;
  rep.max_sub_residual = *std::max_element(res_sub.begin(), res_sub.end());
  rep.min_super_residual = *std::min_element(res_super.begin(), res_super.end());
  rep.preconditions_ok = (rep.max_sub_residual <= tol) && (rep.min_super_residual >= -tol);
  rep.worst_gap = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double gap = sub.at(i) - super.at(i);
    rep.worst_gap = std::max(rep.worst_gap, gap);
    if (gap > 2.0 * tol) ++rep.violations;
  }
  rep.pass = rep.preconditions_ok && rep.violations == 0;
  if (!rep.preconditions_ok)
    rep.note = "residual signs do not certify a sub/supersolution pair";
  else if (rep.violations > 0)
    rep.note = "ordering violated at " + std::to_string(rep.violations) + " nodes";
  else
    rep.note = "ordering holds";
  (void)prob;
  return rep;
}

}  // namespace

ComparisonReport check_comparison(const GridFunction& sub, const GridFunction& super,
                                  const DiscountedProblem& prob, double tol) {
  return compare_impl(sub, super, prob, tol, discounted_residual(prob, sub),
                      discounted_residual(prob, super), prob.n);
}

ComparisonReport check_comparison(const GridFunction& sub, const GridFunction& super,
                                  const EpsProblem& prob, double tol) {
  return compare_impl(sub, super, prob, tol, eps_residual(prob, sub), eps_residual(prob, super),
                      prob.n);
}

MaxPrincipleReport strong_max_principle_check(const DiscountedProblem& base, double bump_height,
                                              double bump_fraction, const SolverOptions& opts) {
  MaxPrincipleReport rep;
  for (double b : base.beta)
    if (b != 0.0) throw std::invalid_argument("strong_max_principle_check: drift must be zero");
  // Constant forcing required; sample it.
  const double g0 = base.forcing(0.0);
  for (int i = 0; i < base.n; ++i) {
    double y = base.period * i / base.n;
    if (std::abs(base.forcing(y) - g0) > 1e-12 * (1.0 + std::abs(g0)))
      throw std::invalid_argument("strong_max_principle_check: forcing must be constant");
  }

  GridFunction flat = solve_discounted(base, opts);
  rep.oscillation = flat.oscillation();

  DiscountedProblem bumped = base;
  const double lo = 0.5 * base.period * (1.0 - bump_fraction);
  const double hi = 0.5 * base.period * (1.0 + bump_fraction);
  bumped.forcing = [=, f = base.forcing](double y) {
    return f(y) + ((y >= lo && y < hi) ? bump_height : 0.0);
  };
  GridFunction shifted = solve_discounted(bumped, opts);

  const double sgn = (bump_height >= 0.0) ? 1.0 : -1.0;
  rep.min_abs_shift = std::numeric_limits<double>::infinity();
  rep.sign_consistent = true;
  for (int i = 0; i < base.n; ++i) {
    const double d = (shifted.at(i) - flat.at(i)) * sgn;
    rep.min_abs_shift = std::min(rep.min_abs_shift, std::abs(d));
    if (!(d > 0.0)) rep.sign_consistent = false;
  }
  rep.pass = (rep.oscillation <= 10.0 * opts.tol) && rep.sign_consistent &&
             rep.min_abs_shift > 0.0;
  rep.note = rep.pass ? "constant-data solve is flat and the bump propagates everywhere"
                      : "strong maximum principle check failed";
  return rep;
}

}  // namespace levyhom
