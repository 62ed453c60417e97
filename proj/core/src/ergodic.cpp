#include "levyhom/ergodic.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace levyhom {

std::vector<double> CellProblemSpec::frozen_beta() const {
  return controls.frozen_drifts(frozen_x);
}

std::vector<double> CellProblemSpec::frozen_cost() const {
  std::vector<double> c = controls.frozen_drifts(frozen_x);
  for (double& b : c) b *= frozen_p;
  return c;
}

void CellProblemSpec::validate() const {
  controls.validate();
  coeffs.validate();
  forcing.validate();
  if (forcing.num_scales() > 2)
    throw std::invalid_argument("CellProblemSpec: more than two scales is out of desk scope");

  const auto beta = frozen_beta();
  const bool drifted = std::any_of(beta.begin(), beta.end(), [](double b) { return b != 0.0; });

  switch (kase) {
    case CellCase::I:
      if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("CellProblemSpec: case I requires alpha in (0,1)");
      if (!drifted)
        throw std::invalid_argument("CellProblemSpec: case I requires a nonzero drift");
      if (kernel)
        throw std::invalid_argument("CellProblemSpec: case I carries no nonlocal term");
      break;
    case CellCase::II:
      if (std::abs(alpha - 1.0) > 1e-12)
        throw std::invalid_argument("CellProblemSpec: case II requires alpha = 1");
      if (!drifted)
        throw std::invalid_argument("CellProblemSpec: case II requires a nonzero drift");
      if (!coeffs.is_constant())
        throw std::invalid_argument("CellProblemSpec: case II requires constant a");
      if (!kernel) throw std::invalid_argument("CellProblemSpec: case II requires a kernel");
      break;
    case CellCase::III:
      if (!((alpha > 1.0 && alpha < 2.0) || (alpha > 0.0 && alpha <= 1.0 && !drifted)))
        throw std::invalid_argument(
            "CellProblemSpec: case III requires alpha in (1,2), or alpha in (0,1] with zero drift");
      if (!kernel) throw std::invalid_argument("CellProblemSpec: case III requires a kernel");
      break;
  }
  if (kernel && std::abs(kernel->alpha - alpha) > 1e-12)
    throw std::invalid_argument("CellProblemSpec: kernel alpha disagrees with the case tag");
}

namespace {

struct SweepPoint {
  double lambda;
  double sup_m, inf_m, mean_m;
  double holder_q;
  double osc_v;
  GridFunction v_line;  // solution (line-sampled for lifted problems)
};

SweepPoint solve_one(const CellProblemSpec& spec, double lambda, double tol) {
  SolverOptions opts;
  opts.tol = tol;
  SweepPoint pt;
  pt.lambda = lambda;

  if (spec.forcing.num_scales() <= 1) {
    DiscountedProblem dp;
    dp.lambda = lambda;
    dp.kernel = spec.kernel;
    dp.beta = spec.frozen_beta();
    dp.cost = spec.frozen_cost();
    dp.a = spec.coeffs;
    const MultiscaleForcing& f = spec.forcing;
    dp.forcing = [&f](double y) { return f.eval_line(y); };
    dp.frozen_I = spec.frozen_I;
    dp.n = spec.n_torus;
    dp.period = 1.0;
    GridFunction v = solve_discounted(dp, opts);

    GridFunction m = v;
    for (int i = 0; i < m.n(); ++i) m.at(i) *= lambda;
    pt.sup_m = *std::max_element(m.values().begin(), m.values().end());
    pt.inf_m = *std::min_element(m.values().begin(), m.values().end());
    pt.mean_m = m.interior_mean();
    pt.holder_q = holder_diagnostic(m, spec.coeffs.theta0());
    pt.osc_v = v.oscillation();
    pt.v_line = std::move(v);
    return pt;
  }

  LiftedProblem lp;
  lp.lambda = lambda;
  lp.kernel = spec.kernel;
  lp.dir.gammas_inv = {spec.forcing.gamma_inv(0), spec.forcing.gamma_inv(1)};
  lp.beta = spec.frozen_beta();
  lp.cost = spec.frozen_cost();
  lp.a = spec.coeffs;
  lp.forcing = spec.forcing;
  lp.frozen_I = spec.frozen_I;
  lp.n1 = spec.n1;
  lp.n2 = spec.n2;
  TorusGrid2 w = solve_discounted_lifted(lp, opts);

  TorusGrid2 m = w;
  for (double& x : m.values()) x *= lambda;
  auto [mn, mx] = std::minmax_element(m.values().begin(), m.values().end());
  pt.sup_m = *mx;
  pt.inf_m = *mn;
  pt.mean_m = m.mean();
  pt.holder_q = holder_diagnostic(m, spec.coeffs.theta0());
  pt.osc_v = w.oscillation();
  pt.v_line = w.sample_line(spec.n_torus, 1.0, lp.dir.gammas_inv[0], lp.dir.gammas_inv[1]);
  return pt;
}

}  // namespace

ErgodicResult ergodic_constant(const CellProblemSpec& spec,
                               const std::vector<double>& lambda_schedule, double tol) {
  spec.validate();
  if (lambda_schedule.empty())
    throw std::invalid_argument("ergodic_constant: empty lambda schedule");
  for (std::size_t i = 0; i < lambda_schedule.size(); ++i) {
    if (!(lambda_schedule[i] > 0.0))
      throw std::invalid_argument("ergodic_constant: lambda must be positive");
    if (i > 0 && !(lambda_schedule[i] < lambda_schedule[i - 1]))
      throw std::invalid_argument("ergodic_constant: schedule must be strictly decreasing");
  }
  if (lambda_schedule.back() < 1e-4)
    throw std::invalid_argument("ergodic_constant: smallest lambda below the desk floor 1e-4");

  ErgodicResult res;
  if (spec.kase == CellCase::I)
    res.controllability_ok = spec.controls.frozen_drifts_span_zero(spec.frozen_x);

  std::vector<SweepPoint> sweep;
  sweep.reserve(lambda_schedule.size());
  for (double lam : lambda_schedule) sweep.push_back(solve_one(spec, lam, tol));

  for (const auto& pt : sweep) {
    res.trace.push_back({pt.lambda, pt.sup_m, pt.inf_m, pt.mean_m, pt.holder_q});
    res.max_sup_m = std::max(res.max_sup_m, std::max(std::abs(pt.sup_m), std::abs(pt.inf_m)));
  }

  // Oscillation must shrink along the schedule; a plateau at solver noise is
  // not flagged.
  const double floor = 20.0 * tol;
  for (std::size_t k = 0; k + 2 < sweep.size(); ++k) {
    const double o0 = sweep[k].sup_m - sweep[k].inf_m;
    const double o1 = sweep[k + 1].sup_m - sweep[k + 1].inf_m;
    const double o2 = sweep[k + 2].sup_m - sweep[k + 2].inf_m;
    if (o1 >= o0 && o2 >= o1 && o2 > floor) res.ergodic = false;
  }

  const SweepPoint& last = sweep.back();
  res.d = last.mean_m;

  // Least-squares fit mean(lambda) = d + k * lambda.
  {
    double sl = 0, sm = 0, sll = 0, slm = 0;
    const double nn = double(sweep.size());
    for (const auto& pt : sweep) {
      sl += pt.lambda;
      sm += pt.mean_m;
      sll += pt.lambda * pt.lambda;
      slm += pt.lambda * pt.mean_m;
    }
    const double det = nn * sll - sl * sl;
    res.d_extrapolated = (det != 0.0) ? (sm * sll - sl * slm) / det : res.d;
  }

  res.corrector = last.v_line;
  const double vbar = res.corrector.interior_mean();
  for (int i = 0; i < res.corrector.n(); ++i) res.corrector.at(i) -= vbar;

  res.holder_quotient = last.holder_q;
  const double tail = spec.kernel ? spec.coeffs.sup() *
                                        spec.kernel->fold_residual_bound(1.0) * last.osc_v
                                  : 0.0;
  res.uncertainty = (last.sup_m - last.inf_m) + tail;

  double cmax = 0.0;
  for (double c : spec.frozen_cost()) cmax = std::max(cmax, std::abs(c));
  res.apriori_bound =
      spec.forcing.sup_bound() + spec.coeffs.sup() * std::abs(spec.frozen_I) + cmax;
  return res;
}

double control_value_oracle(const CellProblemSpec& spec, double lambda, double y0, int n_dp) {
  if (spec.kase != CellCase::I)
    throw std::invalid_argument("control_value_oracle: a case-I problem is required");
  spec.validate();
  if (!(lambda > 0.0)) throw std::invalid_argument("control_value_oracle: lambda must be positive");

  const std::vector<double> beta = spec.frozen_beta();
  const std::vector<double> cost = spec.frozen_cost();
  const int nctrl = int(beta.size());
  const double h = 1.0 / n_dp;
  double bmax = 0.0;
  for (double b : beta) bmax = std::max(bmax, std::abs(b));
  if (bmax == 0.0) bmax = 1.0;
  const double dt = h / bmax;
  const double q = std::exp(-lambda * dt);

  std::vector<double> f(static_cast<std::size_t>(n_dp));
  for (int i = 0; i < n_dp; ++i) {
    const double y = i * h;
    f[std::size_t(i)] = spec.coeffs.eval(y) * spec.frozen_I + spec.forcing.eval_line(y);
  }

  // Foot of the characteristic y + dt*beta, as (node, weight) for linear
  // interpolation on the periodic grid.
  struct Foot {
    int i0;
    double w1;  // weight of node i0+1
  };
  std::vector<Foot> feet(static_cast<std::size_t>(nctrl));
  for (int j = 0; j < nctrl; ++j) {
    double s = beta[std::size_t(j)] * dt / h;  // displacement in index units
    double frac = s - std::floor(s);
    feet[std::size_t(j)] = {int(std::floor(s)), frac};
  }
  auto foot_value = [&](const std::vector<double>& V, int i, int j) {
    const Foot& ft = feet[std::size_t(j)];
    int i0 = i + ft.i0;
    int a = ((i0 % n_dp) + n_dp) % n_dp;
    int b = (a + 1) % n_dp;
    return (1.0 - ft.w1) * V[std::size_t(a)] + ft.w1 * V[std::size_t(b)];
  };

  std::vector<double> V(static_cast<std::size_t>(n_dp));
  for (int i = 0; i < n_dp; ++i) V[std::size_t(i)] = f[std::size_t(i)] / lambda;
  std::vector<int> policy(std::size_t(n_dp), 0);

  auto improve = [&](const std::vector<double>& cur) {
    std::vector<int> next(static_cast<std::size_t>(n_dp));
    for (int i = 0; i < n_dp; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int j = 0; j < nctrl; ++j) {
        double qv = dt * cost[std::size_t(j)] + q * foot_value(cur, i, j);
        if (qv < best) {
          best = qv;
          arg = j;
        }
      }
      next[std::size_t(i)] = arg;
    }
    return next;
  };

  policy = improve(V);
  for (int howard = 0; howard < 80; ++howard) {
    // Policy evaluation: (I - q P_pi) V = dt (f + c_pi), sparse two-band rows.
    Eigen::SparseMatrix<double> A(n_dp, n_dp);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(n_dp) * 3);
    Eigen::VectorXd rhs(n_dp);
    for (int i = 0; i < n_dp; ++i) {
      const int j = policy[std::size_t(i)];
      const Foot& ft = feet[std::size_t(j)];
      int a = (((i + ft.i0) % n_dp) + n_dp) % n_dp;
      int b = (a + 1) % n_dp;
      trip.emplace_back(i, i, 1.0);
      trip.emplace_back(i, a, -q * (1.0 - ft.w1));
      trip.emplace_back(i, b, -q * ft.w1);
      rhs(i) = dt * (f[std::size_t(i)] + cost[std::size_t(j)]);
    }
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    Eigen::VectorXd x = lu.solve(rhs);
    for (int i = 0; i < n_dp; ++i) V[std::size_t(i)] = x(i);

    std::vector<int> next = improve(V);
    if (next == policy) break;
    policy = next;
  }

  double s = y0 / h;
  s -= std::floor(s / n_dp) * n_dp;
  int a = int(s) % n_dp;
  double frac = s - std::floor(s);
  return (1.0 - frac) * V[std::size_t(a)] + frac * V[std::size_t((a + 1) % n_dp)];
}

double holder_diagnostic(const GridFunction& m, double theta) {
  if (!(theta > 0.0) || theta > 1.0)
    throw std::invalid_argument("holder_diagnostic: theta must lie in (0,1]");
  const int n = m.n();
  const double period = m.is_torus() ? m.period() : 0.0;
  const double h = m.h();
  double best = 0.0;
  const int reach = m.is_torus() ? n / 2 : n - 1;
  for (int i = 0; i < n; ++i) {
    for (int k = 1; k <= reach; ++k) {
      int j = i + k;
      if (!m.is_torus() && j >= n) break;
      double dy = k * h;
      if (m.is_torus() && dy > 0.5 * period) break;
      double quot = std::abs(m.at(i) - m.at(j)) / std::pow(dy, theta);
      best = std::max(best, quot);
    }
  }
  return best;
}

double holder_diagnostic(const TorusGrid2& m, double theta) {
  if (!(theta > 0.0) || theta > 1.0)
    throw std::invalid_argument("holder_diagnostic: theta must lie in (0,1]");
  const int n1 = m.n1(), n2 = m.n2();
  double best = 0.0;
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i2 = 0; i2 < n2; ++i2) {
      const double mij = m.at(i1, i2);
      for (int k1 = -n1 / 2; k1 <= n1 / 2; ++k1) {
        for (int k2 = 0; k2 <= n2 / 2; ++k2) {
          if (k1 <= 0 && k2 == 0) continue;
          const double d1 = double(k1) / n1, d2 = double(k2) / n2;
          const double dy = std::sqrt(d1 * d1 + d2 * d2);
          if (dy > 0.5) continue;
          double quot = std::abs(mij - m.at(i1 + k1, i2 + k2)) / std::pow(dy, theta);
          best = std::max(best, quot);
        }
      }
    }
  }
  return best;
}

WeakSolutionReport verify_weak_solution(const CellProblemSpec& spec, double d, double mu,
                                        double lambda_floor) {
  if (!(mu > 0.0)) throw std::invalid_argument("verify_weak_solution: mu must be positive");
  spec.validate();

  WeakSolutionReport rep;
  rep.mu = mu;
  rep.lambda_used = lambda_floor;

  SolverOptions opts;
  opts.tol = spec.solver_tol;

  // Residual of the cell equation with constant d at v_lambda: subtract the
  // discount term and add d.
  double resid = 0.0;
  if (spec.forcing.num_scales() <= 1) {
    DiscountedProblem dp;
    dp.lambda = lambda_floor;
    dp.kernel = spec.kernel;
    dp.beta = spec.frozen_beta();
    dp.cost = spec.frozen_cost();
    dp.a = spec.coeffs;
    const MultiscaleForcing& f = spec.forcing;
    dp.forcing = [&f](double y) { return f.eval_line(y); };
    dp.frozen_I = spec.frozen_I;
    dp.n = spec.n_torus;
    GridFunction v = solve_discounted(dp, opts);
    std::vector<double> r = discounted_residual(dp, v);
    for (int i = 0; i < dp.n; ++i)
      resid = std::max(resid, std::abs(r[std::size_t(i)] - lambda_floor * v.at(i) + d));
  } else {
    LiftedProblem lp;
    lp.lambda = lambda_floor;
    lp.kernel = spec.kernel;
    lp.dir.gammas_inv = {spec.forcing.gamma_inv(0), spec.forcing.gamma_inv(1)};
    lp.beta = spec.frozen_beta();
    lp.cost = spec.frozen_cost();
    lp.a = spec.coeffs;
    lp.forcing = spec.forcing;
    lp.frozen_I = spec.frozen_I;
    lp.n1 = spec.n1;
    lp.n2 = spec.n2;
    TorusGrid2 w = solve_discounted_lifted(lp, opts);
    std::vector<double> r = lifted_residual(lp, w);
    for (std::size_t k = 0; k < r.size(); ++k)
      resid = std::max(resid, std::abs(r[k] - lambda_floor * w.values()[k] + d));
  }

  rep.mu_achieved = resid;
  rep.tail_budget =
      spec.kernel ? spec.coeffs.sup() * spec.kernel->fold_residual_bound(1.0) : 0.0;
  rep.pass = resid <= mu;
  std::ostringstream os;
  if (rep.pass) {
    os << "v_lambda at lambda=" << lambda_floor << " is a " << mu << "-approximate solution";
  } else {
    os << "smallest achievable mu at lambda=" << lambda_floor << " is " << resid;
    if (mu < rep.tail_budget)
      os << "; requested mu sits below the kernel tail budget " << rep.tail_budget;
  }
  rep.note = os.str();
  return rep;
}

CellProblemSpec make_cell_spec(const CellFamily& family, double x, double p, double I) {
  CellProblemSpec spec;
  spec.kase = family.kase;
  spec.alpha = family.alpha;
  spec.frozen_x = x;
  spec.frozen_p = p;
  spec.frozen_I = I;
  spec.controls = family.controls;
  spec.coeffs = family.coeffs;
  spec.forcing = family.forcing;
  spec.kernel = family.kernel;
  spec.n_torus = family.n_torus;
  spec.n1 = family.n1;
  spec.n2 = family.n2;
  spec.solver_tol = family.tol;
  return spec;
}

CellEvaluator make_cell_evaluator(const CellFamily& family) {
  return [family](double x, double p, double I) -> CellSample {
    CellSample s;
    try {
      CellProblemSpec spec = make_cell_spec(family, x, p, I);
      ErgodicResult r = ergodic_constant(spec, family.lambda_schedule, family.tol);
      s.value = -r.d_extrapolated;
      s.uncertainty = r.uncertainty + std::abs(r.d - r.d_extrapolated);
      s.ok = r.ergodic;
    } catch (const SolveFailure&) {
      s.ok = false;
    }
    return s;
  };
}

}  // namespace levyhom
