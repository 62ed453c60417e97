#include "levyhom/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "levyhom/forcing.hpp"

namespace levyhom {

namespace {

// Exact kernel mass of a cell: int_lo^hi s^{-1-alpha} ds.
double cell_mass(double lo, double hi, double alpha) {
  return (std::pow(lo, -alpha) - std::pow(hi, -alpha)) / alpha;
}

// int_lo^hi s^{1-alpha} ds, the second-moment integral of the measure.
double cell_second_moment(double lo, double hi, double alpha) {
  const double e = 2.0 - alpha;
  return (std::pow(hi, e) - std::pow(lo, e)) / e;
}

}  // namespace

void LiftedDirection::validate(int max_denominator) const {
  if (gammas_inv.empty() || gammas_inv.size() > 2)
    throw std::invalid_argument("LiftedDirection: supports 1 or 2 components");
  for (double g : gammas_inv)
    if (!(std::abs(g) > 0.0) || !std::isfinite(g))
      throw std::invalid_argument("LiftedDirection: components must be nonzero finite");
  if (gammas_inv.size() == 2) {
    auto rep = check_nonresonance(gammas_inv, max_denominator);
    if (!rep.pass)
      throw std::invalid_argument("LiftedDirection: scale ratio resonant: " + rep.summary);
  }
}

LevyKernel build_kernel(double alpha, double h, double nu, double far_radius,
                        const KernelOptions& opts) {
  if (!(alpha > 0.0) || !(alpha < 2.0))
    throw std::invalid_argument("build_kernel: alpha must lie strictly inside (0,2)");
  if (!(h > 0.0)) throw std::invalid_argument("build_kernel: h must be positive");
  if (nu < h) throw std::invalid_argument("build_kernel: nu < h leaves the singularity unresolved");
  if (far_radius < 1.0)
    throw std::invalid_argument("build_kernel: far_radius must be >= 1 to resolve the compensator");
  if (opts.fold_horizon < far_radius)
    throw std::invalid_argument("build_kernel: fold_horizon must be >= far_radius");

  LevyKernel k;
  k.alpha = alpha;
  k.h = h;
  k.far_radius = far_radius;
  k.fold_horizon = opts.fold_horizon;

  const int m_nu = std::max<int>(1, int(std::llround(nu / h)));
  k.nu = m_nu * h;

  // Cells C_m = ((m-1/2)h, (m+1/2)h], C_1 extended down to 0. Nodes on |z| <= nu
  // get the second-difference weight; the weight integrates z^2 against the
  // measure exactly, so quadratics are reproduced without error.
  k.near_weights.resize(m_nu);
  for (int m = 1; m <= m_nu; ++m) {
    double lo = (m == 1) ? 0.0 : (m - 0.5) * h;
    double hi = (m + 0.5) * h;
    k.near_weights[m - 1] = cell_second_moment(lo, hi, alpha) / ((m * h) * (m * h));
  }

  const int m_far = std::max<int>(m_nu, int(std::llround(far_radius / h)));
  k.far_weights.resize(m_far - m_nu);
  for (int m = m_nu + 1; m <= m_far; ++m) {
    double lo = (m - 0.5) * h;
    double hi = (m + 0.5) * h;
    k.far_weights[m - m_nu - 1] = cell_mass(lo, hi, alpha);
  }

  k.tail_constant = 4.0 * std::pow(far_radius, -alpha) / alpha;
  return k;
}

int LevyKernel::fold_count() const { return int(std::llround(fold_horizon / h)); }

double LevyKernel::offset_weight(int m) const {
  const int m_nu = near_count();
  const int m_far = m_nu + far_count();
  if (m < 1) return 0.0;
  if (m <= m_nu) return near_weights[m - 1];
  if (m <= m_far) return far_weights[m - m_nu - 1];
  if (m <= fold_count()) return cell_mass((m - 0.5) * h, (m + 0.5) * h, alpha);
  return 0.0;
}

double LevyKernel::remainder_mass() const {
  const double edge = (fold_count() + 0.5) * h;
  return std::pow(edge, -alpha) / alpha;
}

double LevyKernel::fold_residual_bound(double /*period*/) const {
  // Replacing jumps beyond the fold horizon by a uniform redistribution is off
  // by at most the full remainder mass times the oscillation of u.
  return 2.0 * remainder_mass();
}

std::vector<double> LevyKernel::torus_class_weights(int n) const {
  std::vector<double> w(std::size_t(n), 0.0);
  const int mf = fold_count();
  for (int m = 1; m <= mf; ++m) w[std::size_t(m % n)] += offset_weight(m);
  return w;
}

GridFunction apply_levy(const LevyKernel& kernel, const GridFunction& u) {
  if (std::abs(u.h() - kernel.h) > 1e-12 * kernel.h)
    throw std::invalid_argument("apply_levy: kernel spacing does not match the grid");

  const int n = u.n();
  if (u.is_torus()) {
    const std::vector<double> w = kernel.torus_class_weights(n);
    const double uniform = 2.0 * kernel.remainder_mass() / n;
    GridFunction out = GridFunction::torus(n, u.period());
    for (int i = 0; i < n; ++i) {
      const double ui = u.at(i);
      double acc = 0.0;
      for (int j = 1; j < n; ++j)
        acc += w[std::size_t(j)] * ((u.at(i + j) - ui) + (u.at(i - j) - ui));
      double unif = 0.0;
      for (int kk = 0; kk < n; ++kk) unif += u.at(kk) - ui;
      out.at(i) = acc + uniform * unif;
    }
    return out;
  }

  const int m_far = kernel.near_count() + kernel.far_count();
  if (u.collar() < m_far) {
    const double have = u.collar() * u.h();
    throw std::invalid_argument(
        "apply_levy: exterior collar of radius " + std::to_string(have) +
        " cannot supply far-field nodes out to |z| = " + std::to_string(kernel.far_radius));
  }
  GridFunction out = GridFunction::exterior(n, u.h(), u.left(), u.collar());
  for (int i = 0; i < n; ++i) {
    const double ui = u.at(i);
    double acc = 0.0;
    for (int m = 1; m <= m_far; ++m)
      acc += kernel.offset_weight(m) * ((u.at(i + m) - ui) + (u.at(i - m) - ui));
    out.at(i) = acc;
  }
  return out;
}

TorusGrid2 apply_levy_lifted(const LevyKernel& kernel, const TorusGrid2& w,
                             const LiftedDirection& dir) {
  dir.validate();
  if (dir.gammas_inv.size() != 2)
    throw std::invalid_argument("apply_levy_lifted: expected a 2-component direction");
  const double g1 = dir.gammas_inv[0];
  const double g2 = dir.gammas_inv[1];

  const int n1 = w.n1(), n2 = w.n2();
  TorusGrid2 out(n1, n2);

  const int mf = kernel.fold_count();
  const double uniform = 2.0 * kernel.remainder_mass() / double(w.size());

  // Second differences along the line, as convex combinations of node
  // differences so constants map to exactly zero.
  auto interp_diff = [&](double y1, double y2, double wij) {
    double uu = (y1 - std::floor(y1)) * n1;
    double vv = (y2 - std::floor(y2)) * n2;
    int i = int(uu), j = int(vv);
    double fu = uu - i, fv = vv - j;
    return (1 - fu) * ((1 - fv) * (w.at(i, j) - wij) + fv * (w.at(i, j + 1) - wij)) +
           fu * ((1 - fv) * (w.at(i + 1, j) - wij) + fv * (w.at(i + 1, j + 1) - wij));
  };

  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i2 = 0; i2 < n2; ++i2) {
      const double y1 = double(i1) / n1;
      const double y2 = double(i2) / n2;
      const double wij = w.at(i1, i2);
      double acc = 0.0;
      for (int m = 1; m <= mf; ++m) {
        const double z = m * kernel.h;
        acc += kernel.offset_weight(m) * (interp_diff(y1 + g1 * z, y2 + g2 * z, wij) +
                                          interp_diff(y1 - g1 * z, y2 - g2 * z, wij));
      }
      double unif = 0.0;
      for (double v : w.values()) unif += v - wij;
      out.at(i1, i2) = acc + uniform * unif;
    }
  }
  return out;
}

double analytic_symbol(double alpha, int k) {
  if (!(alpha > 0.0) || !(alpha < 2.0))
    throw std::invalid_argument("analytic_symbol: alpha must lie strictly inside (0,2)");
  if (k < 0) throw std::invalid_argument("analytic_symbol: k must be nonnegative");
  if (k == 0) return 0.0;

  const double omega = 2.0 * M_PI * k;

  // 1) Series on [0, a]: 1 - cos(w s) = sum_{j>=1} (-1)^{j+1} (w s)^{2j} / (2j)!
  const double a = 0.25 / k;  // omega * a = pi/2
  double series = 0.0;
  {
    double wa = omega * a;
    double pow_term = wa * wa;  // (wa)^{2j} running value
    double fact = 2.0;          // (2j)! running value
    for (int j = 1; j <= 40; ++j) {
      double term =
          ((j % 2 == 1) ? 1.0 : -1.0) * pow_term / fact * std::pow(a, -alpha) / (2.0 * j - alpha);
      series += term;
      if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(series))) break;
      pow_term *= wa * wa;
      fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
    }
  }

  // 2) Panel-wise Simpson on [a, S], panels aligned to half-periods of cos.
  const double S = 100.0;
  auto f = [&](double s) { return (1.0 - std::cos(omega * s)) * std::pow(s, -1.0 - alpha); };
  auto simpson = [&](double lo, double hi) {
    const int nsub = 16;
    const double hh = (hi - lo) / nsub;
    double acc = f(lo) + f(hi);
    for (int i = 1; i < nsub; ++i) acc += f(lo + i * hh) * ((i % 2) ? 4.0 : 2.0);
    return acc * hh / 3.0;
  };
  double mid = 0.0;
  {
    const double half_period = M_PI / omega;
    double lo = a;
    while (lo < S) {
      double hi = std::min(lo + half_period, S);
      mid += simpson(lo, hi);
      lo = hi;
    }
  }

  // 3) Tail beyond S: S^{-alpha}/alpha minus the oscillatory part, expanded by
  // integration by parts to three terms; the dropped term is O(S^{-4-alpha}).
  double tail;
  {
    const double sw = std::sin(omega * S), cw = std::cos(omega * S);
    double osc = -sw * std::pow(S, -1.0 - alpha) / omega +
                 (1.0 + alpha) * cw * std::pow(S, -2.0 - alpha) / (omega * omega) +
                 (1.0 + alpha) * (2.0 + alpha) * sw * std::pow(S, -3.0 - alpha) /
                     (omega * omega * omega);
    tail = std::pow(S, -alpha) / alpha - osc;
  }

  return 2.0 * (series + mid + tail);
}

}  // namespace levyhom
