#pragma once

#include <vector>

#include "levyhom/grid.hpp"

namespace levyhom {

/// Direction of the lifted jump Gz = (g1_inv*z, g2_inv*z) on the 2-torus.
/// Components are the reciprocals of the scale ratios; the ratio of the two
/// must pass the bounded-denominator non-resonance check before use.
struct LiftedDirection {
  std::vector<double> gammas_inv;

  void validate(int max_denominator = 50) const;
};

/// Quadrature realizing the compensated alpha-stable operator
///
///   I[u](x) = int [u(x+z) - u(x) - 1_{|z|<=1} z u'(x)] |z|^{-1-alpha} dz
///
/// in one dimension. The near field |z| <= nu is rewritten as a symmetric
/// second difference (the gradient compensator cancels exactly), with cell
/// weights that integrate quadratics against the measure exactly. The far
/// field nu < |z| <= far_radius is a cell sum with nodes on the lattice and
/// the exact kernel mass of each cell as weight; cell edges are placed at
/// |z| = 1 so the compensator indicator boundary is honored exactly.
///
/// On torus geometries the periodic images beyond far_radius are folded into
/// the same lattice offsets out to fold_horizon, and the mass beyond that is
/// applied as a uniform redistribution term (a jump to a uniformly random
/// node). Exterior-data geometries truncate at far_radius and the omitted
/// mass is bounded by tail_constant * sup|u|.
struct LevyKernel {
  double alpha = 0.0;
  double h = 0.0;
  double nu = 0.0;
  double far_radius = 0.0;
  double fold_horizon = 0.0;

  /// Paired second-difference weights for offsets m = 1..m_nu (|z| <= nu).
  std::vector<double> near_weights;
  /// Cell weights for offsets m = m_nu+1..m_far (nu < |z| <= far_radius).
  std::vector<double> far_weights;

  /// 4 R^{-alpha} / alpha: bound on the omitted |z| > far_radius contribution
  /// per unit sup-norm of u.
  double tail_constant = 0.0;

  int near_count() const { return int(near_weights.size()); }
  int far_count() const { return int(far_weights.size()); }

  /// Weight for lattice offset m >= 1 out to fold_horizon (closed form for
  /// folded cells beyond far_radius).
  double offset_weight(int m) const;
  int fold_count() const;

  /// One-sided kernel mass beyond the fold horizon.
  double remainder_mass() const;

  /// Bound on the error of the uniform-redistribution remainder on a torus of
  /// the given period, per unit oscillation of u.
  double fold_residual_bound(double period) const;

  /// Offset weights folded onto the residue classes 1..n-1 of an n-point torus
  /// (class 0 drops out of second differences). Used by apply_levy and by the
  /// solvers' matrix assembly.
  std::vector<double> torus_class_weights(int n) const;
};

struct KernelOptions {
  double fold_horizon = 64.0;
};

/// Builds the quadrature for stability index alpha on a lattice of spacing h.
/// Requires 0 < alpha < 2, h <= nu, far_radius >= 1.
LevyKernel build_kernel(double alpha, double h, double nu, double far_radius,
                        const KernelOptions& opts = {});

/// Applies the operator at interior nodes. Torus geometry folds the full far
/// field; exterior geometry requires a collar of width >= far_radius and
/// truncates there.
GridFunction apply_levy(const LevyKernel& kernel, const GridFunction& u);

/// Lifted application on the 2-torus: the one-dimensional jump measure pushed
/// along the line Gz, with off-lattice points evaluated by periodic bilinear
/// interpolation.
TorusGrid2 apply_levy_lifted(const LevyKernel& kernel, const TorusGrid2& w,
                             const LiftedDirection& dir);

/// Fourier multiplier of the operator on mode k: applying to cos(2 pi k y)
/// gives -sigma(alpha,k) cos(2 pi k y). Computed by adaptive quadrature of
/// 2 int_0^inf (1 - cos(2 pi k s)) s^{-1-alpha} ds, independent of any kernel
/// weights. sigma(alpha,0) = 0; increasing in k.
double analytic_symbol(double alpha, int k);

}  // namespace levyhom
