#pragma once

#include <cstddef>
#include <vector>

namespace levyhom {

/// Sampled real function on either a periodic lattice (torus) or an interval
/// with Dirichlet data on an exterior collar.
///
/// Torus mode: n nodes at x_i = i * (period / n), index arithmetic wraps mod n.
///
/// Exterior mode: one cell-centered lattice x_i = left + (i + 1/2) h for
/// i in [-collar, n + collar). Indices in [0, n) are interior unknowns; the
/// rest carry prescribed data. The collar must be wide enough that every
/// far-field quadrature node of the nonlocal operator lands on data.
class GridFunction {
 public:
  GridFunction() = default;

  static GridFunction torus(int n, double period = 1.0);
  static GridFunction exterior(int n_interior, double h, double left, int collar);

  bool is_torus() const { return torus_; }
  int n() const { return n_; }
  int collar() const { return collar_; }
  double h() const { return h_; }
  double period() const { return torus_ ? h_ * n_ : 0.0; }
  double left() const { return left_; }

  /// Node coordinate. Torus: i in [0, n). Exterior: i in [-collar, n + collar).
  double node(int i) const;

  /// Torus access wraps; exterior access covers the collar.
  double at(int i) const { return vals_[index(i)]; }
  double& at(int i) { return vals_[index(i)]; }

  /// Raw storage. Torus: n entries. Exterior: n + 2*collar entries, interior
  /// block starting at offset collar().
  std::vector<double>& values() { return vals_; }
  const std::vector<double>& values() const { return vals_; }

  double sup_norm() const;           // over all stored samples
  double interior_sup_norm() const;  // over interior nodes only
  double interior_mean() const;
  double oscillation() const;        // interior max - min

  /// Checks every stored sample is finite; throws std::invalid_argument.
  void validate() const;

 private:
  std::size_t index(int i) const;

  bool torus_ = true;
  int n_ = 0;
  int collar_ = 0;
  double h_ = 0.0;
  double left_ = 0.0;
  std::vector<double> vals_;
};

/// Periodic samples on the two-torus (periods 1 x 1), row-major n1 x n2.
class TorusGrid2 {
 public:
  TorusGrid2() = default;
  TorusGrid2(int n1, int n2) : n1_(n1), n2_(n2), vals_(std::size_t(n1) * n2, 0.0) {}

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  std::size_t size() const { return vals_.size(); }
  double h1() const { return 1.0 / n1_; }
  double h2() const { return 1.0 / n2_; }

  double at(int i1, int i2) const { return vals_[wrap_index(i1, i2)]; }
  double& at(int i1, int i2) { return vals_[wrap_index(i1, i2)]; }

  std::vector<double>& values() { return vals_; }
  const std::vector<double>& values() const { return vals_; }

  /// Periodic bilinear interpolation at (y1, y2); arguments may be any reals.
  double interp(double y1, double y2) const;

  double mean() const;
  double sup_norm() const;
  double oscillation() const;

  /// Samples along the line y -> (gamma1_inv*y, gamma2_inv*y) onto a torus
  /// GridFunction with n nodes on [0, period).
  GridFunction sample_line(int n, double period, double g1_inv, double g2_inv) const;

  std::size_t wrap_index(int i1, int i2) const;

 private:
  int n1_ = 0, n2_ = 0;
  std::vector<double> vals_;
};

}  // namespace levyhom
