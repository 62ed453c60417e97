#include "levyhom/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace levyhom {

GridFunction GridFunction::torus(int n, double period) {
  if (n <= 0) throw std::invalid_argument("GridFunction::torus: n must be positive");
  if (!(period > 0.0)) throw std::invalid_argument("GridFunction::torus: period must be positive");
  GridFunction f;
  f.torus_ = true;
  f.n_ = n;
  f.h_ = period / n;
  f.vals_.assign(std::size_t(n), 0.0);
  return f;
}

GridFunction GridFunction::exterior(int n_interior, double h, double left, int collar) {
  if (n_interior <= 0) throw std::invalid_argument("GridFunction::exterior: n must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("GridFunction::exterior: h must be positive");
  if (collar < 0) throw std::invalid_argument("GridFunction::exterior: collar must be nonnegative");
  GridFunction f;
  f.torus_ = false;
  f.n_ = n_interior;
  f.h_ = h;
  f.left_ = left;
  f.collar_ = collar;
  f.vals_.assign(std::size_t(n_interior) + 2 * std::size_t(collar), 0.0);
  return f;
}

std::size_t GridFunction::index(int i) const {
  if (torus_) {
    int m = i % n_;
    if (m < 0) m += n_;
    return std::size_t(m);
  }
  if (i < -collar_ || i >= n_ + collar_)
    throw std::out_of_range("GridFunction: exterior index outside collar");
  return std::size_t(i + collar_);
}

double GridFunction::node(int i) const {
  if (torus_) {
    int m = i % n_;
    if (m < 0) m += n_;
    return m * h_;
  }
  return left_ + (i + 0.5) * h_;
}

double GridFunction::sup_norm() const {
  double s = 0.0;
  for (double v : vals_) s = std::max(s, std::abs(v));
  return s;
}

double GridFunction::interior_sup_norm() const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) s = std::max(s, std::abs(at(i)));
  return s;
}

double GridFunction::interior_mean() const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) s += at(i);
  return s / n_;
}

double GridFunction::oscillation() const {
  double lo = at(0), hi = at(0);
  for (int i = 1; i < n_; ++i) {
    lo = std::min(lo, at(i));
    hi = std::max(hi, at(i));
  }
  return hi - lo;
}

void GridFunction::validate() const {
  for (double v : vals_)
    if (!std::isfinite(v)) throw std::invalid_argument("GridFunction: non-finite sample");
}

std::size_t TorusGrid2::wrap_index(int i1, int i2) const {
  int a = i1 % n1_;
  if (a < 0) a += n1_;
  int b = i2 % n2_;
  if (b < 0) b += n2_;
  return std::size_t(a) * n2_ + b;
}

double TorusGrid2::interp(double y1, double y2) const {
  double u = (y1 - std::floor(y1)) * n1_;
  double v = (y2 - std::floor(y2)) * n2_;
  int i = int(u), j = int(v);
  double fu = u - i, fv = v - j;
  // i,j in [0, n]; wrap handles the upper edge
  double a00 = at(i, j), a01 = at(i, j + 1), a10 = at(i + 1, j), a11 = at(i + 1, j + 1);
  return (1 - fu) * ((1 - fv) * a00 + fv * a01) + fu * ((1 - fv) * a10 + fv * a11);
}

double TorusGrid2::mean() const {
  double s = 0.0;
  for (double v : vals_) s += v;
  return s / double(vals_.size());
}

double TorusGrid2::sup_norm() const {
  double s = 0.0;
  for (double v : vals_) s = std::max(s, std::abs(v));
  return s;
}

double TorusGrid2::oscillation() const {
  auto [lo, hi] = std::minmax_element(vals_.begin(), vals_.end());
  return *hi - *lo;
}

GridFunction TorusGrid2::sample_line(int n, double period, double g1_inv, double g2_inv) const {
  GridFunction f = GridFunction::torus(n, period);
  for (int i = 0; i < n; ++i) {
    double y = f.node(i);
    f.at(i) = interp(g1_inv * y, g2_inv * y);
  }
  return f;
}

}  // namespace levyhom
