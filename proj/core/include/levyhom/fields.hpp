#pragma once

#include <string>
#include <vector>

namespace levyhom {

/// One control: drift b(x, alpha) = base + slope * sin(2 pi x) and running
/// cost c(alpha). The sinusoidal modulation keeps b globally Lipschitz with
/// constant 2 pi |slope|.
struct Control {
  double drift_base = 0.0;
  double drift_slope = 0.0;
  double cost = 0.0;
};

class ControlField {
 public:
  ControlField() = default;
  explicit ControlField(std::vector<Control> controls);

  int size() const { return int(controls_.size()); }
  const std::vector<Control>& controls() const { return controls_; }

  double drift(int j, double x) const;
  double cost(int j) const { return controls_[std::size_t(j)].cost; }

  double lipschitz_constant() const;  // L in |b(x,a)-b(y,a)| <= L|x-y|
  double max_cost() const;            // C in |c(a)| <= C
  double max_drift() const;           // sup over x and a of |b|

  bool has_drift() const;  // some b(x, a) not identically zero

  /// Frozen drifts beta(alpha) = b(x_hat, alpha).
  std::vector<double> frozen_drifts(double x_hat) const;

  /// 1-D approximate controllability: the frozen drifts take both signs.
  bool frozen_drifts_span_zero(double x_hat) const;

  /// Sampled Lipschitz check of b against the declared constant.
  void validate() const;

 private:
  std::vector<Control> controls_;
};

/// Diffusion coefficient a(y) = a_const + sum_j amp_j cos(2 pi freq_j y),
/// periodic on the unit torus, with a certified positive floor.
class CoefficientField {
 public:
  struct Term {
    double amplitude = 0.0;
    int freq = 1;
  };

  CoefficientField() = default;
  CoefficientField(double a_const, std::vector<Term> terms, double a_floor, double theta0 = 1.0,
                   double holder_C = -1.0);

  static CoefficientField constant(double a);

  double eval(double y) const;
  bool is_constant() const { return terms_.empty(); }
  double a0() const { return a_floor_; }
  double sup() const;
  double theta0() const { return theta0_; }
  double holder_C() const { return holder_C_; }

  /// Checks a(y) >= a0 > 0 and the sampled Hoelder bound; throws on failure.
  void validate() const;

 private:
  double a_const_ = 1.0;
  std::vector<Term> terms_;
  double a_floor_ = 1.0;
  double theta0_ = 1.0;
  double holder_C_ = 0.0;
};

}  // namespace levyhom
