#include "levyhom/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace levyhom {

ControlField::ControlField(std::vector<Control> controls) : controls_(std::move(controls)) {
  if (controls_.empty()) throw std::invalid_argument("ControlField: empty control set");
  if (controls_.size() > 8)
    throw std::invalid_argument("ControlField: control sets larger than 8 are out of scope");
}

double ControlField::drift(int j, double x) const {
  const Control& c = controls_[std::size_t(j)];
  return c.drift_base + c.drift_slope * std::sin(2.0 * M_PI * x);
}

double ControlField::lipschitz_constant() const {
  double L = 0.0;
  for (const auto& c : controls_) L = std::max(L, 2.0 * M_PI * std::abs(c.drift_slope));
  return L;
}

double ControlField::max_cost() const {
  double C = 0.0;
  for (const auto& c : controls_) C = std::max(C, std::abs(c.cost));
  return C;
}

double ControlField::max_drift() const {
  double B = 0.0;
  for (const auto& c : controls_) B = std::max(B, std::abs(c.drift_base) + std::abs(c.drift_slope));
  return B;
}

bool ControlField::has_drift() const {
  for (const auto& c : controls_)
    if (c.drift_base != 0.0 || c.drift_slope != 0.0) return true;
  return false;
}

std::vector<double> ControlField::frozen_drifts(double x_hat) const {
  std::vector<double> b(controls_.size());
  for (int j = 0; j < size(); ++j) b[std::size_t(j)] = drift(j, x_hat);
  return b;
}

bool ControlField::frozen_drifts_span_zero(double x_hat) const {
  bool pos = false, neg = false;
  for (double b : frozen_drifts(x_hat)) {
    pos = pos || (b > 0.0);
    neg = neg || (b < 0.0);
  }
  return pos && neg;
}

void ControlField::validate() const {
  const double L = lipschitz_constant() + 1e-12;
  const int samples = 96;
  for (int j = 0; j < size(); ++j) {
    for (int i = 0; i + 1 < samples; ++i) {
      double x = double(i) / samples, y = double(i + 1) / samples;
      if (std::abs(drift(j, x) - drift(j, y)) > L * std::abs(x - y) + 1e-12)
        throw std::invalid_argument("ControlField: sampled Lipschitz bound violated");
    }
    if (!std::isfinite(cost(j))) throw std::invalid_argument("ControlField: non-finite cost");
  }
}

CoefficientField::CoefficientField(double a_const, std::vector<Term> terms, double a_floor,
                                   double theta0, double holder_C)
    : a_const_(a_const), terms_(std::move(terms)), a_floor_(a_floor), theta0_(theta0) {
  if (!(theta0_ > 0.0) || theta0_ > 1.0)
    throw std::invalid_argument("CoefficientField: theta0 must lie in (0, 1]");
  if (holder_C >= 0.0) {
    holder_C_ = holder_C;
  } else {
    double c = 0.0;
    for (const auto& t : terms_) c += std::abs(t.amplitude) * 2.0 * M_PI * std::abs(double(t.freq));
    holder_C_ = c;
  }
}

CoefficientField CoefficientField::constant(double a) { return CoefficientField(a, {}, a); }

double CoefficientField::eval(double y) const {
  double a = a_const_;
  for (const auto& t : terms_) a += t.amplitude * std::cos(2.0 * M_PI * t.freq * y);
  return a;
}

double CoefficientField::sup() const {
  double s = a_const_;
  for (const auto& t : terms_) s += std::abs(t.amplitude);
  return s;
}

void CoefficientField::validate() const {
  if (!(a_floor_ > 0.0))
    throw std::invalid_argument("CoefficientField: the lower bound a0 must be positive");
  const int samples = 512;
  for (int i = 0; i < samples; ++i) {
    double y = double(i) / samples;
    if (eval(y) < a_floor_ - 1e-12)
      throw std::invalid_argument("CoefficientField: a(y) drops below the declared floor a0");
  }
  for (int i = 0; i < samples; ++i) {
    double y = double(i) / samples, yp = double(i + 7) / samples;
    double bound = holder_C_ * std::pow(std::abs(y - yp), theta0_) + 1e-12;
    if (std::abs(eval(y) - eval(yp)) > bound)
      throw std::invalid_argument("CoefficientField: sampled Hoelder bound violated");
  }
}

}  // namespace levyhom
