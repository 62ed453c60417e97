#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace levyhom {

/// One report of the bounded-denominator rational-relation search. The
/// certificate is finite: it rules out integer relations with coefficients up
/// to the stated bound, it does not prove irrationality.
struct NonresonanceReport {
  bool pass = false;
  int coefficient_bound = 0;
  std::vector<long long> witness;  // nontrivial relation when pass == false
  double residual = 0.0;
  std::string summary;
};

/// Searches for integer relations sum_i n_i * values_i = 0 with
/// |n_i| <= max_denominator, forbidding the all-zero combination. Passes when
/// only the trivial combination annihilates within 1e-12 relative tolerance.
NonresonanceReport check_nonresonance(const std::vector<double>& values, int max_denominator);

struct OrbitDensityResult {
  bool covered = false;
  double covering_time = 0.0;
  double fraction = 0.0;
  int cells_total = 0;
  int cells_visited = 0;
  std::string note;
};

/// Smallest T <= t_max for which the orbit {(t, gamma^{-1} t) mod 1} is
/// delta-dense in the 2-torus (every cell of a delta-mesh visited). A gamma
/// failing the bounded non-resonance check fails immediately with the
/// rational witness.
OrbitDensityResult orbit_density(double gamma, double delta, double t_max);

/// amplitude * prod_f cos(2 pi k_f * ybar_{scale_f} + phase_f)
struct ForcingTerm {
  struct Factor {
    int scale_index = 1;  // 1-based index into the scale vector
    int k = 1;
    double phase = 0.0;
  };
  double amplitude = 0.0;
  std::vector<Factor> factors;
};

/// Quasi-periodic forcing g_M(y/gamma_1, ..., y/gamma_M) built from
/// trigonometric terms at rationally independent scales, or an almost
/// periodic target represented by a summable trigonometric series together
/// with its truncations. Scales are stored as the ratios gamma_i = eps_i/eps_1
/// (gamma_1 = 1) so that x/eps_i = (x/eps_1)/gamma_i holds exactly in the
/// evaluator.
class MultiscaleForcing {
 public:
  enum class Mode { QuasiPeriodic, AlmostPeriodic };

  MultiscaleForcing() = default;
  MultiscaleForcing(Mode mode, std::vector<double> gammas, std::vector<ForcingTerm> terms,
                    double theta0 = 1.0);

  Mode mode() const { return mode_; }
  int num_scales() const { return int(gammas_.size()); }
  const std::vector<double>& gammas() const { return gammas_; }
  double gamma_inv(int i) const { return inv_gammas_[std::size_t(i)]; }
  const std::vector<ForcingTerm>& terms() const { return terms_; }

  double theta0() const { return theta0_; }
  /// Componentwise Hoelder (Lipschitz when theta0 = 1) constant of g_M.
  double holder_constant() const;

  /// g_M evaluated at a point of the M-torus.
  double eval_lifted(const std::vector<double>& ybar) const;
  double eval_lifted2(double y1, double y2) const;

  /// g_M(gamma_1^{-1} y, ..., gamma_M^{-1} y): the forcing seen along the line.
  double eval_line(double y) const;

  /// g_M(x/eps_1, ..., x/eps_M) with eps_i = gamma_i * eps1. Every argument is
  /// reduced mod 1 at full precision before entering the cosine.
  double eval_scaled(double x, double eps1) const;

  double sup_bound() const;  // sum of |amplitudes|

  /// Keeps the terms supported on the first M scales. The dropped sup-norm
  /// mass c_M is the sum of the dropped |amplitudes|.
  MultiscaleForcing truncate(int M) const;
  double truncation_error(int M) const;  // c_M

  /// Bounded non-resonance of the scale vector plus sampled componentwise
  /// Hoelder checks; throws std::invalid_argument on failure. A negative
  /// max_denominator picks a bound that keeps the exhaustive search near 1e6
  /// combinations for the vector's length.
  void validate(int max_denominator = -1) const;

 private:
  Mode mode_ = Mode::QuasiPeriodic;
  std::vector<double> gammas_;      // gamma_1 = 1 required
  std::vector<double> inv_gammas_;  // 1/gamma_i
  std::vector<ForcingTerm> terms_;
  double theta0_ = 1.0;
};

struct TrigTruncation {
  MultiscaleForcing g_M;
  double c_M = 0.0;
};

/// Lemma-B style truncation of a summable trigonometric series: keeps the
/// first M frequency groups (scales) and reports the sup-norm tail bound.
TrigTruncation build_trig_truncation(const MultiscaleForcing& series, int M);

}  // namespace levyhom
