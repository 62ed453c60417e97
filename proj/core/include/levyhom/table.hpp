#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace levyhom {

/// Sampled effective operator I(x, p, I) = -d_{x,p,I} on a box grid with
/// trilinear interpolated queries. Axes with a single sample are treated as
/// constant. Every sample carries the uncertainty reported by the cell solve.
class EffectiveOperatorTable {
 public:
  EffectiveOperatorTable() = default;
  EffectiveOperatorTable(std::vector<double> x_grid, std::vector<double> p_grid,
                         std::vector<double> I_grid, double a0);

  const std::vector<double>& x_grid() const { return xs_; }
  const std::vector<double>& p_grid() const { return ps_; }
  const std::vector<double>& I_grid() const { return Is_; }
  double a0() const { return a0_; }

  double& value(int ix, int ip, int iI) { return values_[flat(ix, ip, iI)]; }
  double value(int ix, int ip, int iI) const { return values_[flat(ix, ip, iI)]; }
  double& uncertainty(int ix, int ip, int iI) { return unc_[flat(ix, ip, iI)]; }
  double uncertainty(int ix, int ip, int iI) const { return unc_[flat(ix, ip, iI)]; }

  /// Trilinear interpolation; exact at samples. Queries outside the box throw
  /// std::out_of_range naming the offending coordinate (no extrapolation).
  double query(double x, double p, double I) const;

  /// Largest interpolated-slope magnitudes, from grid difference quotients.
  double max_abs_slope_p() const;
  double max_abs_slope_I() const;
  /// Least-negative I-fiber difference quotient (should be <= -a0).
  double max_I_quotient() const;

  void write_csv(std::ostream& os) const;
  static EffectiveOperatorTable read_csv(std::istream& is);
  void save(const std::string& path) const;
  static EffectiveOperatorTable load(const std::string& path);

 private:
  std::size_t flat(int ix, int ip, int iI) const;
  static int locate(const std::vector<double>& g, double v, const char* axis);

  std::vector<double> xs_, ps_, Is_;
  std::vector<double> values_, unc_;
  double a0_ = 0.0;
};

struct SubellipticityReport {
  bool pass = false;
  double worst_margin = 0.0;  // max over fibers of quotient + a0 - slack; <= 0 passes
  std::array<int, 4> worst_entry{};  // ix, ip, iI_low, iI_high
  std::string detail;
};

/// Verifies I(x,p,I+I') <= I(x,p,I) - a0 I' + slack on every (x,p) fiber and
/// every ordered pair of I samples.
SubellipticityReport check_subellipticity(const EffectiveOperatorTable& t, double slack);

struct ContinuityReport {
  std::array<double, 3> max_jump{};  // per axis: x, p, I
  bool suspect = false;
  std::string detail;
};

/// Heuristic smell test: flags adjacent-sample jumps exceeding ten times the
/// local uncertainty. Continuity carries no modulus, so this is not a theorem
/// check.
ContinuityReport check_continuity(const EffectiveOperatorTable& t);

/// One tabulation sample produced by a cell-problem solve.
struct CellSample {
  double value = 0.0;        // I = -d
  double uncertainty = 0.0;  // oscillation + tail budget from the cell solve
  bool ok = false;           // false when the cell was flagged non-ergodic
};

using CellEvaluator = std::function<CellSample(double x, double p, double I)>;

struct TabulateResult {
  EffectiveOperatorTable table;
  bool complete = false;
  std::vector<std::array<int, 3>> failed_cells;
};

/// Fills the box grid by independent cell solves, parallel over samples up to
/// `workers` threads; assembly order is deterministic. A flagged cell marks
/// the table partial and records the failing indices.
TabulateResult tabulate(const CellEvaluator& eval, std::vector<double> x_grid,
                        std::vector<double> p_grid, std::vector<double> I_grid, double a0,
                        int workers = 1);

}  // namespace levyhom
