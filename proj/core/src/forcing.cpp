#include "levyhom/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace levyhom {

namespace {

double reduce_mod1(double t) { return t - std::floor(t); }

void search_relations(const std::vector<double>& values, int bound, std::size_t pos,
                      std::vector<long long>& coeffs, double partial, double scale,
                      NonresonanceReport& rep) {
  if (!rep.pass) return;
  if (pos == values.size()) {
    bool trivial = std::all_of(coeffs.begin(), coeffs.end(), [](long long c) { return c == 0; });
    if (trivial) return;
    if (std::abs(partial) <= 1e-12 * scale) {
      rep.pass = false;
      rep.witness = coeffs;
      rep.residual = std::abs(partial);
    }
    return;
  }
  for (long long c = -bound; c <= bound; ++c) {
    coeffs[pos] = c;
    search_relations(values, bound, pos + 1, coeffs, partial + double(c) * values[pos],
                     scale + std::abs(double(c) * values[pos]), rep);
    if (!rep.pass) return;
  }
  coeffs[pos] = 0;
}

}  // namespace

NonresonanceReport check_nonresonance(const std::vector<double>& values, int max_denominator) {
  if (values.empty()) throw std::invalid_argument("check_nonresonance: empty value vector");
  if (max_denominator < 2)
    throw std::invalid_argument("check_nonresonance: max_denominator must be >= 2");
  for (double v : values)
    if (!(std::abs(v) > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("check_nonresonance: values must be nonzero finite");

  NonresonanceReport rep;
  rep.pass = true;
  rep.coefficient_bound = max_denominator;
  std::vector<long long> coeffs(values.size(), 0);
  search_relations(values, max_denominator, 0, coeffs, 0.0, 0.0, rep);

  std::ostringstream os;
  if (rep.pass) {
    os << "no integer relation with |coefficients| <= " << max_denominator
       << " annihilates the values (finite certificate, not a proof of irrationality)";
  } else {
    os << "relation found:";
    for (std::size_t i = 0; i < rep.witness.size(); ++i) os << " " << rep.witness[i];
    os << " (residual " << rep.residual << ")";
  }
  rep.summary = os.str();
  return rep;
}

OrbitDensityResult orbit_density(double gamma, double delta, double t_max) {
  if (!(delta > 0.0) || !(delta < 0.5))
    throw std::invalid_argument("orbit_density: delta must lie in (0, 1/2)");
  if (!(t_max > 0.0)) throw std::invalid_argument("orbit_density: t_max must be positive");

  OrbitDensityResult res;
  const int mesh = int(std::ceil(1.0 / delta));
  res.cells_total = mesh * mesh;

  auto nr = check_nonresonance({1.0, gamma}, 64);
  if (!nr.pass) {
    res.covered = false;
    res.note = "gamma is rational within the search bound; orbit is a closed line: " + nr.summary;
    return res;
  }

  const double ginv = 1.0 / gamma;
  const double speed = std::max(1.0, std::abs(ginv));
  const double dt = delta / (4.0 * speed);

  std::vector<char> visited(std::size_t(res.cells_total), 0);
  int count = 0;
  for (double t = 0.0; t <= t_max; t += dt) {
    double y1 = reduce_mod1(t);
    double y2 = reduce_mod1(ginv * t);
    int c1 = std::min(mesh - 1, int(y1 * mesh));
    int c2 = std::min(mesh - 1, int(y2 * mesh));
    char& cell = visited[std::size_t(c1) * mesh + c2];
    if (!cell) {
      cell = 1;
      if (++count == res.cells_total) {
        res.covered = true;
        res.covering_time = t;
        res.cells_visited = count;
        res.fraction = 1.0;
        res.note = "orbit is delta-dense";
        return res;
      }
    }
  }
  res.covered = false;
  res.cells_visited = count;
  res.fraction = double(count) / res.cells_total;
  res.note = "t_max reached before covering the mesh";
  return res;
}

MultiscaleForcing::MultiscaleForcing(Mode mode, std::vector<double> gammas,
                                     std::vector<ForcingTerm> terms, double theta0)
    : mode_(mode), gammas_(std::move(gammas)), terms_(std::move(terms)), theta0_(theta0) {
  if (gammas_.empty()) throw std::invalid_argument("MultiscaleForcing: empty scale vector");
  if (std::abs(gammas_[0] - 1.0) > 1e-15)
    throw std::invalid_argument("MultiscaleForcing: gamma_1 must equal 1");
  inv_gammas_.resize(gammas_.size());
  for (std::size_t i = 0; i < gammas_.size(); ++i) {
    if (!(gammas_[i] > 0.0))
      throw std::invalid_argument("MultiscaleForcing: scale ratios must be positive");
    inv_gammas_[i] = 1.0 / gammas_[i];
  }
  for (const auto& t : terms_)
    for (const auto& f : t.factors)
      if (f.scale_index < 1 || f.scale_index > int(gammas_.size()))
        throw std::invalid_argument("MultiscaleForcing: term references an unknown scale");
}

double MultiscaleForcing::holder_constant() const {
  // Componentwise: each factor is 2 pi k - Lipschitz, the other factors are
  // bounded by one.
  double c = 0.0;
  for (const auto& t : terms_)
    for (const auto& f : t.factors)
      c = std::max(c, std::abs(t.amplitude) * 2.0 * M_PI * std::abs(double(f.k)));
  return c;
}

double MultiscaleForcing::eval_lifted(const std::vector<double>& ybar) const {
  if (int(ybar.size()) != num_scales())
    throw std::invalid_argument("MultiscaleForcing: point dimension mismatch");
  double g = 0.0;
  for (const auto& t : terms_) {
    double prod = t.amplitude;
    for (const auto& f : t.factors) {
      double y = reduce_mod1(ybar[std::size_t(f.scale_index - 1)]);
      prod *= std::cos(2.0 * M_PI * f.k * y + f.phase);
    }
    g += prod;
  }
  return g;
}

double MultiscaleForcing::eval_lifted2(double y1, double y2) const {
  if (num_scales() == 1) return eval_lifted({y1});
  return eval_lifted({y1, y2});
}

double MultiscaleForcing::eval_line(double y) const { return eval_scaled(y, 1.0); }

double MultiscaleForcing::eval_scaled(double x, double eps1) const {
  const double t = x / eps1;
  double g = 0.0;
  for (const auto& tm : terms_) {
    double prod = tm.amplitude;
    for (const auto& f : tm.factors) {
      double arg = reduce_mod1(t * inv_gammas_[std::size_t(f.scale_index - 1)]);
      prod *= std::cos(2.0 * M_PI * f.k * arg + f.phase);
    }
    g += prod;
  }
  return g;
}

double MultiscaleForcing::sup_bound() const {
  double s = 0.0;
  for (const auto& t : terms_) s += std::abs(t.amplitude);
  return s;
}

MultiscaleForcing MultiscaleForcing::truncate(int M) const {
  if (M < 1) throw std::invalid_argument("MultiscaleForcing::truncate: M must be >= 1");
  const int keep = std::min(M, num_scales());
  std::vector<double> g(gammas_.begin(), gammas_.begin() + keep);
  std::vector<ForcingTerm> kept;
  for (const auto& t : terms_) {
    bool inside = true;
    for (const auto& f : t.factors) inside = inside && (f.scale_index <= keep);
    if (inside) kept.push_back(t);
  }
  return MultiscaleForcing(Mode::QuasiPeriodic, std::move(g), std::move(kept), theta0_);
}

double MultiscaleForcing::truncation_error(int M) const {
  double c = 0.0;
  for (const auto& t : terms_) {
    bool dropped = false;
    for (const auto& f : t.factors) dropped = dropped || (f.scale_index > M);
    if (dropped) c += std::abs(t.amplitude);
  }
  return c;
}

void MultiscaleForcing::validate(int max_denominator) const {
  if (num_scales() > 1) {
    int bound = max_denominator;
    if (bound < 0) {
      // Keep the exhaustive search near 1e6 combinations.
      bound = std::max(2, int(std::pow(1e6, 1.0 / num_scales()) / 2.0));
    }
    auto rep = check_nonresonance(gammas_, bound);
    if (!rep.pass)
      throw std::invalid_argument("MultiscaleForcing: scale vector resonant: " + rep.summary);
  }
  // Sampled componentwise Hoelder check against the declared constant.
  const double C = holder_constant() * double(std::max<std::size_t>(terms_.size(), 1));
  const int samples = 64;
  std::vector<double> base(std::size_t(num_scales()), 0.3);
  for (int comp = 0; comp < num_scales(); ++comp) {
    for (int i = 0; i < samples; ++i) {
      for (int j = i + 1; j < samples; ++j) {
        auto p = base;
        auto q = base;
        p[std::size_t(comp)] = double(i) / samples;
        q[std::size_t(comp)] = double(j) / samples;
        double dy = std::abs(p[std::size_t(comp)] - q[std::size_t(comp)]);
        double dg = std::abs(eval_lifted(p) - eval_lifted(q));
        if (dg > C * std::pow(dy, theta0_) + 1e-9)
          throw std::invalid_argument(
              "MultiscaleForcing: sampled Hoelder bound violated in component " +
              std::to_string(comp + 1));
      }
    }
  }
}

TrigTruncation build_trig_truncation(const MultiscaleForcing& series, int M) {
  if (!std::isfinite(series.sup_bound()))
    throw std::invalid_argument("build_trig_truncation: coefficients not summable");
  TrigTruncation t{series.truncate(M), series.truncation_error(M)};
  return t;
}

}  // namespace levyhom
