#include "levyhom/table.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace levyhom {

namespace {

void require_sorted(const std::vector<double>& g, const char* axis) {
  if (g.empty()) throw std::invalid_argument(std::string("table axis empty: ") + axis);
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1]))
      throw std::invalid_argument(std::string("table axis not strictly increasing: ") + axis);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

EffectiveOperatorTable::EffectiveOperatorTable(std::vector<double> x_grid,
                                               std::vector<double> p_grid,
                                               std::vector<double> I_grid, double a0)
    : xs_(std::move(x_grid)), ps_(std::move(p_grid)), Is_(std::move(I_grid)), a0_(a0) {
  require_sorted(xs_, "x");
  require_sorted(ps_, "p");
  require_sorted(Is_, "I");
  values_.assign(xs_.size() * ps_.size() * Is_.size(), 0.0);
  unc_.assign(values_.size(), 0.0);
}

std::size_t EffectiveOperatorTable::flat(int ix, int ip, int iI) const {
  return (std::size_t(ix) * ps_.size() + std::size_t(ip)) * Is_.size() + std::size_t(iI);
}

int EffectiveOperatorTable::locate(const std::vector<double>& g, double v, const char* axis) {
  const double span = std::max(1.0, std::abs(g.back()) + std::abs(g.front()));
  if (v < g.front() - 1e-12 * span || v > g.back() + 1e-12 * span) {
    std::ostringstream os;
    os << "table query outside the box on axis " << axis << ": " << v << " not in ["
       << g.front() << ", " << g.back() << "]";
    throw std::out_of_range(os.str());
  }
  if (g.size() == 1) return 0;
  auto it = std::upper_bound(g.begin(), g.end(), v);
  int i = int(it - g.begin()) - 1;
  return std::clamp(i, 0, int(g.size()) - 2);
}

double EffectiveOperatorTable::query(double x, double p, double I) const {
  const int ix = locate(xs_, x, "x");
  const int ip = locate(ps_, p, "p");
  const int iI = locate(Is_, I, "I");
  auto frac = [](const std::vector<double>& g, int i, double v) {
    if (g.size() == 1) return 0.0;
    return std::clamp((v - g[std::size_t(i)]) / (g[std::size_t(i) + 1] - g[std::size_t(i)]), 0.0,
                      1.0);
  };
  const double fx = frac(xs_, ix, x), fp = frac(ps_, ip, p), fI = frac(Is_, iI, I);
  const int dx = xs_.size() > 1 ? 1 : 0;
  const int dp = ps_.size() > 1 ? 1 : 0;
  const int dI = Is_.size() > 1 ? 1 : 0;

  double acc = 0.0;
  for (int cx = 0; cx <= dx; ++cx)
    for (int cp = 0; cp <= dp; ++cp)
      for (int cI = 0; cI <= dI; ++cI) {
        const double wx = dx ? (cx ? fx : 1.0 - fx) : 1.0;
        const double wp = dp ? (cp ? fp : 1.0 - fp) : 1.0;
        const double wI = dI ? (cI ? fI : 1.0 - fI) : 1.0;
        acc += wx * wp * wI * value(ix + cx, ip + cp, iI + cI);
      }
  return acc;
}

double EffectiveOperatorTable::max_abs_slope_p() const {
  if (ps_.size() < 2) return 0.0;
  double s = 0.0;
  for (std::size_t ix = 0; ix < xs_.size(); ++ix)
    for (std::size_t ip = 0; ip + 1 < ps_.size(); ++ip)
      for (std::size_t iI = 0; iI < Is_.size(); ++iI)
        s = std::max(s, std::abs(value(int(ix), int(ip) + 1, int(iI)) -
                                 value(int(ix), int(ip), int(iI))) /
                            (ps_[ip + 1] - ps_[ip]));
  return s;
}

double EffectiveOperatorTable::max_abs_slope_I() const {
  if (Is_.size() < 2) return 0.0;
  double s = 0.0;
  for (std::size_t ix = 0; ix < xs_.size(); ++ix)
    for (std::size_t ip = 0; ip < ps_.size(); ++ip)
      for (std::size_t iI = 0; iI + 1 < Is_.size(); ++iI)
        s = std::max(s, std::abs(value(int(ix), int(ip), int(iI) + 1) -
                                 value(int(ix), int(ip), int(iI))) /
                            (Is_[iI + 1] - Is_[iI]));
  return s;
}

double EffectiveOperatorTable::max_I_quotient() const {
  if (Is_.size() < 2) return 0.0;
  double s = -std::numeric_limits<double>::infinity();
  for (std::size_t ix = 0; ix < xs_.size(); ++ix)
    for (std::size_t ip = 0; ip < ps_.size(); ++ip)
      for (std::size_t i = 0; i < Is_.size(); ++i)
        for (std::size_t j = i + 1; j < Is_.size(); ++j)
          s = std::max(s, (value(int(ix), int(ip), int(j)) - value(int(ix), int(ip), int(i))) /
                              (Is_[j] - Is_[i]));
  return s;
}

void EffectiveOperatorTable::write_csv(std::ostream& os) const {
  os << "# a0 = " << fmt17(a0_) << "\n";
  os << "x,p,I,value,uncertainty\n";
  for (std::size_t ix = 0; ix < xs_.size(); ++ix)
    for (std::size_t ip = 0; ip < ps_.size(); ++ip)
      for (std::size_t iI = 0; iI < Is_.size(); ++iI)
        os << fmt17(xs_[ix]) << "," << fmt17(ps_[ip]) << "," << fmt17(Is_[iI]) << ","
           << fmt17(value(int(ix), int(ip), int(iI))) << ","
           << fmt17(uncertainty(int(ix), int(ip), int(iI))) << "\n";
}

EffectiveOperatorTable EffectiveOperatorTable::read_csv(std::istream& is) {
  std::string line;
  double a0 = 0.0;
  if (!std::getline(is, line) || line.rfind("# a0 =", 0) != 0)
    throw std::invalid_argument("table csv: missing a0 header");
  a0 = std::stod(line.substr(6));
  if (!std::getline(is, line) || line != "x,p,I,value,uncertainty")
    throw std::invalid_argument("table csv: bad column header");

  struct Row {
    double x, p, I, v, u;
  };
  std::vector<Row> rows;
  std::set<double> xs, ps, Is;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    Row r{};
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    if (!(ls >> r.x >> r.p >> r.I >> r.v >> r.u))
      throw std::invalid_argument("table csv: malformed row: " + line);
    rows.push_back(r);
    xs.insert(r.x);
    ps.insert(r.p);
    Is.insert(r.I);
  }
  EffectiveOperatorTable t(std::vector<double>(xs.begin(), xs.end()),
                           std::vector<double>(ps.begin(), ps.end()),
                           std::vector<double>(Is.begin(), Is.end()), a0);
  if (rows.size() != t.values_.size())
    throw std::invalid_argument("table csv: row count does not fill the box");
  for (const Row& r : rows) {
    const int ix = int(std::lower_bound(t.xs_.begin(), t.xs_.end(), r.x) - t.xs_.begin());
    const int ip = int(std::lower_bound(t.ps_.begin(), t.ps_.end(), r.p) - t.ps_.begin());
    const int iI = int(std::lower_bound(t.Is_.begin(), t.Is_.end(), r.I) - t.Is_.begin());
    t.value(ix, ip, iI) = r.v;
    t.uncertainty(ix, ip, iI) = r.u;
  }
  return t;
}

void EffectiveOperatorTable::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write table: " + path);
  write_csv(os);
}

EffectiveOperatorTable EffectiveOperatorTable::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read table: " + path);
  return read_csv(is);
}

SubellipticityReport check_subellipticity(const EffectiveOperatorTable& t, double slack) {
  SubellipticityReport rep;
  const auto& Is = t.I_grid();
  if (Is.size() < 2) throw std::invalid_argument("check_subellipticity: need >= 2 I samples");
  rep.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t ix = 0; ix < t.x_grid().size(); ++ix) {
    for (std::size_t ip = 0; ip < t.p_grid().size(); ++ip) {
      for (std::size_t i = 0; i < Is.size(); ++i) {
        for (std::size_t j = i + 1; j < Is.size(); ++j) {
          const double dI = Is[j] - Is[i];
          const double quot =
              (t.value(int(ix), int(ip), int(j)) - t.value(int(ix), int(ip), int(i))) / dI;
          const double unc = 2.0 * (t.uncertainty(int(ix), int(ip), int(i)) +
                                    t.uncertainty(int(ix), int(ip), int(j))) /
                             dI;
          const double margin = quot + t.a0() - unc;
          if (margin > rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_entry = {int(ix), int(ip), int(i), int(j)};
          }
        }
      }
    }
  }
  rep.pass = rep.worst_margin <= slack;
  std::ostringstream os;
  os << (rep.pass ? "subelliptic with margin " : "violated by margin ") << rep.worst_margin
     << " at (ix=" << rep.worst_entry[0] << ", ip=" << rep.worst_entry[1]
     << ", iI=" << rep.worst_entry[2] << "->" << rep.worst_entry[3] << ")";
  rep.detail = os.str();
  return rep;
}

ContinuityReport check_continuity(const EffectiveOperatorTable& t) {
  ContinuityReport rep;
  auto consider = [&](int axis, double jump, double unc) {
    rep.max_jump[std::size_t(axis)] = std::max(rep.max_jump[std::size_t(axis)], jump);
    if (jump > 10.0 * (unc + 1e-15)) rep.suspect = true;
  };
  const int nx = int(t.x_grid().size()), np = int(t.p_grid().size()), nI = int(t.I_grid().size());
  for (int ix = 0; ix < nx; ++ix)
    for (int ip = 0; ip < np; ++ip)
      for (int iI = 0; iI < nI; ++iI) {
        if (ix + 1 < nx)
          consider(0, std::abs(t.value(ix + 1, ip, iI) - t.value(ix, ip, iI)),
                   t.uncertainty(ix, ip, iI) + t.uncertainty(ix + 1, ip, iI));
        if (ip + 1 < np)
          consider(1, std::abs(t.value(ix, ip + 1, iI) - t.value(ix, ip, iI)),
                   t.uncertainty(ix, ip, iI) + t.uncertainty(ix, ip + 1, iI));
        if (iI + 1 < nI)
          consider(2, std::abs(t.value(ix, ip, iI + 1) - t.value(ix, ip, iI)),
                   t.uncertainty(ix, ip, iI) + t.uncertainty(ix, ip, iI + 1));
      }
  std::ostringstream os;
  os << "max adjacent jumps: x " << rep.max_jump[0] << ", p " << rep.max_jump[1] << ", I "
     << rep.max_jump[2] << (rep.suspect ? " (suspect vs local uncertainty; heuristic only)" : "");
  rep.detail = os.str();
  return rep;
}

TabulateResult tabulate(const CellEvaluator& eval, std::vector<double> x_grid,
                        std::vector<double> p_grid, std::vector<double> I_grid, double a0,
                        int workers) {
  TabulateResult out{EffectiveOperatorTable(std::move(x_grid), std::move(p_grid),
                                            std::move(I_grid), a0),
                     true,
                     {}};
  EffectiveOperatorTable& t = out.table;
  const int nx = int(t.x_grid().size()), np = int(t.p_grid().size()), nI = int(t.I_grid().size());
  const int total = nx * np * nI;

  std::vector<CellSample> samples(static_cast<std::size_t>(total));
  std::atomic<int> cursor{0};
  auto work = [&]() {
    for (;;) {
      const int k = cursor.fetch_add(1);
      if (k >= total) return;
      const int ix = k / (np * nI);
      const int ip = (k / nI) % np;
      const int iI = k % nI;
      samples[std::size_t(k)] =
          eval(t.x_grid()[std::size_t(ix)], t.p_grid()[std::size_t(ip)],
               t.I_grid()[std::size_t(iI)]);
    }
  };
  const int nthreads = std::max(1, workers);
  if (nthreads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  for (int k = 0; k < total; ++k) {
    const int ix = k / (np * nI);
    const int ip = (k / nI) % np;
    const int iI = k % nI;
    const CellSample& s = samples[std::size_t(k)];
    t.value(ix, ip, iI) = s.value;
    t.uncertainty(ix, ip, iI) = s.uncertainty;
    if (!s.ok) {
      out.complete = false;
      out.failed_cells.push_back({ix, ip, iI});
    }
  }
  return out;
}

}  // namespace levyhom
