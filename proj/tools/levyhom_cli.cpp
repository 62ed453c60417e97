// Command-line front end for the homogenization pipeline: eps-sweeps, cell
// problems, effective-operator tabulation, the limit solve, and the
// structural property suites. Configuration comes from a flat key-value file;
// outputs are CSV. Exit codes: 0 pass, 1 property or solver failure,
// 2 validation error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "levyhom/study.hpp"

namespace fs = std::filesystem;
using namespace levyhom;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int workers = -1;
};

StudyConfig load_config(const CommonArgs& args) {
  StudyConfig cfg = StudyConfig::from_config(Config::parse_file(args.config_path));
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.seed >= 0) cfg.seed = std::uint64_t(args.seed);
  if (args.workers > 0) cfg.workers = args.workers;
  fs::create_directories(cfg.out_dir);
  return cfg;
}

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "configuration file")->required();
  sub->add_option("--out", args.out_dir, "output directory (overrides config)");
  sub->add_option("--seed", args.seed, "rng seed (overrides config)");
  sub->add_option("--workers", args.workers, "worker threads (overrides config)");
}

void write_file(const fs::path& p, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  body(os);
}

int cmd_solve_eps(const CommonArgs& args) {
  StudyConfig cfg = load_config(args);
  cfg.validate();
  for (double eps1 : cfg.eps_schedule) {
    SolveDiagnostics diag;
    GridFunction u = study_solve_eps(cfg, eps1, &diag);
    std::ostringstream name;
    name << "solution_eps_" << eps1 << ".csv";
    write_file(fs::path(cfg.out_dir) / name.str(),
               [&](std::ostream& os) { write_solution_csv(os, u); });
    std::ostringstream rname;
    rname << "residuals_eps_" << eps1 << ".csv";
    write_file(fs::path(cfg.out_dir) / rname.str(), [&](std::ostream& os) {
      os << "iteration,residual\n";
      for (std::size_t k = 0; k < diag.residual_history.size(); ++k)
        os << k << "," << diag.residual_history[k] << "\n";
    });
    std::cout << "eps1 = " << eps1 << ": solved, residual " << diag.residual << ", tail bound "
              << diag.tail_bound << "\n";
  }
  return 0;
}

int cmd_solve_cell(const CommonArgs& args) {
  StudyConfig cfg = load_config(args);
  cfg.validate();
  CellFamily fam = cfg.cell_family();
  CellProblemSpec spec = make_cell_spec(fam, cfg.cell_x, cfg.cell_p, cfg.cell_I);
  ErgodicResult res = ergodic_constant(spec, cfg.lambda_schedule, cfg.solver_tol);
  write_file(fs::path(cfg.out_dir) / "lambda_trace.csv",
             [&](std::ostream& os) { write_trace_csv(os, res); });
  write_file(fs::path(cfg.out_dir) / "corrector.csv",
             [&](std::ostream& os) { write_solution_csv(os, res.corrector); });
  std::cout << "d = " << res.d << " (extrapolated " << res.d_extrapolated << "), uncertainty "
            << res.uncertainty << ", holder quotient " << res.holder_quotient
            << (res.ergodic ? "" : "  [FLAGGED non-ergodic]") << "\n";
  if (!res.controllability_ok)
    std::cout << "warning: case-I controllability (sign-spanning drift) not verified\n";
  return res.ergodic ? 0 : 1;
}

int cmd_tabulate(const CommonArgs& args) {
  StudyConfig cfg = load_config(args);
  cfg.validate();
  TabulateResult tr = study_tabulate(cfg);
  tr.table.save((fs::path(cfg.out_dir) / "effective_table.csv").string());
  std::cout << "table " << tr.table.x_grid().size() << " x " << tr.table.p_grid().size() << " x "
            << tr.table.I_grid().size() << " written";
  if (!tr.complete) {
    std::cout << "  [PARTIAL: " << tr.failed_cells.size() << " non-ergodic cells]";
    for (const auto& c : tr.failed_cells)
      std::cout << " (" << c[0] << "," << c[1] << "," << c[2] << ")";
  }
  std::cout << "\n";
  return tr.complete ? 0 : 1;
}

int cmd_solve_effective(const CommonArgs& args) {
  StudyConfig cfg = load_config(args);
  cfg.validate();
  EffectiveOperatorTable table;
  if (!cfg.table_file.empty()) {
    table = EffectiveOperatorTable::load(cfg.table_file);
  } else {
    fs::path p = fs::path(cfg.out_dir) / "effective_table.csv";
    if (fs::exists(p)) {
      table = EffectiveOperatorTable::load(p.string());
    } else {
      TabulateResult tr = study_tabulate(cfg);
      if (!tr.complete) throw std::runtime_error("tabulation flagged non-ergodic cells");
      table = std::move(tr.table);
      table.save(p.string());
    }
  }
  SolveDiagnostics diag;
  GridFunction ubar = study_solve_effective(cfg, table, &diag);
  write_file(fs::path(cfg.out_dir) / "solution_effective.csv",
             [&](std::ostream& os) { write_solution_csv(os, ubar); });
  std::cout << "effective equation solved, residual " << diag.residual << ", tail bound "
            << diag.tail_bound << "\n";
  return 0;
}

int cmd_homogenize(const CommonArgs& args) {
  StudyConfig cfg = load_config(args);
  ConvergenceReport rep = run_homogenization_study(cfg);
  write_file(fs::path(cfg.out_dir) / "report.csv",
             [&](std::ostream& os) { rep.write_csv(os, false); });
  write_file(fs::path(cfg.out_dir) / "timings.csv",
             [&](std::ostream& os) { rep.write_timing_csv(os); });
  for (const auto& r : rep.rows)
    std::cout << "eps1 = " << r.eps1 << ": sup err " << r.sup_err << ", interior err "
              << r.interior_err << "\n";
  std::cout << (rep.pass ? "PASS: " : "FAIL: ") << rep.note << "\n";
  return rep.pass ? 0 : 1;
}

int cmd_almost(const CommonArgs& args) {
  StudyConfig cfg = load_config(args);
  ConvergenceReport rep = run_almost_periodic_study(cfg);
  write_file(fs::path(cfg.out_dir) / "report.csv",
             [&](std::ostream& os) { rep.write_csv(os, true); });
  write_file(fs::path(cfg.out_dir) / "timings.csv",
             [&](std::ostream& os) { rep.write_timing_csv(os); });
  for (const auto& r : rep.rows)
    std::cout << "eps1 = " << r.eps1 << ", M = " << r.M << ": c_M " << r.c_M << ", gap "
              << r.trunc_gap << "\n";
  std::cout << (rep.pass ? "PASS: " : "FAIL: ") << rep.note << "\n";
  return rep.pass ? 0 : 1;
}

int cmd_properties(const CommonArgs& args) {
  StudyConfig cfg = load_config(args);
  PropertySuiteReport rep = run_property_suite(cfg, cfg.seed);
  write_file(fs::path(cfg.out_dir) / "properties.csv", [&](std::ostream& os) {
    os << "check,pass,detail\n";
    for (const auto& item : rep.items)
      os << item.name << "," << (item.pass ? 1 : 0) << ",\"" << item.detail << "\"\n";
  });
  for (const auto& item : rep.items)
    std::cout << (item.pass ? "[PASS] " : "[FAIL] ") << item.name << ": " << item.detail << "\n";
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical homogenization of HJB equations with alpha-stable Levy operators"};
  app.require_subcommand(1);

  CommonArgs args;
  struct Cmd {
    const char* name;
    const char* help;
    int (*fn)(const CommonArgs&);
  };
  const Cmd cmds[] = {
      {"solve-eps", "solve the eps-scaled exterior problems along the schedule", cmd_solve_eps},
      {"solve-cell", "vanishing-discount sweep for the configured cell problem", cmd_solve_cell},
      {"tabulate", "tabulate the effective operator over the box grid", cmd_tabulate},
      {"solve-effective", "solve the effective limit equation", cmd_solve_effective},
      {"homogenize", "full convergence study u_eps -> ubar", cmd_homogenize},
      {"almost-periodic", "truncation sandwich study for almost periodic forcing", cmd_almost},
      {"properties", "structural property suite", cmd_properties},
  };
  int (*selected)(const CommonArgs&) = nullptr;
  for (const Cmd& c : cmds) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, args);
    sub->callback([&selected, fn = c.fn]() { selected = fn; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    return selected(args);
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const SolveFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
