#include "rdl/run.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include "rdl/assembly.hpp"
#include "rdl/boxop.hpp"
#include "rdl/cell.hpp"
#include "rdl/eigensolve.hpp"
#include "rdl/experiments.hpp"
#include "rdl/oracle.hpp"
#include "rdl/report.hpp"

namespace rdl {

namespace {

void dump_operator(const DiscreteOperator& op, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::pair<const char*, const SparseMatrix*> files[] = {
      {"stiffness.txt", &op.stiffness}, {"mass.txt", &op.mass}, {"surface.txt", &op.surface}};
  for (const auto& [name, matrix] : files) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error(ErrorCode::kInvalidModel, "cannot write " + (dir / name).string());
    write_coordinate(*matrix, f);
  }
}

int run_cell(const RunConfig& config, const RunOptions& options, std::ostream& out) {
  const ModelSetup setup = config.setup();
  const std::vector<double> etas = options.etas.empty() ? config.cell_etas : options.etas;
  const Grid grid = build_grid(setup.geom, 1, config.numerics.nodes_per_cell);
  CellOptions copts;
  copts.tol = config.numerics.tol;
  copts.nodes_per_crossing = config.numerics.nodes_per_crossing;
  const CellSolver solver(setup.geom, setup.manifold, setup.f, grid, copts);
  out << "eta,lambda_eta,residual" << (options.trace ? ",rho_sup_norm" : "") << '\n';
  for (double eta : etas) {
    const CellSolution sol = solver.solve(eta);
    out << format_double(eta) << ',' << format_double(sol.lambda_eta) << ',' << format_double(sol.residual);
    if (options.trace) out << ',' << format_double(robin_trace(sol, grid).sup_norm);
    out << '\n';
  }
  if (options.dump_matrices && !etas.empty()) {
    const double coupling[1] = {etas.front()};
    BoundarySpec spec;
    spec.bottom = setup.geom.bottom;
    spec.top = setup.geom.top;
    spec.lateral = LateralKind::kPeriodic;
    const DiscreteOperator op = apply_boundary_conditions(
        unconstrained_operator(assemble_bulk(grid),
                               assemble_surface(grid, setup.manifold, setup.f, coupling,
                                                config.numerics.nodes_per_crossing)),
        grid, spec);
    dump_operator(op, make_run_directory(config.out_dir, "cell"));
  }
  return kExitOk;
}

std::vector<double> read_omega_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open omega file " + path);
  std::vector<double> omega;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      std::size_t used = 0;
      omega.push_back(std::stod(line.substr(first), &used));
      if (line.find_first_not_of(" \t\r", first + used) != std::string::npos) throw std::invalid_argument(line);
    } catch (const std::exception&) {
      throw ParseError(number, "omega file entry '" + line + "' is not a number");
    }
  }
  return omega;
}

int run_box(const RunConfig& config, const RunOptions& options, std::ostream& out) {
  const ModelSetup setup = config.setup();
  const double eps = options.eps.value_or(config.experiment.eps);
  std::vector<double> omega;
  int cells = options.cells.value_or(config.experiment.cells.front());
  if (!options.omega_file.empty()) {
    omega = read_omega_file(options.omega_file);
    if (!options.cells) cells = static_cast<int>(omega.size());
  } else {
    omega = sample_omega(setup.disorder, static_cast<std::size_t>(std::max(cells, 1)), trial_stream(cells, 0));
  }
  const CellReference ref = cell_reference(setup, config.numerics, eps);
  BoxSpec spec;
  spec.cells = cells;
  spec.eps = eps;
  spec.omega = omega;
  spec.robin = ref.robin;
  spec.grid = build_grid(setup.geom, cells, config.numerics.nodes_per_cell);
  spec.support_min = setup.disorder.a();
  const DiscreteOperator op = assemble_box(spec, setup.geom, setup.manifold, setup.f);
  const int k = std::max(options.eigenvalues, 1);
  EigenOptions eopts;
  eopts.seed = mix_seed(config.seed, 0xE16E);
  const EigenResult eig = lowest_eigenpairs(op, k, config.numerics.tol, eopts);
  out << "lambda_1," << format_double(eig.eigenvalues.front()) << '\n';
  if (options.eigenvalues > 1) {
    out << "index,eigenvalue,residual\n";
    for (int i = 0; i < k; ++i) {
      out << i << ',' << format_double(eig.eigenvalues[static_cast<std::size_t>(i)]) << ','
          << format_double(eig.residuals[static_cast<std::size_t>(i)]) << '\n';
    }
  }
  if (options.dump_matrices) dump_operator(op, make_run_directory(config.out_dir, "box"));
  return kExitOk;
}

int run_oracle(const RunConfig& config, const RunOptions& options, std::ostream& out) {
  const double d = config.geom.width;
  const double h0 = options.height.value_or(d / 3.0);
  const std::vector<double> sigmas = options.sigmas.empty() ? std::vector<double>{-1.0, 0.5, 2.0} : options.sigmas;
  out << "sigma,k,energy" << (options.fem ? ",fem_energy,relative_error" : "") << '\n';
  for (double sigma : sigmas) {
    const SeparableLineRoot root = separable_line_ground_state(d, h0, sigma);
    out << format_double(sigma) << ',' << format_double(root.k) << ',' << format_double(root.energy);
    if (options.fem) {
      LayerGeometry geom = config.geom;
      geom.bottom = geom.top = BoundaryKind::kDirichlet;
      const Manifold line = Manifold::separable_line(h0, geom.cell_length);
      const CouplingFunction f = CouplingFunction::constant(1.0, std::max(1.0, std::abs(sigma)));
      const Grid grid = build_grid(geom, 1, config.numerics.nodes_per_cell);
      CellOptions copts;
      copts.tol = config.numerics.tol;
      const CellSolution sol = solve_cell(geom, line, f, sigma, grid, copts);
      out << ',' << format_double(sol.lambda_eta) << ','
          << format_double(std::abs(sol.lambda_eta - root.energy) / std::abs(root.energy));
    }
    out << '\n';
  }
  return kExitOk;
}

ExperimentReport run_experiment(const std::string& name, const RunConfig& config) {
  const ModelSetup setup = config.setup();
  const ExperimentParams params = config.params();
  if (name == "min-spectrum") return min_spectrum_experiment(setup, config.numerics, params);
  if (name == "ilse") return ilse_experiment(setup, config.numerics, params);
  if (name == "wegner") return wegner_experiment(setup, config.numerics, params);
  if (name == "ct") return ct_experiment(setup, config.numerics, params);
  return sigma_band_probe(setup, config.numerics, params);
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {"cell", "box", "min-spectrum", "ilse",
                                                 "wegner", "ct", "sigma-band", "oracle"};
  return names;
}

bool is_experiment(const std::string& s) {
  return s == "min-spectrum" || s == "ilse" || s == "wegner" || s == "ct" || s == "sigma-band";
}

std::string usage_text() {
  return "usage: rdl <subcommand> [--config PATH] [--seed U64] [--out DIR] [--plot] [--dump-matrices] "
         "[--threads K]\n"
         "subcommands: cell, box, min-spectrum, ilse, wegner, ct, sigma-band, oracle\n";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoConvergence:
    case ErrorCode::kSingularMass:
    case ErrorCode::kShiftTooCloseToSpectrum:
    case ErrorCode::kGroundStateSignChange:
    case ErrorCode::kGroundStateVanishesOnBoundary:
    case ErrorCode::kQuadratureNotConverged:
    case ErrorCode::kInsufficientEvents:
      return kExitSolver;
    default:
      return kExitValidation;
  }
}

int run_config(const RunConfig& config, const RunOptions& options, std::ostream& out,
               std::filesystem::path* run_dir) {
  const std::string& cmd = options.subcommand;
  if (cmd == "cell") return run_cell(config, options, out);
  if (cmd == "box") return run_box(config, options, out);
  if (cmd == "oracle") return run_oracle(config, options, out);
  if (!is_experiment(cmd)) throw Error(ErrorCode::kInvalidModel, "unknown subcommand " + cmd);
  const ExperimentReport report = run_experiment(cmd, config);
  const std::filesystem::path dir = make_run_directory(config.out_dir, cmd);
  write_run_outputs(report, config, dir, options.plot);
  if (run_dir) *run_dir = dir;
  out << "run directory: " << dir.string() << '\n';
  for (const auto& [name, ok] : report.checks) out << "check " << name << ": " << (ok ? "true" : "false") << '\n';
  return kExitOk;
}

int run(const RunOptions& options, std::ostream& out, std::ostream& err, std::filesystem::path* run_dir) {
  const auto& names = subcommand_names();
  if (std::find(names.begin(), names.end(), options.subcommand) == names.end()) {
    err << "unknown subcommand '" << options.subcommand << "'\n" << usage_text();
    return kExitUsage;
  }
  try {
    RunConfig config = options.config_path.empty() ? RunConfig{} : parse_config(options.config_path);
    if (options.seed) config.seed = *options.seed;
    if (options.out) config.out_dir = *options.out;
    if (options.threads) config.numerics.threads = *options.threads;
    validate_config(config);
    return run_config(config, options, out, run_dir);
  } catch (const ValidationError& e) {
    err << e.what() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace rdl
