#include <CLI11.hpp>
#include <algorithm>
#include <iostream>

#include "rdl/run.hpp"

int main(int argc, char** argv) {
  if (argc >= 2 && argv[1][0] != '-') {
    const auto& names = rdl::subcommand_names();
    if (std::find(names.begin(), names.end(), argv[1]) == names.end()) {
      std::cerr << "unknown subcommand '" << argv[1] << "'\n" << rdl::usage_text();
      return rdl::kExitUsage;
    }
  }

  CLI::App app{"Random delta interactions on a strip: cell problems, boxes and Monte Carlo experiments"};
  app.require_subcommand(1);
  rdl::RunOptions opt;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
  auto* seed_opt = app.add_option("--seed", seed, "Run seed (overrides disorder.seed)");
  auto* out_opt = app.add_option("--out", out, "Parent directory for run outputs");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads for trials")->check(CLI::PositiveNumber);
  app.add_option("--config", opt.config_path, "INI configuration or a previous report.json");
  app.add_flag("--plot", opt.plot, "Also write plot.svg");
  app.add_flag("--dump-matrices", opt.dump_matrices, "Write stiffness, mass and surface matrices");
  app.fallthrough();

  auto* cell = app.add_subcommand("cell", "Cell ground energy table");
  cell->add_option("--eta", opt.etas, "Couplings (default: cell.etas)");
  cell->add_flag("--trace", opt.trace, "Append the Robin trace sup-norm");

  auto* box = app.add_subcommand("box", "Lowest eigenvalues of one random box");
  int cells = 0;
  double eps = 0.0;
  auto* cells_opt = box->add_option("--cells", cells, "Number of cells N")->check(CLI::PositiveNumber);
  auto* eps_opt = box->add_option("--eps", eps, "Disorder strength");
  box->add_option("--omega-file", opt.omega_file, "One omega value per line");
  box->add_option("--eigenvalues", opt.eigenvalues, "Number of eigenvalues to list")->check(CLI::PositiveNumber);

  for (const char* name : {"min-spectrum", "ilse", "wegner", "ct", "sigma-band"}) {
    app.add_subcommand(name, std::string("Run the ") + name + " experiment");
  }

  auto* oracle = app.add_subcommand("oracle", "Separable delta-line reference energies");
  double height = 0.0;
  auto* height_opt = oracle->add_option("--height", height, "Line height (default d/3)");
  oracle->add_option("--sigma", opt.sigmas, "Couplings (default -1, 0.5, 2)");
  oracle->add_flag("--fem", opt.fem, "Compare with the finite element cell solve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : rdl::kExitUsage;
  }
  opt.subcommand = app.get_subcommands().front()->get_name();
  if (*seed_opt) opt.seed = seed;
  if (*out_opt) opt.out = out;
  if (*threads_opt) opt.threads = threads;
  if (*cells_opt) opt.cells = cells;
  if (*eps_opt) opt.eps = eps;
  if (*height_opt) opt.height = height;
  return rdl::run(opt, std::cout, std::cerr);
}
