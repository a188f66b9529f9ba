#include <benchmark/benchmark.h>

#include "rdl/boxop.hpp"
#include "rdl/cell.hpp"
#include "rdl/eigensolve.hpp"

namespace {

const rdl::LayerGeometry kGeom{1.0, 1.0, rdl::BoundaryKind::kNeumann, rdl::BoundaryKind::kNeumann};
const rdl::Manifold kCircle = rdl::Manifold::circle({0.5, 0.5}, 0.25);
const rdl::CouplingFunction kF = rdl::CouplingFunction::constant(1.0, 1.0);

void BM_AssembleBulk(benchmark::State& state) {
  const auto grid = rdl::build_grid(kGeom, static_cast<int>(state.range(0)), 24);
  for (auto _ : state) benchmark::DoNotOptimize(rdl::assemble_bulk(grid));
  state.counters["nodes"] = grid.node_count();
}
BENCHMARK(BM_AssembleBulk)->Arg(1)->Arg(4)->Arg(16);

void BM_AssembleSurface(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  const auto grid = rdl::build_grid(kGeom, cells, 24);
  const rdl::SurfaceQuadrature quad(grid, kCircle);
  const std::vector<double> couplings(static_cast<std::size_t>(cells), 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(quad.assemble(kF, couplings));
}
BENCHMARK(BM_AssembleSurface)->Arg(1)->Arg(4)->Arg(16);

void BM_CellSolve(benchmark::State& state) {
  const auto grid = rdl::build_grid(kGeom, 1, static_cast<int>(state.range(0)));
  const rdl::CellSolver solver(kGeom, kCircle, kF, grid);
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(0.01));
}
BENCHMARK(BM_CellSolve)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BoxLowest(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  const auto cell_grid = rdl::build_grid(kGeom, 1, 16);
  const auto star = rdl::solve_cell(kGeom, kCircle, kF, 0.01, cell_grid);
  const rdl::BoxProblem problem(kGeom, kCircle, kF, rdl::build_grid(kGeom, cells, 16),
                                rdl::robin_trace(star, cell_grid));
  const auto omega = rdl::sample_omega(rdl::Disorder::smoothed_uniform(-1.0, 1), static_cast<std::size_t>(cells), 0);
  const auto op = problem.assemble(0.01, omega);
  rdl::EigenOptions opts;
  opts.preconditioner = state.range(1) ? rdl::Preconditioner::kShiftInvert : rdl::Preconditioner::kIncompleteCholesky;
  for (auto _ : state) benchmark::DoNotOptimize(rdl::lowest_eigenvalue(op, 1e-8, opts));
  state.SetLabel(state.range(1) ? "shift-invert" : "incomplete-cholesky");
}
BENCHMARK(BM_BoxLowest)->ArgsProduct({{4, 16}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_CountNear(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  const auto cell_grid = rdl::build_grid(kGeom, 1, 16);
  const auto star = rdl::solve_cell(kGeom, kCircle, kF, 0.01, cell_grid);
  const rdl::BoxProblem problem(kGeom, kCircle, kF, rdl::build_grid(kGeom, cells, 16),
                                rdl::robin_trace(star, cell_grid));
  const auto omega = rdl::sample_omega(rdl::Disorder::smoothed_uniform(-1.0, 1), static_cast<std::size_t>(cells), 0);
  const auto op = problem.assemble(0.01, omega);
  for (auto _ : state) benchmark::DoNotOptimize(rdl::count_eigenvalues_near(op, -0.06, 0.01, 1.0));
}
BENCHMARK(BM_CountNear)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
