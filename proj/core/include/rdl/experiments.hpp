#pragma once

// Seeded Monte Carlo drivers over random boxes. Trials are keyed by
// (seed, cell count, trial index) and merged in trial order, so results do
// not depend on the thread count.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rdl/assembly.hpp"
#include "rdl/boxop.hpp"
#include "rdl/cell.hpp"
#include "rdl/model.hpp"
#include "rdl/statistics.hpp"

namespace rdl {

struct ModelSetup {
  LayerGeometry geom;
  Manifold manifold = Manifold::circle({0.5, 0.5}, 0.25);
  CouplingFunction f = CouplingFunction::constant(1.0, 1.0);
  Disorder disorder = Disorder::smoothed_uniform(-1.0, 1);
};

struct Numerics {
  int nodes_per_cell = 24;
  double tol = 1e-8;
  int quadrature_order = 256;
  int nodes_per_crossing = SurfaceQuadrature::kDefaultNodesPerCrossing;
  int threads = 1;
};

/// Cell-problem quantities every experiment compares against.
struct CellReference {
  double eps = 0.0;
  double lambda0 = 0.0;       // closed-form transverse energy
  double lambda0_h = 0.0;     // discrete cell energy at zero coupling
  double lambda1 = 0.0;
  double eps_star = 0.0;
  double lambda_star = 0.0;   // discrete cell energy at eps_star
  double box1_lambda = 0.0;   // one-cell box with omega = eps_star / eps
  double delta_grid = 0.0;
  RobinTrace robin;
};

/// delta_grid = 4 * max(|box1_lambda - lambda_star|, |lambda0_h - lambda0|).
CellReference cell_reference(const ModelSetup& setup, const Numerics& numerics, double eps);

struct ExperimentParams {
  double eps = 1e-2;
  std::vector<int> cells{4};
  int trials = 100;
  std::uint64_t seed = 1;

  // min-spectrum / sigma-band
  bool include_extremal = true;
  double band_c = 5.0;

  // ilse
  int tau = 5;
  double c0 = 1.0;
  double window_factor = 1.0;  // eps_N = window_factor * left edge of J_N
  std::vector<double> delta_scales{0.5, 1.0, 2.0};
  int resolvent_trials = 20;

  // wegner
  double energy = 0.0;
  double energy0 = 0.0;
  double c2 = 1.0;
  std::vector<double> kappas;
  double ceiling_margin = 1.0;  // counts are resolved up to lambda0 + margin
  int min_events = 10;          // at the smallest kappa for the largest N; 0 disables

  // ct
  int ct_cells = 10;
  std::vector<double> lambda_offsets{0.2, 0.4};
  int probes = 30;
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  int cells = 0;
  double eps = 0.0;
  double lambda_1 = 0.0;
  std::vector<double> values;  // experiment-specific columns, see ExperimentReport::value_names
  std::vector<bool> flags;     // see ExperimentReport::flag_names
};

struct ProbabilityRecord {
  std::string label;
  int cells = 0;
  double parameter = 0.0;
  Proportion p;
};

struct FitRecord {
  std::string label;
  LinearFit fit;
};

struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<std::pair<std::string, std::vector<double>>> series;
  std::vector<ProbabilityRecord> probabilities;
  std::vector<FitRecord> fits;
  std::vector<std::pair<std::string, bool>> checks;
  std::vector<std::string> value_names;
  std::vector<std::string> flag_names;
  std::vector<TrialRecord> trials;

  double scalar(const std::string& key) const;
  bool check(const std::string& key) const;
  const FitRecord& fit(const std::string& label) const;
};

/// Stream id of trial t on a box of n cells.
std::uint64_t trial_stream(int cells, int trial);

ExperimentReport min_spectrum_experiment(const ModelSetup& setup, const Numerics& numerics,
                                         const ExperimentParams& params);
ExperimentReport sigma_band_probe(const ModelSetup& setup, const Numerics& numerics,
                                  const ExperimentParams& params);

/// Left edge 8 / sqrt(|Lambda1| E|omega|) / sqrt(N) of the coupling window J_N.
double ilse_window_left(double lambda1, double mean_abs_omega, int cells);
double ilse_delta(double eps, double c0, int tau);

ExperimentReport ilse_experiment(const ModelSetup& setup, const Numerics& numerics,
                                 const ExperimentParams& params);
ExperimentReport wegner_experiment(const ModelSetup& setup, const Numerics& numerics,
                                   const ExperimentParams& params);
ExperimentReport ct_experiment(const ModelSetup& setup, const Numerics& numerics,
                               const ExperimentParams& params);

}  // namespace rdl
