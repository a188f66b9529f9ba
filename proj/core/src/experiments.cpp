#include "rdl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "rdl/error.hpp"

namespace rdl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs fn(i) for i in [0, count); rethrows the failure of the lowest index.
template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  const int workers = std::clamp(threads, 1, std::max(count, 1));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

EigenOptions eigen_options(const ExperimentParams& params) {
  EigenOptions o;
  o.seed = mix_seed(params.seed, 0xE16E);
  o.preconditioner = Preconditioner::kShiftInvert;
  return o;
}

CellOptions cell_options(const Numerics& numerics) {
  CellOptions o;
  o.tol = numerics.tol;
  o.nodes_per_crossing = numerics.nodes_per_crossing;
  return o;
}

void require_trials(const ExperimentParams& params, int minimum, const std::string& name) {
  if (params.trials < minimum) {
    throw Error(ErrorCode::kInvalidModel, name + " needs at least " + std::to_string(minimum) + " trials");
  }
  if (params.cells.empty()) throw Error(ErrorCode::kInvalidModel, name + " needs a cell list");
}

void add_reference_scalars(ExperimentReport& report, const CellReference& ref) {
  report.scalars.emplace_back("eps", ref.eps);
  report.scalars.emplace_back("lambda0", ref.lambda0);
  report.scalars.emplace_back("lambda0_h", ref.lambda0_h);
  report.scalars.emplace_back("lambda1", ref.lambda1);
  report.scalars.emplace_back("eps_star", ref.eps_star);
  report.scalars.emplace_back("lambda_star", ref.lambda_star);
  report.scalars.emplace_back("box1_lambda", ref.box1_lambda);
  report.scalars.emplace_back("delta_grid", ref.delta_grid);
  report.scalars.emplace_back("robin_sup_norm", ref.robin.sup_norm);
}

std::vector<TrialRecord> random_box_trials(const ModelSetup& setup, const Numerics& numerics,
                                           const ExperimentParams& params, const BoxProblem& problem,
                                           int cells, double eps) {
  const Disorder disorder = setup.disorder.with_seed(params.seed);
  const EigenOptions eig = eigen_options(params);
  std::vector<TrialRecord> out(static_cast<std::size_t>(params.trials));
  parallel_for(params.trials, numerics.threads, [&](int t) {
    const std::uint64_t stream = trial_stream(cells, t);
    const std::vector<double> omega = sample_omega(disorder, static_cast<std::size_t>(cells), stream);
    TrialRecord& r = out[static_cast<std::size_t>(t)];
    r.trial = t;
    r.seed = mix_seed(params.seed, stream);
    r.cells = cells;
    r.eps = eps;
    r.lambda_1 = lowest_eigenvalue(problem.assemble(eps, omega), numerics.tol, eig);
  });
  return out;
}

TrialRecord periodic_trial(const BoxProblem& problem, const Numerics& numerics, const ExperimentParams& params,
                           double value, double support_min, int index, int cells, double eps) {
  const double pattern[1] = {value};
  const std::vector<double> omega =
      periodic_configuration(pattern, 1, static_cast<std::size_t>(cells), support_min);
  TrialRecord r;
  r.trial = index;
  r.seed = 0;
  r.cells = cells;
  r.eps = eps;
  r.lambda_1 = lowest_eigenvalue(problem.assemble(eps, omega), numerics.tol, eigen_options(params));
  return r;
}

// Inverse variance of log p from the Wilson interval width.
double log_weight(const Proportion& p) {
  const double half = 0.5 * (p.upper - p.lower) / kWilsonZ95;
  const double sd = half / std::max(p.estimate, 1e-300);
  return 1.0 / std::max(sd * sd, 1e-300);
}

}  // namespace

double ExperimentReport::scalar(const std::string& key) const {
  for (const auto& [k, v] : scalars) {
    if (k == key) return v;
  }
  throw Error(ErrorCode::kInvalidModel, "report has no scalar " + key);
}

bool ExperimentReport::check(const std::string& key) const {
  for (const auto& [k, v] : checks) {
    if (k == key) return v;
  }
  throw Error(ErrorCode::kInvalidModel, "report has no check " + key);
}

const FitRecord& ExperimentReport::fit(const std::string& label) const {
  for (const auto& f : fits) {
    if (f.label == label) return f;
  }
  throw Error(ErrorCode::kInvalidModel, "report has no fit " + label);
}

std::uint64_t trial_stream(int cells, int trial) {
  return (static_cast<std::uint64_t>(cells) << 32) | static_cast<std::uint32_t>(trial);
}

CellReference cell_reference(const ModelSetup& setup, const Numerics& numerics, double eps) {
  if (!(eps >= 0.0)) throw Error(ErrorCode::kInvalidModel, "eps must be non-negative");
  CellReference ref;
  ref.eps = eps;
  const TransverseMode mode = transverse_mode(setup.geom);
  ref.lambda0 = mode.lambda0;
  ref.lambda1 = lambda1(setup.manifold, setup.f, mode, numerics.quadrature_order);
  ref.eps_star = eps > 0.0 ? epsilon_star(ref.lambda1, eps, setup.disorder.a()) : 0.0;

  const Grid grid = build_grid(setup.geom, 1, numerics.nodes_per_cell);
  const CellSolver solver(setup.geom, setup.manifold, setup.f, grid, cell_options(numerics));
  ref.lambda0_h = solver.solve(0.0).lambda_eta;
  const CellSolution star = solver.solve(ref.eps_star);
  ref.lambda_star = star.lambda_eta;
  ref.robin = robin_trace(star, grid);

  const BoxProblem box(setup.geom, setup.manifold, setup.f, grid, ref.robin, numerics.nodes_per_crossing);
  const double omega[1] = {eps > 0.0 ? ref.eps_star / eps : 0.0};
  ref.box1_lambda = lowest_eigenvalue(box.assemble(eps, omega), numerics.tol);
  ref.delta_grid = 4.0 * std::max(std::abs(ref.box1_lambda - ref.lambda_star), std::abs(ref.lambda0_h - ref.lambda0));
  return ref;
}

// ---------------------------------------------------------------------------

ExperimentReport min_spectrum_experiment(const ModelSetup& setup, const Numerics& numerics,
                                         const ExperimentParams& params) {
  require_trials(params, 100, "min-spectrum");
  const CellReference ref = cell_reference(setup, numerics, params.eps);
  const double a = setup.disorder.a();
  const double lo = ref.lambda_star - ref.delta_grid;
  const double hi = ref.lambda_star + 2.0 * ref.delta_grid;

  ExperimentReport report;
  report.name = "min-spectrum";
  report.flag_names = {"periodic", "above_lower_bound"};
  add_reference_scalars(report, ref);

  double min_all = std::numeric_limits<double>::infinity();
  double min_random = min_all;
  double extremal = kNaN;
  bool all_above = true;
  for (int cells : params.cells) {
    const Grid grid = build_grid(setup.geom, cells, numerics.nodes_per_cell);
    const BoxProblem problem(setup.geom, setup.manifold, setup.f, grid, ref.robin, numerics.nodes_per_crossing);
    std::vector<TrialRecord> rows = random_box_trials(setup, numerics, params, problem, cells, params.eps);
    for (auto& r : rows) {
      r.flags = {false, r.lambda_1 >= lo};
      min_random = std::min(min_random, r.lambda_1);
    }
    if (params.include_extremal) {
      const double ext = params.eps > 0.0 ? ref.eps_star / params.eps : 1.0;
      const double other = ext == 1.0 ? a : 1.0;
      for (double value : {ext, other}) {
        TrialRecord r = periodic_trial(problem, numerics, params, value, a, static_cast<int>(rows.size()), cells,
                                       params.eps);
        r.flags = {true, r.lambda_1 >= lo};
        if (value == ext && cells == params.cells.front()) extremal = r.lambda_1;
        rows.push_back(std::move(r));
      }
    }
    for (auto& r : rows) {
      min_all = std::min(min_all, r.lambda_1);
      all_above = all_above && r.flags[1];
      report.trials.push_back(std::move(r));
    }
  }
  report.scalars.emplace_back("min_lambda", min_all);
  report.scalars.emplace_back("min_random_lambda", min_random);
  report.scalars.emplace_back("extremal_lambda", extremal);
  report.checks.emplace_back("all_above_lower_bound", all_above);
  report.checks.emplace_back("min_in_bracket", min_all >= lo && min_all <= hi);
  if (params.include_extremal) {
    report.checks.emplace_back("extremal_attains", std::abs(extremal - ref.lambda_star) <= 2.0 * ref.delta_grid);
  }
  return report;
}

ExperimentReport sigma_band_probe(const ModelSetup& setup, const Numerics& numerics,
                                  const ExperimentParams& params) {
  require_trials(params, 1, "sigma-band");
  const CellReference ref = cell_reference(setup, numerics, params.eps);
  const double a = setup.disorder.a();
  const double lo = ref.lambda_star - ref.delta_grid;
  const double hi = ref.lambda_star + params.band_c * params.eps + ref.delta_grid;

  ExperimentReport report;
  report.name = "sigma-band";
  report.flag_names = {"periodic", "in_band"};
  report.value_names = {"band_offset"};
  add_reference_scalars(report, ref);
  report.scalars.emplace_back("band_c", params.band_c);

  std::vector<double> offsets;
  int in_band = 0, random_count = 0;
  double extremal = kNaN;
  for (int cells : params.cells) {
    const Grid grid = build_grid(setup.geom, cells, numerics.nodes_per_cell);
    const BoxProblem problem(setup.geom, setup.manifold, setup.f, grid, ref.robin, numerics.nodes_per_crossing);
    std::vector<TrialRecord> rows = random_box_trials(setup, numerics, params, problem, cells, params.eps);
    if (params.include_extremal) {
      const double ext = params.eps > 0.0 ? ref.eps_star / params.eps : 1.0;
      TrialRecord r = periodic_trial(problem, numerics, params, ext, a, params.trials, cells, params.eps);
      r.flags = {true};
      if (cells == params.cells.front()) extremal = r.lambda_1;
      rows.push_back(std::move(r));
    }
    for (auto& r : rows) {
      const bool periodic = r.flags.empty() ? false : r.flags[0];
      const bool band = r.lambda_1 >= lo && r.lambda_1 <= hi;
      const double off = params.eps > 0.0 ? (r.lambda_1 - ref.lambda_star) / params.eps : 0.0;
      r.flags = {periodic, band};
      r.values = {off};
      if (!periodic) {
        ++random_count;
        in_band += band ? 1 : 0;
        offsets.push_back(off);
      }
      report.trials.push_back(std::move(r));
    }
  }
  std::sort(offsets.begin(), offsets.end());
  const Proportion frac = wilson(in_band, random_count);
  report.probabilities.push_back({"in_band", 0, params.band_c, frac});
  report.scalars.emplace_back("fraction_in_band", frac.estimate);
  // Smallest C whose band holds every random trial, and the one holding half.
  report.scalars.emplace_back("fitted_c", offsets.empty() ? kNaN : std::max(offsets.back(), 0.0));
  report.scalars.emplace_back("median_c", offsets.empty() ? kNaN : std::max(offsets[offsets.size() / 2], 0.0));
  report.scalars.emplace_back("extremal_lambda", extremal);
  report.checks.emplace_back("band_nonempty", in_band > 0);
  report.checks.emplace_back("half_in_band", frac.estimate >= 0.5);
  if (params.include_extremal) {
    report.checks.emplace_back("extremal_at_bottom", std::abs(extremal - ref.lambda_star) <= 2.0 * ref.delta_grid);
  }
  return report;
}

// ---------------------------------------------------------------------------

double ilse_window_left(double lambda1, double mean_abs_omega, int cells) {
  if (cells < 1 || !(mean_abs_omega > 0.0) || lambda1 == 0.0) {
    throw Error(ErrorCode::kInvalidModel, "window edge needs cells >= 1, E|omega| > 0 and Lambda_1 != 0");
  }
  return 8.0 / std::sqrt(std::abs(lambda1) * mean_abs_omega) / std::sqrt(static_cast<double>(cells));
}

double ilse_delta(double eps, double c0, int tau) {
  return 0.5 * std::pow(eps / c0, static_cast<double>(tau) / 4.0);
}

ExperimentReport ilse_experiment(const ModelSetup& setup, const Numerics& numerics,
                                 const ExperimentParams& params) {
  require_trials(params, 1, "ilse");
  if (params.tau < 5) throw Error(ErrorCode::kInvalidModel, "tau must be at least 5");
  if (!(params.c0 > 0.0)) throw Error(ErrorCode::kInvalidModel, "c0 must be positive");
  if (!(params.window_factor >= 1.0)) throw Error(ErrorCode::kInvalidModel, "eps must not lie left of J_N");
  const TransverseMode mode = transverse_mode(setup.geom);
  const double l1 = lambda1(setup.manifold, setup.f, mode, numerics.quadrature_order);
  const double mean_abs = setup.disorder.mean_abs();

  std::vector<double> scales = params.delta_scales;
  if (std::find(scales.begin(), scales.end(), 1.0) == scales.end()) scales.push_back(1.0);
  std::sort(scales.begin(), scales.end());
  const auto main_index = static_cast<std::size_t>(std::find(scales.begin(), scales.end(), 1.0) - scales.begin());

  ExperimentReport report;
  report.name = "ilse";
  for (double s : scales) report.flag_names.push_back("event_delta_x" + std::to_string(s).substr(0, 4));
  report.value_names = {"lambda_star", "delta", "resolvent_end_to_end"};
  report.scalars.emplace_back("lambda0", mode.lambda0);
  report.scalars.emplace_back("lambda1", l1);
  report.scalars.emplace_back("mean_abs_omega", mean_abs);
  report.scalars.emplace_back("c0", params.c0);
  report.scalars.emplace_back("tau", params.tau);

  std::vector<Proportion> probs;
  std::vector<double> eps_list, delta_list, lstar_list;
  bool nested = true;
  for (int cells : params.cells) {
    const double eps = params.window_factor * ilse_window_left(l1, mean_abs, cells);
    if (eps > setup.f.t0()) {
      throw Error(ErrorCode::kWindowEmpty, "J_N is empty for N = " + std::to_string(cells) + ": left edge " +
                                               std::to_string(eps) + " exceeds t0 = " + std::to_string(setup.f.t0()));
    }
    const CellReference ref = cell_reference(setup, numerics, eps);
    const double delta = ilse_delta(eps, params.c0, params.tau);
    const Grid grid = build_grid(setup.geom, cells, numerics.nodes_per_cell);
    const BoxProblem problem(setup.geom, setup.manifold, setup.f, grid, ref.robin, numerics.nodes_per_crossing);
    std::vector<TrialRecord> rows = random_box_trials(setup, numerics, params, problem, cells, eps);

    const Disorder disorder = setup.disorder.with_seed(params.seed);
    const int probed = std::min(params.resolvent_trials, params.trials);
    std::vector<double> resolvent(static_cast<std::size_t>(params.trials), kNaN);
    parallel_for(probed, numerics.threads, [&](int t) {
      const double lambda = ref.lambda_star + delta;
      if (rows[static_cast<std::size_t>(t)].lambda_1 <= lambda) return;
      const std::vector<double> omega =
          sample_omega(disorder, static_cast<std::size_t>(cells), trial_stream(cells, t));
      try {
        resolvent[static_cast<std::size_t>(t)] = resolvent_block_norm(
            problem.assemble(eps, omega), grid, lambda, {0, 1}, {cells - 1, 1}, params.probes);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kShiftTooCloseToSpectrum) throw;
      }
    });

    int events = 0;
    for (std::size_t t = 0; t < rows.size(); ++t) {
      TrialRecord& r = rows[t];
      for (double s : scales) r.flags.push_back(r.lambda_1 <= ref.lambda_star + s * delta);
      for (std::size_t i = 0; i + 1 < r.flags.size(); ++i) nested = nested && (!r.flags[i] || r.flags[i + 1]);
      r.values = {ref.lambda_star, delta, resolvent[t]};
      events += r.flags[main_index] ? 1 : 0;
      report.trials.push_back(std::move(r));
    }
    const Proportion p = wilson(events, params.trials);
    probs.push_back(p);
    report.probabilities.push_back({"event", cells, eps, p});
    eps_list.push_back(eps);
    delta_list.push_back(delta);
    lstar_list.push_back(ref.lambda_star);
  }
  bool non_increasing = true;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    non_increasing = non_increasing && (probs[i + 1].estimate <= probs[i].estimate || probs[i + 1].overlaps(probs[i]));
  }
  std::vector<double> logn, p;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    logn.push_back(std::log(static_cast<double>(params.cells[i])));
    p.push_back(probs[i].estimate);
  }
  if (probs.size() >= 2) report.fits.push_back({"probability_vs_log_n", linear_fit(logn, p)});
  report.series.emplace_back("eps", eps_list);
  report.series.emplace_back("delta", delta_list);
  report.series.emplace_back("lambda_star", lstar_list);
  report.checks.emplace_back("non_increasing_in_n", non_increasing);
  report.checks.emplace_back("events_nested", nested);
  return report;
}

// ---------------------------------------------------------------------------

ExperimentReport wegner_experiment(const ModelSetup& setup, const Numerics& numerics,
                                   const ExperimentParams& params) {
  require_trials(params, 1, "wegner");
  std::vector<double> kappas = params.kappas;
  if (kappas.empty()) throw Error(ErrorCode::kInvalidModel, "wegner needs a kappa list");
  std::sort(kappas.begin(), kappas.end());
  const TransverseMode mode = transverse_mode(setup.geom);
  const double kmax = kappas.back();
  std::vector<std::string> violations;
  if (kappas.front() < 0.0) violations.push_back("kappa must be non-negative");
  if (params.energy + kmax > mode.lambda0 - params.c2 * params.eps * params.eps) {
    violations.push_back("E + max kappa must lie below Lambda_0 - C2 eps^2");
  }
  if (kmax > 0.25 * std::abs(mode.lambda0 - params.energy0)) {
    violations.push_back("kappa must not exceed |Lambda_0 - E0| / 4");
  }
  if (!violations.empty()) throw ValidationError(violations);
  const double ceiling = mode.lambda0 + params.ceiling_margin;
  if (params.energy + kmax > ceiling) throw Error(ErrorCode::kWindowTooHigh, "window above the resolvable ceiling");

  const CellReference ref = cell_reference(setup, numerics, params.eps);
  ExperimentReport report;
  report.name = "wegner";
  for (double k : kappas) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "within_kappa_%.3g", k);
    report.flag_names.emplace_back(buf);
  }
  report.value_names = {"distance"};
  add_reference_scalars(report, ref);
  report.scalars.emplace_back("energy", params.energy);
  report.scalars.emplace_back("energy0", params.energy0);
  report.scalars.emplace_back("w11_norm", setup.disorder.w11_norm());
  report.series.emplace_back("kappa", kappas);

  const Disorder disorder = setup.disorder.with_seed(params.seed);
  std::vector<std::vector<Proportion>> table;  // [cell index][kappa index]
  for (int cells : params.cells) {
    const Grid grid = build_grid(setup.geom, cells, numerics.nodes_per_cell);
    const BoxProblem problem(setup.geom, setup.manifold, setup.f, grid, ref.robin, numerics.nodes_per_crossing);
    std::vector<TrialRecord> rows(static_cast<std::size_t>(params.trials));
    parallel_for(params.trials, numerics.threads, [&](int t) {
      const std::uint64_t stream = trial_stream(cells, t);
      const std::vector<double> omega = sample_omega(disorder, static_cast<std::size_t>(cells), stream);
      const DiscreteOperator op = problem.assemble(params.eps, omega);
      TrialRecord& r = rows[static_cast<std::size_t>(t)];
      r.trial = t;
      r.seed = mix_seed(params.seed, stream);
      r.cells = cells;
      r.eps = params.eps;
      r.lambda_1 = lowest_eigenvalue(op, numerics.tol, eigen_options(params));
      const double dist = distance_to_spectrum(op, params.energy, kmax, 1e-10);
      r.values = {dist};
      for (double k : kappas) r.flags.push_back(dist <= k);
    });
    std::vector<int> events(kappas.size(), 0);
    for (auto& r : rows) {
      for (std::size_t i = 0; i < kappas.size(); ++i) events[i] += r.flags[i] ? 1 : 0;
      report.trials.push_back(std::move(r));
    }
    std::vector<Proportion> row;
    for (std::size_t i = 0; i < kappas.size(); ++i) {
      row.push_back(wilson(events[i], params.trials));
      report.probabilities.push_back({"within_kappa", cells, kappas[i], row.back()});
    }
    table.push_back(row);

    std::vector<double> lk, lp, w;
    for (std::size_t i = 0; i < kappas.size(); ++i) {
      if (row[i].events == 0 || kappas[i] <= 0.0) continue;
      lk.push_back(std::log(kappas[i]));
      lp.push_back(std::log(row[i].estimate));
      w.push_back(log_weight(row[i]));
    }
    if (lk.size() >= 2) report.fits.push_back({"kappa_slope_n" + std::to_string(cells), weighted_fit(lk, lp, w)});
  }

  const std::size_t last = params.cells.size() - 1;
  const std::size_t first_positive =
      static_cast<std::size_t>(std::find_if(kappas.begin(), kappas.end(), [](double k) { return k > 0.0; }) -
                               kappas.begin());
  if (first_positive < kappas.size() && table[last][first_positive].events < params.min_events) {
    throw Error(ErrorCode::kInsufficientEvents,
                std::to_string(table[last][first_positive].events) + " events at the smallest kappa for N = " +
                    std::to_string(params.cells[last]) + ", need " + std::to_string(params.min_events));
  }

  bool non_decreasing = true;
  for (std::size_t c = 0; c + 1 < table.size(); ++c) {
    for (std::size_t i = 0; i < kappas.size(); ++i) {
      const Proportion& lo = table[c][i];
      const Proportion& hi = table[c + 1][i];
      non_decreasing = non_decreasing && (hi.estimate >= lo.estimate || hi.overlaps(lo));
    }
  }
  bool monotone_kappa = true;
  for (const auto& row : table) {
    for (std::size_t i = 0; i + 1 < row.size(); ++i) monotone_kappa = monotone_kappa && row[i].events <= row[i + 1].events;
  }

  if (table.size() >= 2) {
    std::vector<double> ln, lp, w;
    for (std::size_t c = 0; c < table.size(); ++c) {
      const Proportion& p = table[c].back();
      if (p.events == 0) continue;
      ln.push_back(std::log(static_cast<double>(params.cells[c])));
      lp.push_back(std::log(p.estimate));
      w.push_back(log_weight(p));
    }
    if (ln.size() >= 2) report.fits.push_back({"n_slope", weighted_fit(ln, lp, w)});
  }

  // Bound shape C * ||h||_{W11} / |Lambda_0 - E0| * kappa * d * N^2, C by least squares through 0.
  const double gap = std::abs(mode.lambda0 - params.energy0);
  double sbp = 0.0, sbb = 0.0;
  for (std::size_t c = 0; c < table.size(); ++c) {
    const double n = params.cells[c];
    for (std::size_t i = 0; i < kappas.size(); ++i) {
      const double b = setup.disorder.w11_norm() / gap * kappas[i] * setup.geom.width * n * n;
      sbp += b * table[c][i].estimate;
      sbb += b * b;
    }
  }
  report.scalars.emplace_back("bound_constant", sbb > 0.0 ? sbp / sbb : kNaN);
  report.checks.emplace_back("non_decreasing_in_n", non_decreasing);
  report.checks.emplace_back("monotone_in_kappa", monotone_kappa);
  return report;
}

// ---------------------------------------------------------------------------

ExperimentReport ct_experiment(const ModelSetup& setup, const Numerics& numerics, const ExperimentParams& params) {
  require_trials(params, 1, "ct");
  const int cells = params.ct_cells;
  if (cells < 6) throw Error(ErrorCode::kInvalidModel, "ct needs at least 6 cells for 4 distances");
  if (params.lambda_offsets.size() < 2) throw Error(ErrorCode::kInvalidModel, "ct needs two energy offsets");
  for (double off : params.lambda_offsets) {
    if (!(off > 0.0)) throw Error(ErrorCode::kInvalidModel, "energy offsets must be positive");
  }
  const CellReference ref = cell_reference(setup, numerics, params.eps);
  const Grid grid = build_grid(setup.geom, cells, numerics.nodes_per_cell);
  const BoxProblem problem(setup.geom, setup.manifold, setup.f, grid, ref.robin, numerics.nodes_per_crossing);
  const Disorder disorder = setup.disorder.with_seed(params.seed);
  const std::size_t offsets = params.lambda_offsets.size();
  const int far = cells - 1;

  ExperimentReport report;
  report.name = "ct";
  add_reference_scalars(report, ref);
  for (std::size_t o = 0; o < offsets; ++o) {
    const std::string tag = "o" + std::to_string(o);
    report.value_names.push_back("whole_" + tag);
    for (int j = 1; j <= far; ++j) report.value_names.push_back("norm_" + tag + "_cell" + std::to_string(j));
    report.value_names.push_back("swapped_" + tag);
  }
  report.flag_names = {"whole_matches_distance", "restriction_contracts", "swap_symmetric"};

  std::vector<TrialRecord> rows(static_cast<std::size_t>(params.trials));
  parallel_for(params.trials, numerics.threads, [&](int t) {
    const std::uint64_t stream = trial_stream(cells, t);
    const std::vector<double> omega = sample_omega(disorder, static_cast<std::size_t>(cells), stream);
    const DiscreteOperator op = problem.assemble(params.eps, omega);
    TrialRecord& r = rows[static_cast<std::size_t>(t)];
    r.trial = t;
    r.seed = mix_seed(params.seed, stream);
    r.cells = cells;
    r.eps = params.eps;
    r.lambda_1 = lowest_eigenvalue(op, numerics.tol, eigen_options(params));
    bool matches = true, contracts = true, symmetric = true;
    for (double off : params.lambda_offsets) {
      const double lambda = ref.lambda_star - off;
      const BlockSelector all{0, cells};
      const double whole = resolvent_block_norm(op, grid, lambda, all, all, params.probes);
      matches = matches && std::abs(whole * (r.lambda_1 - lambda) - 1.0) <= 0.02;
      r.values.push_back(whole);
      for (int j = 1; j <= far; ++j) {
        const double v = resolvent_block_norm(op, grid, lambda, {0, 1}, {j, 1}, params.probes);
        contracts = contracts && v <= whole * (1.0 + 1e-6);
        r.values.push_back(v);
      }
      const double forward = r.values[r.values.size() - 1];
      const double swapped = resolvent_block_norm(op, grid, lambda, {far, 1}, {0, 1}, params.probes);
      symmetric = symmetric && std::abs(swapped - forward) <= 0.02 * forward;
      r.values.push_back(swapped);
    }
    r.flags = {matches, contracts, symmetric};
  });

  std::vector<double> rates;
  bool all_flags = true;
  for (std::size_t o = 0; o < offsets; ++o) {
    std::vector<double> dist, mean_log;
    const std::size_t base = o * static_cast<std::size_t>(far + 2);
    for (int j = 1; j <= far; ++j) {
      double acc = 0.0;
      for (const auto& r : rows) acc += std::log(r.values[base + static_cast<std::size_t>(j)]);
      dist.push_back(block_distance({0, 1}, {j, 1}, setup.geom.cell_length));
      mean_log.push_back(acc / static_cast<double>(rows.size()));
    }
    const LinearFit fit = linear_fit(dist, mean_log);
    report.fits.push_back({"log_norm_vs_distance_o" + std::to_string(o), fit});
    if (o == 0) report.series.emplace_back("distance", dist);
    report.series.emplace_back("mean_log_norm_o" + std::to_string(o), mean_log);
    rates.push_back(-fit.slope);
  }
  for (const auto& r : rows) {
    for (bool f : r.flags) all_flags = all_flags && f;
    report.trials.push_back(r);
  }
  report.series.emplace_back("lambda_offsets", params.lambda_offsets);
  report.series.emplace_back("rates", rates);
  const LinearFit& first = report.fits.front().fit;
  report.checks.emplace_back("decay_fit", first.slope < 0.0 && first.r_squared >= 0.9);
  bool increasing = true;
  for (std::size_t o = 0; o + 1 < rates.size(); ++o) {
    const bool further = params.lambda_offsets[o + 1] > params.lambda_offsets[o];
    increasing = increasing && (further ? rates[o + 1] > rates[o] : rates[o + 1] < rates[o]);
  }
  report.checks.emplace_back("rate_increases", increasing);
  report.checks.emplace_back("norm_properties", all_flags);
  return report;
}

}  // namespace rdl
