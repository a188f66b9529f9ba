#pragma once

// Run configuration read from an INI file with sections [geometry],
// [manifold], [coupling], [disorder], [numerics], [experiment] and [cell],
// or from the "config" object of a previous report.json.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rdl/experiments.hpp"
#include "rdl/model.hpp"

namespace rdl {

struct RunConfig {
  LayerGeometry geom{1.0, 1.0, BoundaryKind::kNeumann, BoundaryKind::kNeumann};

  std::string manifold_kind = "circle";  // circle | separable_line
  double center_x = 0.5;
  double center_y = 0.5;  // also the height of a separable line
  double radius = 0.25;

  std::string f_kind = "constant";
  double f_const = 1.0;
  double t0 = 1.0;

  std::string density = "smoothed_uniform";  // smoothed_uniform | triangular
  double a = -1.0;
  std::uint64_t seed = 1;

  Numerics numerics;
  ExperimentParams experiment;
  std::vector<double> cell_etas{-0.01, -0.005, 0.0, 0.005, 0.01};
  double eps_sweep = 1e-2;

  std::string out_dir = "runs";

  Manifold manifold() const;
  CouplingFunction coupling() const;
  Disorder disorder() const;
  ModelSetup setup() const;
  // Experiment parameters with the run seed applied.
  ExperimentParams params() const;
};

/// Reads INI text or report.json text (detected by a leading '{').
/// Throws ParseError(line) on malformed input and ValidationError listing
/// every violated constraint.
RunConfig parse_config_text(std::string_view text);
RunConfig parse_config(const std::string& path);

/// All constraint violations; empty when the config is usable.
std::vector<std::string> config_violations(const RunConfig& config);
void validate_config(const RunConfig& config);

std::string config_to_json(const RunConfig& config);

}  // namespace rdl
