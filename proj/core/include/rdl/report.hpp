#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "rdl/config.hpp"
#include "rdl/experiments.hpp"

namespace rdl {

/// 17 significant digits, '.' decimal separator.
std::string format_double(double value);

/// Header trial,seed,N,eps,lambda_1 followed by the value and flag columns.
void write_raw_csv(const ExperimentReport& report, std::ostream& out);

/// The full report with the run configuration under "config".
std::string report_to_json(const ExperimentReport& report, const RunConfig& config);

/// Probabilities with interval bars when the report has them, otherwise the
/// first two series against each other, otherwise lambda_1 per trial.
void write_plot_svg(const ExperimentReport& report, std::ostream& out);

/// <parent>/<name>-<UTC timestamp>, with a numeric suffix if taken. Created.
std::filesystem::path make_run_directory(const std::filesystem::path& parent, const std::string& name);

/// Writes report.json, raw.csv and, if requested, plot.svg into dir.
void write_run_outputs(const ExperimentReport& report, const RunConfig& config, const std::filesystem::path& dir,
                       bool plot);

}  // namespace rdl
