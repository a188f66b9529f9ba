#pragma once

// Subcommand dispatch shared by the command-line tool and the tests.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rdl/config.hpp"
#include "rdl/error.hpp"

namespace rdl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitUsage = 64;

const std::vector<std::string>& subcommand_names();
bool is_experiment(const std::string& subcommand);

struct RunOptions {
  std::string subcommand;
  std::string config_path;  // empty: built-in defaults
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool plot = false;
  bool dump_matrices = false;

  // cell
  std::vector<double> etas;
  bool trace = false;
  // box
  std::optional<int> cells;
  std::optional<double> eps;
  std::string omega_file;
  int eigenvalues = 1;
  // oracle
  std::optional<double> height;
  std::vector<double> sigmas;
  bool fem = false;
};

int exit_code_for(ErrorCode code);

/// Loads and overrides the configuration, then dispatches. Never throws;
/// diagnostics go to err. The run directory of an experiment is stored in
/// *run_dir when given.
int run(const RunOptions& options, std::ostream& out, std::ostream& err,
        std::filesystem::path* run_dir = nullptr);

/// Dispatch on an already validated configuration. Throws rdl::Error.
int run_config(const RunConfig& config, const RunOptions& options, std::ostream& out,
               std::filesystem::path* run_dir = nullptr);

std::string usage_text();

}  // namespace rdl
