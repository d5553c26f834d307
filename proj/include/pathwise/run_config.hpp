#pragma once

#include "pathwise/example_heat.hpp"
#include "pathwise/mild_solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pathwise {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a run needs. Parsed from an INI file; see README for the keys.
struct RunConfig {
  std::string experiment = "verify-all";
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  HolderParams params;

  std::string operator_kind = "laplacian_1d";  ///< or "explicit"
  int n_modes = 16;
  double length = 3.14159265358979323846;
  double trace_decay = 2.0;
  std::vector<double> eigenvalues;
  std::vector<double> trace_weights;

  double horizon = 1.0;
  int grid_pow = 8;

  std::string drift = "tanh";
  double drift_scale = 1.0;
  std::string kernel = "sin_sin_tanh";  ///< "sin_sin_tanh", "zero" or "table"
  std::string kernel_table;
  std::string kernel_psi = "tanh";
  int quad_points = 256;
  std::vector<double> u0 = {1.0, 0.5, -0.3};

  SolverConfig solver;

  std::vector<std::pair<double, double>> cocycle_pairs = {{0.25, 0.25}, {0.5, 0.25}};

  double usc_t = 1.0;
  std::vector<double> usc_radii = {0.1, 0.01, 0.001};
  int usc_samples = 10;
  bool usc_perturb_driver = false;

  double integrate_s = 0.0;
  double integrate_t = 1.0;
  std::string integrand = "fbm";  ///< "fbm", "time" or "driver"

  int n_steps() const { return 1 << grid_pow; }
  double dt() const { return horizon / n_steps(); }

  /// Throws ConfigError naming the offending key.
  void validate() const;
  /// Sorted `section.key = value` lines of every effective setting.
  std::vector<std::string> canonical_lines() const;
  /// FNV-1a 64 of the canonical lines, as 16 hex digits.
  std::string hash() const;

  SpectralOperator make_operator() const;
  SpectralField initial_value() const;
  KernelSpec make_kernel() const;
  ProblemSpec make_problem() const;
};

/// Parses INI text; unknown sections or keys are rejected.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& file);

std::uint64_t fnv1a64(const std::string& data);

}  // namespace pathwise
