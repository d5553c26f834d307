#include "pathwise/run_config.hpp"

#include "pathwise/path_io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace pathwise {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(trim(v), &pos);
    if (pos != trim(v).size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return static_cast<long long>(x);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const std::string t = trim(v);
    if (!t.empty() && t[0] == '-') throw std::invalid_argument("negative");
    const auto x = std::stoull(t, &pos);
    if (pos != t.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an unsigned 64-bit integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!trim(item).empty()) out.push_back(trim(item));
  }
  return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split(v, ',')) out.push_back(to_double(key, s));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + format_number(v[k]);
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment.kind", [](RunConfig& c, const std::string&, const std::string& v) { c.experiment = trim(v); }},
      {"experiment.seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = to_u64(k, v); }},
      {"experiment.out", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = trim(v); }},
      {"params.hurst", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.hurst = to_double(k, v); }},
      {"params.beta", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.beta = to_double(k, v); }},
      {"params.beta_prime",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.params.beta_prime = to_double(k, v); }},
      {"params.alpha", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.alpha = to_double(k, v); }},
      {"operator.kind", [](RunConfig& c, const std::string&, const std::string& v) { c.operator_kind = trim(v); }},
      {"operator.n_modes",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.n_modes = static_cast<int>(to_int(k, v)); }},
      {"operator.length", [](RunConfig& c, const std::string& k, const std::string& v) { c.length = to_double(k, v); }},
      {"operator.trace_decay",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.trace_decay = to_double(k, v); }},
      {"operator.eigenvalues",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.eigenvalues = to_list(k, v); }},
      {"operator.trace_weights",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.trace_weights = to_list(k, v); }},
      {"grid.horizon", [](RunConfig& c, const std::string& k, const std::string& v) { c.horizon = to_double(k, v); }},
      {"grid.grid_pow",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.grid_pow = static_cast<int>(to_int(k, v)); }},
      {"problem.drift", [](RunConfig& c, const std::string&, const std::string& v) { c.drift = trim(v); }},
      {"problem.drift_scale",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.drift_scale = to_double(k, v); }},
      {"problem.kernel", [](RunConfig& c, const std::string&, const std::string& v) { c.kernel = trim(v); }},
      {"problem.kernel_table", [](RunConfig& c, const std::string&, const std::string& v) { c.kernel_table = trim(v); }},
      {"problem.kernel_psi", [](RunConfig& c, const std::string&, const std::string& v) { c.kernel_psi = trim(v); }},
      {"problem.quad_points",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.quad_points = static_cast<int>(to_int(k, v)); }},
      {"problem.u0", [](RunConfig& c, const std::string& k, const std::string& v) { c.u0 = to_list(k, v); }},
      {"solver.rho", [](RunConfig& c, const std::string& k, const std::string& v) { c.solver.rho = to_double(k, v); }},
      {"solver.rho_cap",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.solver.rho_cap = to_double(k, v); }},
      {"solver.fp_tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.solver.fp_tol = to_double(k, v); }},
      {"solver.max_iters",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.solver.max_iters = static_cast<int>(to_int(k, v)); }},
      {"solver.n_starts",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.solver.n_starts = static_cast<int>(to_int(k, v)); }},
      {"solver.distinct_tol",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.solver.distinct_tol = to_double(k, v); }},
      {"solver.perturbation_scale",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.solver.perturbation_scale = to_double(k, v); }},
      {"cocycle.pairs",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.cocycle_pairs.clear();
         for (const auto& p : split(v, ',')) {
           const auto ts = split(p, ':');
           if (ts.size() != 2) throw ConfigError(k + ": expected t:s pairs, got '" + p + "'");
           c.cocycle_pairs.emplace_back(to_double(k, ts[0]), to_double(k, ts[1]));
         }
       }},
      {"usc.t", [](RunConfig& c, const std::string& k, const std::string& v) { c.usc_t = to_double(k, v); }},
      {"usc.radii", [](RunConfig& c, const std::string& k, const std::string& v) { c.usc_radii = to_list(k, v); }},
      {"usc.samples",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.usc_samples = static_cast<int>(to_int(k, v)); }},
      {"usc.perturb_driver",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.usc_perturb_driver = to_bool(k, v); }},
      {"integrate.s", [](RunConfig& c, const std::string& k, const std::string& v) { c.integrate_s = to_double(k, v); }},
      {"integrate.t", [](RunConfig& c, const std::string& k, const std::string& v) { c.integrate_t = to_double(k, v); }},
      {"integrate.integrand", [](RunConfig& c, const std::string&, const std::string& v) { c.integrand = trim(v); }},
  };
  return table;
}

bool on_lattice(double t, double dt) { return std::abs(t / dt - std::round(t / dt)) < 1e-9; }

}  // namespace

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

RunConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  RunConfig cfg;
  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) throw ConfigError("key '" + section + "' outside of a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = table.find(full);
      if (it == table.end()) throw ConfigError("unknown config key '" + full + "'");
      it->second(cfg, full, value.get_value<std::string>());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config file '" + file + "'");
  return parse_config(in);
}

void RunConfig::validate() const {
  static const std::vector<std::string> kinds = {"sample-path", "integrate", "solve", "cocycle", "usc", "verify-all"};
  if (std::find(kinds.begin(), kinds.end(), experiment) == kinds.end())
    throw ConfigError("experiment.kind: unknown experiment '" + experiment + "'");
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  if (!(horizon > 0.0)) throw ConfigError("grid.horizon must be positive");
  if (grid_pow < 2 || grid_pow > 14) throw ConfigError("grid.grid_pow must lie in [2, 14]");
  if (operator_kind == "laplacian_1d") {
    if (n_modes < 1) throw ConfigError("operator.n_modes must be positive");
    if (!(length > 0.0)) throw ConfigError("operator.length must be positive");
  } else if (operator_kind == "explicit") {
    if (eigenvalues.empty()) throw ConfigError("operator.eigenvalues required for an explicit operator");
    if (!trace_weights.empty() && trace_weights.size() != eigenvalues.size())
      throw ConfigError("operator.trace_weights must match operator.eigenvalues in length");
  } else {
    throw ConfigError("operator.kind: unknown operator '" + operator_kind + "'");
  }
  try {
    (void)make_operator();
    named_scalar_map(drift, drift_scale);
    named_scalar_map(kernel_psi);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (kernel != "sin_sin_tanh" && kernel != "zero" && kernel != "table")
    throw ConfigError("problem.kernel: unknown kernel '" + kernel + "'");
  if (kernel == "table") {
    if (kernel_table.empty()) throw ConfigError("problem.kernel_table required for kernel = table");
    try {
      (void)make_kernel();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("problem.kernel_table: ") + e.what());
    }
  }
  const int N = operator_kind == "explicit" ? static_cast<int>(eigenvalues.size()) : n_modes;
  if (quad_points < N) throw ConfigError("problem.quad_points must be at least the number of modes");
  if (static_cast<int>(u0.size()) > N) throw ConfigError("problem.u0 has more entries than modes");
  try {
    solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  for (const auto& [t, s] : cocycle_pairs) {
    if (!(t > 0.0 && s > 0.0) || t + s > horizon + 1e-12 || !on_lattice(t, dt()) || !on_lattice(s, dt()))
      throw ConfigError("cocycle.pairs: each t:s must be positive grid times with t + s <= horizon");
  }
  if (!(usc_t > 0.0) || usc_t > horizon + 1e-12 || !on_lattice(usc_t, dt()))
    throw ConfigError("usc.t must be a grid time in (0, horizon]");
  if (usc_radii.empty()) throw ConfigError("usc.radii must not be empty");
  for (std::size_t k = 0; k < usc_radii.size(); ++k) {
    if (!(usc_radii[k] > 0.0) || (k > 0 && usc_radii[k] >= usc_radii[k - 1]))
      throw ConfigError("usc.radii must be positive and decreasing");
  }
  if (usc_samples < 1) throw ConfigError("usc.samples must be positive");
  if (!(integrate_s >= 0.0 && integrate_s < integrate_t && integrate_t <= horizon + 1e-12) ||
      !on_lattice(integrate_s, dt()) || !on_lattice(integrate_t, dt()))
    throw ConfigError("integrate.s, integrate.t must be grid times with 0 <= s < t <= horizon");
  if (integrand != "fbm" && integrand != "time" && integrand != "driver")
    throw ConfigError("integrate.integrand: unknown integrand '" + integrand + "'");
}

std::vector<std::string> RunConfig::canonical_lines() const {
  std::string pairs;
  for (std::size_t k = 0; k < cocycle_pairs.size(); ++k) {
    pairs += (k ? "," : "") + format_number(cocycle_pairs[k].first) + ":" + format_number(cocycle_pairs[k].second);
  }
  std::vector<std::string> lines = {
      "experiment.kind = " + experiment,
      "experiment.seed = " + std::to_string(seed),
      "params.hurst = " + format_number(params.hurst),
      "params.beta = " + format_number(params.beta),
      "params.beta_prime = " + format_number(params.beta_prime),
      "params.alpha = " + format_number(params.alpha),
      "operator.kind = " + operator_kind,
      "operator.n_modes = " + std::to_string(n_modes),
      "operator.length = " + format_number(length),
      "operator.trace_decay = " + format_number(trace_decay),
      "operator.eigenvalues = " + join(eigenvalues),
      "operator.trace_weights = " + join(trace_weights),
      "grid.horizon = " + format_number(horizon),
      "grid.grid_pow = " + std::to_string(grid_pow),
      "problem.drift = " + drift,
      "problem.drift_scale = " + format_number(drift_scale),
      "problem.kernel = " + kernel,
      "problem.kernel_table = " + kernel_table,
      "problem.kernel_psi = " + kernel_psi,
      "problem.quad_points = " + std::to_string(quad_points),
      "problem.u0 = " + join(u0),
      "solver.rho = " + format_number(solver.rho),
      "solver.rho_cap = " + format_number(solver.rho_cap),
      "solver.fp_tol = " + format_number(solver.fp_tol),
      "solver.max_iters = " + std::to_string(solver.max_iters),
      "solver.n_starts = " + std::to_string(solver.n_starts),
      "solver.distinct_tol = " + format_number(solver.distinct_tol),
      "solver.perturbation_scale = " + format_number(solver.perturbation_scale),
      "cocycle.pairs = " + pairs,
      "usc.t = " + format_number(usc_t),
      "usc.radii = " + join(usc_radii),
      "usc.samples = " + std::to_string(usc_samples),
      "usc.perturb_driver = " + std::string(usc_perturb_driver ? "true" : "false"),
      "integrate.s = " + format_number(integrate_s),
      "integrate.t = " + format_number(integrate_t),
      "integrate.integrand = " + integrand,
  };
  std::sort(lines.begin(), lines.end());
  return lines;
}

std::string RunConfig::hash() const {
  std::string all;
  for (const auto& l : canonical_lines()) all += l + "\n";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(all)));
  return buf;
}

SpectralOperator RunConfig::make_operator() const {
  if (operator_kind == "explicit") {
    Eigen::VectorXd lam = Eigen::Map<const Eigen::VectorXd>(eigenvalues.data(), static_cast<Eigen::Index>(eigenvalues.size()));
    Eigen::VectorXd q(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      q(i) = trace_weights.empty() ? std::pow(static_cast<double>(i + 1), -trace_decay) : trace_weights[static_cast<std::size_t>(i)];
    }
    return SpectralOperator(lam, q);
  }
  return SpectralOperator::laplacian_1d(n_modes, length, trace_decay);
}

SpectralField RunConfig::initial_value() const {
  SpectralField u = SpectralField::Zero(make_operator().n_modes());
  for (std::size_t i = 0; i < u0.size(); ++i) u(static_cast<Eigen::Index>(i)) = u0[i];
  return u;
}

KernelSpec RunConfig::make_kernel() const {
  if (kernel == "zero") return zero_kernel(quad_points);
  if (kernel == "table") return tabulated_kernel(kernel_table, named_scalar_map(kernel_psi));
  return default_heat_kernel(quad_points);
}

ProblemSpec RunConfig::make_problem() const {
  const SpectralOperator op = make_operator();
  const KernelSpec k = make_kernel();
  ProblemSpec spec = build_heat_problem(named_scalar_map(drift, drift_scale), k, params, horizon, n_steps(),
                                        op.n_modes(), trace_decay);
  spec.op = op;  // explicit spectra replace the Laplacian; the sine grid still carries F and G
  return spec;
}

}  // namespace pathwise
