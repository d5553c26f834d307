#include "pathwise/example_heat.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace pathwise {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

SineGrid::SineGrid(int n_points, int n_modes) {
  if (n_points < 1 || n_modes < 1) throw std::invalid_argument("SineGrid: need positive sizes");
  if (n_modes > n_points) throw std::invalid_argument("SineGrid: more modes than grid points");
  nodes_.resize(n_points);
  weight_ = kPi / (n_points + 1);
  basis_.resize(n_points, n_modes);
  const double c = std::sqrt(2.0 / kPi);
  for (int m = 0; m < n_points; ++m) {
    nodes_(m) = (m + 1) * kPi / (n_points + 1);
    for (int i = 0; i < n_modes; ++i) basis_(m, i) = c * std::sin((i + 1) * nodes_(m));
  }
}

ScalarMap named_scalar_map(const std::string& name, double scale) {
  const double a = std::abs(scale);
  if (name == "zero") return {name, [](double) { return 0.0; }, 0.0, 0.0};
  if (name == "identity") return {name, [scale](double z) { return scale * z; }, a, 0.0};
  if (name == "tanh") return {name, [scale](double z) { return scale * std::tanh(z); }, a, 0.0};
  if (name == "sin") return {name, [scale](double z) { return scale * std::sin(z); }, a, 0.0};
  if (name == "clip") return {name, [scale](double z) { return scale * std::clamp(z, -1.0, 1.0); }, a, 0.0};
  throw std::invalid_argument("unknown scalar map '" + name + "'");
}

SpectralField nemytskii_F(const SineGrid& grid, const ScalarMap& f, const SpectralField& u, int* violations) {
  if (u.size() != grid.n_modes()) throw std::invalid_argument("nemytskii_F: field size does not match grid");
  Eigen::VectorXd phys = grid.to_physical(u);
  int bad = 0;
  for (Eigen::Index m = 0; m < phys.size(); ++m) {
    const double z = phys(m);
    phys(m) = f.fn(z);
    if (std::abs(phys(m)) > f.growth + f.lipschitz * std::abs(z) + 1e-12) ++bad;
  }
  if (violations) *violations = bad;
  return grid.project(phys);
}

SpectralField nemytskii_F(const ScalarMap& f, const SpectralField& u) {
  return nemytskii_F(SineGrid(256, static_cast<int>(u.size())), f, u);
}

// ---------------------------------------------------------------------------

void KernelSpec::validate() const {
  if (!is_product() && !g) throw std::invalid_argument("KernelSpec '" + name + "': no kernel function");
  if (!lipschitz_profile) throw std::invalid_argument("KernelSpec '" + name + "': no Lipschitz profile");
  if (n_points < 1) throw std::invalid_argument("KernelSpec '" + name + "': no quadrature points");
}

KernelSpec KernelSpec::product(std::string name, std::function<double(double, double)> k,
                               std::function<double(double)> psi, std::function<double(double)> lipschitz,
                               int n_points) {
  KernelSpec s;
  s.name = std::move(name);
  s.spatial = std::move(k);
  s.profile = std::move(psi);
  s.lipschitz_profile = std::move(lipschitz);
  s.n_points = n_points;
  return s;
}

KernelSpec KernelSpec::general(std::string name, std::function<double(double, double, double)> g,
                               std::function<double(double)> lipschitz, int n_points) {
  KernelSpec s;
  s.name = std::move(name);
  s.g = std::move(g);
  s.lipschitz_profile = std::move(lipschitz);
  s.n_points = n_points;
  return s;
}

KernelSpec default_heat_kernel(int n_points) {
  return KernelSpec::product(
      "sin_sin_tanh", [](double x, double y) { return 0.1 * std::sin(x) * std::sin(y); },
      [](double z) { return std::tanh(z); }, [](double x) { return 0.1 * std::sin(x); }, n_points);
}

KernelSpec zero_kernel(int n_points) {
  return KernelSpec::product(
      "zero", [](double, double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; },
      n_points);
}

KernelSpec tabulated_kernel(const std::string& csv_file, const ScalarMap& psi) {
  std::ifstream in(csv_file);
  if (!in) throw std::runtime_error("tabulated_kernel: cannot open " + csv_file);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  const auto M = static_cast<int>(rows.size());
  if (M == 0) throw std::runtime_error("tabulated_kernel: empty table in " + csv_file);
  auto table = std::make_shared<Eigen::MatrixXd>(M, M);
  for (int m = 0; m < M; ++m) {
    if (static_cast<int>(rows[m].size()) != M)
      throw std::runtime_error("tabulated_kernel: table in " + csv_file + " is not square");
    for (int l = 0; l < M; ++l) (*table)(m, l) = rows[m][l];
  }
  // values live at the sine nodes x_m = (m+1) pi / (M+1)
  auto index = [M](double x) {
    const auto m = static_cast<int>(std::lround(x * (M + 1) / kPi)) - 1;
    return std::clamp(m, 0, M - 1);
  };
  Eigen::VectorXd rowmax = table->cwiseAbs().rowwise().maxCoeff();
  const double lip = psi.lipschitz;
  return KernelSpec::product(
      "table:" + csv_file, [table, index](double x, double y) { return (*table)(index(x), index(y)); }, psi.fn,
      [rowmax, index, lip](double x) { return lip * rowmax(index(x)); }, M);
}

// ---------------------------------------------------------------------------

KernelOperator::KernelOperator(KernelSpec spec, int n_modes)
    : spec_(std::move(spec)), grid_((spec_.validate(), spec_.n_points), n_modes) {
  if (spec_.is_product()) {
    const int M = grid_.n_points();
    Eigen::MatrixXd k(M, M);
    for (int m = 0; m < M; ++m) {
      for (int l = 0; l < M; ++l) k(m, l) = spec_.spatial(grid_.nodes()(m), grid_.nodes()(l));
    }
    spatial_proj_ = grid_.weight() * (grid_.basis().transpose() * k);
  }
}

HSMatrix KernelOperator::operator()(const SpectralField& u) const {
  if (u.size() != grid_.n_modes()) throw std::invalid_argument("kernel_G: field size does not match grid");
  const Eigen::VectorXd phys = grid_.to_physical(u);
  const int M = grid_.n_points();
  const double w = grid_.weight();
  if (spec_.is_product()) {
    Eigen::VectorXd psi(M);
    for (int l = 0; l < M; ++l) psi(l) = w * spec_.profile(phys(l));
    return spatial_proj_ * psi.asDiagonal() * grid_.basis();
  }
  Eigen::MatrixXd k(M, M);
  for (int m = 0; m < M; ++m) {
    for (int l = 0; l < M; ++l) k(m, l) = spec_.g(grid_.nodes()(m), grid_.nodes()(l), phys(l));
  }
  return (w * w) * (grid_.basis().transpose() * k * grid_.basis());
}

double KernelOperator::lipschitz_norm() const {
  Eigen::VectorXd l(grid_.n_points());
  for (int m = 0; m < grid_.n_points(); ++m) l(m) = spec_.lipschitz_profile(grid_.nodes()(m));
  return grid_.norm(l);
}

double KernelOperator::parseval_bound(const SpectralField& u) const {
  const Eigen::VectorXd phys = grid_.to_physical(u);
  const int M = grid_.n_points();
  double acc = 0.0;
  for (int m = 0; m < M; ++m) {
    for (int l = 0; l < M; ++l) {
      const double v = spec_.value(grid_.nodes()(m), grid_.nodes()(l), phys(l));
      acc += v * v;
    }
  }
  return grid_.weight() * grid_.weight() * acc;
}

HSMatrix kernel_G(const KernelSpec& spec, const SpectralField& u) {
  return KernelOperator(spec, static_cast<int>(u.size()))(u);
}

LipschitzCheck check_kernel_profile(const KernelSpec& spec, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, kPi), val(-5.0, 5.0);
  LipschitzCheck out;
  out.samples = samples;
  for (int k = 0; k < samples; ++k) {
    const double x = pos(rng), y = pos(rng), z1 = val(rng), z2 = val(rng);
    const double lhs = std::abs(spec.value(x, y, z1) - spec.value(x, y, z2));
    const double rhs = spec.lipschitz_profile(x) * std::abs(z1 - z2);
    if (lhs > rhs + 1e-12) ++out.violations;
    if (rhs > 0.0) out.worst_ratio = std::max(out.worst_ratio, lhs / rhs);
  }
  return out;
}

LipschitzCheck check_hs_lipschitz(const KernelOperator& op, int samples, std::uint64_t seed, double slack) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> mag(-2.0, 1.0);
  const int N = op.grid().n_modes();
  auto random_field = [&] {
    SpectralField u(N);
    for (int i = 0; i < N; ++i) u(i) = normal(rng) / (i + 1);
    return SpectralField(u * (std::pow(10.0, mag(rng)) / u.norm()));
  };
  const double lip = op.lipschitz_norm();
  LipschitzCheck out;
  out.samples = samples;
  for (int k = 0; k < samples; ++k) {
    const SpectralField u1 = random_field(), u2 = random_field();
    const double lhs = (op(u1) - op(u2)).norm();
    const double rhs = lip * (u1 - u2).norm();
    if (lhs > rhs + slack) ++out.violations;
    if (rhs > 0.0) out.worst_ratio = std::max(out.worst_ratio, lhs / rhs);
  }
  return out;
}

ProblemSpec build_heat_problem(const ScalarMap& f, const KernelSpec& kernel, const HolderParams& params,
                               double horizon, int n_steps, int n_modes, double trace_decay) {
  params.validate();
  kernel.validate();
  if (!f.fn) throw std::invalid_argument("build_heat_problem: missing drift function");
  ProblemSpec spec;
  spec.op = SpectralOperator::laplacian_1d(n_modes, kPi, trace_decay);
  spec.params = params;
  spec.horizon = horizon;
  spec.n_steps = n_steps;
  auto grid = std::make_shared<const SineGrid>(kernel.n_points, n_modes);
  if (f.name != "zero") {
    spec.drift = [grid, f](const SpectralField& u) { return nemytskii_F(*grid, f, u); };
  }
  spec.c_F = f.growth * std::sqrt(kPi);
  spec.L_F = f.lipschitz;
  auto op = std::make_shared<const KernelOperator>(kernel, n_modes);
  if (kernel.name != "zero") {
    spec.diffusion = [op](const SpectralField& u) { return (*op)(u); };
  }
  spec.L_G = op->lipschitz_norm();
  spec.c_G = (*op)(SpectralField::Zero(n_modes)).norm();
  spec.validate();
  return spec;
}

}  // namespace pathwise
