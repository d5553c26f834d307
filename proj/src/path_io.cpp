#include "pathwise/path_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pathwise {

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_path_csv(std::ostream& os, const SampledPath& path,
                    const std::vector<std::string>& header_lines) {
  for (const auto& line : header_lines) os << "# " << line << '\n';
  os << 't';
  for (int i = 0; i < path.n_modes(); ++i) os << ",mode_" << (i + 1);
  os << '\n';
  for (Eigen::Index j = 0; j < path.n_nodes(); ++j) {
    os << format_number(path.time(j));
    for (int i = 0; i < path.n_modes(); ++i) os << ',' << format_number(path.values()(j, i));
    os << '\n';
  }
}

void write_path_csv(const std::string& file, const SampledPath& path,
                    const std::vector<std::string>& header_lines) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot open " + file + " for writing");
  write_path_csv(os, path, header_lines);
}

SampledPath read_path_csv(std::istream& is) {
  std::string line;
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  bool have_columns = false;
  int n_modes = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!have_columns) {
      std::istringstream hs(line);
      std::string cell;
      std::getline(hs, cell, ',');
      if (cell != "t") throw std::runtime_error("path CSV: first column must be 't'");
      while (std::getline(hs, cell, ',')) ++n_modes;
      if (n_modes == 0) throw std::runtime_error("path CSV: no mode columns");
      have_columns = true;
      continue;
    }
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != n_modes + 1)
      throw std::runtime_error("path CSV: row with wrong number of columns");
    times.push_back(row[0]);
    rows.emplace_back(row.begin() + 1, row.end());
  }
  if (rows.size() < 2) throw std::runtime_error("path CSV: need at least 2 rows");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t j = 1; j < times.size(); ++j) {
    if (std::abs(times[j] - times[j - 1] - dt) > 1e-9 * dt)
      throw std::runtime_error("path CSV: time grid is not uniform");
  }
  const double start = std::round(times.front() / dt);
  if (std::abs(times.front() - start * dt) > 1e-9 * dt)
    throw std::runtime_error("path CSV: first time is not a multiple of dt");
  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), n_modes);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (int i = 0; i < n_modes; ++i) values(static_cast<Eigen::Index>(j), i) = rows[j][i];
  }
  return SampledPath(dt, std::move(values), static_cast<std::int64_t>(start));
}

SampledPath read_path_csv(const std::string& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot open " + file);
  return read_path_csv(is);
}

}  // namespace pathwise
