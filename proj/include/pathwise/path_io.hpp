#pragma once

#include "pathwise/paths.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace pathwise {

/// CSV with columns `t, mode_1, ..., mode_N`, numbers printed with 17 significant digits.
/// Each header line is written as `# <line>` before the column row.
void write_path_csv(std::ostream& os, const SampledPath& path,
                    const std::vector<std::string>& header_lines = {});
void write_path_csv(const std::string& file, const SampledPath& path,
                    const std::vector<std::string>& header_lines = {});

/// Reads the format above. Lines starting with '#' are skipped; the grid must be uniform.
SampledPath read_path_csv(std::istream& is);
SampledPath read_path_csv(const std::string& file);

/// printf("%.17g")
std::string format_number(double x);

}  // namespace pathwise
