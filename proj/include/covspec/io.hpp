#pragma once

#include <span>
#include <string>
#include <vector>

#include "covspec/gof.hpp"

namespace covspec {

/// Read a numeric CSV: one observation per row, d columns, optional header
/// line (skipped when its first field is not numeric).
Sample read_sample_csv(const std::string& path, int expected_d);

/// RFC 4180 single-column CSV with a header line and CRLF line endings.
std::string draws_to_csv(std::span<const double> draws, const std::string& column);

/// Write text to a path, or to stdout when path is empty or "-".
void write_output(const std::string& path, const std::string& text);

}  // namespace covspec
