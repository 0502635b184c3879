#pragma once

#include <string>
#include <vector>

namespace kkm {

/// Reals in every CSV the library writes: 12 significant digits, "%.12g".
std::string format_real(double value);

/// Joins fields with commas; fields are written verbatim.
std::string csv_row(const std::vector<std::string>& fields);

/// Minimal reader for numeric CSV: skips a header row if its first field is
/// not a number; throws Error(Io) if the file cannot be opened.
std::vector<std::vector<double>> read_numeric_csv(const std::string& path);

}  // namespace kkm
