#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dosml {

// Integral values below 2^53 print as integers; everything else uses six
// significant digits. NaN prints as "nan".
std::string format_number(double v);
// Shortest representation that parses back to the same double.
std::string format_exact(double v);

// Writes through a sibling temp file and renames it into place.
void write_file_atomic(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

std::vector<std::string_view> split_csv_line(std::string_view line);

}  // namespace dosml
