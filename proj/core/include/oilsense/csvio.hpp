#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace oilsense {

// Shortest round-trip decimal rendering (std::to_chars); the same routine is
// used for every artifact so hashes stay stable across writers.
std::string format_double(double value);

// Strict double parse: whole field must be consumed, non-finite rejected.
// Throws SchemaError with the offending text.
double parse_double(std::string_view field, std::string_view context);

long long parse_int(std::string_view field, std::string_view context);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Minimal CSV: comma separated, newline terminated records, no quoting (none
// of our fields ever contain commas).  Rejects ragged rows.
CsvTable read_csv(const std::string& path);

void write_text_file(const std::string& path, std::string_view content);

std::string read_text_file(const std::string& path);

bool file_exists(const std::string& path);

}  // namespace oilsense
