#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace thlda {

using CsvCell = std::variant<std::int64_t, double, std::string>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<CsvCell>> rows;
};

// Shortest round-trip text; integral doubles keep a trailing ".0".
std::string format_double(double value);
std::string format_cell(const CsvCell& cell);

// Throws std::invalid_argument for empty or ragged tables, IoError when the
// file cannot be written.
void write_report(const CsvTable& table, const std::filesystem::path& path);

// Minimal reader for files written by write_report (no quoting).
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace thlda
