#include "thlda/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "thlda/errors.hpp"

namespace thlda {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("double formatting failed");
  std::string text(buf, ptr);
  if (text.find_first_of(".e") == std::string::npos) text += ".0";
  return text;
}

std::string format_cell(const CsvCell& cell) {
  struct Visitor {
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(const std::string& v) const {
      if (v.find_first_of(",\n\"") != std::string::npos) {
        throw std::invalid_argument("csv cell contains a separator: " + v);
      }
      return v;
    }
  };
  return std::visit(Visitor{}, cell);
}

void write_report(const CsvTable& table, const std::filesystem::path& path) {
  if (table.rows.empty()) throw std::invalid_argument("report has no rows");
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw std::invalid_argument("report row width differs from header width");
    }
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    out << (i ? "," : "") << table.header[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

CsvCell parse_cell(const std::string& text) {
  std::int64_t i = 0;
  auto [p1, e1] = std::from_chars(text.data(), text.data() + text.size(), i);
  if (e1 == std::errc() && p1 == text.data() + text.size()) return i;
  double d = 0.0;
  auto [p2, e2] = std::from_chars(text.data(), text.data() + text.size(), d);
  if (e2 == std::errc() && p2 == text.data() + text.size()) return d;
  return text;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      table.header = split_commas(line);
      continue;
    }
    auto fields = split_commas(line);
    if (fields.size() != table.header.size()) throw ParseError("ragged csv row", line_no);
    std::vector<CsvCell> row;
    for (auto& f : fields) row.push_back(parse_cell(f));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace thlda
