#include "dac/harness/csv.hpp"

#include "dac/common.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace dac::harness {

namespace {

constexpr std::string_view kPrefix = "# dac-csv-schema: ";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string schema_line(std::string_view kind) {
  return std::string(kPrefix) + std::string(kind) + " v" + std::to_string(kCsvSchemaVersion);
}

void expect_schema(std::istream& in, std::string_view kind) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("CSV is empty; expected a schema line");
  if (line.rfind(kPrefix, 0) != 0) throw ValidationError("CSV lacks a schema line: " + line);
  if (line != schema_line(kind)) throw ValidationError("unsupported CSV schema: " + line);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ValidationError("CSV has no column " + std::string(name));
}

double CsvTable::number(std::size_t row, std::string_view name) const {
  return std::stod(rows.at(row).at(column(name)));
}

CsvTable read_csv(std::istream& in, std::string_view kind) {
  expect_schema(in, kind);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("CSV lacks a column header");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.header.size()) throw ValidationError("CSV row width does not match header: " + line);
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    out << fields[i];
  }
  out << '\n';
}

}  // namespace dac::harness
