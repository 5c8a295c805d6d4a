#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dac::harness {

inline constexpr int kCsvSchemaVersion = 1;

/// First line of every CSV the project writes: "# dac-csv-schema: <kind> v1".
std::string schema_line(std::string_view kind);

/// Consumes the schema line and throws ValidationError when the kind or the
/// version is not the one this build understands.
void expect_schema(std::istream& in, std::string_view kind);

/// Shortest text that round-trips the double exactly ("%.17g").
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
};

/// Reads a schema-tagged CSV with a column header line.
CsvTable read_csv(std::istream& in, std::string_view kind);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace dac::harness
