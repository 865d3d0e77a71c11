#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace smokebench {

// Shortest decimal form that parses back to the identical double (writers use
// this wherever a file must round-trip exactly).
std::string format_double(double v);
std::string format_fixed(double v, int decimals);

// RFC-4180 style quoting; embedded newlines are not supported.
std::string csv_field(std::string_view raw);
void write_csv_row(std::ostream& out, std::span<const std::string> fields);
std::vector<std::string> parse_csv_line(const std::string& line, const std::string& context);

// Line-oriented reader with a mandatory exact header. Row numbers count the
// header as row 1, so diagnostics match file line numbers.
class CsvReader {
 public:
  CsvReader(const std::filesystem::path& path, const std::vector<std::string>& expected_header);

  // Advances to the next data row; false at end of file. Throws DataError on a
  // malformed row or a field-count mismatch.
  bool next(std::vector<std::string>& fields);

  int row() const { return row_; }
  std::string context() const;

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  int row_ = 1;
  std::size_t n_fields_ = 0;
};

}  // namespace smokebench
