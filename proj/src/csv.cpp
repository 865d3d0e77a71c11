#include "smokebench/csv.hpp"

#include <charconv>
#include <cstdio>
#include <ostream>

#include "smokebench/core.hpp"

namespace smokebench {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string csv_field(std::string_view raw) {
  const bool needs_quotes = raw.find_first_of(",\"") != std::string_view::npos;
  if (!needs_quotes) return std::string(raw);
  std::string out;
  out.reserve(raw.size() + 2);
  out.push_back('"');
  for (char c : raw) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv_row(std::ostream& out, std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.put(',');
    out << csv_field(fields[i]);
  }
  out.put('\n');
}

std::vector<std::string> parse_csv_line(const std::string& line, const std::string& context) {
  std::vector<std::string> fields;
  std::string current;
  bool in_quotes = false;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      if (!current.empty()) throw DataError(context + ": stray quote");
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
    ++i;
  }
  if (in_quotes) throw DataError(context + ": unterminated quote");
  fields.push_back(std::move(current));
  return fields;
}

CsvReader::CsvReader(const std::filesystem::path& path,
                     const std::vector<std::string>& expected_header)
    : path_(path), in_(path) {
  if (!in_) throw DataError(path.string() + ": cannot open");
  std::string line;
  if (!std::getline(in_, line)) throw DataError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = parse_csv_line(line, path.string() + " row 1");
  if (header != expected_header) {
    std::string want;
    for (std::size_t i = 0; i < expected_header.size(); ++i) {
      if (i) want.push_back(',');
      want += expected_header[i];
    }
    throw DataError(path.string() + ": expected header '" + want + "'");
  }
  n_fields_ = expected_header.size();
}

std::string CsvReader::context() const {
  return path_.string() + " row " + std::to_string(row_);
}

bool CsvReader::next(std::vector<std::string>& fields) {
  std::string line;
  while (std::getline(in_, line)) {
    ++row_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;  // tolerate a trailing blank line
    fields = parse_csv_line(line, context());
    if (fields.size() != n_fields_) {
      throw DataError(context() + ": expected " + std::to_string(n_fields_) + " fields, got " +
                      std::to_string(fields.size()));
    }
    return true;
  }
  return false;
}

}  // namespace smokebench
