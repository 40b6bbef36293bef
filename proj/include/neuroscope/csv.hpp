#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace neuroscope::csv {

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;

  /// Column position by header name; throws ValidationError if absent.
  std::size_t column(std::string_view name) const;
};

// Shortest representation that parses back to the same double.
std::string format_double(double v);
std::string format_float(float v);

double parse_double(std::string_view s);
float parse_float(std::string_view s);
long long parse_int(std::string_view s);

/// RFC 4180 quoting for fields holding commas, quotes, or newlines.
std::string escape(std::string_view field);

void write(const std::filesystem::path& path, const Table& table);
Table read(const std::filesystem::path& path);
Table parse(std::string_view text);
std::string to_string(const Table& table);

}  // namespace neuroscope::csv
