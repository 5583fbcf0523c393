#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace dhde::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // physical line on which the record starts (1-based)
};

// RFC 4180 reader: quoted fields may contain separators, doubled quotes and
// embedded newlines. CRLF and a leading UTF-8 BOM are accepted.
class Reader {
public:
  explicit Reader(std::istream& in, char sep = ',');

  std::optional<Record> next();

  std::size_t physical_lines() const noexcept { return lines_; }
  std::size_t records() const noexcept { return records_; }

private:
  std::istream& in_;
  char sep_;
  std::size_t lines_ = 0;
  std::size_t records_ = 0;
  bool bom_checked_ = false;
};

// Header row plus data rows with column lookup by name.
struct Table {
  std::vector<std::string> header;
  std::vector<Record> rows;
  std::size_t physical_lines = 0;

  // Index of the column whose header equals name, if any.
  std::optional<std::size_t> column(std::string_view name) const;
};

Table read_table(std::istream& in, char sep = ',');

void write_row(std::ostream& out, const std::vector<std::string>& fields, char sep = ',');

}  // namespace dhde::csv
