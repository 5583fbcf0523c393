#include "dhde/csv.hpp"

namespace dhde::csv {

Reader::Reader(std::istream& in, char sep) : in_(in), sep_(sep) {}

std::optional<Record> Reader::next() {
  if (!bom_checked_) {
    bom_checked_ = true;
    if (in_.peek() == 0xEF) {
      char bom[3];
      in_.read(bom, 3);
      if (!(static_cast<unsigned char>(bom[1]) == 0xBB && static_cast<unsigned char>(bom[2]) == 0xBF)) {
        for (int i = 2; i >= 0; --i) in_.putback(bom[i]);
      }
    }
  }

  Record rec;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int c;
  while ((c = in_.get()) != std::char_traits<char>::eof()) {
    if (!any) {
      any = true;
      rec.line = lines_ + 1;
    }
    const char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++lines_;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      in_quotes = true;
    } else if (ch == sep_) {
      rec.fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\r') {
      if (in_.peek() == '\n') continue;
      // Bare CR ends a record too.
      ++lines_;
      rec.fields.push_back(std::move(field));
      ++records_;
      return rec;
    } else if (ch == '\n') {
      ++lines_;
      rec.fields.push_back(std::move(field));
      ++records_;
      return rec;
    } else {
      field.push_back(ch);
    }
  }
  if (!any) return std::nullopt;
  ++lines_;  // final line without a trailing newline
  rec.fields.push_back(std::move(field));
  ++records_;
  return rec;
}

std::optional<std::size_t> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

Table read_table(std::istream& in, char sep) {
  Reader reader(in, sep);
  Table t;
  if (auto h = reader.next()) t.header = std::move(h->fields);
  while (auto r = reader.next()) {
    // Skip fully empty lines.
    if (r->fields.size() == 1 && r->fields[0].empty()) continue;
    t.rows.push_back(std::move(*r));
  }
  t.physical_lines = reader.physical_lines();
  return t;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields, char sep) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.put(sep);
    const std::string& f = fields[i];
    if (f.find_first_of(std::string{sep, '"', '\n', '\r'}) == std::string::npos) {
      out << f;
      continue;
    }
    out.put('"');
    for (char ch : f) {
      if (ch == '"') out.put('"');
      out.put(ch);
    }
    out.put('"');
  }
  out.put('\n');
}

}  // namespace dhde::csv
