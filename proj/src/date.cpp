#include "dhde/date.hpp"

#include <cctype>
#include <cstdio>

namespace dhde {
namespace {

bool digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
  if (pos + n > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

// Parses the leading "YYYY-MM-DD" and reports where the date part ends.
std::optional<Date> parse_day_prefix(std::string_view s, std::size_t& end) {
  int y = 0, m = 0, d = 0;
  if (!digits(s, 0, 4, y)) return std::nullopt;
  if (s.size() < 5 || (s[4] != '-' && s[4] != '/')) return std::nullopt;
  const char sep = s[4];
  // Month and day may be one or two digits ("2025/1/5" appears in exports).
  std::size_t pos = 5;
  auto read_component = [&](int& out) {
    std::size_t start = pos;
    int v = 0;
    while (pos < s.size() && pos - start < 2 && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      v = v * 10 + (s[pos] - '0');
      ++pos;
    }
    out = v;
    return pos > start;
  };
  if (!read_component(m)) return std::nullopt;
  if (pos >= s.size() || s[pos] != sep) return std::nullopt;
  ++pos;
  if (!read_component(d)) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  end = pos;
  return sys_days{ymd};
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  std::size_t end = 0;
  auto d = parse_day_prefix(text, end);
  if (!d) return std::nullopt;
  if (end != text.size() && text[end] != ' ' && text[end] != 'T') return std::nullopt;
  return d;
}

std::optional<Date> parse_timestamp_day(std::string_view text) {
  std::size_t end = 0;
  auto d = parse_day_prefix(text, end);
  if (!d) return std::nullopt;
  if (end == text.size()) return d;
  if (text[end] != ' ' && text[end] != 'T') return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  std::size_t pos = end + 1;
  // Hour may be a single digit in some exports ("2025/01/01 0:05").
  std::size_t hour_len = (pos + 1 < text.size() && text[pos + 1] == ':') ? 1 : 2;
  if (!digits(text, pos, hour_len, hh)) return std::nullopt;
  pos += hour_len;
  if (pos >= text.size() || text[pos] != ':') return std::nullopt;
  if (!digits(text, pos + 1, 2, mm)) return std::nullopt;
  pos += 3;
  if (pos < text.size() && text[pos] == ':') {
    if (!digits(text, pos + 1, 2, ss)) return std::nullopt;
    pos += 3;
  }
  if (hh > 24 || mm > 59 || ss > 60) return std::nullopt;
  // Anything left must be a fractional second or a UTC offset.
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '+' || c == '-' ||
          c == ':' || c == 'Z')) {
      return std::nullopt;
    }
  }
  return d;
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Date make_date(int y, unsigned m, unsigned d) {
  using namespace std::chrono;
  return sys_days{year{y} / month{m} / day{d}};
}

unsigned weekday_index(Date d) { return std::chrono::weekday{d}.c_encoding(); }

unsigned month_of(Date d) {
  return static_cast<unsigned>(std::chrono::year_month_day{d}.month());
}

int year_of(Date d) { return static_cast<int>(std::chrono::year_month_day{d}.year()); }

}  // namespace dhde
