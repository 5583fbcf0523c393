#include "dhde/holidays.hpp"

#include <string>

#include "dhde/error.hpp"
#include "dhde/text.hpp"

namespace dhde::features {

HolidayTable::HolidayTable(std::set<Date> holidays, Date first, Date last)
    : days_(std::move(holidays)), first_(first), last_(last) {
  if (last_ < first_) throw UsageError("holiday table validity range is empty");
  for (const Date d : days_) {
    if (!covers(d)) throw UsageError("holiday " + format_date(d) + " outside the table validity range");
  }
}

HolidayTable HolidayTable::embedded() {
  static const char* const kDays[] = {
      // 2024
      "2024-01-01", "2024-01-08", "2024-02-11", "2024-02-12", "2024-02-23", "2024-03-20", "2024-04-29",
      "2024-05-03", "2024-05-04", "2024-05-05", "2024-05-06", "2024-07-15", "2024-08-11", "2024-08-12",
      "2024-09-16", "2024-09-22", "2024-09-23", "2024-10-14", "2024-11-03", "2024-11-04", "2024-11-23",
      // 2025
      "2025-01-01", "2025-01-13", "2025-02-11", "2025-02-23", "2025-02-24", "2025-03-20", "2025-04-29",
      "2025-05-03", "2025-05-04", "2025-05-05", "2025-05-06", "2025-07-21", "2025-08-11", "2025-09-15",
      "2025-09-23", "2025-10-13", "2025-11-03", "2025-11-23", "2025-11-24",
      // 2026 (09-22 is a citizens' holiday between two holidays)
      "2026-01-01", "2026-01-12", "2026-02-11", "2026-02-23", "2026-03-20", "2026-04-29", "2026-05-03",
      "2026-05-04", "2026-05-05", "2026-05-06", "2026-07-20", "2026-08-11", "2026-09-21", "2026-09-22",
      "2026-09-23", "2026-10-12", "2026-11-03", "2026-11-23",
  };
  std::set<Date> days;
  for (const char* s : kDays) days.insert(*parse_date(s));
  return HolidayTable(std::move(days), make_date(2024, 1, 1), make_date(2026, 12, 31));
}

HolidayTable HolidayTable::load(std::istream& in) {
  std::set<Date> days;
  std::optional<Date> first, last;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto comma = t.find(',');
    const std::string head = text::trim(t.substr(0, comma));
    if (head == "date") continue;  // header
    if (head == "valid") {
      const std::string rest = comma == std::string::npos ? "" : t.substr(comma + 1);
      const auto c2 = rest.find(',');
      first = parse_date(text::trim(rest.substr(0, c2)));
      last = c2 == std::string::npos ? std::nullopt : parse_date(text::trim(rest.substr(c2 + 1)));
      if (!first || !last) throw RowError(lineno, "malformed validity range");
      continue;
    }
    const auto d = parse_date(head);
    if (!d) throw RowError(lineno, "malformed holiday date '" + head + "'");
    days.insert(*d);
  }
  if (!first) {
    if (days.empty()) throw DataError("holiday file lists no dates and no validity range");
    first = make_date(year_of(*days.begin()), 1, 1);
    last = make_date(year_of(*days.rbegin()), 12, 31);
  }
  return HolidayTable(std::move(days), *first, *last);
}

bool HolidayTable::is_holiday(Date d) const {
  if (!covers(d)) {
    throw DataError("date " + format_date(d) + " outside holiday table range " + format_date(first_) + ".." +
                    format_date(last_));
  }
  return days_.contains(d);
}

}  // namespace dhde::features
