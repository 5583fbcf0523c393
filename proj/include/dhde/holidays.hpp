#pragma once

#include <istream>
#include <set>
#include <string>

#include "dhde/date.hpp"

namespace dhde::features {

// Japanese national holidays (including substitute and "citizens'" holidays)
// over a validity range. Queries outside the range throw instead of
// answering false.
class HolidayTable {
public:
  HolidayTable(std::set<Date> holidays, Date first, Date last);

  // Embedded table covering 2024-01-01 .. 2026-12-31.
  static HolidayTable embedded();

  // Override file: lines "YYYY-MM-DD[,name]"; '#' comments allowed. An
  // optional "valid,FIRST,LAST" line sets the range, otherwise it spans the
  // whole calendar years of the listed dates.
  static HolidayTable load(std::istream& in);

  bool is_holiday(Date d) const;
  bool covers(Date d) const { return d >= first_ && d <= last_; }
  Date first() const { return first_; }
  Date last() const { return last_; }
  std::size_t size() const { return days_.size(); }

private:
  std::set<Date> days_;
  Date first_;
  Date last_;
};

}  // namespace dhde::features
