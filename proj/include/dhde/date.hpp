#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace dhde {

using Date = std::chrono::sys_days;

// Accepts "YYYY-MM-DD" or "YYYY/MM/DD", optionally followed by a time part
// separated by ' ' or 'T'. Returns nullopt for anything else or an invalid day.
std::optional<Date> parse_date(std::string_view text);

// Like parse_date but requires a well-formed "HH:MM[:SS]" time part when one is
// present. The time itself is discarded; only the calendar day matters.
std::optional<Date> parse_timestamp_day(std::string_view text);

std::string format_date(Date d);

Date make_date(int y, unsigned m, unsigned d);

// 0 = Sunday ... 6 = Saturday
unsigned weekday_index(Date d);
unsigned month_of(Date d);
int year_of(Date d);

inline bool is_weekend(Date d) {
  const unsigned w = weekday_index(d);
  return w == 0 || w == 6;
}

}  // namespace dhde
