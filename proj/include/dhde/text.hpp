#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace dhde::text {

// Unicode NFKC. Full-width Roman letters, digits and punctuation become ASCII;
// half-width katakana become the standard full-width forms.
std::string nfkc(std::string_view utf8);

// Strips ASCII whitespace and U+3000 from both ends.
std::string trim(std::string_view s);

bool is_blank(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest representation that parses back to the same double.
std::string format_double(double v);

// Fixed number of decimals.
std::string format_fixed(double v, int decimals);

}  // namespace dhde::text
