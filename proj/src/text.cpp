#include "dhde/text.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "dhde/error.hpp"

namespace dhde::text {

std::string nfkc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFKC normalizer unavailable");
  const icu::UnicodeString src =
      icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  const icu::UnicodeString dst = norm->normalize(src, status);
  if (U_FAILURE(status)) throw DataError("invalid text for NFKC normalization");
  std::string out;
  dst.toUTF8String(out);
  return out;
}

std::string trim(std::string_view s) {
  static constexpr std::string_view ideographic_space = "\xE3\x80\x80";
  auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  for (;;) {
    if (!s.empty() && is_ws(s.front())) {
      s.remove_prefix(1);
    } else if (s.starts_with(ideographic_space)) {
      s.remove_prefix(ideographic_space.size());
    } else {
      break;
    }
  }
  for (;;) {
    if (!s.empty() && is_ws(s.back())) {
      s.remove_suffix(1);
    } else if (s.ends_with(ideographic_space)) {
      s.remove_suffix(ideographic_space.size());
    } else {
      break;
    }
  }
  return std::string(s);
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

std::optional<double> parse_double(std::string_view s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  std::string_view v = t;
  if (v.front() == '+') v.remove_prefix(1);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) return std::nullopt;
  return out;
}

std::optional<long long> parse_int(std::string_view s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  std::string_view v = t;
  if (v.front() == '+') v.remove_prefix(1);
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec == std::errc{} && ptr == v.data() + v.size()) return out;
  // Exports sometimes write integral counts as "12.0".
  if (auto d = parse_double(v); d && std::floor(*d) == *d && std::fabs(*d) < 9.0e15) {
    return static_cast<long long>(*d);
  }
  return std::nullopt;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  // Whole numbers below 1e15 print as plain integers instead of "3e+05".
  if (v == std::trunc(v) && std::fabs(v) < 1e15) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
    return std::string(buf, ptr);
  }
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  return std::string(buf, ptr);
}

}  // namespace dhde::text
