#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace footrank {

/// Calendar date. Serial numbers count days since 1970-01-01 in the
/// proleptic Gregorian calendar, so differences are plain day counts.
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  /// Parses ISO-8601 `YYYY-MM-DD`. Throws Error on malformed or
  /// non-existent dates.
  static Date parse(const std::string& iso);

  /// Parses with an explicit format. Supported formats: "%Y-%m-%d",
  /// "%d/%m/%Y", "%d/%m/%y" (two-digit years are mapped to 2000-2068 /
  /// 1969-1999 as in Football-Data exports).
  static Date parse(const std::string& text, const std::string& format);

  std::string to_string() const;

  std::int64_t serial() const;

  auto operator<=>(const Date&) const = default;
};

/// Day difference a - b.
inline std::int64_t operator-(const Date& a, const Date& b) {
  return a.serial() - b.serial();
}

}  // namespace footrank
