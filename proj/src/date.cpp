#include "footrank/date.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "footrank/error.hpp"

namespace footrank {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                  31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return lengths[static_cast<std::size_t>(m - 1)];
}

int parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error("invalid number in date: '" + std::string(s) + "'");
  return v;
}

Date make_checked(int y, int m, int d, const std::string& text) {
  if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m))
    throw Error("not a calendar date: '" + text + "'");
  return Date{y, m, d};
}

}  // namespace

Date Date::parse(const std::string& iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
    throw Error("expected YYYY-MM-DD date, got '" + iso + "'");
  std::string_view s(iso);
  return make_checked(parse_int(s.substr(0, 4)), parse_int(s.substr(5, 2)),
                      parse_int(s.substr(8, 2)), iso);
}

Date Date::parse(const std::string& text, const std::string& format) {
  if (format == "%Y-%m-%d") return parse(text);
  std::string_view s(text);
  if (format == "%d/%m/%Y") {
    if (s.size() != 10 || s[2] != '/' || s[5] != '/')
      throw Error("expected DD/MM/YYYY date, got '" + text + "'");
    return make_checked(parse_int(s.substr(6, 4)), parse_int(s.substr(3, 2)),
                        parse_int(s.substr(0, 2)), text);
  }
  if (format == "%d/%m/%y") {
    if (s.size() != 8 || s[2] != '/' || s[5] != '/')
      throw Error("expected DD/MM/YY date, got '" + text + "'");
    int yy = parse_int(s.substr(6, 2));
    int year = yy <= 68 ? 2000 + yy : 1900 + yy;
    return make_checked(year, parse_int(s.substr(3, 2)),
                        parse_int(s.substr(0, 2)), text);
  }
  throw Error("unsupported date format '" + format + "'");
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

// days_from_civil (Howard Hinnant's algorithm).
std::int64_t Date::serial() const {
  std::int64_t y = year - (month <= 2);
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy =
      (153u * static_cast<unsigned>(month + (month > 2 ? -3 : 9)) + 2) / 5 +
      static_cast<unsigned>(day) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

}  // namespace footrank
