#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace qlfit {

// Calendar date at day resolution, stored as days since 1970-01-01.
struct Date {
  int32_t serial = 0;

  friend auto operator<=>(const Date&, const Date&) = default;
  Date operator+(int days) const { return Date{serial + days}; }
  int operator-(const Date& other) const { return serial - other.serial; }
};

// Proleptic Gregorian civil <-> serial day conversions.
int32_t days_from_civil(int year, int month, int day);
void civil_from_days(int32_t serial, int& year, int& month, int& day);

// Strict ISO-8601 YYYY-MM-DD.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date date);

}  // namespace qlfit
