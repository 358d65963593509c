#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sledge {

using Date = std::chrono::year_month_day;

// How much of a date was actually present in the source string. Year-only
// and year-month values are normalised to the first day of the period.
enum class DatePrecision : std::uint8_t { day = 0, month = 1, year = 2 };

struct ParsedDate {
  Date date;
  DatePrecision precision = DatePrecision::day;
};

// Accepts YYYY, YYYY-MM, YYYY-MM-DD (also with '/' separators) and the
// "YYYY Mon DD" style used in some metadata dumps. Returns nullopt for
// anything else or for invalid calendar dates.
std::optional<ParsedDate> parse_date(std::string_view text);

// Strict YYYY-MM-DD, used for configuration values.
std::optional<Date> parse_iso_date(std::string_view text);

std::string format_date(const Date& d);

// Compact integer key YYYYMMDD; 0 is reserved for "no date".
std::int32_t date_key(const Date& d);
std::optional<Date> date_from_key(std::int32_t key);

}  // namespace sledge
