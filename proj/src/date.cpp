#include "sledge/date.hpp"

#include <array>
#include <cctype>
#include <charconv>

#include <fmt/format.h>

namespace sledge {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<int> parse_int(std::string_view s, std::size_t digits) {
  if (s.size() != digits) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::optional<unsigned> month_from_name(std::string_view name) {
  static constexpr std::array<std::string_view, 12> names = {
      "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
  if (name.size() < 3) return std::nullopt;
  std::string lower;
  for (char c : name.substr(0, 3)) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (unsigned i = 0; i < names.size(); ++i) {
    if (names[i] == lower) return i + 1;
  }
  return std::nullopt;
}

std::optional<ParsedDate> make(int y, unsigned m, unsigned d, DatePrecision p) {
  Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return ParsedDate{date, p};
}

}  // namespace

std::optional<ParsedDate> parse_date(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;

  // "2020 Apr 10" / "2020 Apr"
  if (text.size() >= 8 && text[4] == ' ') {
    auto year = parse_int(text.substr(0, 4), 4);
    auto rest = trim(text.substr(5));
    auto space = rest.find(' ');
    auto month = month_from_name(rest.substr(0, space));
    if (!year || !month) return std::nullopt;
    if (space == std::string_view::npos) return make(*year, *month, 1, DatePrecision::month);
    auto day_text = trim(rest.substr(space + 1));
    int day = 0;
    auto [ptr, ec] = std::from_chars(day_text.data(), day_text.data() + day_text.size(), day);
    if (ec != std::errc{} || ptr != day_text.data() + day_text.size()) return std::nullopt;
    return make(*year, *month, static_cast<unsigned>(day), DatePrecision::day);
  }

  std::array<std::string_view, 3> parts;
  std::size_t count = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '-' || text[i] == '/') {
      if (count == parts.size()) return std::nullopt;
      parts[count++] = text.substr(start, i - start);
      start = i + 1;
    }
  }
  auto year = parse_int(parts[0], 4);
  if (!year) return std::nullopt;
  if (count == 1) return make(*year, 1, 1, DatePrecision::year);
  auto month = parse_int(parts[1], 2);
  if (!month) return std::nullopt;
  if (count == 2) return make(*year, static_cast<unsigned>(*month), 1, DatePrecision::month);
  auto day = parse_int(parts[2], 2);
  if (!day) return std::nullopt;
  return make(*year, static_cast<unsigned>(*month), static_cast<unsigned>(*day), DatePrecision::day);
}

std::optional<Date> parse_iso_date(std::string_view text) {
  auto parsed = parse_date(text);
  if (!parsed || parsed->precision != DatePrecision::day || trim(text).size() != 10) return std::nullopt;
  return parsed->date;
}

std::string format_date(const Date& d) {
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                     static_cast<unsigned>(d.day()));
}

std::int32_t date_key(const Date& d) {
  return static_cast<int>(d.year()) * 10000 + static_cast<int>(static_cast<unsigned>(d.month())) * 100 +
         static_cast<int>(static_cast<unsigned>(d.day()));
}

std::optional<Date> date_from_key(std::int32_t key) {
  if (key <= 0) return std::nullopt;
  Date d{std::chrono::year{key / 10000}, std::chrono::month{static_cast<unsigned>(key / 100 % 100)},
         std::chrono::day{static_cast<unsigned>(key % 100)}};
  if (!d.ok()) return std::nullopt;
  return d;
}

}  // namespace sledge
