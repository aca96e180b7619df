#include "standings/date.hpp"

#include <charconv>
#include <cstdio>

#include "standings/errors.hpp"

namespace standings {
namespace {

bool to_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

[[noreturn]] void bad_date(std::string_view text) {
  throw InputError("unparseable date '" + std::string(text) +
                   "' (tried dd/mm/yy, dd/mm/yyyy, yyyy-mm-dd)");
}

}  // namespace

Date parse_date(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);

  int y = 0, m = 0, d = 0;
  if (auto s1 = text.find('/'); s1 != std::string_view::npos) {
    auto s2 = text.find('/', s1 + 1);
    if (s2 == std::string_view::npos) bad_date(text);
    auto ys = text.substr(s2 + 1);
    if (!to_int(text.substr(0, s1), d) || !to_int(text.substr(s1 + 1, s2 - s1 - 1), m) ||
        !to_int(ys, y))
      bad_date(text);
    if (ys.size() == 2) {
      y += 2000;
    } else if (ys.size() != 4) {
      bad_date(text);
    }
  } else if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    if (!to_int(text.substr(0, 4), y) || !to_int(text.substr(5, 2), m) ||
        !to_int(text.substr(8, 2), d))
      bad_date(text);
  } else {
    bad_date(text);
  }

  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) bad_date(text);
  return Date{ymd};
}

std::string format_iso(Date d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_dmy(Date d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02u/%02u/%04d", static_cast<unsigned>(ymd.day()),
                static_cast<unsigned>(ymd.month()), static_cast<int>(ymd.year()));
  return buf;
}

}  // namespace standings
