#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace standings {

using Date = std::chrono::sys_days;

// Accepts dd/mm/yy, dd/mm/yyyy and ISO yyyy-mm-dd. Two-digit years map to
// 2000-2099. Throws InputError naming the accepted formats.
Date parse_date(std::string_view text);

// ISO yyyy-mm-dd.
std::string format_iso(Date d);

// dd/mm/yyyy, the layout used by football-data results files.
std::string format_dmy(Date d);

inline long days_between(Date earlier, Date later) {
  return static_cast<long>((later - earlier).count());
}

}  // namespace standings
