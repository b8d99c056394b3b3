#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace tcv {

using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

inline constexpr Seconds kSixHours{6 * 3600};

/// Accepts `YYYY-MM-DDTHH:MM:SS` with an optional trailing `Z`, or
/// `YYYY-MM-DDTHH:MM` / `YYYY-MM-DD`. Always UTC.
Timestamp parse_time(std::string_view text);

/// `YYYY-MM-DDTHH:MM:SSZ`
std::string format_time(Timestamp t);

/// `YYYYMMDDHH`, used in output file names.
std::string compact_time(Timestamp t);

inline double hours_between(Timestamp from, Timestamp to) {
  return std::chrono::duration<double, std::ratio<3600>>(to - from).count();
}

}  // namespace tcv
