#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace waste_radar {

/// All timestamps are UTC with second precision.
using Timestamp = std::chrono::sys_seconds;

inline constexpr std::int64_t kSecondsPerDay = 86400;

/// Parses an RFC 3339 timestamp ("2024-04-30T12:34:56Z", optional fractional
/// seconds, 'Z' or a numeric offset) and normalizes it to UTC.
/// Fractional seconds are truncated.
std::optional<Timestamp> try_parse_rfc3339(std::string_view text);

/// Same as try_parse_rfc3339 but throws ParseError; `field` names the source
/// of the value in the error message.
Timestamp parse_rfc3339(std::string_view text, std::string_view field = "timestamp");

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_rfc3339(Timestamp ts);

/// Parses "YYYY-MM-DD" as midnight UTC.
std::optional<Timestamp> try_parse_date(std::string_view text);

/// Truncates to midnight UTC of the same day (flooring, also for pre-1970).
Timestamp truncate_to_day(Timestamp ts);

inline std::int64_t to_unix_seconds(Timestamp ts) {
  return ts.time_since_epoch().count();
}

inline Timestamp from_unix_seconds(std::int64_t secs) {
  return Timestamp(std::chrono::seconds(secs));
}

}  // namespace waste_radar
