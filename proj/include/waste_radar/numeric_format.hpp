#pragma once

#include <cstdint>
#include <string>

namespace waste_radar {

// All table output truncates toward zero at four decimals (0.72337 prints as
// 0.7233). Ratios of counts are rendered through the integer overloads so the
// truncation is exact, never subject to double rounding.

/// num/den truncated toward zero to exactly four decimals. den must be > 0.
std::string format_fixed4(std::int64_t num, std::int64_t den);

/// Truncation of an arbitrary real value; prefer the rational overload.
std::string format_fixed4(double value);

/// Table rendering for measures: exact zero prints as "0", everything else
/// as a four-decimal truncation.
std::string format_measure(std::int64_t num, std::int64_t den);

}  // namespace waste_radar
