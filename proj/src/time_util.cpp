#include "waste_radar/time_util.hpp"

#include <array>
#include <cstdio>

#include "waste_radar/errors.hpp"

namespace waste_radar {

namespace {

// Howard Hinnant's civil-date algorithms, valid far beyond any plausible
// repository timestamp.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

bool is_leap(std::int64_t y) {
  return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0);
}

unsigned days_in_month(std::int64_t y, unsigned m) {
  static constexpr std::array<unsigned, 12> lengths{31, 28, 31, 30, 31, 30,
                                                    31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return lengths[m - 1];
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::int64_t to_int(std::string_view s) {
  std::int64_t v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

}  // namespace

std::optional<Timestamp> try_parse_rfc3339(std::string_view text) {
  // Minimal shape: YYYY-MM-DDTHH:MM:SS plus a mandatory Z or offset.
  if (text.size() < 20) return std::nullopt;
  if (text[4] != '-' || text[7] != '-') return std::nullopt;
  if (text[10] != 'T' && text[10] != 't' && text[10] != ' ') return std::nullopt;
  if (text[13] != ':' || text[16] != ':') return std::nullopt;

  const std::string_view year = text.substr(0, 4);
  const std::string_view month = text.substr(5, 2);
  const std::string_view day = text.substr(8, 2);
  const std::string_view hour = text.substr(11, 2);
  const std::string_view minute = text.substr(14, 2);
  const std::string_view second = text.substr(17, 2);
  if (!all_digits(year) || !all_digits(month) || !all_digits(day) ||
      !all_digits(hour) || !all_digits(minute) || !all_digits(second)) {
    return std::nullopt;
  }

  std::size_t pos = 19;
  if (text[pos] == '.') {
    ++pos;
    std::size_t frac_start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == frac_start) return std::nullopt;
  }
  if (pos >= text.size()) return std::nullopt;

  std::int64_t offset_seconds = 0;
  const char tz = text[pos];
  if (tz == 'Z' || tz == 'z') {
    if (pos + 1 != text.size()) return std::nullopt;
  } else if (tz == '+' || tz == '-') {
    if (pos + 6 != text.size() || text[pos + 3] != ':') return std::nullopt;
    const std::string_view oh = text.substr(pos + 1, 2);
    const std::string_view om = text.substr(pos + 4, 2);
    if (!all_digits(oh) || !all_digits(om)) return std::nullopt;
    if (to_int(oh) > 23 || to_int(om) > 59) return std::nullopt;
    offset_seconds = to_int(oh) * 3600 + to_int(om) * 60;
    if (tz == '-') offset_seconds = -offset_seconds;
  } else {
    return std::nullopt;
  }

  const std::int64_t y = to_int(year);
  const std::int64_t mo = to_int(month);
  const std::int64_t d = to_int(day);
  const std::int64_t h = to_int(hour);
  const std::int64_t mi = to_int(minute);
  const std::int64_t s = to_int(second);
  if (mo < 1 || mo > 12) return std::nullopt;
  if (d < 1 || d > days_in_month(y, static_cast<unsigned>(mo))) return std::nullopt;
  if (h > 23 || mi > 59 || s > 59) return std::nullopt;

  const std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo),
                                            static_cast<unsigned>(d));
  const std::int64_t secs = days * kSecondsPerDay + h * 3600 + mi * 60 + s - offset_seconds;
  return from_unix_seconds(secs);
}

Timestamp parse_rfc3339(std::string_view text, std::string_view field) {
  auto ts = try_parse_rfc3339(text);
  if (!ts) {
    throw ParseError(std::string(field) + ": not a valid RFC 3339 timestamp: '" +
                     std::string(text) + "'");
  }
  return *ts;
}

std::string format_rfc3339(Timestamp ts) {
  const std::int64_t secs = to_unix_seconds(ts);
  std::int64_t days = secs / kSecondsPerDay;
  std::int64_t rem = secs % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    --days;
  }
  std::int64_t y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), m, d,
                static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

std::optional<Timestamp> try_parse_date(std::string_view text) {
  if (text.size() != 10) return std::nullopt;
  return try_parse_rfc3339(std::string(text) + "T00:00:00Z");
}

Timestamp truncate_to_day(Timestamp ts) {
  std::int64_t secs = to_unix_seconds(ts);
  std::int64_t days = secs / kSecondsPerDay;
  if (secs % kSecondsPerDay < 0) --days;
  return from_unix_seconds(days * kSecondsPerDay);
}

}  // namespace waste_radar
