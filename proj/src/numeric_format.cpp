#include "waste_radar/numeric_format.hpp"

#include <cassert>
#include <cmath>
#include <cstdio>

namespace waste_radar {

namespace {

std::string render_scaled(bool negative, std::int64_t scaled) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s%lld.%04lld", negative ? "-" : "",
                static_cast<long long>(scaled / 10000),
                static_cast<long long>(scaled % 10000));
  return buf;
}

}  // namespace

std::string format_fixed4(std::int64_t num, std::int64_t den) {
  assert(den > 0);
  const bool negative = num < 0;
  const std::int64_t mag = negative ? -num : num;
  return render_scaled(negative, mag * 10000 / den);
}

std::string format_fixed4(double value) {
  const bool negative = value < 0;
  const double mag = std::trunc(std::abs(value) * 10000.0);
  return render_scaled(negative, static_cast<std::int64_t>(mag));
}

std::string format_measure(std::int64_t num, std::int64_t den) {
  if (num == 0) return "0";
  return format_fixed4(num, den);
}

}  // namespace waste_radar
