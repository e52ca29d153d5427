#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "cal/errors.hpp"

namespace cal {

/// A point on the time line, or an interval between two such points,
/// measured in whole nanoseconds. The largest and smallest representable
/// counts stand for +inf and -inf. Arithmetic saturates: a finite sum
/// that overflows becomes the corresponding infinity, and an infinite
/// operand absorbs a finite one. Adding opposite infinities throws
/// IndeterminateSum.
///
/// Points and intervals share this representation on purpose; they are
/// freely added and subtracted by the analysis.
class TimeValue {
 public:
  constexpr TimeValue() = default;

  static constexpr TimeValue from_nanos(std::int64_t ns) { return TimeValue(ns); }
  static constexpr TimeValue zero() { return TimeValue(0); }
  static constexpr TimeValue neg_infinity() { return TimeValue(kNegRep); }
  static constexpr TimeValue pos_infinity() { return TimeValue(kPosRep); }

  constexpr bool is_finite() const { return rep_ != kNegRep && rep_ != kPosRep; }
  constexpr bool is_neg_infinity() const { return rep_ == kNegRep; }
  constexpr bool is_pos_infinity() const { return rep_ == kPosRep; }

  /// Nanosecond count; only meaningful when finite.
  constexpr std::int64_t nanos() const { return rep_; }

  friend constexpr auto operator<=>(TimeValue a, TimeValue b) = default;

  TimeValue operator+(TimeValue other) const;
  TimeValue operator-(TimeValue other) const;
  TimeValue operator-() const;
  TimeValue& operator+=(TimeValue other) { return *this = *this + other; }

 private:
  static constexpr std::int64_t kNegRep = INT64_MIN;
  static constexpr std::int64_t kPosRep = INT64_MAX;

  explicit constexpr TimeValue(std::int64_t rep) : rep_(rep) {}

  std::int64_t rep_ = 0;
};

constexpr TimeValue nanoseconds(std::int64_t v) { return TimeValue::from_nanos(v); }
constexpr TimeValue microseconds(std::int64_t v) { return TimeValue::from_nanos(v * 1000); }
constexpr TimeValue milliseconds(std::int64_t v) { return TimeValue::from_nanos(v * 1000000); }
constexpr TimeValue seconds(std::int64_t v) { return TimeValue::from_nanos(v * 1000000000); }

inline TimeValue max(TimeValue a, TimeValue b) { return a < b ? b : a; }
inline TimeValue min(TimeValue a, TimeValue b) { return a < b ? a : b; }

namespace time_literals {
constexpr TimeValue operator""_ns(unsigned long long v) { return nanoseconds(static_cast<std::int64_t>(v)); }
constexpr TimeValue operator""_us(unsigned long long v) { return microseconds(static_cast<std::int64_t>(v)); }
constexpr TimeValue operator""_ms(unsigned long long v) { return milliseconds(static_cast<std::int64_t>(v)); }
constexpr TimeValue operator""_s(unsigned long long v) { return seconds(static_cast<std::int64_t>(v)); }
}  // namespace time_literals

/// Canonical rendering: the largest unit of s/ms/us/ns that divides the
/// value evenly, e.g. "12ms", "2500us", "-3ms"; infinities render as
/// "+inf" and "-inf", zero as "0s".
std::string to_string(TimeValue v);

/// Parses "12ms", "-3us", "0", "+inf", "-inf"; a bare integer is taken
/// as nanoseconds, decimal fractions must resolve to whole nanoseconds.
TimeValue parse_time(std::string_view text);

std::ostream& operator<<(std::ostream& os, TimeValue v);

/// A point of logical time: a timestamp plus a microstep index that
/// orders otherwise simultaneous events. Ordering is lexicographic.
/// Tags at +inf/-inf are canonical: their microstep is forced to 0.
struct Tag {
  TimeValue time;
  std::uint32_t microstep = 0;

  constexpr Tag() = default;
  constexpr Tag(TimeValue t, std::uint32_t m)
      : time(t), microstep(t.is_finite() ? m : 0) {}

  /// Timestamp projection: the physical-time reading of this tag.
  constexpr TimeValue timestamp() const { return time; }

  static constexpr Tag bottom() { return Tag(TimeValue::neg_infinity(), 0); }
  static constexpr Tag top() { return Tag(TimeValue::pos_infinity(), 0); }

  friend constexpr auto operator<=>(const Tag&, const Tag&) = default;
};

enum class Ordering { Less, Equal, Greater };

/// Lexicographic comparison on (timestamp, microstep).
constexpr Ordering tag_compare(const Tag& a, const Tag& b) {
  auto c = a <=> b;
  if (c < 0) return Ordering::Less;
  if (c > 0) return Ordering::Greater;
  return Ordering::Equal;
}

/// Tag seen downstream of a connection that adds `delay` to the
/// timestamp. A positive delay resets the microstep; a zero delay
/// forwards the tag unchanged.
inline Tag delayed(const Tag& g, TimeValue delay) {
  if (delay == TimeValue::zero()) return g;
  return Tag(g.time + delay, 0);
}

/// Rendering "(12ms, 0)".
std::string to_string(const Tag& g);

std::ostream& operator<<(std::ostream& os, const Tag& g);

}  // namespace cal
