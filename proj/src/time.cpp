#include "cal/time.hpp"

#include <cctype>
#include <cstdlib>
#include <ostream>

namespace cal {

namespace {

// Saturating signed add of two finite nanosecond counts. A sum that
// overflows, or lands exactly on a reserved extreme count, becomes the
// corresponding infinity.
std::int64_t add_saturating(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) return b > 0 ? INT64_MAX : INT64_MIN;
  return out;
}

}  // namespace

TimeValue TimeValue::operator+(TimeValue other) const {
  if (is_pos_infinity()) {
    if (other.is_neg_infinity()) throw IndeterminateSum();
    return pos_infinity();
  }
  if (is_neg_infinity()) {
    if (other.is_pos_infinity()) throw IndeterminateSum();
    return neg_infinity();
  }
  if (other.is_pos_infinity()) return pos_infinity();
  if (other.is_neg_infinity()) return neg_infinity();
  return TimeValue(add_saturating(rep_, other.rep_));
}

TimeValue TimeValue::operator-() const {
  if (is_pos_infinity()) return neg_infinity();
  if (is_neg_infinity()) return pos_infinity();
  return TimeValue(-rep_);
}

TimeValue TimeValue::operator-(TimeValue other) const { return *this + (-other); }

std::string to_string(TimeValue v) {
  if (v.is_pos_infinity()) return "+inf";
  if (v.is_neg_infinity()) return "-inf";
  std::int64_t ns = v.nanos();
  if (ns == 0) return "0s";
  if (ns % 1000000000 == 0) return std::to_string(ns / 1000000000) + "s";
  if (ns % 1000000 == 0) return std::to_string(ns / 1000000) + "ms";
  if (ns % 1000 == 0) return std::to_string(ns / 1000) + "us";
  return std::to_string(ns) + "ns";
}

TimeValue parse_time(std::string_view text) {
  size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  skip_ws();
  if (pos >= text.size()) throw ParseError("empty time value");

  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') {
    negative = text[pos] == '-';
    ++pos;
  }

  if (text.substr(pos, 3) == "inf") {
    pos += 3;
    skip_ws();
    if (pos != text.size()) throw ParseError("trailing characters in time value: " + std::string(text));
    return negative ? TimeValue::neg_infinity() : TimeValue::pos_infinity();
  }

  if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
    throw ParseError("expected a number in time value: " + std::string(text));

  std::int64_t whole = 0;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
    int d = text[pos] - '0';
    if (__builtin_mul_overflow(whole, static_cast<std::int64_t>(10), &whole) ||
        __builtin_add_overflow(whole, static_cast<std::int64_t>(d), &whole))
      throw ParseError("time value out of range: " + std::string(text));
    ++pos;
  }

  std::string frac;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      frac.push_back(text[pos]);
      ++pos;
    }
    if (frac.empty()) throw ParseError("dangling decimal point: " + std::string(text));
  }

  skip_ws();
  std::string_view unit = text.substr(pos);
  while (!unit.empty() && std::isspace(static_cast<unsigned char>(unit.back()))) unit.remove_suffix(1);

  std::int64_t scale;
  if (unit == "ns" || unit.empty()) {
    scale = 1;
  } else if (unit == "us") {
    scale = 1000;
  } else if (unit == "ms") {
    scale = 1000000;
  } else if (unit == "s") {
    scale = 1000000000;
  } else {
    throw ParseError("unknown time unit '" + std::string(unit) + "'");
  }

  std::int64_t ns;
  if (__builtin_mul_overflow(whole, scale, &ns))
    throw ParseError("time value out of range: " + std::string(text));

  if (!frac.empty()) {
    // The fraction must resolve to a whole number of nanoseconds.
    std::int64_t frac_ns = 0;
    std::int64_t frac_scale = scale;
    for (char c : frac) {
      if (frac_scale % 10 != 0)
        throw ParseError("fraction finer than a nanosecond: " + std::string(text));
      frac_scale /= 10;
      frac_ns += static_cast<std::int64_t>(c - '0') * frac_scale;
    }
    if (__builtin_add_overflow(ns, frac_ns, &ns))
      throw ParseError("time value out of range: " + std::string(text));
  }

  if (negative) ns = -ns;
  if (ns == INT64_MAX || ns == INT64_MIN)
    throw ParseError("time value out of range: " + std::string(text));
  return TimeValue::from_nanos(ns);
}

std::ostream& operator<<(std::ostream& os, TimeValue v) { return os << to_string(v); }

std::string to_string(const Tag& g) {
  return "(" + to_string(g.time) + ", " + std::to_string(g.microstep) + ")";
}

std::ostream& operator<<(std::ostream& os, const Tag& g) { return os << to_string(g); }

}  // namespace cal
