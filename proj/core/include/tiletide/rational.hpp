#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace tiletide {

using Rational = mpq_class;

Rational make_rational(std::int64_t num, std::int64_t den = 1);
Rational pow2(int exponent);
double to_double(const Rational& q);
// log2 of an exact power of two; throws otherwise.
int exact_log2(const Rational& q);
std::string to_string(const Rational& q);
// Parses "p/q", "p" or a finite decimal such as "-0.125" exactly.
Rational parse_rational(const std::string& text);

// Open interval (lo, hi) with lo < hi, endpoints exact.
struct Interval {
  Rational lo;
  Rational hi;

  Rational length() const { return hi - lo; }
  Rational center() const { return (lo + hi) / 2; }
  // Same center, length scaled by factor.
  Interval dilate(const Rational& factor) const;
  bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }
  bool intersects(const Interval& other) const { return lo < other.hi && other.lo < hi; }
  bool contains_point(const Rational& x) const { return lo < x && x < hi; }
  bool operator==(const Interval& other) const { return lo == other.lo && hi == other.hi; }
};

}  // namespace tiletide
