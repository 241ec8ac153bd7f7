#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <optional>
#include <string>

namespace ostap {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt numerator(const Rational& q) { return boost::multiprecision::numerator(q); }
inline BigInt denominator(const Rational& q) { return boost::multiprecision::denominator(q); }

inline bool is_integer(const Rational& q) { return denominator(q) == 1; }

inline Rational rat_pow(const Rational& q, int64_t e) {
  if (e == 0) return Rational(1);
  Rational base = e < 0 ? Rational(denominator(q), numerator(q)) : q;
  uint64_t n = e < 0 ? static_cast<uint64_t>(-e) : static_cast<uint64_t>(e);
  Rational acc(1);
  while (n) {
    if (n & 1) acc *= base;
    base *= base;
    n >>= 1;
  }
  return acc;
}

// Renders without spaces: "3", "-3/2".
inline std::string rat_str(const Rational& q) { return q.str(); }

// Accepts "3", "-3/2", "0.25", "-1.5". Returns nullopt on malformed input.
std::optional<Rational> parse_rational(const std::string& s);

}  // namespace ostap
