#include "ostap/rational.hpp"

#include <cctype>

namespace ostap {

std::optional<Rational> parse_rational(const std::string& s) {
  if (s.empty()) return std::nullopt;
  size_t pos = 0;
  bool neg = false;
  if (s[pos] == '+' || s[pos] == '-') neg = s[pos++] == '-';
  auto digits = [&](BigInt& out) -> size_t {
    size_t n = 0;
    out = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      out = out * 10 + (s[pos] - '0');
      ++pos;
      ++n;
    }
    return n;
  };
  BigInt intpart;
  if (digits(intpart) == 0) return std::nullopt;
  Rational r(intpart);
  if (pos < s.size() && s[pos] == '/') {
    ++pos;
    BigInt den;
    if (digits(den) == 0 || den == 0) return std::nullopt;
    r = Rational(intpart, den);
  } else if (pos < s.size() && s[pos] == '.') {
    ++pos;
    size_t start = pos;
    BigInt frac;
    size_t n = digits(frac);
    if (n == 0) return std::nullopt;
    BigInt scale = 1;
    for (size_t k = 0; k < n; ++k) scale *= 10;
    r += Rational(frac, scale);
    (void)start;
  }
  if (pos != s.size()) return std::nullopt;
  return neg ? Rational(-r) : r;
}

}  // namespace ostap
