#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>

namespace choq {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// Parses "3", "-7/10" or a finite decimal like "0.25" into an exact rational.
// Decimal input is exact: 0.25 -> 1/4, not the nearest double.
inline std::optional<Rational> parse_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  auto bad = std::nullopt;
  std::size_t pos = 0;
  bool neg = false;
  if (text[pos] == '+' || text[pos] == '-') {
    neg = text[pos] == '-';
    ++pos;
  }
  BigInt num = 0, den = 1;
  bool any_digit = false;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
    num = num * 10 + (text[pos] - '0');
    any_digit = true;
    ++pos;
  }
  if (pos < text.size() && text[pos] == '/') {
    ++pos;
    BigInt d = 0;
    bool den_digit = false;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      d = d * 10 + (text[pos] - '0');
      den_digit = true;
      ++pos;
    }
    if (!any_digit || !den_digit || d == 0 || pos != text.size()) return bad;
    Rational r(num, d);
    return neg ? -r : r;
  }
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      num = num * 10 + (text[pos] - '0');
      den *= 10;
      any_digit = true;
      ++pos;
    }
  }
  if (!any_digit || pos != text.size()) return bad;
  Rational r(num, den);
  return neg ? -r : r;
}

inline std::string to_string(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

}  // namespace choq
