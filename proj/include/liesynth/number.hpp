#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <variant>

namespace liesynth {

using Rational = boost::multiprecision::cpp_rational;

/// A scalar constant that stays exact as long as every input was exact.
/// Any operation that touches a floating value produces a floating value.
class Number {
 public:
  Number() : value_(Rational(0)) {}
  Number(Rational r) : value_(std::move(r)) {}  // NOLINT: implicit by intent
  Number(double d) : value_(d) {}               // NOLINT
  Number(int i) : value_(Rational(i)) {}        // NOLINT
  Number(long long i) : value_(Rational(i)) {}  // NOLINT

  static Number ratio(long long num, long long den) { return Number(Rational(num, den)); }

  bool is_exact() const noexcept { return std::holds_alternative<Rational>(value_); }
  const Rational& rational() const { return std::get<Rational>(value_); }
  double floating() const { return std::get<double>(value_); }
  double to_double() const;

  bool is_zero() const;
  bool is_one() const;
  bool is_negative() const;
  bool is_integer() const;

  Number operator-() const;
  friend Number operator+(const Number& a, const Number& b);
  friend Number operator-(const Number& a, const Number& b);
  friend Number operator*(const Number& a, const Number& b);
  friend Number operator/(const Number& a, const Number& b);

  /// Structural ordering: exact values sort before floating ones, then by value.
  friend int compare(const Number& a, const Number& b);
  friend bool operator==(const Number& a, const Number& b) { return compare(a, b) == 0; }

  /// Text form used by the s-expression printer: `3`, `-1/2`, `0.5`, `2.0`.
  std::string to_string() const;

 private:
  std::variant<Rational, double> value_;
};

Number pow(const Number& base, int exponent);

/// Converts a double to the exact rational it represents (finite only).
Rational exact_rational(double d);

/// Shortest round-trip decimal text for a double, always containing `.`, `e`,
/// or one of `inf`/`nan` so it never reads back as an integer.
std::string format_double(double d);

}  // namespace liesynth
