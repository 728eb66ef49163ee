#include "liesynth/number.hpp"

#include "liesynth/error.hpp"

#include <charconv>
#include <cmath>

namespace liesynth {

namespace {

template <class Op>
Number combine(const Number& a, const Number& b, Op op) {
  if (a.is_exact() && b.is_exact()) return Number(Rational(op(a.rational(), b.rational())));
  return Number(static_cast<double>(op(a.to_double(), b.to_double())));
}

}  // namespace

double Number::to_double() const {
  if (is_exact()) return rational().convert_to<double>();
  return floating();
}

bool Number::is_zero() const { return is_exact() ? rational() == 0 : floating() == 0.0; }
bool Number::is_one() const { return is_exact() ? rational() == 1 : floating() == 1.0; }
bool Number::is_negative() const { return is_exact() ? rational() < 0 : floating() < 0.0; }

bool Number::is_integer() const {
  if (is_exact()) return boost::multiprecision::denominator(rational()) == 1;
  return false;
}

Number Number::operator-() const {
  if (is_exact()) return Number(Rational(-rational()));
  return Number(-floating());
}

Number operator+(const Number& a, const Number& b) {
  return combine(a, b, [](const auto& x, const auto& y) { return x + y; });
}
Number operator-(const Number& a, const Number& b) {
  return combine(a, b, [](const auto& x, const auto& y) { return x - y; });
}
Number operator*(const Number& a, const Number& b) {
  return combine(a, b, [](const auto& x, const auto& y) { return x * y; });
}
Number operator/(const Number& a, const Number& b) {
  if (b.is_zero()) throw Error(ErrorCode::DomainError, "division by zero constant");
  return combine(a, b, [](const auto& x, const auto& y) { return x / y; });
}

int compare(const Number& a, const Number& b) {
  if (a.is_exact() != b.is_exact()) return a.is_exact() ? -1 : 1;
  if (a.is_exact()) {
    if (a.rational() < b.rational()) return -1;
    return a.rational() > b.rational() ? 1 : 0;
  }
  double x = a.floating();
  double y = b.floating();
  if (x < y) return -1;
  if (x > y) return 1;
  if (x == y) return 0;
  // NaNs sort last and compare equal to each other.
  return std::isnan(x) ? (std::isnan(y) ? 0 : 1) : -1;
}

std::string Number::to_string() const {
  if (!is_exact()) return format_double(floating());
  const Rational& r = rational();
  auto num = boost::multiprecision::numerator(r);
  auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

Number pow(const Number& base, int exponent) {
  if (exponent == 0) return Number(1);
  if (!base.is_exact()) return Number(std::pow(base.floating(), exponent));
  if (exponent < 0) {
    if (base.is_zero()) throw Error(ErrorCode::DomainError, "zero raised to a negative power");
    return Number(1) / pow(base, -exponent);
  }
  Rational result = 1;
  Rational factor = base.rational();
  unsigned e = static_cast<unsigned>(exponent);
  while (e != 0) {
    if (e & 1U) result *= factor;
    e >>= 1U;
    if (e != 0) factor *= factor;
  }
  return Number(result);
}

Rational exact_rational(double d) {
  if (!std::isfinite(d)) throw Error(ErrorCode::InvalidArgument, "non-finite value has no rational form");
  int exp = 0;
  double mant = std::frexp(d, &exp);
  // 53 mantissa bits make mant * 2^53 an exact integer.
  auto scaled = static_cast<long long>(std::ldexp(mant, 53));
  exp -= 53;
  Rational r(scaled);
  if (exp > 0) {
    r *= boost::multiprecision::cpp_int(1) << exp;
  } else if (exp < 0) {
    r /= Rational(boost::multiprecision::cpp_int(1) << -exp);
  }
  return r;
}

std::string format_double(double d) {
  if (std::isnan(d)) return "nan";
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), d);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

}  // namespace liesynth
