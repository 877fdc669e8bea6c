#include "kexlab/rational.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace kexlab {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

BigInt parse_integer(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
  BigInt v{std::string(s)};
  return negative ? BigInt(-v) : v;
}

BigInt pow10(unsigned n) {
  BigInt r = 1;
  for (unsigned i = 0; i < n; ++i) r *= 10;
  return r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw std::invalid_argument("empty rational");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    BigInt num = parse_integer(text.substr(0, slash));
    std::string_view den_text = text.substr(slash + 1);
    if (!all_digits(den_text)) throw std::invalid_argument("bad denominator in '" + std::string(text) + "'");
    BigInt den{std::string(den_text)};
    if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  }

  std::string_view mantissa = text;
  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = text.substr(0, e);
    std::string_view exp_text = text.substr(e + 1);
    BigInt ex = parse_integer(exp_text);
    if (ex > 4096 || ex < -4096) throw std::invalid_argument("exponent out of range in '" + std::string(text) + "'");
    exponent = ex.convert_to<long>();
  }

  bool negative = false;
  if (!mantissa.empty() && (mantissa.front() == '-' || mantissa.front() == '+')) {
    negative = mantissa.front() == '-';
    mantissa.remove_prefix(1);
  }
  std::string digits;
  unsigned frac_digits = 0;
  if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = mantissa.substr(0, dot);
    std::string_view frac_part = mantissa.substr(dot + 1);
    if (int_part.empty() && frac_part.empty()) throw std::invalid_argument("bad number '" + std::string(text) + "'");
    if ((!int_part.empty() && !all_digits(int_part)) || (!frac_part.empty() && !all_digits(frac_part)))
      throw std::invalid_argument("bad number '" + std::string(text) + "'");
    digits = std::string(int_part) + std::string(frac_part);
    frac_digits = static_cast<unsigned>(frac_part.size());
  } else {
    if (!all_digits(mantissa)) throw std::invalid_argument("bad number '" + std::string(text) + "'");
    digits = std::string(mantissa);
  }

  Rational value{BigInt{digits}, pow10(frac_digits)};
  if (exponent > 0) value *= pow10(static_cast<unsigned>(exponent));
  if (exponent < 0) value /= pow10(static_cast<unsigned>(-exponent));
  return negative ? Rational(-value) : value;
}

std::string format_rational(const Rational& value) {
  return boost::multiprecision::numerator(value).str() + "/" +
         boost::multiprecision::denominator(value).str();
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite double");
  if (value == 0.0) return Rational(0);
  int exp = 0;
  double mant = std::frexp(value, &exp);  // value = mant * 2^exp, 0.5 <= |mant| < 1
  // 53 significant bits fit exactly in an int64 after scaling.
  auto scaled = static_cast<long long>(std::ldexp(mant, 53));
  exp -= 53;
  Rational r{BigInt(scaled)};
  BigInt two_pow = 1;
  two_pow <<= static_cast<unsigned>(exp >= 0 ? exp : -exp);
  if (exp >= 0) return r * two_pow;
  return r / two_pow;
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

Rational abs(const Rational& value) { return value < 0 ? Rational(-value) : value; }

bool is_integer(const Rational& value) { return boost::multiprecision::denominator(value) == 1; }

}  // namespace kexlab
