#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>

namespace kexlab {

// Arbitrary-precision exact rational; always kept in lowest terms with a
// positive denominator.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Accepts "n", "n/d", decimals ("-1.25") and scientific notation ("1e-6").
// Throws std::invalid_argument on anything else.
Rational parse_rational(std::string_view text);

// Always "numerator/denominator", e.g. "5/1", "-23/7".
std::string format_rational(const Rational& value);

// Exact conversion of a finite double (every double is a dyadic rational).
Rational rational_from_double(double value);

double to_double(const Rational& value);

Rational abs(const Rational& value);

bool is_integer(const Rational& value);

}  // namespace kexlab
