#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>

namespace evopoc {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Parses a decimal integer, an 0x-prefixed hex integer, or a scientific
/// literal with an integral value ("1e18", "2.5e3"). Underscores are ignored.
/// Throws std::invalid_argument on malformed input.
BigInt parse_bigint(std::string_view text);

std::string to_string(const BigInt& v);
std::string to_string(const Rational& v);

// floor(a / b) for b != 0, rounding toward negative infinity.
BigInt floor_div(const BigInt& a, const BigInt& b);
BigInt ceil_div(const BigInt& a, const BigInt& b);

BigInt floor(const Rational& r);
BigInt ceil(const Rational& r);

BigInt pow10(unsigned exponent);

}  // namespace evopoc
