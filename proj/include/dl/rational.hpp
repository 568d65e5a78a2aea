#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>

namespace dl {

// Exact rationals. Every Valid path in the toolchain stays in this type.
using Rational = mpq_class;

// Accepts "3", "-3", "3/4", "-0.125". Returns nullopt on anything else.
std::optional<Rational> parse_rational(std::string_view text);

// "3", "-3/4": canonical p/q form.
std::string to_string(const Rational& r);

// Base-10 rendering rounded half away from zero to at most `digits`
// fractional digits; trailing zeros dropped ("1.6", "-2", "0.000001").
std::string to_decimal(const Rational& r, unsigned digits = 12);

// Rounds to `digits` fractional decimal digits (same rule as to_decimal).
Rational round_decimal(const Rational& r, unsigned digits = 12);

// Exact conversion of a finite double.
Rational from_double(double d);

inline double to_double(const Rational& r) { return r.get_d(); }

// Integer power, exponent >= 0.
Rational pow(const Rational& base, unsigned exponent);

}  // namespace dl
