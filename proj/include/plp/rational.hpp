#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "plp/errors.hpp"

namespace plp {

// Exact arbitrary-precision rational. All probability arithmetic in the
// toolkit goes through this type; nothing is ever rounded.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Rational rat(long num, long den = 1) {
    if (den == 0) throw Error("rational with zero denominator");
    return Rational(num, den);
}

// Canonical "num/den", or just "num" when den == 1.
inline std::string to_string(const Rational& q) {
    std::string s = numerator(q).str();
    if (denominator(q) != 1) s += "/" + denominator(q).str();
    return s;
}

// Fixed-point decimal rendering for human-facing output (exact value is
// always printed alongside as num/den).
inline std::string to_decimal(const Rational& q, int digits = 6) {
    BigInt num = numerator(q);
    BigInt den = denominator(q);
    bool neg = num < 0;
    if (neg) num = -num;
    BigInt scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    BigInt scaled = num * scale / den;
    BigInt whole = scaled / scale;
    BigInt frac = scaled % scale;
    std::string fs = frac.str();
    fs.insert(fs.begin(), static_cast<size_t>(digits) - fs.size(), '0');
    return (neg ? "-" : "") + whole.str() + "." + fs;
}

// Parses "3/4", "0.25", or "1". Exact: "0.3" becomes 3/10.
Rational parse_rational(const std::string& text);

}  // namespace plp
