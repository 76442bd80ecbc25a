#pragma once

// Exact rational arithmetic used by the model layer. Probabilities are
// kept as arbitrary-precision rationals so that statements like
// "this fraction is exactly 6/32" are decidable without tolerances.

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace ghzlhv {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt rational_num(const Rational& r) { return boost::multiprecision::numerator(r); }
inline BigInt rational_den(const Rational& r) { return boost::multiprecision::denominator(r); }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// Prints a rational over a caller-chosen common denominator when the value
// admits it ("6/32" rather than the reduced "3/16"), falling back to the
// reduced form otherwise. display_den <= 1 means plain reduced printing.
inline std::string format_rational(const Rational& r, const BigInt& display_den = 0) {
    if (display_den > 1) {
        Rational scaled = r * display_den;
        if (rational_den(scaled) == 1) {
            return rational_num(scaled).str() + "/" + display_den.str();
        }
    }
    if (rational_den(r) == 1) {
        return rational_num(r).str();
    }
    return rational_num(r).str() + "/" + rational_den(r).str();
}

inline BigInt lcm_bigint(const BigInt& a, const BigInt& b) {
    if (a == 0 || b == 0) {
        return 0;
    }
    return a / boost::multiprecision::gcd(a, b) * b;
}

}  // namespace ghzlhv
