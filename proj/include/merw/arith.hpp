#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace merw {

// Exact arithmetic used throughout: path counts are arbitrary-precision
// integers, probabilities are exact rationals. Doubles appear only inside
// power iteration and Monte Carlo estimates.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt pow_int(const BigInt& base, unsigned exp) {
    BigInt r = 1, b = base;
    while (exp) {
        if (exp & 1u) r *= b;
        b *= b;
        exp >>= 1u;
    }
    return r;
}

inline double to_double(const Rational& q) {
    return q.convert_to<double>();
}

// Lossless conversion: every finite double is a dyadic rational.
inline Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("rational_from_double: non-finite value");
    if (x == 0.0) return Rational(0);
    int exp = 0;
    double m = std::frexp(x, &exp); // x = m * 2^exp, 0.5 <= |m| < 1
    auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
    exp -= 53;
    Rational r(mant);
    if (exp >= 0) {
        r *= Rational(BigInt(1) << exp);
    } else {
        r /= Rational(BigInt(1) << -exp);
    }
    return r;
}

// "p" for integers, "p/q" otherwise; never a float rendering.
inline std::string to_string(const Rational& q) {
    const BigInt num = boost::multiprecision::numerator(q);
    const BigInt den = boost::multiprecision::denominator(q);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

inline std::string to_string(const BigInt& n) {
    return n.str();
}

inline BigInt parse_bigint(std::string_view s) {
    if (s.empty()) throw std::invalid_argument("empty integer literal");
    try {
        return BigInt(std::string(s));
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid integer literal: " + std::string(s));
    }
}

// Accepts "p" and "p/q" forms (the machine report format).
inline Rational parse_rational(std::string_view s) {
    const auto slash = s.find('/');
    if (slash == std::string_view::npos) return Rational(parse_bigint(s));
    const BigInt num = parse_bigint(s.substr(0, slash));
    const BigInt den = parse_bigint(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("rational with zero denominator: " + std::string(s));
    return Rational(num, den);
}

} // namespace merw
