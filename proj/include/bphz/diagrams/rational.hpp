#ifndef BPHZ_DIAGRAMS_RATIONAL_HPP
#define BPHZ_DIAGRAMS_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bphz {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Rational make_rational(std::int64_t p, std::int64_t q = 1) {
    if (q == 0) throw std::invalid_argument("rational with zero denominator");
    return Rational(BigInt(p), BigInt(q));
}

// "p/q" or "p", no spaces
inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(BigInt(s));
        BigInt p(s.substr(0, slash));
        BigInt q(s.substr(slash + 1));
        if (q == 0) throw std::invalid_argument("zero denominator");
        return Rational(p, q);
    } catch (const std::runtime_error&) {
        throw std::invalid_argument("malformed rational: " + s);
    }
}

inline std::string format_rational(const Rational& r) {
    auto p = boost::multiprecision::numerator(r);
    auto q = boost::multiprecision::denominator(r);
    if (q == 1) return p.str();
    return p.str() + "/" + q.str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// largest integer <= r
inline std::int64_t floor_int(const Rational& r) {
    BigInt p = boost::multiprecision::numerator(r);
    BigInt q = boost::multiprecision::denominator(r);
    BigInt f = p / q;
    if (p < 0 && f * q != p) f -= 1;
    return f.convert_to<std::int64_t>();
}

inline Rational factorial(int n) {
    BigInt f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return Rational(f);
}

inline Rational binomial(int n, int k) {
    if (k < 0 || k > n) return Rational(0);
    BigInt r = 1;
    for (int i = 1; i <= k; ++i) {
        r *= (n - k + i);
        r /= i;
    }
    return Rational(r);
}

}  // namespace bphz

#endif
