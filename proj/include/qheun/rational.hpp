#ifndef QHEUN_RATIONAL_HPP
#define QHEUN_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>

#include "qheun/errors.hpp"

namespace qheun {

using BigInt = boost::multiprecision::cpp_int;
// cpp_rational keeps values canonical (lowest terms, positive denominator).
using Rational = boost::multiprecision::cpp_rational;

// Half-integer exponent k/2, stored as the numerator over 2.  All exponent
// parameters of the exact backend live in (1/2)Z so that q^e = r^(2e) is an
// exact rational power of r.
struct HalfInt {
    std::int64_t tw = 0; // value is tw/2

    static HalfInt whole(std::int64_t n) { return HalfInt{2 * n}; }
    static HalfInt halves(std::int64_t k) { return HalfInt{k}; }

    bool is_integer() const { return tw % 2 == 0; }
    std::int64_t as_integer() const {
        if (!is_integer())
            fail(errc::invalid_argument, "half-integer exponent where an integer is required");
        return tw / 2;
    }
    double value() const { return static_cast<double>(tw) / 2.0; }

    friend HalfInt operator+(HalfInt a, HalfInt b) { return HalfInt{a.tw + b.tw}; }
    friend HalfInt operator-(HalfInt a, HalfInt b) { return HalfInt{a.tw - b.tw}; }
    friend HalfInt operator-(HalfInt a) { return HalfInt{-a.tw}; }
    friend HalfInt operator*(std::int64_t n, HalfInt a) { return HalfInt{n * a.tw}; }
    friend bool operator==(HalfInt a, HalfInt b) { return a.tw == b.tw; }
    friend bool operator!=(HalfInt a, HalfInt b) { return a.tw != b.tw; }

    // exact division by two; exponent formulas of the form (sum)/2 must land
    // back in (1/2)Z, anything else is a caller error
    HalfInt half() const {
        if (tw % 2 != 0)
            fail(errc::invalid_argument, "exponent division by 2 leaves (1/2)Z");
        return HalfInt{tw / 2};
    }

    std::string str() const {
        if (is_integer())
            return std::to_string(tw / 2);
        return std::to_string(tw) + "/2";
    }
};

inline Rational pow_int(const Rational& base, std::int64_t e) {
    if (e == 0)
        return Rational(1);
    if (base == 0) {
        if (e < 0)
            fail(errc::division_by_zero, "0 raised to a negative power");
        return Rational(0);
    }
    Rational acc(1), b = base;
    std::uint64_t n = e < 0 ? static_cast<std::uint64_t>(-e) : static_cast<std::uint64_t>(e);
    while (n) {
        if (n & 1)
            acc *= b;
        b *= b;
        n >>= 1;
    }
    if (e < 0)
        acc = Rational(1) / acc;
    return acc;
}

} // namespace qheun

#endif
