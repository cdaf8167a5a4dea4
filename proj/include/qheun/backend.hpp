#ifndef QHEUN_BACKEND_HPP
#define QHEUN_BACKEND_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>

#include "qheun/errors.hpp"
#include "qheun/rational.hpp"

namespace qheun {

struct TruncationPolicy {
    double tail_epsilon = 1e-17;
    int max_terms = 10000;
};

// Floating backend over complex<F>.  Exponents are complex too; q^e and x^e
// are principal-branch powers exp(e Log z), cut along the negative real axis.
template <class F>
struct BasicNumericBackend {
    using Real = F;
    using Scalar = std::complex<F>;
    using Exponent = std::complex<F>;
    static constexpr bool exact = false;

    Scalar q{};

    BasicNumericBackend() = default;
    explicit BasicNumericBackend(Scalar q_) : q(q_) {
        F a = std::abs(q);
        if (!(a > F(0)) || !(a < F(1)))
            fail(errc::invalid_q, "q must satisfy 0 < |q| < 1");
    }

    Scalar qv() const { return q; }

    static Scalar pow(const Scalar& base, const Exponent& e) {
        if (base == Scalar(0)) {
            if (e == Exponent(0))
                return Scalar(1);
            if (e.real() > F(0))
                return Scalar(0);
            fail(errc::domain_violated, "0 raised to a non-positive power");
        }
        return std::exp(e * std::log(base));
    }

    Scalar qpow(const Exponent& e) const { return pow(q, e); }

    static Exponent exp2(std::int64_t tw) { return Exponent(F(tw) / F(2)); }
    static Exponent halve(const Exponent& e) { return e / F(2); }
    static double mag(const Scalar& v) { return static_cast<double>(std::abs(v)); }
    static bool is_zero(const Scalar& v) { return v == Scalar(0); }
    // |v| is negligible against the running scale; the exact backend overrides
    // this with a true zero test
    static bool is_effectively_zero(const Scalar& v, double scale) {
        return mag(v) <= 64.0 * static_cast<double>(std::numeric_limits<F>::epsilon()) * (scale + 1.0);
    }
};

using NumericBackend = BasicNumericBackend<double>;

// Exact backend: scalars are big rationals.  Half-integer powers of q stay
// rational when q is the square of a rational (detected from the reduced
// numerator and denominator); otherwise only integer exponents of q are legal.
struct ExactBackend {
    using Scalar = Rational;
    using Exponent = HalfInt;
    static constexpr bool exact = true;

    Rational q{};
    Rational r{}; // q = r^2 when has_root
    bool has_root = false;

    ExactBackend() = default;
    explicit ExactBackend(const Rational& q_) : q(q_) {
        if (q == 0 || abs(q) >= 1)
            fail(errc::invalid_q, "q must satisfy 0 < |q| < 1");
        if (q > 0) {
            BigInt n = numerator(q), d = denominator(q);
            BigInt sn = sqrt(n), sd = sqrt(d);
            if (sn * sn == n && sd * sd == d) {
                r = Rational(sn, sd);
                has_root = true;
            }
        }
    }

    Scalar qv() const { return q; }

    static Scalar pow(const Scalar& base, const Exponent& e) {
        if (!e.is_integer())
            fail(errc::domain_violated,
                 "scalar^" + e.str() + " is irrational; exact powers need integer exponents");
        return pow_int(base, e.tw / 2);
    }

    Scalar qpow(const Exponent& e) const {
        if (e.is_integer())
            return pow_int(q, e.tw / 2);
        if (!has_root)
            fail(errc::domain_violated,
                 "q^" + e.str() + " is irrational here; half-integer exponents need square q");
        return pow_int(r, e.tw);
    }

    static Exponent exp2(std::int64_t tw) { return HalfInt::halves(tw); }
    static Exponent halve(const Exponent& e) { return e.half(); }
    static double mag(const Scalar& v) { return std::abs(v.convert_to<double>()); }
    static bool is_zero(const Scalar& v) { return v == 0; }
    static bool is_effectively_zero(const Scalar& v, double) { return v == 0; }
};

} // namespace qheun

#endif
