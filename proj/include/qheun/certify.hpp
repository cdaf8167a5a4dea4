#ifndef QHEUN_CERTIFY_HPP
#define QHEUN_CERTIFY_HPP

#include <complex>
#include <cstdint>
#include <random>

#include "qheun/kernel.hpp"

namespace qheun {

// Integer-grid draws keep every run bit-reproducible for a given seed; the
// standard distributions are implementation-defined, so they are avoided.
inline std::int64_t draw_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline double draw_grid(std::mt19937_64& rng, double lo, double hi, int steps = 4096) {
    return lo + (hi - lo) * (static_cast<double>(draw_int(rng, 0, steps)) / steps);
}

inline std::complex<double> draw_cplx(std::mt19937_64& rng, double lo, double hi) {
    double re = draw_grid(rng, lo, hi);
    double im = draw_grid(rng, lo, hi);
    return {re, im};
}

// bounded numerators and denominators keep big-rational growth tractable
// through the degree-four coefficient products
inline Rational draw_positive_rational(std::mt19937_64& rng, std::int64_t max_num = 16,
                                       std::int64_t max_den = 16) {
    return Rational(draw_int(rng, 1, max_num), draw_int(rng, 1, max_den));
}

inline HalfInt draw_halfint(std::mt19937_64& rng, std::int64_t tw_lo = -8,
                            std::int64_t tw_hi = 8) {
    return HalfInt::halves(draw_int(rng, tw_lo, tw_hi));
}

// q = r^2 for a small random rational r, so half-integer exponents stay exact
inline ExactBackend draw_exact_backend(std::mt19937_64& rng) {
    std::int64_t den = draw_int(rng, 2, 8);
    std::int64_t num = draw_int(rng, 1, den - 1);
    Rational r(num, den);
    return ExactBackend{r * r};
}

namespace detail {
inline bool odd_tw(const HalfInt& e) { return ((e.tw % 2) + 2) % 2 != 0; }
} // namespace detail

// Random tilde-side parameter sets satisfying the duality constraints by
// construction: free exponents are drawn first, then the dependent ones are
// computed, never solved numerically.  The parity adjustments keep the
// middle-coefficient exponents inside (1/2)Z, and chi is forced to be an
// integer so that both beta values stay integral.
inline DualMapA4<ExactBackend> draw_exact_dual_a4(std::mt19937_64& rng) {
    A4Params<ExactBackend> t;
    t.qb = draw_exact_backend(rng);
    t.t1 = draw_positive_rational(rng);
    t.t2 = draw_positive_rational(rng);
    t.h1 = draw_halfint(rng);
    t.h2 = draw_halfint(rng);
    t.l1 = draw_halfint(rng);
    t.l2 = draw_halfint(rng);
    t.alpha1 = draw_halfint(rng);
    t.alpha2 = draw_halfint(rng);
    if (detail::odd_tw(t.h1 + t.h2 + t.l1 + t.l2 + t.alpha1 + t.alpha2))
        t.alpha2 = t.alpha2 + HalfInt::halves(1);
    HalfInt chi = HalfInt::whole(draw_int(rng, -3, 3));
    t.beta = t.h1 + t.h2 - t.l1 - t.l2 + t.alpha1 - t.alpha2 - chi - chi;
    return dual_a4(t, draw_halfint(rng), draw_halfint(rng));
}

inline DualMapA3<ExactBackend> draw_exact_dual_a3(std::mt19937_64& rng) {
    A3Params<ExactBackend> t;
    t.qb = draw_exact_backend(rng);
    for (int n = 0; n < 3; ++n) {
        t.t[n] = draw_positive_rational(rng);
        t.h[n] = draw_halfint(rng);
        t.l[n] = draw_halfint(rng);
    }
    t.alpha = draw_halfint(rng);
    HalfInt sum{};
    for (int n = 0; n < 3; ++n)
        sum = sum + t.h[n] + t.l[n];
    if (detail::odd_tw(sum))
        t.l[2] = t.l[2] + HalfInt::halves(1);
    HalfInt chi = HalfInt::whole(draw_int(rng, -3, 3));
    HalfInt diff{};
    for (int n = 0; n < 3; ++n)
        diff = diff + t.h[n] - t.l[n];
    t.beta = diff - chi - chi;
    return dual_a3(t, draw_halfint(rng), draw_halfint(rng));
}

inline DualMapA2<ExactBackend> draw_exact_dual_a2(std::mt19937_64& rng) {
    A2Params<ExactBackend> t;
    t.qb = draw_exact_backend(rng);
    for (int n = 0; n < 4; ++n) {
        t.t[n] = draw_positive_rational(rng);
        t.l[n] = draw_halfint(rng);
    }
    // integer h-l offsets keep each (h_n + l_n)/2 inside (1/2)Z
    for (int n = 0; n < 3; ++n)
        t.h[n] = t.l[n] + HalfInt::whole(draw_int(rng, -3, 3));
    t.alpha = draw_halfint(rng);
    HalfInt chi = HalfInt::whole(draw_int(rng, -3, 3));
    HalfInt acc = chi + chi;
    for (int n = 0; n < 4; ++n)
        acc = acc + t.l[n];
    for (int n = 0; n < 3; ++n)
        acc = acc - t.h[n];
    t.h[3] = acc;
    return dual_a2(t, draw_halfint(rng), draw_halfint(rng));
}

// Numeric parameter sets: q and the multiplicative scales stay on the positive
// real axis (branch safety for the s^e prefactors), the exponents are free
// complex numbers.
inline DualMapA4<NumericBackend> draw_numeric_dual_a4(std::mt19937_64& rng) {
    A4Params<NumericBackend> t;
    t.qb = NumericBackend{std::complex<double>(draw_grid(rng, 0.3, 0.7), 0.0)};
    t.t1 = draw_grid(rng, 0.5, 1.5);
    t.t2 = draw_grid(rng, 0.5, 1.5);
    t.h1 = draw_cplx(rng, -1.0, 1.0);
    t.h2 = draw_cplx(rng, -1.0, 1.0);
    t.l1 = draw_cplx(rng, -1.0, 1.0);
    t.l2 = draw_cplx(rng, -1.0, 1.0);
    t.alpha1 = draw_cplx(rng, -1.0, 1.0);
    t.alpha2 = draw_cplx(rng, -1.0, 1.0);
    t.beta = draw_cplx(rng, -1.0, 1.0);
    return dual_a4(t, draw_cplx(rng, -1.0, 1.0), draw_cplx(rng, -1.0, 1.0));
}

inline DualMapA3<NumericBackend> draw_numeric_dual_a3(std::mt19937_64& rng) {
    A3Params<NumericBackend> t;
    t.qb = NumericBackend{std::complex<double>(draw_grid(rng, 0.3, 0.7), 0.0)};
    for (int n = 0; n < 3; ++n) {
        t.t[n] = draw_grid(rng, 0.5, 1.5);
        t.h[n] = draw_cplx(rng, -1.0, 1.0);
        t.l[n] = draw_cplx(rng, -1.0, 1.0);
    }
    t.alpha = draw_cplx(rng, -1.0, 1.0);
    t.beta = draw_cplx(rng, -1.0, 1.0);
    return dual_a3(t, draw_cplx(rng, -1.0, 1.0), draw_cplx(rng, -1.0, 1.0));
}

inline DualMapA2<NumericBackend> draw_numeric_dual_a2(std::mt19937_64& rng) {
    A2Params<NumericBackend> t;
    t.qb = NumericBackend{std::complex<double>(draw_grid(rng, 0.3, 0.7), 0.0)};
    for (int n = 0; n < 4; ++n) {
        t.t[n] = draw_grid(rng, 0.5, 1.5);
        t.h[n] = draw_cplx(rng, -1.0, 1.0);
        t.l[n] = draw_cplx(rng, -1.0, 1.0);
    }
    t.alpha = draw_cplx(rng, -1.0, 1.0);
    return dual_a2(t, draw_cplx(rng, -1.0, 1.0), draw_cplx(rng, -1.0, 1.0));
}

} // namespace qheun

#endif
