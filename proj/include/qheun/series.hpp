#ifndef QHEUN_SERIES_HPP
#define QHEUN_SERIES_HPP

#include <cstdint>
#include <vector>

#include "qheun/backend.hpp"

namespace qheun {

// (a;q)_inf = prod_{j>=0} (1 - q^j a), truncated once |q^j a| < tail_epsilon.
// The floating backend multiplies the remaining tail in to first order,
// 1 - q^J a/(1-q); the exact backend returns the bare partial product and
// reports J through index_out.
template <class B>
typename B::Scalar qpoch_inf(const B& qb, const typename B::Scalar& a,
                             const TruncationPolicy& pol = {}, int* index_out = nullptr) {
    using S = typename B::Scalar;
    const S q = qb.qv();
    S prod(1), c = a;
    for (int j = 0; j < pol.max_terms; ++j) {
        if (B::mag(c) < pol.tail_epsilon) {
            if (index_out)
                *index_out = j;
            if constexpr (!B::exact)
                prod *= S(1) - c / (S(1) - q);
            return prod;
        }
        S factor = S(1) - c;
        if (B::is_zero(factor)) {
            if (index_out)
                *index_out = j;
            return S(0);
        }
        prod *= factor;
        c *= q;
    }
    fail(errc::non_convergent, "qpoch_inf did not reach the tail threshold");
}

// (a;q)_n for any integer n; finite product, exact in both backends
template <class B>
typename B::Scalar qpoch_n(const B& qb, const typename B::Scalar& a, std::int64_t n) {
    using S = typename B::Scalar;
    const S q = qb.qv();
    if (n >= 0) {
        S prod(1), c = a;
        for (std::int64_t j = 0; j < n; ++j) {
            prod *= S(1) - c;
            c *= q;
        }
        return prod;
    }
    // (a;q)_{-m} = 1 / prod_{j=1..m} (1 - a q^{-j})
    S prod(1), c = a;
    for (std::int64_t j = 1; j <= -n; ++j) {
        c /= q;
        S factor = S(1) - c;
        if (B::is_zero(factor))
            fail(errc::pole_encountered, "qpoch_n: vanishing factor at negative index");
        prod *= factor;
    }
    return S(1) / prod;
}

// theta_q(t) = (t, q/t, q; q)_inf
template <class B>
typename B::Scalar theta_q(const B& qb, const typename B::Scalar& t,
                           const TruncationPolicy& pol = {}) {
    if (B::is_zero(t))
        fail(errc::invalid_argument, "theta_q at t = 0");
    return qpoch_inf(qb, t, pol) * qpoch_inf(qb, qb.qv() / t, pol) * qpoch_inf(qb, qb.qv(), pol);
}

// theta_q(num)/theta_q(den), with both arguments first pulled into the unit
// disk through theta_q(t) = (-1)^m q^(m(m-1)/2) t^m theta_q(q^m t).  Using a
// common m for numerator and denominator turns the prefactors into a plain
// power of num/den, so the quotient stays representable even when each theta
// alone would overflow.
template <class B>
typename B::Scalar theta_ratio(const B& qb, const typename B::Scalar& num,
                               const typename B::Scalar& den,
                               const TruncationPolicy& pol = {}) {
    using S = typename B::Scalar;
    if (B::is_zero(num) || B::is_zero(den))
        fail(errc::invalid_argument, "theta_ratio needs nonzero arguments");
    const S q = qb.qv();
    S tn = num, td = den;
    int m = 0;
    while (B::mag(tn) > 1.0 || B::mag(td) > 1.0) {
        if (m >= pol.max_terms)
            fail(errc::non_convergent, "theta_ratio could not reduce its arguments");
        tn *= q;
        td *= q;
        ++m;
    }
    S scale(1);
    const S base = num / den;
    for (int j = 0; j < m; ++j)
        scale *= base;
    S th_den = theta_q(qb, td, pol);
    if (B::is_zero(th_den))
        fail(errc::pole_encountered, "theta_ratio: denominator theta vanishes");
    return scale * theta_q(qb, tn, pol) / th_den;
}

// (s/a;q)_inf / (s/b;q)_inf for nonzero a, b.  Inside the unit circle the two
// products are formed directly; once both arguments pass it, the pair is
// rewritten as theta_ratio(s/a, s/b) * (q b/s;q)_inf / (q a/s;q)_inf, whose
// factors all stay bounded however large |s| grows.
template <class B>
typename B::Scalar qpoch_pair_ratio(const B& qb, const typename B::Scalar& s,
                                    const typename B::Scalar& a, const typename B::Scalar& b,
                                    const TruncationPolicy& pol = {}) {
    using S = typename B::Scalar;
    if (B::is_zero(a) || B::is_zero(b))
        fail(errc::invalid_argument, "qpoch_pair_ratio needs nonzero reference points");
    const S u = s / a, v = s / b;
    if (B::mag(u) <= 1.0 || B::mag(v) <= 1.0) {
        S den = qpoch_inf(qb, v, pol);
        if (B::is_zero(den))
            fail(errc::pole_encountered, "qpoch_pair_ratio: pole at s on the q^(-j) b lattice");
        return qpoch_inf(qb, u, pol) / den;
    }
    const S q = qb.qv();
    S den = qpoch_inf(qb, q / u, pol);
    if (B::is_zero(den))
        fail(errc::pole_encountered, "qpoch_pair_ratio: pole from the reflected numerator");
    return theta_ratio(qb, u, v, pol) * qpoch_inf(qb, q / v, pol) / den;
}

// P1(x,s) = (q^mu s/x; q)_inf / (q^mu0 s/x; q)_inf
template <class B>
typename B::Scalar p1_kernel(const B& qb, const typename B::Exponent& mu,
                             const typename B::Exponent& mu0, const typename B::Scalar& x,
                             const typename B::Scalar& s, const TruncationPolicy& pol = {}) {
    using S = typename B::Scalar;
    if (B::is_zero(x))
        fail(errc::invalid_argument, "p1_kernel at x = 0");
    if (B::is_zero(s))
        return S(1);
    S num = qpoch_inf(qb, qb.qpow(mu) * s / x, pol);
    S den = qpoch_inf(qb, qb.qpow(mu0) * s / x, pol);
    if (B::is_zero(den))
        fail(errc::pole_encountered, "p1_kernel: denominator product vanishes");
    return num / den;
}

// P2(x,s) = (x/s)^(mu-mu0) (q^(-mu0+1) x/s; q)_inf / (q^(-mu+1) x/s; q)_inf
template <class B>
typename B::Scalar p2_kernel(const B& qb, const typename B::Exponent& mu,
                             const typename B::Exponent& mu0, const typename B::Scalar& x,
                             const typename B::Scalar& s, const TruncationPolicy& pol = {}) {
    if (B::is_zero(s))
        fail(errc::invalid_argument, "p2_kernel at s = 0");
    using S = typename B::Scalar;
    S num = qpoch_inf(qb, qb.qpow(-mu0 + B::exp2(2)) * x / s, pol);
    S den = qpoch_inf(qb, qb.qpow(-mu + B::exp2(2)) * x / s, pol);
    if (B::is_zero(den))
        fail(errc::pole_encountered, "p2_kernel: denominator product vanishes");
    return B::pow(x / s, mu - mu0) * num / den;
}

// Lattice ratios shared by P1 and P2 (and by any kernel satisfying the same
// pair of contiguous relations):
//   P(x, qs)/P(x, s)  = (x - q^mu0 s)/(x - q^mu s)
//   P(x, s/q)/P(x, s) = (x - q^(mu-1) s)/(x - q^(mu0-1) s)
template <class B>
typename B::Scalar p_step_s_up(const B& qb, const typename B::Exponent& mu,
                               const typename B::Exponent& mu0, const typename B::Scalar& x,
                               const typename B::Scalar& s) {
    using S = typename B::Scalar;
    S den = x - qb.qpow(mu) * s;
    if (B::is_zero(den))
        fail(errc::pole_encountered, "kernel step ratio: x = q^mu s");
    return (x - qb.qpow(mu0) * s) / den;
}

template <class B>
typename B::Scalar p_step_s_down(const B& qb, const typename B::Exponent& mu,
                                 const typename B::Exponent& mu0, const typename B::Scalar& x,
                                 const typename B::Scalar& s) {
    using S = typename B::Scalar;
    S den = x - qb.qpow(mu0 - B::exp2(2)) * s;
    if (B::is_zero(den))
        fail(errc::pole_encountered, "kernel step ratio: x = q^(mu0-1) s");
    return (x - qb.qpow(mu - B::exp2(2)) * s) / den;
}

// Relative kernel values along the s-lattice: entry m-lo is P(x, q^m s)/P(x, s).
// Built purely from the two step ratios, so it is valid for every kernel
// satisfying them; this is what the exact identity checks consume.
template <class B>
std::vector<typename B::Scalar> p_offset_germ(const B& qb, const typename B::Exponent& mu,
                                              const typename B::Exponent& mu0,
                                              const typename B::Scalar& x,
                                              const typename B::Scalar& s, std::int64_t lo,
                                              std::int64_t hi) {
    using S = typename B::Scalar;
    if (lo > 0 || hi < 0 || lo > hi)
        fail(errc::invalid_argument, "p_offset_germ needs lo <= 0 <= hi");
    std::vector<S> rho(static_cast<std::size_t>(hi - lo + 1));
    rho[static_cast<std::size_t>(-lo)] = S(1);
    S sm = s;
    for (std::int64_t m = 0; m < hi; ++m) {
        rho[static_cast<std::size_t>(m + 1 - lo)] =
            rho[static_cast<std::size_t>(m - lo)] * p_step_s_up(qb, mu, mu0, x, sm);
        sm *= qb.qv();
    }
    sm = s;
    for (std::int64_t m = 0; m > lo; --m) {
        rho[static_cast<std::size_t>(m - 1 - lo)] =
            rho[static_cast<std::size_t>(m - lo)] * p_step_s_down(qb, mu, mu0, x, sm);
        sm /= qb.qv();
    }
    return rho;
}

} // namespace qheun

#endif
