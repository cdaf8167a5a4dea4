#ifndef QHEUN_KERNEL_HPP
#define QHEUN_KERNEL_HPP

#include <algorithm>

#include "qheun/operators.hpp"
#include "qheun/series.hpp"

namespace qheun {

enum class KernelVariant { p1, p2 };

// Parameter duality between an operator acting in x and a partner acting in s,
// such that Phi(x,s) = x^(-alpha1) s^(1+chi-alpha~1) P_{mu,mu0}(x,s) satisfies
// A(x; derived) Phi = q^nu A(s; input) Phi for ANY P obeying the four kernel
// recurrences.  The input (tilde) side is the s-operator; mu0 and alpha1 are
// the free parameters of the map.
template <class B>
struct DualMapA4 {
    A4Params<B> tilde;
    typename B::Exponent mu0{}, alpha1{};
    A4Params<B> out;
    typename B::Exponent chi{}, nu{}, mu{};
};

template <class B>
struct DualMapA3 {
    A3Params<B> tilde;
    typename B::Exponent mu0{}, alpha{};
    A3Params<B> out;
    typename B::Exponent chi{}, nu{}, mu{};
};

template <class B>
struct DualMapA2 {
    A2Params<B> tilde;
    typename B::Exponent mu0{}, alpha{};
    A2Params<B> out;
    typename B::Exponent chi{}, nu{}, mu{};
};

template <class B>
DualMapA4<B> dual_a4(const A4Params<B>& tilde, const typename B::Exponent& mu0,
                     const typename B::Exponent& alpha1) {
    DualMapA4<B> m;
    m.tilde = tilde;
    m.mu0 = mu0;
    m.alpha1 = alpha1;
    m.chi = B::halve(tilde.h1 + tilde.h2 - tilde.l1 - tilde.l2 + tilde.alpha1 - tilde.alpha2 -
                     tilde.beta);
    m.nu = mu0 + alpha1 - tilde.alpha2;
    m.mu = mu0 + m.chi + B::exp2(2);
    m.out.qb = tilde.qb;
    m.out.t1 = tilde.t1;
    m.out.t2 = tilde.t2;
    m.out.alpha1 = alpha1;
    m.out.alpha2 = alpha1 + tilde.alpha1 - tilde.alpha2 - m.chi;
    m.out.beta = -tilde.beta - m.chi;
    m.out.l1 = tilde.h1 + mu0;
    m.out.l2 = tilde.h2 + mu0;
    m.out.h1 = tilde.l1 + mu0 + m.chi;
    m.out.h2 = tilde.l2 + mu0 + m.chi;
    return m;
}

// Inverse direction: recover the s-side parameters from the x-side ones, with
// mu0 and the s-side alpha2 free.
template <class B>
A4Params<B> dual_a4_inverse(const A4Params<B>& p, const typename B::Exponent& mu0,
                            const typename B::Exponent& alpha_t2) {
    auto chi = B::halve(p.h1 + p.h2 - p.l1 - p.l2 + p.alpha1 - p.alpha2 - p.beta);
    A4Params<B> t;
    t.qb = p.qb;
    t.t1 = p.t1;
    t.t2 = p.t2;
    t.alpha2 = alpha_t2;
    t.alpha1 = alpha_t2 + p.alpha2 - p.alpha1 + chi;
    t.beta = -p.beta - chi;
    t.h1 = p.l1 - mu0;
    t.h2 = p.l2 - mu0;
    t.l1 = p.h1 - mu0 - chi;
    t.l2 = p.h2 - mu0 - chi;
    return t;
}

template <class B>
DualMapA3<B> dual_a3(const A3Params<B>& tilde, const typename B::Exponent& mu0,
                     const typename B::Exponent& alpha) {
    DualMapA3<B> m;
    m.tilde = tilde;
    m.mu0 = mu0;
    m.alpha = alpha;
    typename B::Exponent diff{};
    for (int n = 0; n < 3; ++n)
        diff = diff + tilde.h[n] - tilde.l[n];
    m.chi = B::halve(diff - tilde.beta);
    m.nu = mu0 + mu0 + alpha - tilde.alpha + m.chi;
    m.mu = mu0 + m.chi + B::exp2(2);
    m.out.qb = tilde.qb;
    m.out.t = tilde.t;
    m.out.alpha = alpha;
    m.out.beta = -tilde.beta - m.chi;
    for (int n = 0; n < 3; ++n) {
        m.out.l[n] = tilde.h[n] + mu0;
        m.out.h[n] = tilde.l[n] + mu0 + m.chi;
    }
    return m;
}

template <class B>
A3Params<B> dual_a3_inverse(const A3Params<B>& p, const typename B::Exponent& mu0,
                            const typename B::Exponent& alpha_t) {
    typename B::Exponent diff{};
    for (int n = 0; n < 3; ++n)
        diff = diff + p.h[n] - p.l[n];
    auto chi = B::halve(diff - p.beta);
    A3Params<B> t;
    t.qb = p.qb;
    t.t = p.t;
    t.alpha = alpha_t;
    t.beta = -p.beta - chi;
    for (int n = 0; n < 3; ++n) {
        t.h[n] = p.l[n] - mu0;
        t.l[n] = p.h[n] - mu0 - chi;
    }
    return t;
}

template <class B>
DualMapA2<B> dual_a2(const A2Params<B>& tilde, const typename B::Exponent& mu0,
                     const typename B::Exponent& alpha) {
    DualMapA2<B> m;
    m.tilde = tilde;
    m.mu0 = mu0;
    m.alpha = alpha;
    typename B::Exponent diff{};
    for (int n = 0; n < 4; ++n)
        diff = diff + tilde.h[n] - tilde.l[n];
    m.chi = B::halve(diff);
    m.nu = mu0 + mu0 + alpha - tilde.alpha + m.chi;
    m.mu = mu0 + m.chi + B::exp2(2);
    m.out.qb = tilde.qb;
    m.out.t = tilde.t;
    m.out.alpha = alpha;
    for (int n = 0; n < 4; ++n) {
        m.out.l[n] = tilde.h[n] + mu0;
        m.out.h[n] = tilde.l[n] + mu0 + m.chi;
    }
    return m;
}

template <class B>
A2Params<B> dual_a2_inverse(const A2Params<B>& p, const typename B::Exponent& mu0,
                            const typename B::Exponent& alpha_t) {
    typename B::Exponent diff{};
    for (int n = 0; n < 4; ++n)
        diff = diff + p.h[n] - p.l[n];
    auto chi = B::halve(diff);
    A2Params<B> t;
    t.qb = p.qb;
    t.t = p.t;
    t.alpha = alpha_t;
    for (int n = 0; n < 4; ++n) {
        t.h[n] = p.l[n] - mu0;
        t.l[n] = p.h[n] - mu0 - chi;
    }
    return t;
}

namespace detail {

template <class B>
typename B::Scalar kernel_p(const B& qb, const typename B::Exponent& mu,
                            const typename B::Exponent& mu0, KernelVariant v,
                            const typename B::Scalar& x, const typename B::Scalar& s,
                            const TruncationPolicy& pol) {
    return v == KernelVariant::p1 ? p1_kernel(qb, mu, mu0, x, s, pol)
                                  : p2_kernel(qb, mu, mu0, x, s, pol);
}

inline void update_scale(double* scale, double term) {
    if (scale)
        *scale = std::max(*scale, term);
}

} // namespace detail

template <class B>
typename B::Scalar phi_a4(const DualMapA4<B>& m, KernelVariant v, const typename B::Scalar& x,
                          const typename B::Scalar& s, const TruncationPolicy& pol = {}) {
    auto e_s = B::exp2(2) + m.chi - m.tilde.alpha1;
    return B::pow(x, -m.alpha1) * B::pow(s, e_s) *
           detail::kernel_p(m.out.qb, m.mu, m.mu0, v, x, s, pol);
}

template <class B>
typename B::Scalar phi_a3(const DualMapA3<B>& m, KernelVariant v, const typename B::Scalar& x,
                          const typename B::Scalar& s, const TruncationPolicy& pol = {}) {
    auto e_s = m.chi + B::exp2(2) - m.tilde.alpha;
    return B::pow(x, -m.alpha) * B::pow(s, e_s) *
           detail::kernel_p(m.out.qb, m.mu, m.mu0, v, x, s, pol);
}

template <class B>
typename B::Scalar phi_a2(const DualMapA2<B>& m, KernelVariant v, const typename B::Scalar& x,
                          const typename B::Scalar& s, const TruncationPolicy& pol = {}) {
    auto e_s = m.chi + B::exp2(2) - m.tilde.alpha;
    return B::pow(x, -m.alpha) * B::pow(s, e_s) *
           detail::kernel_p(m.out.qb, m.mu, m.mu0, v, x, s, pol);
}

// Full identity residual with the kernel evaluated honestly from its product
// representation: A(x) Phi - q^nu A(s; tilde) Phi.  scale_out (optional)
// receives the largest stencil-term magnitude for relative-residual reporting.
template <class B>
typename B::Scalar verify_kernel_a4(const DualMapA4<B>& m, KernelVariant v,
                                    const typename B::Scalar& x, const typename B::Scalar& s,
                                    double* scale_out = nullptr,
                                    const TruncationPolicy& pol = {}) {
    using S = typename B::Scalar;
    const S q = m.out.qb.qv();
    auto phi = [&](const S& xx, const S& ss) { return phi_a4(m, v, xx, ss, pol); };
    S terms[6] = {a4_coef_a(m.out, x) * phi(x / q, s),
                  a4_coef_b(m.out, x) * phi(x, s),
                  a4_coef_c(m.out, x) * phi(q * x, s),
                  m.out.qb.qpow(m.nu) * a4_coef_a(m.tilde, s) * phi(x, s / q),
                  m.out.qb.qpow(m.nu) * a4_coef_b(m.tilde, s) * phi(x, s),
                  m.out.qb.qpow(m.nu) * a4_coef_c(m.tilde, s) * phi(x, q * s)};
    if (scale_out) {
        *scale_out = 0.0;
        for (const S& t : terms)
            detail::update_scale(scale_out, B::mag(t));
    }
    return terms[0] + terms[1] + terms[2] - (terms[3] + terms[4] + terms[5]);
}

template <class B>
typename B::Scalar verify_kernel_a3(const DualMapA3<B>& m, KernelVariant v,
                                    const typename B::Scalar& x, const typename B::Scalar& s,
                                    double* scale_out = nullptr,
                                    const TruncationPolicy& pol = {}) {
    using S = typename B::Scalar;
    const S q = m.out.qb.qv();
    auto phi = [&](const S& xx, const S& ss) { return phi_a3(m, v, xx, ss, pol); };
    S terms[6] = {a3_coef_a(m.out, x) * phi(x / q, s),
                  a3_coef_b(m.out, x) * phi(x, s),
                  a3_coef_c(m.out, x) * phi(q * x, s),
                  m.out.qb.qpow(m.nu) * a3_coef_a(m.tilde, s) * phi(x, s / q),
                  m.out.qb.qpow(m.nu) * a3_coef_b(m.tilde, s) * phi(x, s),
                  m.out.qb.qpow(m.nu) * a3_coef_c(m.tilde, s) * phi(x, q * s)};
    if (scale_out) {
        *scale_out = 0.0;
        for (const S& t : terms)
            detail::update_scale(scale_out, B::mag(t));
    }
    return terms[0] + terms[1] + terms[2] - (terms[3] + terms[4] + terms[5]);
}

template <class B>
typename B::Scalar verify_kernel_a2(const DualMapA2<B>& m, KernelVariant v,
                                    const typename B::Scalar& x, const typename B::Scalar& s,
                                    double* scale_out = nullptr,
                                    const TruncationPolicy& pol = {}) {
    using S = typename B::Scalar;
    const S q = m.out.qb.qv();
    auto phi = [&](const S& xx, const S& ss) { return phi_a2(m, v, xx, ss, pol); };
    S terms[6] = {a2_coef_a(m.out, x) * phi(x / q, s),
                  a2_coef_b(m.out, x) * phi(x, s),
                  a2_coef_c(m.out, x) * phi(q * x, s),
                  m.out.qb.qpow(m.nu) * a2_coef_a(m.tilde, s) * phi(x, s / q),
                  m.out.qb.qpow(m.nu) * a2_coef_b(m.tilde, s) * phi(x, s),
                  m.out.qb.qpow(m.nu) * a2_coef_c(m.tilde, s) * phi(x, q * s)};
    if (scale_out) {
        *scale_out = 0.0;
        for (const S& t : terms)
            detail::update_scale(scale_out, B::mag(t));
    }
    return terms[0] + terms[1] + terms[2] - (terms[3] + terms[4] + terms[5]);
}

// Identity residual normalized by Phi(x,s).  All six kernel values reduce to
// the base point through the step ratios, so every term is a finite product of
// rationals: exact mode can certify a literal zero, and the evaluation is
// variant-free (the recurrences are shared by both kernels).
template <class B>
typename B::Scalar verify_kernel_germ_a4(const DualMapA4<B>& m, const typename B::Scalar& x,
                                         const typename B::Scalar& s,
                                         double* scale_out = nullptr) {
    using S = typename B::Scalar;
    const B& qb = m.out.qb;
    S r_up = p_step_s_up(qb, m.mu, m.mu0, x, s);
    S r_dn = p_step_s_down(qb, m.mu, m.mu0, x, s);
    auto e_s = B::exp2(2) + m.chi - m.tilde.alpha1;
    S terms[6] = {a4_coef_a(m.out, x) * qb.qpow(m.alpha1) * r_up,
                  a4_coef_b(m.out, x),
                  a4_coef_c(m.out, x) * qb.qpow(-m.alpha1) * r_dn,
                  qb.qpow(m.nu) * a4_coef_a(m.tilde, s) * qb.qpow(-e_s) * r_dn,
                  qb.qpow(m.nu) * a4_coef_b(m.tilde, s),
                  qb.qpow(m.nu) * a4_coef_c(m.tilde, s) * qb.qpow(e_s) * r_up};
    if (scale_out) {
        *scale_out = 0.0;
        for (const S& t : terms)
            detail::update_scale(scale_out, B::mag(t));
    }
    return terms[0] + terms[1] + terms[2] - (terms[3] + terms[4] + terms[5]);
}

template <class B>
typename B::Scalar verify_kernel_germ_a3(const DualMapA3<B>& m, const typename B::Scalar& x,
                                         const typename B::Scalar& s,
                                         double* scale_out = nullptr) {
    using S = typename B::Scalar;
    const B& qb = m.out.qb;
    S r_up = p_step_s_up(qb, m.mu, m.mu0, x, s);
    S r_dn = p_step_s_down(qb, m.mu, m.mu0, x, s);
    auto e_s = m.chi + B::exp2(2) - m.tilde.alpha;
    S terms[6] = {a3_coef_a(m.out, x) * qb.qpow(m.alpha) * r_up,
                  a3_coef_b(m.out, x),
                  a3_coef_c(m.out, x) * qb.qpow(-m.alpha) * r_dn,
                  qb.qpow(m.nu) * a3_coef_a(m.tilde, s) * qb.qpow(-e_s) * r_dn,
                  qb.qpow(m.nu) * a3_coef_b(m.tilde, s),
                  qb.qpow(m.nu) * a3_coef_c(m.tilde, s) * qb.qpow(e_s) * r_up};
    if (scale_out) {
        *scale_out = 0.0;
        for (const S& t : terms)
            detail::update_scale(scale_out, B::mag(t));
    }
    return terms[0] + terms[1] + terms[2] - (terms[3] + terms[4] + terms[5]);
}

template <class B>
typename B::Scalar verify_kernel_germ_a2(const DualMapA2<B>& m, const typename B::Scalar& x,
                                         const typename B::Scalar& s,
                                         double* scale_out = nullptr) {
    using S = typename B::Scalar;
    const B& qb = m.out.qb;
    S r_up = p_step_s_up(qb, m.mu, m.mu0, x, s);
    S r_dn = p_step_s_down(qb, m.mu, m.mu0, x, s);
    auto e_s = m.chi + B::exp2(2) - m.tilde.alpha;
    S terms[6] = {a2_coef_a(m.out, x) * qb.qpow(m.alpha) * r_up,
                  a2_coef_b(m.out, x),
                  a2_coef_c(m.out, x) * qb.qpow(-m.alpha) * r_dn,
                  qb.qpow(m.nu) * a2_coef_a(m.tilde, s) * qb.qpow(-e_s) * r_dn,
                  qb.qpow(m.nu) * a2_coef_b(m.tilde, s),
                  qb.qpow(m.nu) * a2_coef_c(m.tilde, s) * qb.qpow(e_s) * r_up};
    if (scale_out) {
        *scale_out = 0.0;
        for (const S& t : terms)
            detail::update_scale(scale_out, B::mag(t));
    }
    return terms[0] + terms[1] + terms[2] - (terms[3] + terms[4] + terms[5]);
}

// The identity collapsed to scalar form: after dividing out the kernel, the
// degree-two case reduces to two linear-fraction terms plus the middle
// difference, with no kernel evaluation at all.
template <class B>
typename B::Scalar verify_kernel_reduced_a4(const DualMapA4<B>& m, const typename B::Scalar& x,
                                            const typename B::Scalar& s,
                                            double* scale_out = nullptr) {
    using S = typename B::Scalar;
    const B& qb = m.out.qb;
    S R1 = p_step_s_up(qb, m.mu, m.mu0, x, s);
    S R2 = p_step_s_down(qb, m.mu, m.mu0, x, s);
    auto e_s = B::exp2(2) + m.chi - m.tilde.alpha1;
    S terms[3] = {
        (qb.qpow(m.alpha1) * a4_coef_a(m.out, x) - qb.qpow(m.nu + e_s) * a4_coef_c(m.tilde, s)) *
            R1,
        (qb.qpow(-m.alpha1) * a4_coef_c(m.out, x) - qb.qpow(m.nu - e_s) * a4_coef_a(m.tilde, s)) *
            R2,
        a4_coef_b(m.out, x) - qb.qpow(m.nu) * a4_coef_b(m.tilde, s)};
    if (scale_out) {
        *scale_out = 0.0;
        for (const S& t : terms)
            detail::update_scale(scale_out, B::mag(t));
    }
    return terms[0] + terms[1] + terms[2];
}

} // namespace qheun

#endif
