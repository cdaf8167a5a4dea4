#ifndef QHEUN_OPERATORS_HPP
#define QHEUN_OPERATORS_HPP

#include <array>
#include <functional>
#include <vector>

#include "qheun/backend.hpp"

namespace qheun {

// A function on a q-lattice, carried as an evaluation rule plus the base
// point of the lattice it is naturally anchored to.
template <class B>
struct LatticeFunction {
    using S = typename B::Scalar;
    std::function<S(const S&)> rule;
    S base{};

    S operator()(const S& x) const { return rule(x); }
};

// Parameters of the three-term operator
//   a(x) T^-1 + b(x) + c(x) T  with
//   a(x) = x^-1 (x - q^(h1+1/2) t1)(x - q^(h2+1/2) t2)
//   c(x) = q^(a1+a2) x^-1 (x - q^(l1-1/2) t1)(x - q^(l2-1/2) t2)
//   b(x) = -{(q^a1 + q^a2) x + q^((h1+h2+l1+l2+a1+a2)/2)(q^(b/2)+q^(-b/2)) t1 t2 x^-1}
template <class B>
struct A4Params {
    using E = typename B::Exponent;
    using S = typename B::Scalar;
    B qb{};
    E h1{}, h2{}, l1{}, l2{}, alpha1{}, alpha2{}, beta{};
    S t1{}, t2{};
};

template <class B>
struct A3Params {
    using E = typename B::Exponent;
    using S = typename B::Scalar;
    B qb{};
    std::array<E, 3> h{}, l{};
    E alpha{}, beta{};
    std::array<S, 3> t{};
};

template <class B>
struct A2Params {
    using E = typename B::Exponent;
    using S = typename B::Scalar;
    B qb{};
    std::array<E, 4> h{}, l{};
    E alpha{};
    std::array<S, 4> t{};
};

namespace detail {
template <class B>
void require_nonzero_x(const typename B::Scalar& x) {
    if (B::is_zero(x))
        fail(errc::invalid_argument, "operator coefficients blow up at x = 0");
}
} // namespace detail

template <class B>
typename B::Scalar a4_coef_a(const A4Params<B>& p, const typename B::Scalar& x) {
    detail::require_nonzero_x<B>(x);
    const B& qb = p.qb;
    return (x - qb.qpow(p.h1 + B::exp2(1)) * p.t1) * (x - qb.qpow(p.h2 + B::exp2(1)) * p.t2) / x;
}

template <class B>
typename B::Scalar a4_coef_c(const A4Params<B>& p, const typename B::Scalar& x) {
    detail::require_nonzero_x<B>(x);
    const B& qb = p.qb;
    return qb.qpow(p.alpha1 + p.alpha2) * (x - qb.qpow(p.l1 - B::exp2(1)) * p.t1) *
           (x - qb.qpow(p.l2 - B::exp2(1)) * p.t2) / x;
}

template <class B>
typename B::Scalar a4_coef_b(const A4Params<B>& p, const typename B::Scalar& x) {
    detail::require_nonzero_x<B>(x);
    const B& qb = p.qb;
    auto sigma = B::halve(p.h1 + p.h2 + p.l1 + p.l2 + p.alpha1 + p.alpha2);
    auto bh = B::halve(p.beta);
    return -((qb.qpow(p.alpha1) + qb.qpow(p.alpha2)) * x +
             qb.qpow(sigma) * (qb.qpow(bh) + qb.qpow(-bh)) * p.t1 * p.t2 / x);
}

template <class B>
typename B::Scalar a3_coef_a(const A3Params<B>& p, const typename B::Scalar& x) {
    detail::require_nonzero_x<B>(x);
    typename B::Scalar acc = typename B::Scalar(1) / x;
    for (int n = 0; n < 3; ++n)
        acc *= x - p.qb.qpow(p.h[n] + B::exp2(1)) * p.t[n];
    return acc;
}

template <class B>
typename B::Scalar a3_coef_c(const A3Params<B>& p, const typename B::Scalar& x) {
    detail::require_nonzero_x<B>(x);
    typename B::Scalar acc = p.qb.qpow(p.alpha + p.alpha + B::exp2(2)) / x;
    for (int n = 0; n < 3; ++n)
        acc *= x - p.qb.qpow(p.l[n] - B::exp2(1)) * p.t[n];
    return acc;
}

template <class B>
typename B::Scalar a3_coef_b(const A3Params<B>& p, const typename B::Scalar& x) {
    detail::require_nonzero_x<B>(x);
    using S = typename B::Scalar;
    const B& qb = p.qb;
    typename B::Exponent sum{};
    S linear{};
    for (int n = 0; n < 3; ++n) {
        sum = sum + p.h[n] + p.l[n];
        linear += (qb.qpow(p.h[n]) + qb.qpow(p.l[n])) * p.t[n];
    }
    auto bh = B::halve(p.beta);
    S inner = -(qb.qpow(B::exp2(1)) + qb.qpow(B::exp2(-1))) * x * x + linear * x +
              qb.qpow(B::halve(sum)) * (qb.qpow(bh) + qb.qpow(-bh)) * p.t[0] * p.t[1] * p.t[2] / x;
    return qb.qpow(p.alpha + B::exp2(1)) * inner;
}

template <class B>
typename B::Scalar a2_coef_a(const A2Params<B>& p, const typename B::Scalar& x) {
    detail::require_nonzero_x<B>(x);
    typename B::Scalar acc = typename B::Scalar(1) / (x * x);
    for (int n = 0; n < 4; ++n)
        acc *= x - p.qb.qpow(p.h[n] + B::exp2(1)) * p.t[n];
    return acc;
}

template <class B>
typename B::Scalar a2_coef_c(const A2Params<B>& p, const typename B::Scalar& x) {
    detail::require_nonzero_x<B>(x);
    typename B::Scalar acc = p.qb.qpow(p.alpha + p.alpha + B::exp2(2)) / (x * x);
    for (int n = 0; n < 4; ++n)
        acc *= x - p.qb.qpow(p.l[n] - B::exp2(1)) * p.t[n];
    return acc;
}

template <class B>
typename B::Scalar a2_coef_b(const A2Params<B>& p, const typename B::Scalar& x) {
    detail::require_nonzero_x<B>(x);
    using S = typename B::Scalar;
    const B& qb = p.qb;
    S linear{}, inv_linear{}, prod_mid(1);
    for (int n = 0; n < 4; ++n) {
        linear += (qb.qpow(p.h[n]) + qb.qpow(p.l[n])) * p.t[n];
        inv_linear += (qb.qpow(-p.h[n]) + qb.qpow(-p.l[n])) / p.t[n];
        prod_mid *= qb.qpow(B::halve(p.h[n] + p.l[n])) * p.t[n];
    }
    S two_cosh = qb.qpow(B::exp2(1)) + qb.qpow(B::exp2(-1));
    S inner = -two_cosh * x * x + linear * x + prod_mid * (-two_cosh / (x * x) + inv_linear / x);
    return qb.qpow(p.alpha + B::exp2(1)) * inner;
}

template <class B, class F>
typename B::Scalar apply_a4(const A4Params<B>& p, F&& f, const typename B::Scalar& x) {
    const auto q = p.qb.qv();
    return a4_coef_a(p, x) * f(x / q) + a4_coef_b(p, x) * f(x) + a4_coef_c(p, x) * f(q * x);
}

template <class B, class F>
typename B::Scalar apply_a3(const A3Params<B>& p, F&& f, const typename B::Scalar& x) {
    const auto q = p.qb.qv();
    return a3_coef_a(p, x) * f(x / q) + a3_coef_b(p, x) * f(x) + a3_coef_c(p, x) * f(q * x);
}

template <class B, class F>
typename B::Scalar apply_a2(const A2Params<B>& p, F&& f, const typename B::Scalar& x) {
    const auto q = p.qb.qv();
    return a2_coef_a(p, x) * f(x / q) + a2_coef_b(p, x) * f(x) + a2_coef_c(p, x) * f(q * x);
}

// (A f)(x) - E f(x) at each requested point; the max magnitude over the list
// is the eigen-residual
template <class B, class F>
std::vector<typename B::Scalar> residual_a4(const A4Params<B>& p, const typename B::Scalar& E,
                                            F&& f, const std::vector<typename B::Scalar>& points) {
    std::vector<typename B::Scalar> out;
    out.reserve(points.size());
    for (const auto& x : points)
        out.push_back(apply_a4(p, f, x) - E * f(x));
    return out;
}

template <class B, class F>
std::vector<typename B::Scalar> residual_a3(const A3Params<B>& p, const typename B::Scalar& E,
                                            F&& f, const std::vector<typename B::Scalar>& points) {
    std::vector<typename B::Scalar> out;
    out.reserve(points.size());
    for (const auto& x : points)
        out.push_back(apply_a3(p, f, x) - E * f(x));
    return out;
}

template <class B, class F>
std::vector<typename B::Scalar> residual_a2(const A2Params<B>& p, const typename B::Scalar& E,
                                            F&& f, const std::vector<typename B::Scalar>& points) {
    std::vector<typename B::Scalar> out;
    out.reserve(points.size());
    for (const auto& x : points)
        out.push_back(apply_a2(p, f, x) - E * f(x));
    return out;
}

// Characteristic exponents.  At infinity the pair for the four-parameter
// operator is {alpha1, alpha2}; at the origin
//   lambda_pm = (h1+h2-l1-l2-alpha1-alpha2 +- beta + 2)/2.
// The degree-three operator has {alpha, alpha+1} at infinity and
//   lambda_pm = (sum h - sum l - 2 alpha +- beta + 2)/2 at the origin;
// the degree-four-t one has {alpha, alpha+1} at infinity and
//   {lambda, lambda+1}, lambda = (sum h - sum l - 2 alpha + 2)/2, at the origin.
template <class B>
struct ExponentData {
    std::array<typename B::Exponent, 2> at_infinity{};
    std::array<typename B::Exponent, 2> at_zero{};
};

template <class B>
ExponentData<B> exponents_a4(const A4Params<B>& p) {
    ExponentData<B> e;
    e.at_infinity = {p.alpha1, p.alpha2};
    auto base = p.h1 + p.h2 - p.l1 - p.l2 - p.alpha1 - p.alpha2 + B::exp2(4);
    e.at_zero = {B::halve(base + p.beta), B::halve(base - p.beta)};
    return e;
}

template <class B>
ExponentData<B> exponents_a3(const A3Params<B>& p) {
    ExponentData<B> e;
    e.at_infinity = {p.alpha, p.alpha + B::exp2(2)};
    typename B::Exponent sum{};
    for (int n = 0; n < 3; ++n)
        sum = sum + p.h[n] - p.l[n];
    auto base = sum - p.alpha - p.alpha + B::exp2(4);
    e.at_zero = {B::halve(base + p.beta), B::halve(base - p.beta)};
    return e;
}

template <class B>
ExponentData<B> exponents_a2(const A2Params<B>& p) {
    ExponentData<B> e;
    e.at_infinity = {p.alpha, p.alpha + B::exp2(2)};
    typename B::Exponent sum{};
    for (int n = 0; n < 4; ++n)
        sum = sum + p.h[n] - p.l[n];
    auto lam = B::halve(sum - p.alpha - p.alpha + B::exp2(4));
    e.at_zero = {lam, lam + B::exp2(2)};
    return e;
}

} // namespace qheun

#endif
