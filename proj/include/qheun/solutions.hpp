#ifndef QHEUN_SOLUTIONS_HPP
#define QHEUN_SOLUTIONS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "qheun/jackson.hpp"

namespace qheun {

// Which +-beta relation an eigenpair is gated on: the direct one, the one
// with (h1, l1) flipped, or the one with both (h, l) pairs flipped
enum class EigenKind { monomial, one_sided, two_sided };

// The two printed shapes per prefactor family: ascending Pochhammer arguments
// (t/x form) or descending ones (x/t form)
enum class SolutionForm { first, second };

template <class B>
struct EigenPair {
    using S = typename B::Scalar;
    A4Params<B> params;
    LatticeFunction<B> eigenfunction;
    S eigenvalue{};
    EigenKind kind = EigenKind::monomial;
    SolutionForm form = SolutionForm::first;
    int which = 1;
    int beta_sign = 1;
    // f(x/q)/f(x) and f(qx)/f(x) as closed rational expressions; the
    // exact-mode residual certification consumes these
    std::function<S(const S&)> ratio_down, ratio_up;
};

// Constraint value D for the chosen relation and index choice; the gated
// statements require beta = +D or beta = -D
template <class B>
typename B::Exponent eigen_constraint(const A4Params<B>& p, EigenKind kind, int which) {
    if (which != 1 && which != 2)
        fail(errc::invalid_argument, "index choice must be 1 or 2");
    const auto ai = which == 1 ? p.alpha1 : p.alpha2;
    const auto aip = which == 1 ? p.alpha2 : p.alpha1;
    switch (kind) {
    case EigenKind::monomial:
        return p.h1 + p.h2 - p.l1 - p.l2 + ai - aip + B::exp2(4);
    case EigenKind::one_sided:
        return -p.h1 + p.h2 + p.l1 - p.l2 + ai - aip + B::exp2(4);
    default:
        return -p.h1 - p.h2 + p.l1 + p.l2 + ai - aip + B::exp2(4);
    }
}

namespace detail {

template <class B>
int beta_branch(const typename B::Exponent& beta, const typename B::Exponent& value) {
    if (exponent_gap(beta - value) <= 1e-12)
        return 1;
    if (exponent_gap(beta + value) <= 1e-12)
        return -1;
    return 0;
}

template <class F>
double exponent_real(const std::complex<F>& e) {
    return e.real();
}

inline double exponent_real(const HalfInt& e) {
    return static_cast<double>(e.tw) / 2.0;
}

template <class B>
typename B::Scalar eigen_lambda(const A4Params<B>& p, EigenKind kind, int which) {
    const B& qb = p.qb;
    const auto ai = which == 1 ? p.alpha1 : p.alpha2;
    const auto aip = which == 1 ? p.alpha2 : p.alpha1;
    const auto up = B::exp2(1);
    const auto dn = B::exp2(-1);
    switch (kind) {
    case EigenKind::monomial:
        return -(qb.qpow(ai + p.h1 + up) * p.t1 + qb.qpow(ai + p.h2 + up) * p.t2 +
                 qb.qpow(aip + p.l1 + dn) * p.t1 + qb.qpow(aip + p.l2 + dn) * p.t2);
    case EigenKind::one_sided:
        return -(qb.qpow(ai + p.l1 + up) * p.t1 + qb.qpow(ai + p.h2 + up) * p.t2 +
                 qb.qpow(aip + p.h1 + dn) * p.t1 + qb.qpow(aip + p.l2 + dn) * p.t2);
    default:
        return -(qb.qpow(ai + p.l1 + up) * p.t1 + qb.qpow(ai + p.l2 + up) * p.t2 +
                 qb.qpow(aip + p.h1 + dn) * p.t1 + qb.qpow(aip + p.h2 + dn) * p.t2);
    }
}

} // namespace detail

template <class B>
EigenPair<B> monomial_eigenpair(const A4Params<B>& p, int which) {
    using S = typename B::Scalar;
    const auto D = eigen_constraint(p, EigenKind::monomial, which);
    const int sign = detail::beta_branch<B>(p.beta, D);
    if (sign == 0)
        fail(errc::constraint_violated,
             "monomial eigenfunction needs beta = +-(h1+h2-l1-l2+ai-ai'+2)");
    EigenPair<B> ep;
    ep.params = p;
    ep.kind = EigenKind::monomial;
    ep.form = SolutionForm::first;
    ep.which = which;
    ep.beta_sign = sign;
    const B qb = p.qb;
    const auto ai = which == 1 ? p.alpha1 : p.alpha2;
    ep.eigenvalue = detail::eigen_lambda(p, EigenKind::monomial, which);
    ep.eigenfunction.base = S(1);
    ep.eigenfunction.rule = [qb, ai](const S& x) { return B::pow(x, -ai); };
    ep.ratio_down = [qb, ai](const S&) { return qb.qpow(ai); };
    ep.ratio_up = [qb, ai](const S&) { return qb.qpow(-ai); };
    return ep;
}

template <class B>
EigenPair<B> prefactor_eigenpair(const A4Params<B>& p, EigenKind kind, SolutionForm form,
                                 int which, const TruncationPolicy& pol = {}) {
    using S = typename B::Scalar;
    if (kind == EigenKind::monomial)
        fail(errc::invalid_argument, "prefactor families are one_sided or two_sided");
    const auto D = eigen_constraint(p, kind, which);
    const int sign = detail::beta_branch<B>(p.beta, D);
    if (sign == 0)
        fail(errc::constraint_violated,
             kind == EigenKind::one_sided
                 ? "prefactor eigenfunction needs beta = +-(-h1+h2+l1-l2+ai-ai'+2)"
                 : "prefactor eigenfunction needs beta = +-(-h1-h2+l1+l2+ai-ai'+2)");
    EigenPair<B> ep;
    ep.params = p;
    ep.kind = kind;
    ep.form = form;
    ep.which = which;
    ep.beta_sign = sign;
    const B qb = p.qb;
    const auto ai = which == 1 ? p.alpha1 : p.alpha2;
    ep.eigenvalue = detail::eigen_lambda(p, kind, which);
    const S A1 = qb.qpow(p.h1 + B::exp2(1)) * p.t1;
    const S A2 = qb.qpow(p.h2 + B::exp2(1)) * p.t2;
    const S C1 = qb.qpow(p.l1 + B::exp2(1)) * p.t1;
    const S C2 = qb.qpow(p.l2 + B::exp2(1)) * p.t2;
    const S B1 = qb.qpow(p.l1 + B::exp2(-1)) * p.t1;
    const S B2 = qb.qpow(p.l2 + B::exp2(-1)) * p.t2;
    const S Ah1 = qb.qpow(p.h1 + B::exp2(-1)) * p.t1;
    const S Ah2 = qb.qpow(p.h2 + B::exp2(-1)) * p.t2;
    ep.eigenfunction.base = S(1);
    if (kind == EigenKind::one_sided) {
        if (form == SolutionForm::first) {
            ep.eigenfunction.rule = [qb, ai, A1, C1, pol](const S& x) {
                const S den = qpoch_inf(qb, C1 / x, pol);
                if (B::is_zero(den))
                    fail(errc::pole_encountered, "prefactor pole at x on the lower lattice");
                return B::pow(x, -ai) * qpoch_inf(qb, A1 / x, pol) / den;
            };
        } else {
            const auto e = -ai + p.h1 - p.l1;
            ep.eigenfunction.rule = [qb, e, B1, Ah1, pol](const S& x) {
                return B::pow(x, e) * qpoch_pair_ratio(qb, x, B1, Ah1, pol);
            };
        }
        // both shapes share the same first-order lattice germ: their ratio is
        // exactly q-periodic
        ep.ratio_down = [qb, ai, A1, C1](const S& x) {
            const S den = x - A1;
            if (B::is_zero(den))
                fail(errc::pole_encountered, "germ pole at x = q^(h1+1/2) t1");
            return qb.qpow(ai) * (x - C1) / den;
        };
        ep.ratio_up = [qb, ai, B1, Ah1](const S& x) {
            const S den = x - B1;
            if (B::is_zero(den))
                fail(errc::pole_encountered, "germ pole at x = q^(l1-1/2) t1");
            return qb.qpow(-ai) * (x - Ah1) / den;
        };
    } else {
        if (form == SolutionForm::first) {
            ep.eigenfunction.rule = [qb, ai, A1, A2, C1, C2, pol](const S& x) {
                const S d1 = qpoch_inf(qb, C1 / x, pol);
                const S d2 = qpoch_inf(qb, C2 / x, pol);
                if (B::is_zero(d1) || B::is_zero(d2))
                    fail(errc::pole_encountered, "prefactor pole at x on the lower lattice");
                return B::pow(x, -ai) * qpoch_inf(qb, A1 / x, pol) * qpoch_inf(qb, A2 / x, pol) /
                       (d1 * d2);
            };
        } else {
            const auto e = -ai + p.h1 + p.h2 - p.l1 - p.l2;
            ep.eigenfunction.rule = [qb, e, B1, B2, Ah1, Ah2, pol](const S& x) {
                return B::pow(x, e) * qpoch_pair_ratio(qb, x, B1, Ah1, pol) *
                       qpoch_pair_ratio(qb, x, B2, Ah2, pol);
            };
        }
        ep.ratio_down = [qb, ai, A1, A2, C1, C2](const S& x) {
            const S den = (x - A1) * (x - A2);
            if (B::is_zero(den))
                fail(errc::pole_encountered, "germ pole at x = q^(hn+1/2) tn");
            return qb.qpow(ai) * (x - C1) * (x - C2) / den;
        };
        ep.ratio_up = [qb, ai, B1, B2, Ah1, Ah2](const S& x) {
            const S den = (x - B1) * (x - B2);
            if (B::is_zero(den))
                fail(errc::pole_encountered, "germ pole at x = q^(ln-1/2) tn");
            return qb.qpow(-ai) * (x - Ah1) * (x - Ah2) / den;
        };
    }
    return ep;
}

// Eigen-equation residual divided by f(x), assembled from the closed shift
// ratios: a(x) rdown(x) + b(x) - Lambda + c(x) rup(x).  Zero iff the
// unnormalized residual is zero at probes where f does not vanish.
template <class B>
typename B::Scalar eigenpair_residual_germ(const EigenPair<B>& ep, const typename B::Scalar& x) {
    const auto& p = ep.params;
    return a4_coef_a(p, x) * ep.ratio_down(x) + a4_coef_b(p, x) - ep.eigenvalue +
           a4_coef_c(p, x) * ep.ratio_up(x);
}

enum class GaugeForm { first, second };

template <class B>
struct GaugeResult {
    A4Params<B> swapped;
    LatticeFunction<B> g;
};

// Dresses a solution f of the (h1 <-> l1)-swapped equation into a solution of
// the equation at p with the same eigenvalue.  The two dressing prefactors
// differ by x^(h1-l1) theta_q(x/(q^(l1-1/2)t1))/theta_q(x/(q^(h1-1/2)t1)),
// which is exactly q-periodic.
template <class B>
GaugeResult<B> gauge_transform(const A4Params<B>& p, const LatticeFunction<B>& f, GaugeForm form,
                               const TruncationPolicy& pol = {}) {
    using S = typename B::Scalar;
    GaugeResult<B> r;
    r.swapped = p;
    r.swapped.h1 = p.l1;
    r.swapped.l1 = p.h1;
    const B qb = p.qb;
    r.g.base = f.base;
    if (form == GaugeForm::first) {
        const S A = qb.qpow(p.h1 + B::exp2(1)) * p.t1;
        const S C = qb.qpow(p.l1 + B::exp2(1)) * p.t1;
        r.g.rule = [qb, f, A, C, pol](const S& x) {
            const S den = qpoch_inf(qb, C / x, pol);
            if (B::is_zero(den))
                fail(errc::pole_encountered, "gauge prefactor pole");
            return f(x) * qpoch_inf(qb, A / x, pol) / den;
        };
    } else {
        const S Bl = qb.qpow(p.l1 + B::exp2(-1)) * p.t1;
        const S Ah = qb.qpow(p.h1 + B::exp2(-1)) * p.t1;
        const auto e = p.h1 - p.l1;
        r.g.rule = [qb, f, Bl, Ah, e, pol](const S& x) {
            return f(x) * B::pow(x, e) * qpoch_pair_ratio(qb, x, Bl, Ah, pol);
        };
    }
    return r;
}

// Composed first-order factors minus (operator - eigenconstant), applied to a
// probe function at probe points; the largest residual is returned.  The
// first form requires the direct beta relation; the second dispatches between
// the flipped relations by whichever one the parameters satisfy.
template <class B, class F>
typename B::Scalar factorization_residual(const A4Params<B>& p, int which, SolutionForm form,
                                          F&& f, const std::vector<typename B::Scalar>& points) {
    using S = typename B::Scalar;
    if (which != 1 && which != 2)
        fail(errc::invalid_argument, "index choice must be 1 or 2");
    const B qb = p.qb;
    const S q = qb.qv();
    const auto ai = which == 1 ? p.alpha1 : p.alpha2;
    const auto aip = which == 1 ? p.alpha2 : p.alpha1;
    EigenKind kind;
    if (form == SolutionForm::first) {
        if (detail::beta_branch<B>(p.beta, eigen_constraint(p, EigenKind::monomial, which)) == 0)
            fail(errc::constraint_violated, "factored form needs the direct beta relation");
        kind = EigenKind::monomial;
    } else if (detail::beta_branch<B>(p.beta, eigen_constraint(p, EigenKind::one_sided, which)) !=
               0) {
        kind = EigenKind::one_sided;
    } else if (detail::beta_branch<B>(p.beta, eigen_constraint(p, EigenKind::two_sided, which)) !=
               0) {
        kind = EigenKind::two_sided;
    } else {
        fail(errc::constraint_violated, "no flipped beta relation holds for these parameters");
    }
    const S A1 = qb.qpow(p.h1 + B::exp2(1)) * p.t1;
    const S A2 = qb.qpow(p.h2 + B::exp2(1)) * p.t2;
    const S B1 = qb.qpow(p.l1 + B::exp2(-1)) * p.t1;
    const S B2 = qb.qpow(p.l2 + B::exp2(-1)) * p.t2;
    const S C1 = qb.qpow(p.l1 + B::exp2(1)) * p.t1;
    const S C2 = qb.qpow(p.l2 + B::exp2(1)) * p.t2;
    const S lam = detail::eigen_lambda(p, kind, which);
    const S qai = qb.qpow(ai);
    S worst{};
    double wm = -1.0;
    for (const S& x : points) {
        S lhs;
        if (kind == EigenKind::monomial) {
            auto rf = [&](const S& y) { return f(y / q) - qai * f(y); };
            lhs =
                ((x - A1) * (x - A2) * rf(x) - qb.qpow(aip) * (x - B1) * (x - B2) * rf(q * x)) / x;
        } else if (kind == EigenKind::one_sided) {
            auto rf = [&](const S& y) { return (y - A1) * f(y / q) - qai * (y - C1) * f(y); };
            lhs = ((x - A2) * rf(x) - qb.qpow(aip - B::exp2(2)) * (x - B2) * rf(q * x)) / x;
        } else {
            auto rf = [&](const S& y) {
                return (y - A1) * (y - A2) * f(y / q) - qai * (y - C1) * (y - C2) * f(y);
            };
            lhs = (rf(x) - qb.qpow(aip - B::exp2(4)) * rf(q * x)) / x;
        }
        const S r = lhs - (apply_a4(p, f, x) - lam * f(x));
        const double m = B::mag(r);
        if (m > wm) {
            wm = m;
            worst = r;
        }
    }
    return worst;
}

namespace detail {

// Sum of T_n over n >= 0 from T_0 and the ratio T_{n+1}/T_n, with the same
// quiet-run stop rule as the Jackson walker.  A ratio may be exactly zero
// (terminating series); all walked terms enter the sum.
template <class B, class R>
typename B::Scalar ratio_sum(typename B::Scalar t0, R&& ratio_at, const TruncationPolicy& pol,
                             const char* who) {
    using S = typename B::Scalar;
    S term = t0, total{};
    double peak = 0.0;
    int quiet = 0;
    for (std::int64_t n = 0;; ++n) {
        if (n >= pol.max_terms)
            fail(errc::non_convergent, who);
        total += term;
        const double m = B::mag(term);
        peak = std::max(peak, m);
        quiet = (m <= pol.tail_epsilon * peak) ? quiet + 1 : 0;
        if (quiet >= 8)
            break;
        term = term * ratio_at(n);
    }
    return total;
}

} // namespace detail

// Unilateral basic hypergeometric sum
//   sum_{n>=0} (a;q)_n (b;q)_n / ((c;q)_n (q;q)_n) z^n
template <class B>
typename B::Scalar two_phi_one(const B& qb, const typename B::Scalar& a,
                               const typename B::Scalar& b, const typename B::Scalar& c,
                               const typename B::Scalar& z, const TruncationPolicy& pol = {}) {
    using S = typename B::Scalar;
    const S q = qb.qv();
    S an = a, bn = b, cn = c, qn1 = q;
    auto ratio = [&](std::int64_t) {
        const S num = (S(1) - an) * (S(1) - bn);
        const S den = (S(1) - cn) * (S(1) - qn1);
        an *= q;
        bn *= q;
        cn *= q;
        qn1 *= q;
        if (B::is_zero(num))
            return S(0);
        if (B::is_zero(den))
            fail(errc::pole_encountered, "2phi1: lower parameter on the q^(-n) lattice");
        return num / den * z;
    };
    return detail::ratio_sum<B>(S(1), ratio, pol, "2phi1 did not converge");
}

template <class B>
struct BilateralSides {
    typename B::Scalar sum_side{};
    typename B::Scalar product_side{};
};

// Bilateral summation sum_{n in Z} (a;q)_n/(b;q)_n z^n against its closed
// product form (q, b/a, az, q/(az);q)_inf / (b, q/a, z, b/(az);q)_inf,
// valid for |b/a| < |z| < 1
template <class B>
BilateralSides<B> ramanujan_1psi1(const B& qb, const typename B::Scalar& a,
                                  const typename B::Scalar& b, const typename B::Scalar& z,
                                  const TruncationPolicy& pol = {}) {
    using S = typename B::Scalar;
    if (B::is_zero(a) || B::is_zero(z))
        fail(errc::invalid_argument, "bilateral sum needs a != 0 and z != 0");
    if (!(B::mag(b / a) < B::mag(z) && B::mag(z) < 1.0))
        fail(errc::domain_violated, "bilateral sum needs |b/a| < |z| < 1");
    const S q = qb.qv();
    BilateralSides<B> sides;
    {
        S an = a, bn = b;
        auto up = [&](std::int64_t) {
            const S num = S(1) - an;
            const S den = S(1) - bn;
            an *= q;
            bn *= q;
            if (B::is_zero(num))
                return S(0);
            if (B::is_zero(den))
                fail(errc::pole_encountered, "bilateral sum: b on the q^(-n) lattice");
            return num / den * z;
        };
        sides.sum_side = detail::ratio_sum<B>(S(1), up, pol, "bilateral sum upper tail");
    }
    {
        // descending leg from T_{-1}; each later ratio uses the next q^(n-1)
        S am = a / q, bm = b / q;
        const S d0 = (S(1) - am) * z;
        if (B::is_zero(d0))
            fail(errc::pole_encountered, "bilateral sum: a on the q^n lattice");
        const S t0 = (S(1) - bm) / d0;
        auto down = [&](std::int64_t) {
            am /= q;
            bm /= q;
            const S num = S(1) - bm;
            const S den = (S(1) - am) * z;
            if (B::is_zero(num))
                return S(0);
            if (B::is_zero(den))
                fail(errc::pole_encountered, "bilateral sum: a on the q^n lattice");
            return num / den;
        };
        sides.sum_side += detail::ratio_sum<B>(t0, down, pol, "bilateral sum lower tail");
    }
    const S az = a * z;
    const S den = qpoch_inf(qb, b, pol) * qpoch_inf(qb, q / a, pol) * qpoch_inf(qb, z, pol) *
                  qpoch_inf(qb, b / az, pol);
    if (B::is_zero(den))
        fail(errc::pole_encountered, "bilateral product side pole");
    sides.product_side = qpoch_inf(qb, q, pol) * qpoch_inf(qb, b / a, pol) *
                         qpoch_inf(qb, az, pol) * qpoch_inf(qb, q / az, pol) / den;
    return sides;
}

// The three worked transform instances: a source eigenpair with the case's
// beta substitution, the derived target parameters and eigenvalue at mu0 = 0,
// the bilateral-series form of g, and the closed form where one exists
// (cases 1 and 3).
template <class B>
struct WorkedCase {
    using S = typename B::Scalar;
    int which = 1;
    A4Params<B> primed;
    S Eprime{};
    LatticeFunction<B> h;
    typename B::Exponent alpha1{};
    A4Params<B> target;
    S E{};
    bool has_closed = false;
    std::function<S(const S&, const S&)> g_series; // (x, xi)
    std::function<S(const S&, const S&)> g_closed; // (x, xi)
};

template <class B>
WorkedCase<B> worked_case(int which, const A4Params<B>& base, const typename B::Exponent& alpha1,
                          const TruncationPolicy& pol = {}) {
    using S = typename B::Scalar;
    A4Params<B> p = base;
    EigenPair<B> src;
    switch (which) {
    case 1:
        p.beta = -p.h1 + p.h2 + p.l1 - p.l2 - p.alpha1 + p.alpha2 + B::exp2(4);
        if (!(detail::exponent_real(p.beta) < 0.0 &&
              detail::exponent_real(p.alpha1) < detail::exponent_real(p.alpha2)))
            fail(errc::constraint_violated, "case 1 needs beta' < 0 and alpha1' < alpha2'");
        src = prefactor_eigenpair(p, EigenKind::one_sided, SolutionForm::second, 2, pol);
        break;
    case 2:
        p.beta = p.h1 + p.h2 - p.l1 - p.l2 + p.alpha1 - p.alpha2 - B::exp2(4);
        if (!(detail::exponent_real(p.alpha1) < detail::exponent_real(p.alpha2)))
            fail(errc::constraint_violated, "case 2 needs alpha1' < alpha2'");
        src = prefactor_eigenpair(p, EigenKind::two_sided, SolutionForm::second, 2, pol);
        break;
    case 3:
        p.beta = p.h1 + p.h2 - p.l1 - p.l2 - p.alpha1 + p.alpha2 + B::exp2(4);
        if (!(detail::exponent_real(p.beta) < 0.0 &&
              detail::exponent_real(p.alpha1) < detail::exponent_real(p.alpha2)))
            fail(errc::constraint_violated, "case 3 needs beta' < 0 and alpha1' < alpha2'");
        src = monomial_eigenpair(p, 2);
        break;
    default:
        fail(errc::invalid_argument, "worked case index must be 1, 2, or 3");
    }
    WorkedCase<B> wc;
    wc.which = which;
    wc.primed = p;
    wc.Eprime = src.eigenvalue;
    wc.h = src.eigenfunction;
    wc.alpha1 = alpha1;
    {
        const auto tr0 = make_transform_a4(p, wc.Eprime, B::exp2(0), alpha1, S(1));
        wc.target = tr0.map.out;
        wc.E = tr0.E;
    }
    const B qb = p.qb;
    {
        const S Ep = wc.Eprime;
        const auto a1 = alpha1;
        const LatticeFunction<B> hf = wc.h;
        wc.g_series = [p, Ep, a1, hf, pol](const S& x, const S& xi) {
            const auto tr = make_transform_a4(p, Ep, B::exp2(0), a1, xi);
            return transform_eval_a4(tr, hf, x, pol).value;
        };
    }
    if (which == 1) {
        wc.has_closed = true;
        const auto a1 = alpha1;
        const S xiA = qb.qpow(p.l1 + B::exp2(1)) * p.t1;
        wc.g_closed = [qb, p, a1, xiA, pol](const S& x, const S& xi) -> S {
            const S q = qb.qv();
            const S z = qb.qpow(B::exp2(2) - p.beta);
            const S pre = (S(1) - q) * B::pow(xi, B::exp2(2) - p.beta) * B::pow(x, -a1);
            const S xiB = qb.qpow(p.h2 - p.l2 + B::exp2(2)) * x;
            if (B::mag(xi - xiA) <= 1e-9 * (1.0 + B::mag(xiA))) {
                const S aa = xiA / x;
                const S bb = qb.qpow(p.l1 - p.h1 + B::exp2(2));
                const S cc = qb.qpow(p.l2 - p.h2) * aa;
                const S d1 = qpoch_inf(qb, bb, pol);
                const S d2 = qpoch_inf(qb, aa, pol);
                if (B::is_zero(d1) || B::is_zero(d2))
                    fail(errc::pole_encountered, "closed form pole");
                return pre * qpoch_inf(qb, q, pol) * qpoch_inf(qb, cc, pol) / (d1 * d2) *
                       two_phi_one(qb, aa, bb, cc, z, pol);
            }
            if (B::mag(xi - xiB) <= 1e-9 * (1.0 + B::mag(xiB))) {
                const S aa = qb.qpow(p.h2 - p.h1 - p.l2 + B::exp2(3)) * x / p.t1;
                const S bb = qb.qpow(p.h2 - p.l2 + B::exp2(2));
                const S cc = qb.qpow(p.h2 - p.l1 - p.l2 + B::exp2(3)) * x / p.t1;
                const S d1 = qpoch_inf(qb, aa, pol);
                const S d2 = qpoch_inf(qb, bb, pol);
                if (B::is_zero(d1) || B::is_zero(d2))
                    fail(errc::pole_encountered, "closed form pole");
                return pre * qpoch_inf(qb, cc, pol) * qpoch_inf(qb, q, pol) / (d1 * d2) *
                       two_phi_one(qb, aa, bb, cc, z, pol);
            }
            fail(errc::invalid_argument,
                 "closed form exists at xi = q^(l1'+1/2) t1 or xi = q^(h2'-l2'+1) x only");
        };
    } else if (which == 3) {
        wc.has_closed = true;
        const auto a1 = alpha1;
        wc.g_closed = [qb, p, a1, pol](const S& x, const S& xi) -> S {
            const S q = qb.qv();
            const S z = qb.qpow(B::exp2(2) - p.beta);
            const S az = z * xi / x;
            const S ba = qb.qpow(B::exp2(4) - p.beta - p.alpha1 + p.alpha2);
            const S baz = qb.qpow(p.alpha2 - p.alpha1 + B::exp2(2));
            const S den = qpoch_inf(qb, xi / x, pol) * qpoch_inf(qb, q * x / xi, pol) *
                          qpoch_inf(qb, z, pol) * qpoch_inf(qb, baz, pol);
            if (B::is_zero(den))
                fail(errc::pole_encountered, "closed form pole");
            const S num = qpoch_inf(qb, az, pol) * qpoch_inf(qb, q / az, pol) *
                          qpoch_inf(qb, ba, pol) * qpoch_inf(qb, q, pol);
            return (S(1) - q) * B::pow(xi, B::exp2(2) - p.beta) * B::pow(x, -a1) * num / den;
        };
    } else {
        wc.g_closed = [](const S&, const S&) -> S {
            fail(errc::invalid_argument, "no closed form stored for this case");
        };
    }
    return wc;
}

// Local q-homogeneity exponent -log_q(f(q x0)/f(x0)), principal branch
template <class F>
std::complex<double> quasi_periodicity_class(F&& f, const std::complex<double>& x0,
                                             const std::complex<double>& q) {
    using C = std::complex<double>;
    if (q == C(0) || q == C(1))
        fail(errc::invalid_q, "quasi-periodicity probe needs q different from 0 and 1");
    const C f0 = f(x0);
    if (f0 == C(0))
        fail(errc::division_by_zero, "quasi-periodicity probe needs f(x0) != 0");
    const C f1 = f(q * x0);
    if (f1 == C(0))
        fail(errc::division_by_zero, "quasi-periodicity probe needs f(q x0) != 0");
    return -std::log(f1 / f0) / std::log(q);
}

} // namespace qheun

#endif
