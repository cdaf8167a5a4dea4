#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "qheun/operators.hpp"
#include "test_util.hpp"

using namespace qheun;
using qtest::C;
using qtest::rel_err;

namespace {

const NumericBackend nb{C(0.5, 0.0)};

C poly_probe(C x) { return C(1) + x * x + C(1) / x; }

A4Params<NumericBackend> oracle_a4() {
    A4Params<NumericBackend> p;
    p.qb = nb;
    p.h1 = C(0.3);
    p.h2 = C(-0.2);
    p.l1 = C(0.45);
    p.l2 = C(0.15);
    p.alpha1 = C(0.2);
    p.alpha2 = C(-0.35);
    p.beta = C(0.6);
    p.t1 = C(1.0);
    p.t2 = C(1.0);
    return p;
}

A3Params<NumericBackend> oracle_a3() {
    A3Params<NumericBackend> p;
    p.qb = nb;
    p.h = {C(0.3), C(-0.2), C(0.1)};
    p.l = {C(0.45), C(0.15), C(-0.05)};
    p.alpha = C(0.2);
    p.beta = C(0.6);
    p.t = {C(1.1), C(0.9), C(1.3)};
    return p;
}

A2Params<NumericBackend> oracle_a2() {
    A2Params<NumericBackend> p;
    p.qb = nb;
    p.h = {C(0.3), C(-0.2), C(0.1), C(0.25)};
    p.l = {C(0.45), C(0.15), C(-0.05), C(0.35)};
    p.alpha = C(0.2);
    p.t = {C(1.1), C(0.9), C(1.3), C(0.7)};
    return p;
}

} // namespace

TEST_CASE("three-term applications match frozen direct-substitution values") {
    // frozen: tests/oracles/operators_oracle.py
    const C x(1.3);
    CHECK(rel_err(apply_a4(oracle_a4(), poly_probe, x), C(-11.905830435649158977)) < 1e-13);
    CHECK(rel_err(apply_a3(oracle_a3(), poly_probe, x), C(13.62148507120472221)) < 1e-13);
    CHECK(rel_err(apply_a2(oracle_a2(), poly_probe, x), C(20.529344639750578946)) < 1e-13);
}

TEST_CASE("exact spot values against one-off rational substitution") {
    // frozen: tests/oracles/operators_exact_oracle.py
    auto f = [](const Rational& x) { return 1 + x; };

    // q = 1/2 has no rational root; odd-half h,l with integral alpha keep
    // every displayed power of q integral
    A4Params<ExactBackend> pa;
    pa.qb = ExactBackend{Rational(1, 2)};
    pa.h1 = HalfInt::halves(1);
    pa.h2 = HalfInt::halves(-1);
    pa.l1 = HalfInt::halves(3);
    pa.l2 = HalfInt::halves(1);
    pa.alpha1 = HalfInt::whole(1);
    pa.alpha2 = HalfInt::whole(1);
    pa.beta = HalfInt::whole(2);
    pa.t1 = 1;
    pa.t2 = 1;
    CHECK(apply_a4(pa, f, Rational(2)) == Rational(-45, 16));

    // q = 1/4 (square of 1/2), plain integer exponents
    A4Params<ExactBackend> pb;
    pb.qb = ExactBackend{Rational(1, 4)};
    pb.h1 = HalfInt::whole(1);
    pb.h2 = HalfInt::whole(0);
    pb.l1 = HalfInt::whole(2);
    pb.l2 = HalfInt::whole(1);
    pb.alpha1 = HalfInt::whole(0);
    pb.alpha2 = HalfInt::whole(1);
    pb.beta = HalfInt::whole(2);
    pb.t1 = 1;
    pb.t2 = 1;
    CHECK(apply_a4(pb, f, Rational(2)) == Rational(351, 64));

    A3Params<ExactBackend> p3;
    p3.qb = ExactBackend{Rational(1, 4)};
    p3.h = {HalfInt::whole(1), HalfInt::whole(0), HalfInt::whole(-1)};
    p3.l = {HalfInt::whole(0), HalfInt::whole(1), HalfInt::whole(2)};
    p3.alpha = HalfInt::whole(1);
    p3.beta = HalfInt::whole(2);
    p3.t = {Rational(1), Rational(2), Rational(3)};
    CHECK(apply_a3(p3, f, Rational(2)) == Rational(-6387, 256));

    A2Params<ExactBackend> p2;
    p2.qb = ExactBackend{Rational(1, 4)};
    p2.h = {HalfInt::whole(1), HalfInt::whole(0), HalfInt::whole(-1), HalfInt::whole(2)};
    p2.l = {HalfInt::whole(0), HalfInt::whole(1), HalfInt::whole(2), HalfInt::whole(-1)};
    p2.alpha = HalfInt::whole(1);
    p2.t = {Rational(1), Rational(2), Rational(3), Rational(1, 2)};
    CHECK(apply_a2(p2, f, Rational(2)) == Rational(-5685, 256));
}

TEST_CASE("zero function and linearity") {
    const C x(0.85, 0.0);
    auto zero = [](C) { return C(0); };
    CHECK(apply_a4(oracle_a4(), zero, x) == C(0));
    CHECK(apply_a3(oracle_a3(), zero, x) == C(0));
    CHECK(apply_a2(oracle_a2(), zero, x) == C(0));

    std::mt19937_64 rng(4201);
    auto f = [](C v) { return C(1) + v * v; };
    auto g = [](C v) { return C(1) / v + v; };
    for (int i = 0; i < 12; ++i) {
        C ca(qtest::grid_uniform(rng, -2, 2), qtest::grid_uniform(rng, -2, 2));
        C cb(qtest::grid_uniform(rng, -2, 2), qtest::grid_uniform(rng, -2, 2));
        C xs(qtest::grid_uniform(rng, 0.4, 1.8), 0.0);
        auto comb = [&](C v) { return ca * f(v) + cb * g(v); };
        C lhs4 = apply_a4(oracle_a4(), comb, xs);
        C rhs4 = ca * apply_a4(oracle_a4(), f, xs) + cb * apply_a4(oracle_a4(), g, xs);
        CHECK(rel_err(lhs4, rhs4) < 1e-13);
        C lhs3 = apply_a3(oracle_a3(), comb, xs);
        C rhs3 = ca * apply_a3(oracle_a3(), f, xs) + cb * apply_a3(oracle_a3(), g, xs);
        CHECK(rel_err(lhs3, rhs3) < 1e-13);
        C lhs2 = apply_a2(oracle_a2(), comb, xs);
        C rhs2 = ca * apply_a2(oracle_a2(), f, xs) + cb * apply_a2(oracle_a2(), g, xs);
        CHECK(rel_err(lhs2, rhs2) < 1e-13);
    }

    // exact mode: linearity is identically true
    ExactBackend eb{Rational(1, 4)};
    A4Params<ExactBackend> pe;
    pe.qb = eb;
    pe.h1 = HalfInt::halves(1);
    pe.h2 = HalfInt::halves(-3);
    pe.l1 = HalfInt::whole(1);
    pe.l2 = HalfInt::halves(1);
    pe.alpha1 = HalfInt::halves(3);
    pe.alpha2 = HalfInt::whole(-1);
    pe.beta = HalfInt::whole(2);
    pe.t1 = Rational(2, 3);
    pe.t2 = Rational(5, 7);
    auto ef = [](const Rational& v) { return 1 + v; };
    auto eg = [](const Rational& v) { return 1 / v; };
    Rational wa(3, 11), wb(-7, 5), ex(9, 4);
    auto ecomb = [&](const Rational& v) { return wa * ef(v) + wb * eg(v); };
    CHECK(apply_a4(pe, ecomb, ex) == wa * apply_a4(pe, ef, ex) + wb * apply_a4(pe, eg, ex));
}

TEST_CASE("power eigenfunctions under the constrained degree-two operator") {
    // exact mode: with beta = h1+h2-l1-l2+alpha1-alpha2+2 the power x^(-alpha1)
    // is an eigenfunction and the residual is identically zero
    A4Params<ExactBackend> p;
    p.qb = ExactBackend{Rational(1, 4)};
    p.h1 = HalfInt::halves(1);
    p.h2 = HalfInt::halves(-1);
    p.l1 = HalfInt::whole(1);
    p.l2 = HalfInt::whole(0);
    p.alpha1 = HalfInt::whole(1);
    p.alpha2 = HalfInt::whole(1);
    p.beta = p.h1 + p.h2 - p.l1 - p.l2 + p.alpha1 - p.alpha2 + HalfInt::whole(2);
    p.t1 = Rational(2, 3);
    p.t2 = Rational(5, 7);

    const ExactBackend& qb = p.qb;
    auto f = [&](const Rational& v) { return 1 / v; }; // x^(-alpha1), alpha1 = 1
    Rational E = -(qb.qpow(p.alpha1 + p.h1 + HalfInt::halves(1)) * p.t1 +
                   qb.qpow(p.alpha1 + p.h2 + HalfInt::halves(1)) * p.t2 +
                   qb.qpow(p.alpha2 + p.l1 - HalfInt::halves(1)) * p.t1 +
                   qb.qpow(p.alpha2 + p.l2 - HalfInt::halves(1)) * p.t2);
    std::vector<Rational> pts{Rational(2), Rational(3, 2), Rational(7, 5)};
    for (const auto& res : residual_a4(p, E, f, pts))
        CHECK(res == 0);

    // perturbing the accessory parameter by delta shifts the residual by
    // exactly -delta * f(x)
    Rational delta(1, 1000);
    auto shifted = residual_a4(p, E + delta, f, pts);
    for (size_t i = 0; i < pts.size(); ++i)
        CHECK(shifted[i] == -delta * f(pts[i]));

    // a generic non-eigenfunction leaves a visible residual
    auto g = [](const Rational& v) { return 1 + v * v; };
    bool any_nonzero = false;
    for (const auto& res : residual_a4(p, E, g, pts))
        any_nonzero = any_nonzero || res != 0;
    CHECK(any_nonzero);

    // numeric mode, generic real exponents
    A4Params<NumericBackend> pn;
    pn.qb = nb;
    pn.h1 = C(0.37);
    pn.h2 = C(-0.41);
    pn.l1 = C(0.22);
    pn.l2 = C(0.18);
    pn.alpha1 = C(0.55);
    pn.alpha2 = C(-0.3);
    pn.beta = pn.h1 + pn.h2 - pn.l1 - pn.l2 + pn.alpha1 - pn.alpha2 + C(2);
    pn.t1 = C(0.8);
    pn.t2 = C(1.2);
    auto fn = [&](C v) { return NumericBackend::pow(v, -pn.alpha1); };
    C En = -(nb.qpow(pn.alpha1 + pn.h1 + C(0.5)) * pn.t1 +
             nb.qpow(pn.alpha1 + pn.h2 + C(0.5)) * pn.t2 +
             nb.qpow(pn.alpha2 + pn.l1 - C(0.5)) * pn.t1 +
             nb.qpow(pn.alpha2 + pn.l2 - C(0.5)) * pn.t2);
    std::vector<C> xs{C(0.7), C(1.0), C(1.9)};
    for (const auto& res : residual_a4(pn, En, fn, xs))
        CHECK(std::abs(res) < 1e-13);
}

TEST_CASE("exponent data follows the displayed formulas") {
    A4Params<NumericBackend> z;
    z.qb = nb;
    z.t1 = z.t2 = C(1);
    auto e0 = exponents_a4(z);
    CHECK(e0.at_infinity[0] == C(0));
    CHECK(e0.at_infinity[1] == C(0));
    CHECK(e0.at_zero[0] == C(1));
    CHECK(e0.at_zero[1] == C(1));

    A4Params<NumericBackend> w = z;
    w.h1 = w.h2 = C(1);
    auto e1 = exponents_a4(w);
    CHECK(e1.at_zero[0] == C(2));
    CHECK(e1.at_zero[1] == C(2));

    A3Params<ExactBackend> p3;
    p3.qb = ExactBackend{Rational(1, 4)};
    p3.h = {HalfInt::whole(1), HalfInt::halves(1), HalfInt::whole(0)};
    p3.l = {HalfInt::whole(0), HalfInt::whole(0), HalfInt::halves(-1)};
    p3.alpha = HalfInt::halves(1);
    p3.beta = HalfInt::whole(1);
    p3.t = {Rational(1), Rational(1), Rational(1)};
    auto e3 = exponents_a3(p3);
    CHECK(e3.at_infinity[0] == HalfInt::halves(1));
    CHECK(e3.at_infinity[1] == HalfInt::halves(3));
    // (sum h - sum l - 2 alpha +- beta + 2)/2 = (3/2 + 1/2 - 1 +- 1 + 2)/2
    CHECK(e3.at_zero[0] == HalfInt::whole(2));
    CHECK(e3.at_zero[1] == HalfInt::whole(1));

    A2Params<ExactBackend> p2;
    p2.qb = ExactBackend{Rational(1, 4)};
    p2.h = {HalfInt::whole(1), HalfInt::whole(1), HalfInt::whole(0), HalfInt::whole(0)};
    p2.l = {HalfInt::whole(0), HalfInt::whole(0), HalfInt::whole(0), HalfInt::whole(0)};
    p2.alpha = HalfInt::whole(1);
    p2.t = {Rational(1), Rational(1), Rational(1), Rational(1)};
    auto e2 = exponents_a2(p2);
    CHECK(e2.at_infinity[0] == HalfInt::whole(1));
    CHECK(e2.at_infinity[1] == HalfInt::whole(2));
    // lambda = (2 - 0 - 2 + 2)/2 = 1
    CHECK(e2.at_zero[0] == HalfInt::whole(1));
    CHECK(e2.at_zero[1] == HalfInt::whole(2));
}

namespace {

// Decompose (A m_rho)(x) over the monomial span {x^(rho+k)} by sampling on a
// q-lattice and solving the small Vandermonde-type system; the operators map a
// monomial into finitely many neighboring powers, so the decomposition is
// exact up to roundoff.
template <class Apply>
Eigen::VectorXcd monomial_coefficients(Apply&& apply, C rho, int n_lo, int n_hi, C x0, C q) {
    const int n = n_hi - n_lo + 1;
    Eigen::MatrixXcd M(n, n);
    Eigen::VectorXcd rhs(n);
    auto f = [&](C v) { return std::exp(rho * std::log(v)); };
    for (int i = 0; i < n; ++i) {
        C x = std::exp(std::log(x0) + C(i) * std::log(q));
        for (int j = 0; j < n; ++j) {
            C power = rho + C(n_lo + j);
            M(i, j) = std::exp(power * std::log(x));
        }
        rhs(i) = apply(f, x);
    }
    return M.fullPivLu().solve(rhs);
}

} // namespace

TEST_CASE("exponents agree with indicial behavior of the actual coefficients") {
    std::mt19937_64 rng(9917);
    for (int trial = 0; trial < 6; ++trial) {
        A4Params<NumericBackend> p;
        p.qb = NumericBackend{C(0.6, 0.0)};
        p.h1 = C(qtest::grid_uniform(rng, -1.5, 1.5));
        p.h2 = C(qtest::grid_uniform(rng, -1.5, 1.5));
        p.l1 = C(qtest::grid_uniform(rng, -1.5, 1.5));
        p.l2 = C(qtest::grid_uniform(rng, -1.5, 1.5));
        p.alpha1 = C(qtest::grid_uniform(rng, -1.0, 1.0));
        p.alpha2 = C(qtest::grid_uniform(rng, -1.0, 1.0));
        p.beta = C(qtest::grid_uniform(rng, -1.0, 1.0));
        p.t1 = C(qtest::grid_uniform(rng, 0.5, 1.5));
        p.t2 = C(qtest::grid_uniform(rng, 0.5, 1.5));
        auto ex = exponents_a4(p);
        auto app = [&](auto&& f, C x) { return apply_a4(p, f, x); };
        const C q = p.qb.qv();

        // probing x^(-alpha) kills the leading x^(rho+1) coefficient exactly
        // when alpha is an exponent at infinity
        for (auto a : ex.at_infinity) {
            auto coef = monomial_coefficients(app, -a, -1, 1, C(1.3), q);
            double scale = coef.cwiseAbs().maxCoeff() + 1.0;
            CHECK(std::abs(coef(2)) < 1e-9 * scale);
        }
        // probing x^lambda kills the trailing x^(rho-1) coefficient exactly
        // when lambda is an exponent at the origin
        for (auto lam : ex.at_zero) {
            auto coef = monomial_coefficients(app, lam, -1, 1, C(1.3), q);
            double scale = coef.cwiseAbs().maxCoeff() + 1.0;
            CHECK(std::abs(coef(0)) < 1e-9 * scale);
        }
        // an off-exponent probe leaves both extreme coefficients visible
        auto off = monomial_coefficients(app, ex.at_infinity[0] + C(0.37), -1, 1, C(1.3), q);
        CHECK(std::abs(off(2)) > 1e-5);
    }

    A3Params<NumericBackend> p3;
    p3.qb = NumericBackend{C(0.6, 0.0)};
    p3.h = {C(0.4), C(-0.3), C(0.7)};
    p3.l = {C(0.1), C(0.25), C(-0.45)};
    p3.alpha = C(0.35);
    p3.beta = C(0.8);
    p3.t = {C(1.1), C(0.8), C(1.3)};
    auto ex3 = exponents_a3(p3);
    auto app3 = [&](auto&& f, C x) { return apply_a3(p3, f, x); };
    for (auto a : ex3.at_infinity) {
        auto coef = monomial_coefficients(app3, -a, -1, 2, C(1.3), p3.qb.qv());
        double scale = coef.cwiseAbs().maxCoeff() + 1.0;
        CHECK(std::abs(coef(3)) < 1e-9 * scale);
    }
    for (auto lam : ex3.at_zero) {
        auto coef = monomial_coefficients(app3, lam, -1, 2, C(1.3), p3.qb.qv());
        double scale = coef.cwiseAbs().maxCoeff() + 1.0;
        CHECK(std::abs(coef(0)) < 1e-9 * scale);
    }

    A2Params<NumericBackend> p2;
    p2.qb = NumericBackend{C(0.6, 0.0)};
    p2.h = {C(0.4), C(-0.3), C(0.7), C(0.2)};
    p2.l = {C(0.1), C(0.25), C(-0.45), C(0.6)};
    p2.alpha = C(0.35);
    p2.t = {C(1.1), C(0.8), C(1.3), C(0.9)};
    auto ex2 = exponents_a2(p2);
    auto app2 = [&](auto&& f, C x) { return apply_a2(p2, f, x); };
    for (auto a : ex2.at_infinity) {
        auto coef = monomial_coefficients(app2, -a, -2, 2, C(1.3), p2.qb.qv());
        double scale = coef.cwiseAbs().maxCoeff() + 1.0;
        CHECK(std::abs(coef(4)) < 1e-9 * scale);
    }
    for (auto lam : ex2.at_zero) {
        auto coef = monomial_coefficients(app2, lam, -2, 2, C(1.3), p2.qb.qv());
        double scale = coef.cwiseAbs().maxCoeff() + 1.0;
        CHECK(std::abs(coef(0)) < 1e-9 * scale);
    }
}

TEST_CASE("lattice functions propagate their rule and x = 0 is rejected") {
    LatticeFunction<NumericBackend> lf;
    lf.rule = [](C v) { return v * v; };
    lf.base = C(0.7);
    CHECK(lf(C(3.0)) == C(9.0));
    CHECK(apply_a4(oracle_a4(), lf, C(1.1)) ==
          apply_a4(oracle_a4(), [](C v) { return v * v; }, C(1.1)));
    CHECK_ERRC(apply_a4(oracle_a4(), lf, C(0.0)), errc::invalid_argument);
    CHECK_ERRC(apply_a3(oracle_a3(), lf, C(0.0)), errc::invalid_argument);
    CHECK_ERRC(apply_a2(oracle_a2(), lf, C(0.0)), errc::invalid_argument);
}
