#include "doctest.h"

#include "qheun/series.hpp"
#include "test_util.hpp"

using namespace qheun;
using qtest::C;
using qtest::rel_err;

namespace {
const NumericBackend nb{C(0.5, 0.0)};
const ExactBackend eb{Rational(1, 4)}; // square of 1/2, so half-integer exponents stay rational
} // namespace

TEST_CASE("qpoch_inf basics") {
    CHECK(qpoch_inf(nb, C(0.0)) == C(1.0));
    CHECK(qpoch_inf(nb, C(1.0)) == C(0.0));
    CHECK(qpoch_inf(eb, Rational(0)) == 1);
    CHECK(qpoch_inf(eb, Rational(1)) == 0);

    // frozen: tests/oracles/qseries_oracle.py
    CHECK(rel_err(qpoch_inf(nb, C(0.5)), C(0.28878809508660242128)) < 1e-14);
    NumericBackend nc{C(0.5, 0.1)};
    CHECK(rel_err(qpoch_inf(nc, C(0.3, 0.2)),
                  C(0.49384720026639245973, -0.33902261754047120464)) < 1e-13);

    // exact backend truncates and reports where it stopped; with r = 1/2 the
    // partial product of (1/2; 1/4)_inf agrees with the full value to the tail
    int idx = 0;
    Rational v = qpoch_inf(eb, Rational(1, 2), {}, &idx);
    CHECK(idx > 20);
    CHECK(std::abs(v.convert_to<double>() - 0.4194224417951076) < 1e-15);
}

TEST_CASE("qpoch_inf against a higher-precision recomputation") {
    using LB = BasicNumericBackend<long double>;
    std::mt19937_64 rng(1234);
    TruncationPolicy tight{1e-21, 40000};
    for (int i = 0; i < 60; ++i) {
        double qr = qtest::grid_uniform(rng, 0.05, 0.9);
        double qi = qtest::grid_uniform(rng, -0.05, 0.05);
        if (std::hypot(qr, qi) >= 0.95)
            continue;
        double ar = qtest::grid_uniform(rng, -2.0, 2.0);
        double ai = qtest::grid_uniform(rng, -2.0, 2.0);
        NumericBackend b{C(qr, qi)};
        LB lb{std::complex<long double>(qr, qi)};
        C got = qpoch_inf(b, C(ar, ai));
        std::complex<long double> ref = qpoch_inf(lb, std::complex<long double>(ar, ai), tight);
        CHECK(rel_err(got, C(static_cast<double>(ref.real()), static_cast<double>(ref.imag()))) <
              1e-12);
    }
}

TEST_CASE("qpoch_n at positive and negative index") {
    CHECK(qpoch_n(nb, C(0.7), 0) == C(1.0));
    // (1/2; 1/3)_2 = 5/12
    NumericBackend nthird{C(1.0 / 3.0, 0.0)};
    CHECK(rel_err(qpoch_n(nthird, C(0.5), 2), C(5.0 / 12.0)) < 1e-15);
    // (1/2; 1/3)_{-1} = 1/(1 - 3/2) = -2, and the infinite-product quotient route
    CHECK(rel_err(qpoch_n(nthird, C(0.5), -1), C(-2.0)) < 1e-15);
    C quot = qpoch_inf(nthird, C(0.5)) / qpoch_inf(nthird, C(0.5) / nthird.qv());
    CHECK(rel_err(quot, C(-2.0)) < 1e-13);

    // frozen: tests/oracles/qseries_oracle.py
    CHECK(rel_err(qpoch_n(nb, C(0.7), 5), C(0.140376005859375)) < 1e-15);
    CHECK(rel_err(qpoch_n(nb, C(0.7), -3), C(-0.30193236714975845411)) < 1e-14);

    CHECK(qpoch_n(eb, Rational(1, 2), 2) == Rational(7, 16)); // (1/2)(7/8)
}

TEST_CASE("qpoch splice identity (a;q)_{m+n} = (a;q)_m (a q^m;q)_n") {
    ExactBackend b{Rational(4, 25)};
    Rational a(3, 7);
    for (int m = -6; m <= 6; ++m) {
        for (int n = -6; n <= 6; ++n) {
            Rational lhs = qpoch_n(b, a, m + n);
            Rational qm = pow_int(b.qv(), m);
            Rational rhs = qpoch_n(b, a, m) * qpoch_n(b, a * qm, n);
            CHECK(lhs == rhs);
        }
    }
    std::mt19937_64 rng(77);
    for (int i = 0; i < 30; ++i) {
        C a2(qtest::grid_uniform(rng, -1.5, 1.5), qtest::grid_uniform(rng, -1.5, 1.5));
        NumericBackend b2{C(qtest::grid_uniform(rng, 0.2, 0.8), 0.0)};
        int m = static_cast<int>(qtest::grid_uniform(rng, -6, 6, 12));
        int n = static_cast<int>(qtest::grid_uniform(rng, -6, 6, 12));
        C qm = std::pow(b2.qv(), C(m));
        C lhs = qpoch_n(b2, a2, m + n);
        C rhs = qpoch_n(b2, a2, m) * qpoch_n(b2, a2 * qm, n);
        CHECK(rel_err(lhs, rhs) < 1e-13);
    }
}

TEST_CASE("theta_q values and quasi-periodicity") {
    CHECK(theta_q(nb, C(1.0)) == C(0.0));
    CHECK(theta_q(nb, nb.qv()) == C(0.0));

    // frozen: tests/oracles/qseries_oracle.py
    NumericBackend b04{C(0.4, 0.0)};
    CHECK(rel_err(theta_q(b04, C(0.3, 0.1)),
                  C(-0.027921155090561851909, 0.035139865170743362716)) < 1e-13);
    NumericBackend b025{C(0.25, 0.0)};
    CHECK(rel_err(theta_q(b025, C(0.7)), C(0.091236167149585467335)) < 1e-13);

    C t(0.3, 0.1);
    CHECK(rel_err(theta_q(b04, b04.qv() * t), -theta_q(b04, t) / t) < 1e-12);

    std::mt19937_64 rng(99);
    for (int i = 0; i < 100; ++i) {
        NumericBackend b{C(qtest::grid_uniform(rng, 0.1, 0.85), 0.0)};
        C tt(qtest::grid_uniform(rng, 0.1, 2.0), qtest::grid_uniform(rng, -1.0, 1.0));
        CHECK(rel_err(theta_q(b, b.qv() * tt), -theta_q(b, tt) / tt) < 1e-11);
    }
}

TEST_CASE("p1 kernel: trivial cases, spot value, contiguous relations") {
    CHECK(p1_kernel(nb, C(1.7), C(1.7), C(1.1), C(0.7)) == C(1.0));
    CHECK(p1_kernel(nb, C(2.5), C(0.5), C(1.1), C(0.0)) == C(1.0));

    // frozen: tests/oracles/qseries_oracle.py
    C mu(2.5), mu0(0.5), x(1.1), s(0.7);
    CHECK(rel_err(p1_kernel(nb, mu, mu0, x, s), C(2.3459083884125091975)) < 1e-13);

    C base = p1_kernel(nb, mu, mu0, x, s);
    C ratio_dn = (x - std::pow(nb.qv(), mu - C(1)) * s) / (x - std::pow(nb.qv(), mu0 - C(1)) * s);
    CHECK(rel_err(p1_kernel(nb, mu, mu0, x, s / nb.qv()), ratio_dn * base) < 1e-12);
    CHECK(rel_err(p1_kernel(nb, mu, mu0, nb.qv() * x, s), ratio_dn * base) < 1e-12);
    C ratio_up = (x - std::pow(nb.qv(), mu0) * s) / (x - std::pow(nb.qv(), mu) * s);
    CHECK(rel_err(p1_kernel(nb, mu, mu0, x, nb.qv() * s), ratio_up * base) < 1e-12);
    CHECK(rel_err(p1_kernel(nb, mu, mu0, x / nb.qv(), s), ratio_up * base) < 1e-12);
}

TEST_CASE("p2 kernel: spot value and the large-s limit") {
    CHECK(p2_kernel(nb, C(1.7), C(1.7), C(1.1), C(0.7)) == C(1.0));

    // frozen: tests/oracles/qseries_oracle.py
    CHECK(rel_err(p2_kernel(nb, C(2.5), C(0.5), C(1.1), C(0.7)), C(0.58647709710312729938)) <
          1e-13);

    // s^(mu-mu0) P2 -> x^(mu-mu0).  At s = q^-20 the truncated-product ratio
    // forces a gap of about (1/q - q)(x/s)/(1-q) ~ 2.9e-6; only the deeper
    // lattice point reaches 1e-8.
    C xx(1.0), mu(2.0), mu0(0.0);
    C s20 = std::pow(nb.qv(), C(-20.0));
    CHECK(rel_err(s20 * s20 * p2_kernel(nb, mu, mu0, xx, s20), xx) < 5e-6);
    C s40 = std::pow(nb.qv(), C(-40.0));
    CHECK(rel_err(s40 * s40 * p2_kernel(nb, mu, mu0, xx, s40), xx) < 1e-8);
}

TEST_CASE("p2/p1 is lattice-constant and matches the theta-quotient") {
    // frozen: tests/oracles/qseries_oracle.py (value 1/8)
    C mu(3.0), mu0(1.0), x(0.9), xi(0.6);
    C theta_side = std::pow(x / xi, mu - mu0) * theta_q(nb, std::pow(nb.qv(), -mu0 + C(1)) * x / xi) /
                   theta_q(nb, std::pow(nb.qv(), -mu + C(1)) * x / xi);
    CHECK(rel_err(theta_side, C(0.125)) < 1e-13);
    for (int n : {-3, 0, 4}) {
        C s = std::pow(nb.qv(), C(n)) * xi;
        C ratio = p2_kernel(nb, mu, mu0, x, s) / p1_kernel(nb, mu, mu0, x, s);
        CHECK(rel_err(ratio, theta_side) < 1e-12);
    }
}

TEST_CASE("both kernel variants satisfy all four contiguous relations") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 40; ++i) {
        NumericBackend b{C(qtest::grid_uniform(rng, 0.15, 0.8), 0.0)};
        C mu(qtest::grid_uniform(rng, -2.0, 3.0)), mu0(qtest::grid_uniform(rng, -2.0, 3.0));
        C x(qtest::grid_uniform(rng, 0.4, 2.0)), s(qtest::grid_uniform(rng, 0.2, 1.5));
        C q = b.qv();
        for (int variant = 0; variant < 2; ++variant) {
            auto P = [&](C xa, C sa) {
                return variant == 0 ? p1_kernel(b, mu, mu0, xa, sa) : p2_kernel(b, mu, mu0, xa, sa);
            };
            C base = P(x, s);
            C rdn = (x - std::pow(q, mu - C(1)) * s) / (x - std::pow(q, mu0 - C(1)) * s);
            C rup = (x - std::pow(q, mu0) * s) / (x - std::pow(q, mu) * s);
            CHECK(rel_err(P(x, s / q), rdn * base) < 1e-11);
            CHECK(rel_err(P(q * x, s), rdn * base) < 1e-11);
            CHECK(rel_err(P(x, q * s), rup * base) < 1e-11);
            CHECK(rel_err(P(x / q, s), rup * base) < 1e-11);
        }
    }
}

TEST_CASE("offset germ reproduces honest kernel ratios for both variants") {
    C mu(2.5), mu0(0.5), x(1.3), s(0.7);
    auto rho = p_offset_germ(nb, mu, mu0, x, s, -4, 4);
    C p1base = p1_kernel(nb, mu, mu0, x, s);
    C p2base = p2_kernel(nb, mu, mu0, x, s);
    for (int m = -4; m <= 4; ++m) {
        C sm = std::pow(nb.qv(), C(m)) * s;
        CHECK(rel_err(rho[m + 4], p1_kernel(nb, mu, mu0, x, sm) / p1base) < 1e-11);
        CHECK(rel_err(rho[m + 4], p2_kernel(nb, mu, mu0, x, sm) / p2base) < 1e-11);
    }

    // exact germ: spot-check the defining ratios directly
    ExactBackend b{Rational(1, 4)};
    HalfInt emu = HalfInt::halves(5), emu0 = HalfInt::halves(1);
    Rational ex(11, 10), es(7, 10);
    auto erho = p_offset_germ(b, emu, emu0, ex, es, -2, 2);
    CHECK(erho[2] == 1);
    CHECK(erho[3] == p_step_s_up(b, emu, emu0, ex, es));
    CHECK(erho[1] == p_step_s_down(b, emu, emu0, ex, es));
}

TEST_CASE("typed errors from the series layer") {
    CHECK_ERRC(NumericBackend{C(1.2, 0.0)}, errc::invalid_q);
    CHECK_ERRC(NumericBackend{C(0.0, 0.0)}, errc::invalid_q);
    CHECK_ERRC(ExactBackend{Rational(3, 2)}, errc::invalid_q);
    CHECK_ERRC(qpoch_inf(nb, C(0.5), TruncationPolicy{1e-17, 3}), errc::non_convergent);
    CHECK_ERRC(theta_q(nb, C(0.0)), errc::invalid_argument);
    CHECK_ERRC(p1_kernel(nb, C(2.0), C(0.0), C(0.0), C(0.5)), errc::invalid_argument);
    CHECK_ERRC(p1_kernel(nb, C(2.0), C(0.0), C(0.7), C(0.7)), errc::pole_encountered);
    CHECK_ERRC(p2_kernel(nb, C(2.0), C(0.0), C(0.7), C(0.0)), errc::invalid_argument);
    CHECK_ERRC(qpoch_n(nb, nb.qv(), -1), errc::pole_encountered);
    // irrational exact power
    CHECK_ERRC(ExactBackend::pow(Rational(2), HalfInt::halves(1)), errc::domain_violated);
    // q = 1/2 has no rational square root, so q^(1/2) is not exactly representable
    CHECK_ERRC(ExactBackend{Rational(1, 2)}.qpow(HalfInt::halves(1)), errc::domain_violated);
    CHECK(ExactBackend{Rational(1, 2)}.qpow(HalfInt::whole(3)) == Rational(1, 8));
}
