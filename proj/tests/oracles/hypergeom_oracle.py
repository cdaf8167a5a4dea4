#!/usr/bin/env python3
# Reference values for 2phi1 and the bilateral 1psi1 sum.
# Run: python3 hypergeom_oracle.py   (output frozen into ../test_solutions.cpp)
import mpmath as mp

mp.mp.dps = 40


def qp_n(a, q, n):
    if n >= 0:
        return mp.qp(a, q, n)
    m = -n
    prod = mp.mpf(1)
    for j in range(1, m + 1):
        prod *= (1 - a * q ** mp.mpf(-j))
    return 1 / prod


def two_phi_one(a, b, c, q, z, terms=400):
    s = mp.mpf(0)
    for n in range(terms):
        s += mp.qp(a, q, n) * mp.qp(b, q, n) / (mp.qp(c, q, n) * mp.qp(q, q, n)) * z ** n
    return s


def one_psi_one_sum(a, b, q, z, lo=-300, hi=400):
    s = mp.mpf(0)
    for n in range(lo, hi):
        s += qp_n(a, q, n) / qp_n(b, q, n) * z ** n
    return s


def one_psi_one_prod(a, b, q, z):
    num = mp.qp(q, q) * mp.qp(b / a, q) * mp.qp(a * z, q) * mp.qp(q / (a * z), q)
    den = mp.qp(b, q) * mp.qp(q / a, q) * mp.qp(z, q) * mp.qp(b / (a * z), q)
    return num / den


def show(name, v):
    v = mp.mpc(v)
    print(f"{name} = {mp.nstr(v.real, 20)} {'+' if v.imag >= 0 else '-'} {mp.nstr(abs(v.imag), 20)}i")


q = mp.mpf("0.5")
show("2phi1(0.5,0.3;0.7;q=0.5,z=0.6)",
     two_phi_one(mp.mpf("0.5"), mp.mpf("0.3"), mp.mpf("0.7"), q, mp.mpf("0.6")))
# terminating case: b = q^{-2} cuts the sum after three terms, works for any z
show("2phi1(0.5,q^-2;0.7;q=0.5,z=1.3)",
     two_phi_one(mp.mpf("0.5"), q ** -2, mp.mpf("0.7"), q, mp.mpf("1.3"), terms=3))

a, b, q3, z = mp.mpf("0.5"), mp.mpf("0.1"), mp.mpf("0.3"), mp.mpf("0.4")
s = one_psi_one_sum(a, b, q3, z)
p = one_psi_one_prod(a, b, q3, z)
assert mp.fabs(s - p) < mp.mpf("1e-30"), (s, p)
show("1psi1(0.5;0.1;q=0.3,z=0.4)", s)
