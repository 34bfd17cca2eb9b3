"""Independent reference implementations used to check the package.

Everything here is deliberately naive: O(p^2) point counts, trial
division, direct quadrature, small-height rational point searches. Slow
but obviously correct, so the fast code can be checked against it.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np
from scipy import integrate


def trial_primes(P: int) -> List[int]:
    """All primes <= P by trial division."""
    out = []
    for n in range(2, P + 1):
        if all(n % q for q in range(2, int(math.isqrt(n)) + 1)):
            out.append(n)
    return out


def factorize(n: int) -> List[Tuple[int, int]]:
    """Trial-division factorization of n >= 1 as (prime, exponent) pairs."""
    n = abs(n)
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


def is_squarefree_slow(d: int) -> bool:
    return all(e == 1 for _, e in factorize(d)) and d != 0


def mobius_slow(d: int) -> int:
    fac = factorize(d)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def omega_slow(d: int) -> int:
    return len(factorize(d))


def legendre_euler(d: int, p: int) -> int:
    """(d/p) for odd prime p via Euler's criterion."""
    r = pow(d % p, (p - 1) // 2, p)
    if r == 0:
        return 0
    return 1 if r == 1 else -1


def count_points(a: int, b: int, p: int) -> int:
    """#E(F_p) for y^2 = x^3 + ax + b by the O(p^2) double loop."""
    n = 1  # point at infinity
    for x in range(p):
        rhs = (x * x * x + a * x + b) % p
        for y in range(p):
            if (y * y) % p == rhs:
                n += 1
    return n


def ap_brute(a: int, b: int, p: int) -> int:
    return p + 1 - count_points(a, b, p)


def count_points_twisted(a: int, b: int, d: int, p: int) -> int:
    """#{(x, y) mod p : d y^2 = x^3 + ax + b} + 1."""
    n = 1
    for x in range(p):
        rhs = (x * x * x + a * x + b) % p
        for y in range(p):
            if (d * y * y) % p == rhs:
                n += 1
    return n


def mellin_quadrature(w, s: complex, upper: float = 60.0) -> complex:
    """Integral of x^{s-1} w(x) over (0, upper) by adaptive quadrature."""
    re, _ = integrate.quad(lambda x: (x ** (s.real - 1)
                                      * math.cos(s.imag * math.log(x))
                                      * w(x)), 0, upper, limit=400)
    im, _ = integrate.quad(lambda x: (x ** (s.real - 1)
                                      * math.sin(s.imag * math.log(x))
                                      * w(x)), 0, upper, limit=400)
    return complex(re, im)


def fourier_quadrature(w, xi: float, radius: float = 40.0) -> float:
    """Real part of the Fourier transform with e(-xi t) convention."""
    re, _ = integrate.quad(lambda t: w(t) * math.cos(2 * math.pi * xi * t),
                           -radius, radius, limit=400)
    return re


def e1_quadrature(x: float) -> float:
    """E1(x) = integral over t >= 1 of e^{-xt}/t dt."""
    val, _ = integrate.quad(lambda t: math.exp(-x * t) / t, 1, np.inf,
                            limit=400)
    return val


# --- rational points on d y^2 = x^3 + a x + b ----------------------------

def _on_twist(a: int, b: int, d: int, x: Fraction, y: Fraction) -> bool:
    return d * y * y == x ** 3 + a * x + b


def search_twist_point(a: int, b: int, d: int,
                       height: int = 10 ** 4,
                       denoms: Tuple[int, ...] = (1, 2, 3, 4, 5)
                       ) -> Optional[Tuple[Fraction, Fraction]]:
    """Small nonzero-y rational point on d y^2 = x^3 + ax + b, if any.

    Searches x = m/e^2 for |m| <= height and e in denoms, the canonical
    denominator shape for affine points.
    """
    for e in denoms:
        e2 = e * e
        for m in range(-height, height + 1):
            x = Fraction(m, e2)
            rhs = x ** 3 + a * x + b
            t = rhs / d
            if t <= 0:
                if t == 0:
                    continue
                continue
            # t must be a rational square
            pn, qd = t.numerator, t.denominator
            rn = math.isqrt(pn)
            rd = math.isqrt(qd)
            if rn * rn == pn and rd * rd == qd:
                y = Fraction(rn, rd)
                if y != 0:
                    return x, y
    return None


def _twist_add(a: int, b: int, d: int, p1, p2):
    """Group law on d y^2 = x^3 + ax + b over Q. None is the identity."""
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    x1, y1 = p1
    x2, y2 = p2
    if x1 == x2 and y1 == -y2:
        return None
    if p1 == p2:
        lam = (3 * x1 * x1 + a) / (2 * d * y1)
    else:
        lam = (y2 - y1) / (x2 - x1)
    x3 = d * lam * lam - x1 - x2
    y3 = lam * (x1 - x3) - y1
    return (x3, y3)


def is_torsion_point(a: int, b: int, d: int,
                     pt: Tuple[Fraction, Fraction]) -> bool:
    """True if pt has order <= 12 (covers all rational torsion orders)."""
    acc = None
    for _ in range(12):
        acc = _twist_add(a, b, d, acc, pt)
        if acc is None:
            return True
    return False
