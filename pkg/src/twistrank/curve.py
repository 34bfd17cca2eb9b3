"""Elliptic-curve data: traces of Frobenius, Hecke coefficients,
symmetric-power sums, quadratic twists, and root-number formulas.

Curves are integer short-Weierstrass models y^2 = x^3 + ax + b with the
conductor and root number supplied by fixtures and validated here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from . import _kernels
from .arith import kronecker, sieve_primes
from .errors import (
    BadPrimeError,
    ConductorValidationError,
    CoprimalityError,
    InsufficientTableError,
    NonSquarefreeError,
    SingularCurveError,
    TableBoundError,
)

# reduction-type tags stored per prime in an ApTable
GOOD = 0
SPLIT_MULT = 1
NONSPLIT_MULT = 2
ADDITIVE = 3


def discriminant(a: int, b: int) -> int:
    """Discriminant -16(4a^3 + 27b^2) in unbounded integer arithmetic."""
    return -16 * (4 * a**3 + 27 * b**2)


def _factor_trial(n: int) -> Dict[int, int]:
    """Trial-division factorization; fine for conductors and |d| at desk scale."""
    n = abs(int(n))
    out: Dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_squarefree_int(d: int) -> bool:
    d = abs(int(d))
    if d == 0:
        return False
    return all(e == 1 for e in _factor_trial(d).values())


@dataclass(frozen=True)
class EllipticCurve:
    """y^2 = x^3 + ax + b with fixture-supplied conductor and root number."""

    a: int
    b: int
    N: int
    eps: int
    label: str = ""
    disc: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "disc", discriminant(self.a, self.b))
        if self.disc == 0:
            raise SingularCurveError(
                f"curve {self.label or (self.a, self.b)} has zero discriminant")
        if self.eps not in (-1, 1):
            raise ValueError(f"root number must be +-1, got {self.eps}")
        if self.N < 1:
            raise ValueError(f"conductor must be positive, got {self.N}")
        self._check_minimal()
        for p in _factor_trial(self.N):
            if self.disc % p != 0:
                raise ConductorValidationError(
                    f"{self.label}: conductor prime {p} does not divide the discriminant")

    def _check_minimal(self):
        # p^4 | a must imply p^6 does not divide b
        if self.a == 0:
            limit = round(abs(self.b) ** (1.0 / 6)) + 2
            for p in range(2, limit):
                if self.b % p**6 == 0 and _is_prime_small(p):
                    raise ValueError(
                        f"{self.label}: model not minimal (a=0 and {p}^6 | b)")
            return
        limit = round(abs(self.a) ** 0.25) + 2
        for p in range(2, limit):
            if self.a % p**4 == 0 and self.b % p**6 == 0 and _is_prime_small(p):
                raise ValueError(
                    f"{self.label}: model not minimal at p={p} (p^4|a and p^6|b)")

    @property
    def c4(self) -> int:
        return -48 * self.a


def _is_prime_small(n: int) -> bool:
    if n < 2:
        return False
    for q in range(2, math.isqrt(n) + 1):
        if n % q == 0:
            return False
    return True


def _count_points_mod2(a: int, b: int) -> int:
    """#E(F_2) including the point at infinity, by enumeration."""
    cnt = 1
    for x in range(2):
        for y in range(2):
            if (y * y - (x**3 + a * x + b)) % 2 == 0:
                cnt += 1
    return cnt


def ap_good(curve: EllipticCurve, p: int) -> int:
    """Trace of Frobenius at a good odd prime via the character sum."""
    p = int(p)
    if p == 2 or (2 * curve.disc) % p == 0:
        raise BadPrimeError(f"p={p} is not a good odd prime for {curve.label}")
    primes = np.array([p], dtype=np.int64)
    out = np.empty(1, dtype=np.int64)
    _kernels.ap_char_chunk(curve.a, curve.b, primes, out)
    return int(out[0])


def ap_bad(curve: EllipticCurve, p: int) -> Tuple[int, int]:
    """(a_p, reduction tag) at a bad prime p >= 5.

    Additive reduction iff p | c4 (the reduced cubic has a cusp) -> 0.
    Otherwise the cubic has a node with tangent slopes of square -2ab
    times a square: split iff (-2ab/p) = 1, giving a_p = (-2ab/p).
    """
    p = int(p)
    if p in (2, 3):
        raise BadPrimeError(f"p={p}: fixture must supply a_p (no Tate step here)")
    if curve.N % p != 0:
        raise BadPrimeError(f"p={p} does not divide the conductor of {curve.label}")
    if curve.c4 % p == 0:
        return 0, ADDITIVE
    s = kronecker(-2 * curve.a * curve.b, p)
    return s, (SPLIT_MULT if s == 1 else NONSPLIT_MULT)


@dataclass(frozen=True)
class ApTable:
    """Immutable per-curve table of a_p and reduction tags for all p <= P."""

    label: str
    bound: int
    primes: np.ndarray   # int64 ascending
    ap: np.ndarray       # int64
    tags: np.ndarray     # uint8, GOOD/SPLIT_MULT/NONSPLIT_MULT/ADDITIVE

    def __len__(self) -> int:
        return len(self.primes)

    def index_of(self, p: int) -> int:
        i = int(np.searchsorted(self.primes, p))
        if i >= len(self.primes) or self.primes[i] != p:
            raise TableBoundError(f"p={p} not in table (bound {self.bound})")
        return i

    def ap_at(self, p: int) -> int:
        return int(self.ap[self.index_of(p)])

    def tag_at(self, p: int) -> int:
        return int(self.tags[self.index_of(p)])


_CHUNK_PRIMES = 4096


def build_ap_table(curve: EllipticCurve, P: int,
                   overrides: Optional[Dict[int, int]] = None,
                   workers: int = 1) -> ApTable:
    """a_p for all primes p <= P.

    Odd primes come from the character-sum kernel (chunked; safe for a
    thread pool since each chunk owns its output slice). p = 2 is counted
    directly over F_2 when the model is good there; otherwise (and at a
    3 dividing the discriminant, where the short model can degenerate)
    a fixture override is required.
    """
    if P < 2:
        raise ValueError("P must be >= 2")
    overrides = overrides or {}
    pt = sieve_primes(P)
    primes = pt.primes
    ap = np.zeros(len(primes), dtype=np.int64)

    odd = primes[1:] if primes[0] == 2 else primes
    out_odd = np.empty(len(odd), dtype=np.int64)
    if len(odd):
        spans = [(i, min(i + _CHUNK_PRIMES, len(odd)))
                 for i in range(0, len(odd), _CHUNK_PRIMES)]
        if workers > 1 and len(spans) > 1:
            from concurrent.futures import ThreadPoolExecutor
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(
                    lambda s: _kernels.ap_char_chunk(
                        curve.a, curve.b, odd[s[0]:s[1]], out_odd[s[0]:s[1]]),
                    spans))
        else:
            for lo, hi in spans:
                _kernels.ap_char_chunk(curve.a, curve.b, odd[lo:hi], out_odd[lo:hi])
    off = len(primes) - len(odd)
    ap[off:] = out_odd

    if primes[0] == 2:
        if 2 in overrides:
            ap[0] = overrides[2]
        elif curve.disc % 2 != 0:
            ap[0] = 2 + 1 - _count_points_mod2(curve.a, curve.b)
        else:
            raise BadPrimeError(
                f"{curve.label}: 2 | discriminant; fixture override for a_2 required")
    if P >= 3 and curve.disc % 3 == 0:
        if 3 not in overrides:
            raise BadPrimeError(
                f"{curve.label}: 3 | discriminant; fixture override for a_3 required")
        ap[np.searchsorted(primes, 3)] = overrides[3]

    tags = np.zeros(len(primes), dtype=np.uint8)
    for q, e in _factor_trial(curve.N).items():
        if q > P:
            continue
        i = int(np.searchsorted(primes, q))
        if q >= 5:
            _, tag = ap_bad(curve, q)
            tags[i] = tag
        else:
            # classification at 2 and 3 is fixture territory; tag from a_p
            tags[i] = ADDITIVE if ap[i] == 0 else (
                SPLIT_MULT if ap[i] == 1 else NONSPLIT_MULT)
            if ap[i] not in (-1, 0, 1):
                raise BadPrimeError(
                    f"{curve.label}: override a_{q}={ap[i]} invalid at bad prime")
    return ApTable(label=curve.label, bound=P, primes=primes, ap=ap, tags=tags)


def hecke_lambda(table: ApTable, n: int) -> float:
    """Normalized Hecke coefficient lambda(n), multiplicative with the
    good-prime recurrence lambda(p^{k+1}) = lambda(p)lambda(p^k) - lambda(p^{k-1})."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    out = 1.0
    for p, e in _factor_trial(n).items():
        if p > table.bound:
            raise InsufficientTableError(f"prime {p} exceeds table bound {table.bound}")
        lam_p = table.ap_at(p) / math.sqrt(p)
        if table.tag_at(p) != GOOD:
            out *= lam_p**e
            continue
        prev, cur = 1.0, lam_p
        for _ in range(e - 1):
            prev, cur = cur, lam_p * cur - prev
        out *= cur
    return out


def sym_power_sum(table: ApTable, p: int, k: int) -> float:
    """s_k = alpha_p^k + beta_p^k from the two-term recurrence."""
    if not 0 <= k <= 8:
        raise ValueError("k must be in [0, 8]")
    s1 = table.ap_at(p) / math.sqrt(p)
    if table.tag_at(p) != GOOD:
        return s1**k          # beta = 0 at bad primes
    if k == 0:
        return 2.0
    prev, cur = 2.0, s1
    for _ in range(k - 1):
        prev, cur = cur, s1 * cur - prev
    return cur


def sym_power_arrays(table: ApTable, k: int) -> np.ndarray:
    """Vectorized s_k over the whole table."""
    s1 = table.ap / np.sqrt(table.primes.astype(np.float64))
    good = table.tags == GOOD
    if k == 0:
        return np.where(good, 2.0, 1.0)
    prev = np.where(good, 2.0, 1.0)
    cur = s1.copy()
    for _ in range(k - 1):
        prev, cur = cur, np.where(good, s1 * cur - prev, s1 * cur)
    return cur


def _count_points_twisted(a: int, b: int, d: int, p: int) -> int:
    """#E_d(F_p) for dy^2 = x^3 + ax + b by enumeration (small p only)."""
    cnt = 1
    table: Dict[int, int] = {}
    for y in range(p):
        r = (d * y * y) % p
        table[r] = table.get(r, 0) + 1
    for x in range(p):
        f = (x**3 + a * x + b) % p
        cnt += table.get(f, 0)
    return cnt


def twist_ap(curve: EllipticCurve, d: int, p: int) -> int:
    """a_p of the twist dy^2 = x^3+ax+b at a prime p good for E_d.

    For p coprime to 2d (and good for E) this is (d/p) a_p(E); otherwise
    it falls back to direct counting on the twisted model.
    """
    p = int(p)
    d = int(d)
    if p != 2 and d % p != 0 and (2 * curve.disc) % p != 0:
        return kronecker(d, p) * ap_good(curve, p)
    return p + 1 - _count_points_twisted(curve.a, curve.b, d, p)


@dataclass(frozen=True)
class TwistedCurve:
    """Quadratic twist dy^2 = x^3 + ax + b of a base curve."""

    base: EllipticCurve
    d: int
    conductor: int = field(init=False)   # d^2 N for (d, N) = 1

    def __post_init__(self):
        if self.d == 0 or not is_squarefree_int(self.d):
            raise NonSquarefreeError(f"twist parameter d={self.d} is not squarefree")
        object.__setattr__(self, "conductor", self.d * self.d * self.base.N)

    @property
    def fundamental_discriminant(self) -> int:
        """Discriminant of Q(sqrt(d)): d if d = 1 mod 4, else 4d."""
        return self.d if self.d % 4 == 1 else 4 * self.d

    @property
    def analytic_conductor(self) -> int:
        """Exact conductor of L(E_d, s) for (d, N) = 1: N * disc(Q(sqrt d))^2.

        Differs from the d^2 N bound when the twist ramifies at 2
        (d = 2, 3 mod 4); the L-series code must use this one.
        """
        if math.gcd(self.d, self.base.N) != 1:
            raise CoprimalityError(
                f"analytic conductor implemented for (d, N) = 1 only; "
                f"gcd({self.d}, {self.base.N}) > 1")
        d0 = self.fundamental_discriminant
        return self.base.N * d0 * d0


def root_number_coprime(curve: EllipticCurve, d: int) -> int:
    """Twisted root number (d/-N) eps(E) for squarefree d coprime to N."""
    if math.gcd(abs(d), curve.N) != 1:
        raise CoprimalityError(f"d={d} shares a factor with N={curve.N}")
    if not is_squarefree_int(d):
        raise NonSquarefreeError(f"d={d} is not squarefree")
    return kronecker(d, -curve.N) * curve.eps


def root_number_squarefreeN(curve: EllipticCurve, d: int) -> int:
    """Twisted root number for squarefree conductor N and any squarefree d:
    chi_d(-N/g) mu(g) (prod_{q | g} a_q) eps(E) with g = gcd(d, N)."""
    fac_N = _factor_trial(curve.N)
    if any(e > 1 for e in fac_N.values()):
        raise NonSquarefreeError(f"N={curve.N} is not squarefree")
    if not is_squarefree_int(d):
        raise NonSquarefreeError(f"d={d} is not squarefree")
    g = math.gcd(abs(d), curve.N)
    out = kronecker(d, -(curve.N // g)) * curve.eps
    mu = 1
    for q in _factor_trial(g):
        mu = -mu
        aq, tag = ap_bad(curve, q) if q >= 5 else (None, None)
        if q < 5:
            raise BadPrimeError(
                f"gcd prime q={q} < 5: bad-prime data at 2, 3 is fixture-only")
        if tag == ADDITIVE:
            raise BadPrimeError(
                f"q={q}: additive prime in squarefree conductor is inconsistent")
        out *= aq
    return out * mu


@dataclass(frozen=True)
class ConductorReport:
    label: str
    checked: Tuple[int, ...]     # primes p >= 5 whose exponent was verified
    warned: Tuple[int, ...]      # primes 2, 3 skipped (fixture territory)
    ok: bool = True


def conductor_validate(curve: EllipticCurve) -> ConductorReport:
    """Check fixture conductor exponents at p >= 5 against reduction types."""
    fac_N = _factor_trial(curve.N)
    fac_D = _factor_trial(curve.disc)
    bad = []
    checked = []
    warned = []
    for p in sorted(set(fac_N) | set(fac_D)):
        if p < 5:
            if p in fac_N or p in fac_D:
                warned.append(p)
            continue
        e = fac_N.get(p, 0)
        if p not in fac_N:
            # p >= 5 dividing Delta of a minimal-at-p model must be bad
            if p in fac_D:
                bad.append((p, "divides discriminant but not conductor"))
            continue
        _, tag = ap_bad(curve, p)
        want = 2 if tag == ADDITIVE else 1
        checked.append(p)
        if e != want:
            bad.append((p, f"exponent {e}, reduction type implies {want}"))
    if bad:
        raise ConductorValidationError(
            f"{curve.label}: " + "; ".join(f"p={p}: {msg}" for p, msg in bad))
    return ConductorReport(label=curve.label, checked=tuple(checked),
                           warned=tuple(warned))
