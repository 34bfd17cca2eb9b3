"""Sieves, quadratic residue symbols, and weight-transform evaluation.

Everything here is consumed by the curve/prime-sum/statistics layers:
prime tables with precomputed log p and 1/sqrt(p), squarefree/Mobius
masks, the full Kronecker symbol, and a small menu of concrete weight
functions with closed-form Mellin and Fourier transforms.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    CapacityError,
    MaskBoundError,
    PoleError,
    UndefinedInputError,
    UnsupportedWeightError,
)

# Default memory budget for table construction (bytes). A knob, not a hard
# OS limit: construction estimates its footprint and refuses to start past
# this.
DEFAULT_MEMORY_BUDGET = 2 << 30

_SEGMENT = 1 << 22


# ---------------------------------------------------------------------------
# prime sieve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrimeTable:
    """Primes up to `bound` with per-prime log p and 1/sqrt(p)."""

    bound: int
    primes: np.ndarray      # int64, ascending
    logp: np.ndarray        # float64
    inv_sqrtp: np.ndarray   # float64

    def __len__(self) -> int:
        return len(self.primes)

    def upto(self, t: float) -> np.ndarray:
        """Indices view of the primes <= t."""
        k = int(np.searchsorted(self.primes, math.floor(t), side="right"))
        return self.primes[:k]


def _simple_sieve(n: int) -> np.ndarray:
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if flags[i]:
            flags[i * i:: i] = False
    return flags


def _segment_primes(base: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """Primes in [lo, hi) given base primes up to sqrt(hi)."""
    flags = np.ones(hi - lo, dtype=bool)
    if lo == 0:
        flags[: min(2, hi)] = False
    for p in base:
        p = int(p)
        if p * p >= hi:
            break
        start = max(p * p, ((lo + p - 1) // p) * p)
        flags[start - lo:: p] = False
    return (np.nonzero(flags)[0] + lo).astype(np.int64)


def sieve_primes(P: int, memory_budget: int = DEFAULT_MEMORY_BUDGET,
                 workers: int = 1) -> PrimeTable:
    """Segmented sieve of Eratosthenes up to P (inclusive).

    Segments are independent, so construction parallelizes over them;
    results are concatenated in segment order and are therefore
    deterministic for any worker count.
    """
    if not 2 <= P <= 10**9:
        raise ValueError(f"prime bound P={P} outside [2, 10^9]")
    # primes + logp + inv_sqrtp (8+8+8 bytes each) plus one live segment
    est = 24 * int(1.3 * P / max(math.log(P) - 1.1, 1.0)) + _SEGMENT
    if est > memory_budget:
        raise CapacityError(
            f"prime table to P={P} needs ~{est} bytes > budget {memory_budget}")
    root = math.isqrt(P)
    base = np.nonzero(_simple_sieve(root))[0].astype(np.int64)
    spans = [(lo, min(lo + _SEGMENT, P + 1)) for lo in range(0, P + 1, _SEGMENT)]
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda s: _segment_primes(base, *s), spans))
    else:
        chunks = [_segment_primes(base, lo, hi) for lo, hi in spans]
    primes = np.concatenate(chunks) if len(chunks) > 1 else chunks[0]
    pf = primes.astype(np.float64)
    return PrimeTable(bound=P, primes=primes, logp=np.log(pf),
                      inv_sqrtp=1.0 / np.sqrt(pf))


# ---------------------------------------------------------------------------
# squarefree / Mobius sieve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SquarefreeMask:
    """mu^2(d) mask and Mobius values for 1 <= d <= bound."""

    bound: int
    mask: np.ndarray    # uint8, mask[d] = mu^2(d)
    mobius: np.ndarray  # int8

    def is_squarefree(self, d: int) -> bool:
        d = abs(int(d))
        if not 1 <= d <= self.bound:
            raise MaskBoundError(f"|d|={d} beyond mask bound {self.bound}")
        return bool(self.mask[d])

    def mu(self, d: int) -> int:
        d = abs(int(d))
        if not 1 <= d <= self.bound:
            raise MaskBoundError(f"|d|={d} beyond mask bound {self.bound}")
        return int(self.mobius[d])


def squarefree_sieve(D: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> SquarefreeMask:
    """Mobius sieve: mu(d) for 1 <= d <= D, with mu^2 as the squarefree mask."""
    if D < 1:
        raise ValueError("D must be >= 1")
    if 2 * (D + 1) > memory_budget:
        raise CapacityError(f"squarefree sieve to D={D} exceeds memory budget")
    mu = np.ones(D + 1, dtype=np.int8)
    mu[0] = 0
    flags = _simple_sieve(D) if D >= 2 else np.zeros(D + 1, dtype=bool)
    for p in np.nonzero(flags)[0]:
        p = int(p)
        mu[p::p] *= -1
        sq = p * p
        if sq <= D:
            mu[sq::sq] = 0
    mask = (mu != 0).astype(np.uint8)
    return SquarefreeMask(bound=D, mask=mask, mobius=mu)


def omega_sieve(D: int) -> np.ndarray:
    """omega(d) (# distinct prime factors) for 0 <= d <= D, via a prime sieve."""
    om = np.zeros(D + 1, dtype=np.uint8)
    if D >= 2:
        for p in np.nonzero(_simple_sieve(D))[0]:
            om[int(p):: int(p)] += 1
    return om


def spf_sieve(M: int) -> np.ndarray:
    """Smallest-prime-factor table for 0 <= n <= M (spf[0] = spf[1] = 0)."""
    spf = np.zeros(M + 1, dtype=np.int64)
    if M >= 2:
        for p in np.nonzero(_simple_sieve(M))[0]:
            p = int(p)
            sl = spf[p::p]
            sl[sl == 0] = p
    return spf


# ---------------------------------------------------------------------------
# Kronecker symbol
# ---------------------------------------------------------------------------

def kronecker(d: int, n: int) -> int:
    """Full Kronecker symbol (d/n), for all integers not both zero.

    Agrees with the Legendre symbol of d mod n for odd prime n, and uses
    the standard conventions (d/2), (d/-1), (d/0).
    """
    d, n = int(d), int(n)
    if d == 0 and n == 0:
        raise UndefinedInputError("Kronecker symbol (0/0) is undefined")
    if n == 0:
        return 1 if d in (1, -1) else 0
    sign = 1
    if n < 0:
        n = -n
        if d < 0:
            sign = -1
    while n % 2 == 0:
        n //= 2
        if d % 2 == 0:
            return 0
        if d % 8 in (3, 5):
            sign = -sign
    # n odd positive; Jacobi loop with reciprocity
    d %= n
    while d != 0:
        while d % 2 == 0:
            d //= 2
            if n % 8 in (3, 5):
                sign = -sign
        d, n = n, d
        if d % 4 == 3 and n % 4 == 3:
            sign = -sign
        d %= n
    return sign if n == 1 else 0


# ---------------------------------------------------------------------------
# weights and their transforms
# ---------------------------------------------------------------------------

# Lanczos approximation of Gamma(s), g = 7, 9 coefficients (Godfrey's
# published set). Relative accuracy ~1e-13 across the strip used here.
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_complex(s: complex) -> complex:
    """Gamma(s) for complex s via the Lanczos series (reflection for Re s < 1/2)."""
    s = complex(s)
    if s.imag == 0.0 and s.real == math.floor(s.real) and s.real <= 0.0:
        raise PoleError(f"Gamma pole at s={s}")
    if s.real < 0.5:
        return math.pi / (cmath.sin(math.pi * s) * gamma_complex(1.0 - s))
    z = s - 1.0
    x = _LANCZOS_C[0]
    for i, c in enumerate(_LANCZOS_C[1:], start=1):
        x += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * cmath.exp(-t) * x


_KINDS = ("triangular", "exponential", "gaussian", "gaussian2d")
_POLE_TOL = 1e-12


@dataclass(frozen=True)
class WeightSpec:
    """A concrete weight with closed-form transforms.

    kinds:
      triangular  g(x) = max(1-|x|, 0)        Mellin 1/(s(s+1))
      exponential g(x) = exp(-|x|)            Mellin Gamma(s)
      gaussian    w(t) = exp(-t^2 / 2 sigma^2) Mellin 2^(s/2-1) sigma^s Gamma(s/2)
      gaussian2d  w(t1,t2) = product of two gaussians (family weight on R^2)
    """

    kind: str
    sigma: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise UnsupportedWeightError(f"unknown weight kind {self.kind!r}")
        if self.sigma <= 0 or self.sigma2 <= 0:
            raise ValueError("sigma must be positive")

    # -- constructors -------------------------------------------------------
    @staticmethod
    def triangular() -> "WeightSpec":
        return WeightSpec("triangular")

    @staticmethod
    def exponential() -> "WeightSpec":
        return WeightSpec("exponential")

    @staticmethod
    def gaussian(sigma: float = 1.0) -> "WeightSpec":
        return WeightSpec("gaussian", sigma=sigma)

    @staticmethod
    def gaussian2d(sigma1: float = 1.0, sigma2: float = 1.0) -> "WeightSpec":
        return WeightSpec("gaussian2d", sigma=sigma1, sigma2=sigma2)

    # -- evaluation ---------------------------------------------------------
    def __call__(self, x):
        x = np.abs(np.asarray(x, dtype=np.float64))
        if self.kind == "triangular":
            out = np.maximum(1.0 - x, 0.0)
        elif self.kind == "exponential":
            out = np.exp(-x)
        elif self.kind == "gaussian":
            out = np.exp(-x * x / (2.0 * self.sigma**2))
        else:
            raise UnsupportedWeightError("gaussian2d needs two arguments; use value2")
        return float(out) if out.ndim == 0 else out

    def value2(self, x, y):
        if self.kind != "gaussian2d":
            raise UnsupportedWeightError(f"{self.kind} is one-dimensional")
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        out = np.exp(-x * x / (2.0 * self.sigma**2) - y * y / (2.0 * self.sigma2**2))
        return float(out) if out.ndim == 0 else out

    def decay_radius(self, eps: float = 1e-16) -> float:
        """Smallest r with w(x) < eps for |x| > r."""
        if self.kind == "triangular":
            return 1.0
        if self.kind == "exponential":
            return -math.log(eps)
        return max(self.sigma, self.sigma2) * math.sqrt(-2.0 * math.log(eps))

    def integral(self) -> float:
        """Integral of the weight over the whole real line."""
        if self.kind == "triangular":
            return 1.0
        if self.kind == "exponential":
            return 2.0
        if self.kind == "gaussian":
            return self.sigma * math.sqrt(2.0 * math.pi)
        raise UnsupportedWeightError("gaussian2d has no 1d integral")

    def square_integral_01(self) -> float:
        """Integral of w(t)^2 over t in [0, 1]."""
        if self.kind == "triangular":
            return 1.0 / 3.0
        if self.kind == "exponential":
            return (1.0 - math.exp(-2.0)) / 2.0
        if self.kind == "gaussian":
            s = self.sigma
            return s * math.sqrt(math.pi) / 2.0 * math.erf(1.0 / s)
        raise UnsupportedWeightError("gaussian2d has no 1d integral")


def mellin(weight: WeightSpec, s: complex) -> complex:
    """Closed-form Mellin transform M w(s) = int_0^inf x^(s-1) w(x) dx."""
    s = complex(s)
    if weight.kind == "triangular":
        if abs(s) < _POLE_TOL or abs(s + 1.0) < _POLE_TOL:
            raise PoleError(f"Mellin(triangular) pole at s={s}")
        return 1.0 / (s * (s + 1.0))
    if weight.kind == "exponential":
        return gamma_complex(s)
    if weight.kind == "gaussian":
        half = s / 2.0
        if half.imag == 0.0 and half.real == math.floor(half.real) and half.real <= 0.0:
            raise PoleError(f"Mellin(gaussian) pole at s={s}")
        return 2.0 ** (s / 2.0 - 1.0) * weight.sigma ** s * gamma_complex(half)
    raise UnsupportedWeightError("gaussian2d has no 1d Mellin transform")


def mellin_gk(weight: WeightSpec, k: int, s: complex) -> complex:
    """Mellin transform of g_k(x) = g(x^k): (1/k) * M g(s/k)."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    return mellin(weight, complex(s) / k) / k


def fourier_hat(weight: WeightSpec, xi: float):
    """Fourier transform w^(xi) = int w(t) e(-xi t) dt with e(x) = exp(2 pi i x).

    Only gaussian weights have the closed form needed here.
    """
    if weight.kind != "gaussian":
        raise UnsupportedWeightError(
            f"Fourier transform implemented for gaussian weights, not {weight.kind}")
    xi = np.asarray(xi, dtype=np.float64)
    s = weight.sigma
    out = s * math.sqrt(2.0 * math.pi) * np.exp(-2.0 * math.pi**2 * s * s * xi * xi)
    return float(out) if out.ndim == 0 else out


def weight_from_name(name: str, sigma: float = 1.0, sigma2: float = 1.0) -> WeightSpec:
    if name == "gaussian":
        return WeightSpec.gaussian(sigma)
    if name == "gaussian2d":
        return WeightSpec.gaussian2d(sigma, sigma2)
    if name in ("triangular", "exponential"):
        return WeightSpec(name)
    raise UnsupportedWeightError(f"unknown weight {name!r}")
