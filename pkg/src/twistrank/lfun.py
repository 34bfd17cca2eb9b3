"""Central L-values and analytic-rank classification for twisted curves,
plus ingestion of externally computed zero ordinates.

Central values come from the standard rapidly convergent series attached
to the functional equation: an exponential kernel when the sign is +1 and
the exponential-integral kernel E1 when the sign is -1. Classification is
evidence, not proof: near-vanishing values are reported as rank >= 2 with
a low-confidence flag when they sit close to the threshold.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.special import exp1

from . import _kernels
from .arith import spf_sieve
from .curve import ApTable, TwistedCurve, root_number_coprime
from .errors import (
    AmbiguousSignError,
    InsufficientTableError,
    WrongSignError,
    ZeroDataError,
)


@dataclass(frozen=True)
class LValue:
    value: float
    kind: str               # "central" or "first_derivative"
    cutoff: int
    tail_bound: float


@dataclass(frozen=True)
class RankClass:
    rank: int               # 0, 1, or 2 meaning ">= 2"
    parity: str             # "even" or "odd"
    margin: float           # |value| - threshold
    low_confidence: bool = False


# |a_n| <= d(n) sqrt(n), and d(n)/sqrt(n) <= 2 for all n >= 1
_COEFF_BOUND = 2.0


def _series_cutoff(sqrt_N: float, tol: float, t: float = 1.0) -> int:
    """Terms needed so the remaining kernel tail is below tol."""
    c = 2.0 * math.pi * t / sqrt_N
    M = int(math.ceil(math.log(4.0 * _COEFF_BOUND / (tol * (1.0 - math.exp(-c)))) / c))
    return max(M, 16)


def twisted_an(tw: TwistedCurve, table: ApTable, M: int) -> np.ndarray:
    """Integer coefficients a_1..a_M of L(E_d, s), as exact float64.

    a_p(E_d) = (D0/p) a_p(E) with D0 the discriminant of Q(sqrt d); this is
    the character of the twist itself (conductor |D0|), which vanishes at
    every additive prime of E_d including p = 2 when the twist ramifies
    there.
    """
    if M > table.bound:
        raise InsufficientTableError(
            f"series cutoff {M} exceeds a_p table bound {table.bound}")
    d0 = tw.fundamental_discriminant
    N_an = tw.analytic_conductor
    k = int(np.searchsorted(table.primes, M, side="right"))
    primes = table.primes[:k]
    chi = np.empty(k, dtype=np.int64)
    _kernels.kron_vec(d0, primes, chi)
    app = np.zeros(M + 1, dtype=np.float64)
    app[primes] = chi * table.ap[:k]
    isbad = np.zeros(M + 1, dtype=np.bool_)
    isbad[[p for p in primes if N_an % int(p) == 0]] = True
    spf = spf_sieve(M)
    return _kernels.hecke_an(M, spf, app, isbad)


def _tail_bound(sqrt_N: float, M: int, t: float = 1.0) -> float:
    c = 2.0 * math.pi * t / sqrt_N
    return 4.0 * _COEFF_BOUND * math.exp(-c * (M + 1)) / (1.0 - math.exp(-c))


def l_value_center(tw: TwistedCurve, table: ApTable, tol: float = 1e-9,
                   eps: Optional[int] = None) -> LValue:
    """L(E_d, 1) = 2 sum_{n<=M} (a_n/n) exp(-2 pi n / sqrt N_d), sign +1 only."""
    if eps is None:
        eps = root_number_coprime(tw.base, tw.d)
    if eps != 1:
        raise WrongSignError(f"d={tw.d}: sign is -1, central value vanishes")
    sqrt_N = math.sqrt(tw.analytic_conductor)
    M = _series_cutoff(sqrt_N, tol)
    a = twisted_an(tw, table, M)
    n = np.arange(1, M + 1, dtype=np.float64)
    val = 2.0 * float(np.sum(a[1:] / n * np.exp(-2.0 * math.pi * n / sqrt_N)))
    return LValue(value=val, kind="central", cutoff=M,
                  tail_bound=_tail_bound(sqrt_N, M))


def l_prime_center(tw: TwistedCurve, table: ApTable, tol: float = 1e-9,
                   eps: Optional[int] = None) -> LValue:
    """L'(E_d, 1) = 2 sum_{n<=M} (a_n/n) E1(2 pi n / sqrt N_d), sign -1 only."""
    if eps is None:
        eps = root_number_coprime(tw.base, tw.d)
    if eps != -1:
        raise WrongSignError(f"d={tw.d}: sign is +1, use the central value")
    sqrt_N = math.sqrt(tw.analytic_conductor)
    M = _series_cutoff(sqrt_N, tol)
    a = twisted_an(tw, table, M)
    n = np.arange(1, M + 1, dtype=np.float64)
    val = 2.0 * float(np.sum(a[1:] / n * exp1(2.0 * math.pi * n / sqrt_N)))
    return LValue(value=val, kind="first_derivative", cutoff=M,
                  tail_bound=_tail_bound(sqrt_N, M))


def analytic_rank_class(tw: TwistedCurve, table: ApTable,
                        tol: float = 1e-3) -> RankClass:
    """Classify the twist as rank 0, 1, or >= 2 from the central series.

    The vanishing threshold is tol times the series' leading-term scale;
    values within a decade of the threshold get a low-confidence flag.
    """
    eps = root_number_coprime(tw.base, tw.d)
    sqrt_N = math.sqrt(tw.analytic_conductor)
    if eps == 1:
        lv = l_value_center(tw, table, eps=eps)
        scale = 2.0 * math.exp(-2.0 * math.pi / sqrt_N)
        parity, base_rank = "even", 0
    else:
        lv = l_prime_center(tw, table, eps=eps)
        scale = 2.0 * float(exp1(2.0 * math.pi / sqrt_N))
        parity, base_rank = "odd", 1
    threshold = tol * scale
    mag = abs(lv.value)
    rank = base_rank if mag > threshold else 2
    low_conf = threshold / 10.0 < mag < threshold * 10.0
    return RankClass(rank=rank, parity=parity, margin=mag - threshold,
                     low_confidence=low_conf)


def infer_root_number(tw: TwistedCurve, table: ApTable,
                      t_pair: Tuple[float, float] = (1.15, 1.45),
                      tol: float = 1e-7) -> int:
    """Infer the functional-equation sign from series self-consistency.

    For the true sign eps, G(t) = sum (a_n/n)[exp(-2 pi n t / sqrt N)
    + eps exp(-2 pi n / (t sqrt N))] is independent of t; under the wrong
    sign it drifts. Evaluates G at two t values under both hypotheses and
    returns the sign with the flat profile. If both profiles are flat to
    within the tail bounds the sign is genuinely ambiguous and an error is
    raised rather than a guess returned.
    """
    t1, t2 = t_pair
    sqrt_N = math.sqrt(tw.analytic_conductor)
    tmax = max(t1, t2, 1.0 / t1, 1.0 / t2)
    M = _series_cutoff(sqrt_N, tol * 1e-2, t=1.0 / tmax)
    a = twisted_an(tw, table, M)
    n = np.arange(1, M + 1, dtype=np.float64)
    an_over_n = a[1:] / n

    def g_parts(t):
        fwd = float(np.sum(an_over_n * np.exp(-2.0 * math.pi * n * t / sqrt_N)))
        bwd = float(np.sum(an_over_n * np.exp(-2.0 * math.pi * n / (t * sqrt_N))))
        return fwd, bwd

    f1, b1 = g_parts(t1)
    f2, b2 = g_parts(t2)
    drift = {s: abs((f1 + s * b1) - (f2 + s * b2)) for s in (1, -1)}
    flat = {s: drift[s] < tol for s in (1, -1)}
    if flat[1] and flat[-1]:
        raise AmbiguousSignError(
            f"d={tw.d}: both sign hypotheses are t-stable "
            f"(drifts {drift[1]:.3g}, {drift[-1]:.3g})")
    return 1 if drift[1] < drift[-1] else -1


@dataclass(frozen=True)
class ZeroData:
    """Positive zero ordinates per twist; negatives implied by symmetry."""

    twists: Dict[int, Tuple[np.ndarray, np.ndarray]]  # d -> (gammas, multiplicities)
    provenance: str = ""

    def gammas(self, d: int) -> np.ndarray:
        return self.twists[d][0]

    def __len__(self) -> int:
        return len(self.twists)


def load_zeros(path) -> ZeroData:
    """Read a zeros CSV with header d,gamma,multiplicity.

    Ordinates must be positive and strictly ascending within each twist.
    """
    raw: Dict[int, list] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is not None and header != ["d", "gamma", "multiplicity"]:
            raise ZeroDataError(f"{path}: bad header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                d = int(row[0])
                gamma = float(row[1])
                mult = int(row[2])
            except (ValueError, IndexError) as exc:
                raise ZeroDataError(f"{path}:{lineno}: unparseable row {row!r}") from exc
            if gamma <= 0:
                raise ZeroDataError(f"{path}:{lineno}: twist d={d} has gamma={gamma} <= 0")
            if mult < 1:
                raise ZeroDataError(f"{path}:{lineno}: twist d={d} has multiplicity {mult}")
            bucket = raw.setdefault(d, [])
            if bucket and gamma <= bucket[-1][0]:
                raise ZeroDataError(
                    f"{path}:{lineno}: twist d={d} ordinates not strictly ascending")
            bucket.append((gamma, mult))
    twists = {
        d: (np.array([g for g, _ in rows]), np.array([m for _, m in rows], dtype=np.int64))
        for d, rows in raw.items()
    }
    return ZeroData(twists=twists, provenance=str(path))
