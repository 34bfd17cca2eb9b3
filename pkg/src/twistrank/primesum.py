"""Twisted prime sums over quadratic-twist families.

Implements the family prime sum S(D;P) with two independent evaluation
paths (mutual oracles), per-twist explicit-formula rank estimators with
symmetric-square (and optional symmetric-cube) corrections, the all-curves
grid sum, and the Gauss-sum / Poisson-summation identity checks.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from . import _kernels
from ._reduce import tree_sum, tree_sum_arrays
from .arith import (WeightSpec, fourier_hat, kronecker, mellin,
                    spf_sieve, squarefree_sieve)
from .curve import (
    EllipticCurve,
    ApTable,
    discriminant,
    is_squarefree_int,
    sym_power_arrays,
)
from .errors import (
    CoprimalityError,
    NonSquarefreeError,
    TableBoundError,
    UnsupportedWeightError,
    WorkBudgetError,
)

_PRIME_CHUNK = 2048
_FACTORED_CHUNK = 8192
_TWIST_CHUNK = 64

# (d/2) as a function of d mod 8
_KRON2 = np.array([0, 1, 0, -1, 0, -1, 0, 1], dtype=np.int64)


@dataclass(frozen=True)
class PrimeSumConfig:
    """Family parameters: radius D, prime cutoff P, family weight w,
    prime weight g, and admissibility conventions."""

    D: int
    P: int
    w: WeightSpec
    g: WeightSpec
    coprime_only: bool = True
    signs: str = "both"

    def __post_init__(self):
        if self.D < 1 or self.P < 2:
            raise ValueError("need D >= 1 and P >= 2")
        if self.signs not in ("both", "positive"):
            raise ValueError(f"signs must be 'both' or 'positive', got {self.signs!r}")
        if self.w.kind == "gaussian2d":
            raise UnsupportedWeightError("family weight must be one-dimensional")
        if not self.w(0.0) > 0:
            raise ValueError("family weight must be positive at 0")


@dataclass
class PrimeSumResult:
    S: float
    normalized: float
    path: str
    path_delta: float
    per_d: Optional[Tuple[np.ndarray, np.ndarray]] = None  # (d values, inner sums)
    timings: Dict[str, float] = field(default_factory=dict)


def admissible_twists(N: int, D: int, coprime_only: bool = True,
                      signs: str = "both") -> np.ndarray:
    """Squarefree twist parameters 0 < |d| <= D, optionally (d, N) = 1."""
    mask = squarefree_sieve(D).mask
    pos = np.nonzero(mask[1:])[0] + 1
    if coprime_only:
        pos = pos[np.gcd(pos, N) == 1]
    if signs == "both":
        return np.concatenate([-pos[::-1], pos]).astype(np.int64)
    return pos.astype(np.int64)


def _inner_coefficients(table: ApTable, P: int, g: WeightSpec) -> Tuple[np.ndarray, np.ndarray]:
    """(primes <= P, a_p log p g(p/P) / sqrt p) from a prepared table."""
    if table.bound < P:
        raise TableBoundError(f"table bound {table.bound} < P={P}")
    k = int(np.searchsorted(table.primes, P, side="right"))
    primes = table.primes[:k]
    pf = primes.astype(np.float64)
    coef = table.ap[:k] * np.log(pf) / np.sqrt(pf) * g(pf / P)
    return primes, coef


def _run_chunks(fn, spans, workers):
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, spans))
    return [fn(s) for s in spans]


# Legendre tables above this prime no longer fit in L2 cache; larger primes
# go through the factored Euler-criterion kernel instead.
_TABLE_LIMIT = 1 << 16


def _factor_matrix(dvals: np.ndarray):
    """Factor each squarefree |d| over the primes up to max|d|.

    Returns (qprimes, dfac, dlen, dneg) in the layout residue_factored_chunk
    expects: dfac[j] indexes into qprimes for the prime factors of |d_j|.
    """
    absd = np.abs(dvals)
    dmax = int(absd.max()) if len(absd) else 1
    spf = spf_sieve(max(dmax, 2))
    qset = {}
    facs = []
    for v in absd:
        n = int(v)
        row = []
        while n > 1:
            q = int(spf[n])
            row.append(qset.setdefault(q, len(qset)))
            n //= q
        facs.append(row)
    qprimes = np.array(sorted(qset, key=qset.get), dtype=np.int64)
    maxk = max((len(r) for r in facs), default=1) or 1
    dfac = np.zeros((len(dvals), maxk), dtype=np.int64)
    dlen = np.zeros(len(dvals), dtype=np.int64)
    for j, row in enumerate(facs):
        dlen[j] = len(row)
        dfac[j, :len(row)] = row
    dneg = (dvals < 0)
    return qprimes, dfac, dlen, dneg


def inner_sums_residue(primes: np.ndarray, coef: np.ndarray, dvals: np.ndarray,
                       workers: int = 1) -> np.ndarray:
    """Per-twist inner sums, prime-major.

    Odd primes small enough for a cache-resident table use the length-p
    Legendre lookup; primes beyond both the table limit and max|d| get
    chi_d(p) assembled from d's factorization via Euler's criterion. p = 2
    is handled by the Kronecker table on d mod 8.
    """
    start = 0
    if len(primes) and primes[0] == 2:
        start = 1
    dmax = int(np.abs(dvals).max()) if len(dvals) else 1
    limit = max(_TABLE_LIMIT, dmax + 1)
    split = int(np.searchsorted(primes, limit, side="right"))
    spans = [(i, min(i + _PRIME_CHUNK, split))
             for i in range(start, split, _PRIME_CHUNK)]

    qprimes = dfac = dlen = dneg = None
    if split < len(primes):
        qprimes, dfac, dlen, dneg = _factor_matrix(dvals)
        spans += [(i, min(i + _FACTORED_CHUNK, len(primes)))
                  for i in range(split, len(primes), _FACTORED_CHUNK)]

    def work(span):
        lo, hi = span
        out = np.zeros(len(dvals), dtype=np.float64)
        if hi <= split:
            _kernels.residue_table_chunk(primes[lo:hi], coef[lo:hi], dvals, out)
        else:
            _kernels.residue_factored_chunk(primes[lo:hi], coef[lo:hi],
                                            qprimes, dfac, dlen, dneg, out)
        return out

    chunks = _run_chunks(work, spans, workers) if spans else [np.zeros(len(dvals))]
    acc = tree_sum_arrays(chunks)
    if start == 1:
        acc += _KRON2[np.mod(dvals, 8)] * coef[0]
    return acc


def inner_sums_twist(primes: np.ndarray, coef: np.ndarray, dvals: np.ndarray,
                     workers: int = 1) -> np.ndarray:
    """Per-twist inner sums, twist-major (direct Kronecker symbols)."""
    out = np.zeros(len(dvals), dtype=np.float64)
    spans = [(i, min(i + _TWIST_CHUNK, len(dvals)))
             for i in range(0, len(dvals), _TWIST_CHUNK)]

    def work(span):
        lo, hi = span
        _kernels.twist_path_chunk(primes, coef, dvals[lo:hi], out[lo:hi])

    _run_chunks(work, spans, workers)
    return out


def prime_sum_S(base: EllipticCurve, table: ApTable, cfg: PrimeSumConfig,
                per_d: bool = False, workers: int = 1,
                cross_check: bool = True) -> PrimeSumResult:
    """S(D;P) = -sum*_{(d,N)=1} w(d/D) sum_{p<=P} chi_d(p) a_p log p g(p/P)/sqrt p.

    Evaluated by the residue-table path, and (when cross_check) re-evaluated
    by the twist-loop path; the two must agree to 1e-9 relative.
    """
    dvals = admissible_twists(base.N, cfg.D, cfg.coprime_only, cfg.signs)
    wts = cfg.w(dvals / cfg.D)
    primes, coef = _inner_coefficients(table, cfg.P, cfg.g)

    timings = {}
    t0 = time.perf_counter()
    inner_r = inner_sums_residue(primes, coef, dvals, workers)
    timings["residue_table"] = time.perf_counter() - t0
    S = -tree_sum(wts * inner_r)

    delta = 0.0
    path = "residue-table"
    if cross_check:
        t0 = time.perf_counter()
        inner_t = inner_sums_twist(primes, coef, dvals, workers)
        timings["twist_loop"] = time.perf_counter() - t0
        S_t = -tree_sum(wts * inner_t)
        delta = abs(S - S_t)
        path = "both"
        if delta >= 1e-9 * (1.0 + abs(S)):
            raise ArithmeticError(
                f"path disagreement: |{S} - {S_t}| = {delta}")
    norm = S / (cfg.D * math.sqrt(cfg.P))
    return PrimeSumResult(S=S, normalized=norm, path=path, path_delta=delta,
                          per_d=(dvals, inner_r) if per_d else None,
                          timings=timings)


def twisted_prime_sum(table: ApTable, m: int, t: float,
                      g: Optional[WeightSpec] = None,
                      P: Optional[float] = None) -> float:
    """sum_{p<=t} (m/p) a_p log p / sqrt p, optionally weighted by g(p/P)."""
    if m == 0:
        raise ValueError("m must be nonzero")
    if t > table.bound:
        raise TableBoundError(f"t={t} exceeds table bound {table.bound}")
    k = int(np.searchsorted(table.primes, math.floor(t), side="right"))
    if k == 0:
        return 0.0
    primes = table.primes[:k]
    chi = np.empty(k, dtype=np.int64)
    _kernels.kron_vec(int(m), primes, chi)
    pf = primes.astype(np.float64)
    terms = chi * table.ap[:k] * np.log(pf) / np.sqrt(pf)
    if g is not None:
        terms = terms * g(pf / float(P if P is not None else t))
    return tree_sum(terms)


def _weighted_sym_sum(table: ApTable, x: float, h: WeightSpec, k: int) -> float:
    pmax = x * h.decay_radius(1e-16)
    if pmax > table.bound:
        raise TableBoundError(
            f"weight support {pmax:.3g} exceeds table bound {table.bound}")
    j = int(np.searchsorted(table.primes, math.floor(pmax), side="right"))
    if j == 0:
        return 0.0
    primes = table.primes[:j].astype(np.float64)
    sk = sym_power_arrays(table, k)[:j]
    return tree_sum(sk * h(primes / x) * np.log(primes))


def sym2_prime_sum(table: ApTable, x: float, h: WeightSpec) -> float:
    """sum_p (alpha_p^2 + beta_p^2) h(p/x) log p; main term -x * Mellin h(1)."""
    return _weighted_sym_sum(table, x, h, 2)


def sym3_prime_sum(table: ApTable, x: float, h: WeightSpec) -> float:
    """sum_p (alpha_p^3 + beta_p^3) h(p/x) log p; pure oscillation check."""
    return _weighted_sym_sum(table, x, h, 3)


@dataclass
class RankEstimate:
    d: int
    r_hat: float
    prime_term: float       # inner_d / (Mg(1/2) sqrt P)
    sym2_term: float        # centered prime-square correction, same units
    sym3_term: float = 0.0

    def decomposition(self) -> float:
        return 0.5 - self.prime_term - self.sym2_term - self.sym3_term


def _sym_correction_terms(table: ApTable, P: float, g: WeightSpec, k: int):
    """Primes, s_k values and weights g(p^k/P) log p for the k-th power term."""
    pmax = (P * g.decay_radius(1e-16)) ** (1.0 / k)
    j = int(np.searchsorted(table.primes, math.floor(pmax), side="right"))
    primes = table.primes[:j]
    pf = primes.astype(np.float64)
    sk = sym_power_arrays(table, k)[:j]
    return primes, sk * g(pf**k / P) * np.log(pf)


def rank_estimator(base: EllipticCurve, table: ApTable, d: int, P: int,
                   g: WeightSpec, include_sym3: bool = False,
                   inner: Optional[float] = None) -> RankEstimate:
    """Explicit-formula rank estimate for the twist by d.

    r_hat = 1/2 - inner_d/(Mg(1/2) sqrt P) - sym2corr_d/(Mg(1/2) sqrt P),
    where sym2corr_d is the prime-square term of the explicit formula
    recentered by its main term -Mg_2(1) sqrt P = -(1/2) Mg(1/2) sqrt P.
    """
    if math.gcd(abs(d), base.N) != 1:
        raise CoprimalityError(f"(d, N) = gcd({d}, {base.N}) != 1")
    if not is_squarefree_int(d):
        raise NonSquarefreeError(f"d={d} is not squarefree")
    mg = mellin(g, 0.5).real
    scale = mg * math.sqrt(P)
    if inner is None:
        primes, coef = _inner_coefficients(table, P, g)
        out = np.empty(1, dtype=np.float64)
        _kernels.twist_path_chunk(primes, coef, np.array([d], dtype=np.int64), out)
        inner = float(out[0])

    p2, t2 = _sym_correction_terms(table, P, g, 2)
    keep = np.mod(d, p2) != 0          # chi_d(p)^2 = 0 exactly when p | d
    k2 = tree_sum(t2[keep])
    sym2corr = k2 + 0.5 * scale

    sym3_term = 0.0
    if include_sym3:
        p3, t3 = _sym_correction_terms(table, P, g, 3)
        chi = np.empty(len(p3), dtype=np.int64)
        _kernels.kron_vec(int(d), p3, chi)
        sym3_term = tree_sum(chi * t3) / scale

    prime_term = inner / scale
    sym2_term = sym2corr / scale
    r_hat = 0.5 - prime_term - sym2_term - sym3_term
    return RankEstimate(d=d, r_hat=r_hat, prime_term=prime_term,
                        sym2_term=sym2_term, sym3_term=sym3_term)


@dataclass
class FamilyRankAggregate:
    average: float
    weight_mass: float
    mellin_half: float
    S: float
    dvals: np.ndarray
    weights: np.ndarray
    r_hat: np.ndarray
    sym2corr: np.ndarray
    sym3_term: np.ndarray
    P: int


def family_rank_aggregate(base: EllipticCurve, table: ApTable,
                          cfg: PrimeSumConfig, include_sym3: bool = False,
                          workers: int = 1) -> FamilyRankAggregate:
    """Per-twist rank estimates across the family, sharing one prime-sum pass.

    Satisfies the exact rearrangement
    Mg(1/2) sum* w (r_hat - 1/2) + P^{-1/2} sum* w sym2corr = P^{-1/2} S(D;P)
    (up to the optional sym3 term), since all pieces reuse the same inner sums.
    """
    res = prime_sum_S(base, table, cfg, per_d=True, workers=workers,
                      cross_check=False)
    dvals, inner = res.per_d
    wts = cfg.w(dvals / cfg.D)
    mg = mellin(cfg.g, 0.5).real
    scale = mg * math.sqrt(cfg.P)

    p2, t2 = _sym_correction_terms(table, cfg.P, cfg.g, 2)
    k2_all = tree_sum(t2)
    # chi_d(p)^2 kills only p | d: subtract those few terms per twist
    k2 = np.full(len(dvals), k2_all)
    for i, p in enumerate(p2):
        hit = np.mod(dvals, int(p)) == 0
        if hit.any():
            k2[hit] -= t2[i]
    sym2corr = k2 + 0.5 * scale

    sym3_term = np.zeros(len(dvals))
    if include_sym3:
        p3, t3 = _sym_correction_terms(table, cfg.P, cfg.g, 3)
        chi = np.empty(len(p3), dtype=np.int64)
        for i, d in enumerate(dvals):
            _kernels.kron_vec(int(d), p3, chi)
            sym3_term[i] = tree_sum(chi * t3) / scale

    r_hat = 0.5 - inner / scale - sym2corr / scale - sym3_term
    W = tree_sum(wts)
    avg = tree_sum(wts * r_hat) / W
    return FamilyRankAggregate(average=avg, weight_mass=W, mellin_half=mg,
                               S=res.S, dvals=dvals, weights=wts, r_hat=r_hat,
                               sym2corr=sym2corr, sym3_term=sym3_term, P=cfg.P)


def family_average_rank(base: EllipticCurve, table: ApTable,
                        cfg: PrimeSumConfig, include_sym3: bool = False,
                        workers: int = 1) -> float:
    """Weighted family average of the explicit-formula rank estimates."""
    return family_rank_aggregate(base, table, cfg, include_sym3, workers).average


def _is_minimal_pair(a: int, b: int) -> bool:
    if a == 0:
        if b == 0:
            return False
        limit = round(abs(b) ** (1.0 / 6)) + 2
        return not any(_small_prime(p) and b % p**6 == 0 for p in range(2, limit))
    limit = round(abs(a) ** 0.25) + 2
    for p in range(2, limit):
        if a % p**4 == 0 and b % p**6 == 0 and _small_prime(p):
            return False
    return True


def _small_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % q for q in range(2, math.isqrt(n) + 1))


def all_curves_prime_sum(A: int, B: int, P: int, w2: WeightSpec, g: WeightSpec,
                         signs: str = "both",
                         work_budget: float = 5e9) -> Tuple[float, float]:
    """-(sum over minimal nonsingular (a,b)) w2(a/A, b/B) * inner prime sum.

    Returns (S, S/(A B sqrt P)). The inner sum runs over odd p <= P with the
    character-sum a_p of each curve; the p = 2 coefficient is not derivable
    from a bare (a, b) pair without minimal-model data, so it is omitted
    uniformly. Pairs with zero discriminant or with p^4 | a and p^6 | b are
    skipped.
    """
    if A < 1 or B < 1:
        raise ValueError("need A, B >= 1")
    if w2.kind != "gaussian2d":
        raise UnsupportedWeightError("all-curves weight must be two-dimensional")
    avals = range(1, A + 1) if signs == "positive" else range(-A, A + 1)
    bvals = range(1, B + 1) if signs == "positive" else range(-B, B + 1)
    npairs = len(avals) * len(bvals)

    from .arith import sieve_primes
    pt = sieve_primes(P)
    odd = pt.primes[pt.primes > 2]
    if npairs * len(odd) > work_budget:
        raise WorkBudgetError(
            f"{npairs} pairs x {len(odd)} primes exceeds budget {work_budget:.3g}")
    pf = odd.astype(np.float64)
    coef = np.log(pf) / np.sqrt(pf) * g(pf / P)
    ap = np.empty(len(odd), dtype=np.int64)

    parts = []
    for a in avals:
        for b in bvals:
            if discriminant(a, b) == 0 or not _is_minimal_pair(a, b):
                continue
            _kernels.ap_char_chunk(a, b, odd, ap)
            inner = tree_sum(ap * coef)
            parts.append(w2.value2(a / A, b / B) * inner)
    S = -tree_sum(np.array(parts)) if parts else 0.0
    return S, S / (A * B * math.sqrt(P))


@dataclass
class IdentityReport:
    lhs: complex
    rhs: complex
    difference: float


def poisson_identity_check(a: int, c: int, p: int, D: float, w: WeightSpec,
                           x: int) -> IdentityReport:
    """Check sum_b w(Lb/D) e(Lbx/p) = (D/L) sum_m w^(D(m/L - x/p)), L = lcm(a^2, c).

    Both sides are truncated where the gaussian tails drop below 1e-16.
    """
    if w.kind != "gaussian":
        raise UnsupportedWeightError("Poisson check requires a gaussian weight")
    L = (a * a * c) // math.gcd(a * a, c)
    radius = w.decay_radius(1e-18)
    bmax = int(D * radius / L) + 2
    b = np.arange(-bmax, bmax + 1)
    lhs = complex(np.sum(w(L * b / D) * np.exp(2j * np.pi * ((L * b * x) % p) / p)))

    # frequency radius where the transform is below 1e-18
    s = w.sigma
    xi_max = math.sqrt(math.log(s * math.sqrt(2 * math.pi) * 1e18) / (2 * math.pi**2 * s * s))
    m_lo = int(math.floor(L * (x / p - xi_max / D))) - 1
    m_hi = int(math.ceil(L * (x / p + xi_max / D))) + 1
    m = np.arange(m_lo, m_hi + 1)
    rhs = complex(D / L * np.sum(fourier_hat(w, D * (m / L - x / p))))
    return IdentityReport(lhs=lhs, rhs=rhs, difference=abs(lhs - rhs))


@dataclass
class GaussSumReport:
    p: int
    epsilon_p: complex
    tau: complex            # sum_x (x/p) e(x/p)
    max_deviation: float
    sampled: Tuple[int, ...]


def gauss_sum_check(p: int, nsamples: int = 10) -> GaussSumReport:
    """Verify (b/p) = (conj(eps_p)/sqrt p) sum_x (x/p) e(bx/p) on sampled b.

    eps_p is 1 for p = 1 mod 4 and i for p = 3 mod 4 (the value the
    quarter-turn factor (1+i)/2 chi_0 + (1-i)/2 chi_1 actually takes).
    """
    if p < 3 or p > 10**4 or not _small_prime(p):
        raise ValueError(f"p={p} must be an odd prime <= 10^4")
    eps_p = 1.0 + 0.0j if p % 4 == 1 else 1.0j
    x = np.arange(p)
    chi = np.array([kronecker(int(t), p) for t in x])
    e = np.exp(2j * np.pi * x / p)
    samples = tuple(range(0, min(p, nsamples)))
    dev = 0.0
    tau = complex(np.sum(chi * e))
    for b in samples:
        total = complex(np.sum(chi * np.exp(2j * np.pi * ((b * x) % p) / p)))
        predicted = np.conj(eps_p) / math.sqrt(p) * total
        dev = max(dev, abs(predicted - kronecker(b, p)))
    return GaussSumReport(p=p, epsilon_p=eps_p, tau=tau, max_deviation=dev,
                          sampled=samples)
