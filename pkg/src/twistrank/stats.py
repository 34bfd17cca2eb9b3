"""Family-level statistics: root-number equidistribution, rank tallies,
squarefree character-sum main terms, omega moments, and zero-sum
(T-statistic) mean/variance diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .arith import WeightSpec, kronecker, omega_sieve, squarefree_sieve
from .curve import EllipticCurve, root_number_squarefreeN
from .errors import CoverageError, UndefinedInputError
from .lfun import RankClass, ZeroData


@dataclass(frozen=True)
class GrowthFit:
    """Least-squares power-law fit |S(X)| ~ c X^beta on log-log axes."""

    X: np.ndarray
    values: np.ndarray
    beta: float
    constant: float
    residual: float


def _fit_power_law(X, values) -> GrowthFit:
    X = np.asarray(X, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    keep = np.abs(values) > 0
    if not keep.any():
        # identically-zero partial sums: the flat fit, not an error
        return GrowthFit(X=X, values=values, beta=0.0, constant=0.0,
                         residual=0.0)
    lx, ly = np.log(X[keep]), np.log(np.abs(values[keep]))
    if lx.size < 4:
        raise UndefinedInputError(
            f"growth fit needs >= 4 nonzero sample points, have {lx.size}")
    beta, logc = np.polyfit(lx, ly, 1)
    resid = float(np.sqrt(np.mean((ly - (beta * lx + logc)) ** 2)))
    return GrowthFit(X=X, values=values, beta=float(beta),
                     constant=float(math.exp(logc)), residual=resid)


def root_number_sum(curve: EllipticCurve, D_grid: Sequence[float],
                    mode: str = "coprime") -> GrowthFit:
    """Sharp-cutoff partial sums of eps(E_d) over admissible |d| <= D.

    mode "coprime" restricts to (d, N) = 1; "all_squarefree" uses the
    squarefree-conductor product formula at every squarefree d.
    """
    if mode not in ("coprime", "all_squarefree"):
        raise ValueError(f"unknown mode {mode!r}")
    Dmax = int(max(D_grid))
    mask = squarefree_sieve(Dmax).mask
    partial = _partial_snapshots(curve, D_grid, mask, mode)
    return _fit_power_law(np.asarray(D_grid, dtype=float), partial)


def _partial_snapshots(curve, D_grid, mask, mode):
    # precompute the bad-prime data once; the per-d formulas then reduce to
    # one Kronecker symbol and a gcd
    if mode == "all_squarefree":
        # validates N squarefree and caches a_q for every q | N
        root_number_squarefreeN(curve, 1)
        from .curve import ap_bad
        aq = {q: ap_bad(curve, q)[0] for q in _prime_divisors(curve.N)}

    def eps_of(d):
        if mode == "coprime":
            return kronecker(d, -curve.N) * curve.eps
        g = math.gcd(abs(d), curve.N)
        out = kronecker(d, -(curve.N // g)) * curve.eps
        for q in _prime_divisors(g):
            out *= -aq[q]
        return out

    order = np.argsort(np.asarray(D_grid, dtype=float))
    out = np.zeros(len(D_grid))
    total = 0
    prev = 0
    for idx in order:
        D = int(D_grid[idx])
        for n in range(prev + 1, D + 1):
            if not mask[n]:
                continue
            if mode == "coprime" and math.gcd(n, curve.N) != 1:
                continue
            total += eps_of(n) + eps_of(-n)
        out[idx] = total
        prev = D
    return out


@dataclass(frozen=True)
class RankTally:
    counts: Dict[int, int]          # 0, 1, 2 (2 means ">= 2")
    proportions: Dict[int, float]
    total: int
    low_confidence: int


def rank_distribution(classes: Iterable[RankClass]) -> RankTally:
    """Tally rank classes over a family of classified twists."""
    counts = {0: 0, 1: 0, 2: 0}
    low = 0
    total = 0
    for rc in classes:
        counts[rc.rank] += 1
        low += rc.low_confidence
        total += 1
    if total == 0:
        raise UndefinedInputError("rank distribution of an empty family")
    props = {k: v / total for k, v in counts.items()}
    return RankTally(counts=counts, proportions=props, total=total,
                     low_confidence=low)


@dataclass(frozen=True)
class CharSumReport:
    n: int
    D: int
    direct: float
    main_term: float
    residual: float
    growth: Optional[GrowthFit] = None


def _char_sum_direct(curve: EllipticCurve, n: int, D: int, w: WeightSpec) -> float:
    mask = squarefree_sieve(D).mask
    total = 0.0
    for m in range(1, D + 1):
        if not mask[m] or math.gcd(m, curve.N) != 1:
            continue
        wt = w(m / D)
        total += wt * (kronecker(m, n) + kronecker(-m, n))
    return total


def _char_sum_main(curve: EllipticCurve, n: int, D: int, w: WeightSpec) -> float:
    root = math.isqrt(n)
    kappa = 1.0 if root * root == n else 0.0
    if kappa == 0.0:
        return 0.0
    zeta2 = math.pi**2 / 6.0
    main = D / zeta2 * w.integral()
    for p in _prime_divisors(curve.N):
        main /= 1.0 + kronecker(p, n) / p
    for p in _prime_divisors(n):
        main /= 1.0 + 1.0 / p
    return kappa * main


def _prime_divisors(n: int) -> List[int]:
    out = []
    m = abs(n)
    p = 2
    while p * p <= m:
        if m % p == 0:
            out.append(p)
            while m % p == 0:
                m //= p
        p += 1 if p == 2 else 2
    if m > 1:
        out.append(m)
    return out


def squarefree_char_sum(curve: EllipticCurve, n: int, D: int, w: WeightSpec,
                        D_grid: Optional[Sequence[int]] = None) -> CharSumReport:
    """sum* w(d/D) (d/n) over (d, N) = 1 versus its square-detecting main term
    kappa(n) (D / zeta(2)) int w prod_{p|N} (1 + (p/n)/p)^-1 prod_{p|n} (1 + 1/p)^-1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    direct = _char_sum_direct(curve, n, D, w)
    main = _char_sum_main(curve, n, D, w)
    growth = None
    if D_grid is not None:
        resids = [_char_sum_direct(curve, n, Di, w) - _char_sum_main(curve, n, Di, w)
                  for Di in D_grid]
        growth = _fit_power_law(np.asarray(D_grid, dtype=float), np.asarray(resids))
    return CharSumReport(n=n, D=D, direct=direct, main_term=main,
                         residual=direct - main, growth=growth)


@dataclass(frozen=True)
class OmegaMomentReport:
    D: int
    q: int
    moment: int
    bound: float
    ratio: float


def omega_moments(D: int, q: int) -> OmegaMomentReport:
    """Exact sum_{d<=D} omega(d)^q against the envelope 2 D (log log D)^q."""
    if q < 1 or D < 16:
        raise ValueError("need q >= 1 and D >= 16")
    om = omega_sieve(D).astype(np.int64)
    moment = int(np.sum(om[1:] ** q))
    bound = 2.0 * D * math.log(math.log(D)) ** q
    return OmegaMomentReport(D=D, q=q, moment=moment, bound=bound,
                             ratio=moment / bound)


def omega_rank_bound(d: int, C_E: int) -> int:
    """Certified rank bound 18 omega(|d|) + C_E for squarefree d."""
    from .curve import is_squarefree_int
    if d == 0 or not is_squarefree_int(d):
        raise UndefinedInputError(f"d={d} must be nonzero squarefree")
    return 18 * len(_prime_divisors(d)) + C_E


@dataclass(frozen=True)
class TStatistic:
    D: int
    y_grid: np.ndarray
    values: np.ndarray
    mean: float
    variance: float


def _gather_zero_terms(zeros: ZeroData, N: int, D: int, w: WeightSpec,
                       coprime_only: bool = True):
    from .primesum import admissible_twists
    dvals = admissible_twists(N, D, coprime_only=coprime_only)
    missing = [int(d) for d in dvals if int(d) not in zeros.twists]
    if missing:
        raise CoverageError(
            f"zero data missing for {len(missing)} twists, e.g. {missing[:8]}")
    gam: List[np.ndarray] = []
    amp: List[np.ndarray] = []
    for d in dvals:
        g, m = zeros.twists[int(d)]
        if len(g) == 0:
            continue
        rho = 0.5 + 1j * g
        gam.append(g)
        amp.append(w(d / D) * m / (rho * (rho + 1.0)))
    if not gam:
        return np.empty(0), np.empty(0, dtype=complex)
    return np.concatenate(gam), np.concatenate(amp)


def t_statistic(zeros: ZeroData, D: int, w: WeightSpec, y_grid: np.ndarray,
                N: int = 1, coprime_only: bool = True) -> TStatistic:
    """T(D;y) = sum* w(d/D) sum_{gamma_d != 0} e^{i y gamma} / (rho (rho+1)),
    folded over conjugate pairs so each stored gamma > 0 contributes twice
    its real part. Every admissible twist must appear in the zero data."""
    y_grid = np.asarray(y_grid, dtype=np.float64)
    if y_grid.size and np.any(np.diff(y_grid) <= 0):
        raise ValueError("y grid must be strictly increasing")
    gam, amp = _gather_zero_terms(zeros, N, D, w, coprime_only)
    if gam.size == 0:
        vals = np.zeros(len(y_grid))
    else:
        phases = np.exp(1j * np.outer(y_grid, gam))
        vals = 2.0 * np.real(phases @ amp)
    mean = float(vals.mean()) if len(vals) else 0.0
    var = float(vals.var()) if len(vals) else 0.0
    return TStatistic(D=D, y_grid=y_grid, values=vals, mean=mean, variance=var)


@dataclass(frozen=True)
class VarianceScalingReport:
    D_grid: Tuple[int, ...]
    variances: Tuple[float, ...]
    constant: float              # fitted c in variance = c D log D
    residual: float              # rms relative misfit


def t_variance_scaling(zeros: ZeroData, D_grid: Sequence[int], w: WeightSpec,
                       y_grid: np.ndarray, N: int = 1) -> VarianceScalingReport:
    """Empirical variance of T(D;y) per D, fitted against D log D."""
    variances = [t_statistic(zeros, D, w, y_grid, N=N).variance for D in D_grid]
    x = np.array([D * math.log(D) for D in D_grid])
    v = np.array(variances)
    c = float(np.dot(v, x) / np.dot(x, x))
    resid = float(np.sqrt(np.mean(((v - c * x) / np.maximum(v, 1e-300)) ** 2)))
    return VarianceScalingReport(D_grid=tuple(int(D) for D in D_grid),
                                 variances=tuple(variances),
                                 constant=c, residual=resid)


@dataclass(frozen=True)
class MultiplicityCensus:
    max_multiplicity: int
    clusters: Tuple[Tuple[float, int, Tuple[int, ...]], ...]  # (gamma, mult, twists)
    tol: float


def multiplicity_census(zeros: ZeroData, tol: float = 1e-6) -> MultiplicityCensus:
    """Cluster ordinates across twists within tol; report total multiplicity
    per cluster and the maximum over all clusters."""
    rows = []
    for d, (gam, mult) in zeros.twists.items():
        for g, m in zip(gam, mult):
            rows.append((float(g), int(m), int(d)))
    if not rows:
        return MultiplicityCensus(max_multiplicity=0, clusters=(), tol=tol)
    rows.sort()
    clusters = []
    cur = [rows[0]]
    for row in rows[1:]:
        if row[0] - cur[-1][0] <= tol:
            cur.append(row)
        else:
            clusters.append(cur)
            cur = [row]
    clusters.append(cur)
    summary = []
    max_mult = 0
    for cl in clusters:
        mult = sum(m for _, m, _ in cl)
        max_mult = max(max_mult, mult)
        if mult > 1:
            summary.append((cl[0][0], mult, tuple(sorted({d for _, _, d in cl}))))
    return MultiplicityCensus(max_multiplicity=max_mult,
                              clusters=tuple(summary), tol=tol)
