"""Desk-scale toolkit for prime sums, rank estimators, and zero statistics
over quadratic twist families of elliptic curves."""

from .arith import (
    PrimeTable,
    SquarefreeMask,
    WeightSpec,
    fourier_hat,
    kronecker,
    mellin,
    mellin_gk,
    sieve_primes,
    squarefree_sieve,
)
from .curve import (
    ApTable,
    EllipticCurve,
    TwistedCurve,
    ap_bad,
    ap_good,
    build_ap_table,
    conductor_validate,
    discriminant,
    hecke_lambda,
    root_number_coprime,
    root_number_squarefreeN,
    sym_power_sum,
    twist_ap,
)
from .lfun import (
    LValue,
    RankClass,
    ZeroData,
    analytic_rank_class,
    infer_root_number,
    l_prime_center,
    l_value_center,
    load_zeros,
)
from .primesum import (
    PrimeSumConfig,
    PrimeSumResult,
    RankEstimate,
    all_curves_prime_sum,
    family_average_rank,
    gauss_sum_check,
    poisson_identity_check,
    prime_sum_S,
    rank_estimator,
    sym2_prime_sum,
    sym3_prime_sum,
    twisted_prime_sum,
)
from .stats import (
    GrowthFit,
    TStatistic,
    multiplicity_census,
    omega_moments,
    omega_rank_bound,
    rank_distribution,
    root_number_sum,
    squarefree_char_sum,
    t_statistic,
    t_variance_scaling,
)

__version__ = "0.1.0"
