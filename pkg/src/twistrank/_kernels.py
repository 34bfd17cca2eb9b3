"""Compiled inner loops (numba).

All kernels release the GIL so chunked callers can run them on a thread
pool; each call writes only to its own output slots, and callers combine
chunk results with the deterministic tree reduction in `_reduce`.

Modular reductions in the hot loops are conditional subtractions written
branchlessly (`v -= p * (v >= p)`): every operand stays below 2p, and the
predicate is data-dependent enough that a real branch would mispredict
half the time.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit("i8(i8, i8)", cache=True, nogil=True)
def kron64(d, n):
    """Kronecker symbol (d/n) on 64-bit integers (not both zero)."""
    if n == 0:
        if d == 1 or d == -1:
            return 1
        return 0
    sign = 1
    if n < 0:
        n = -n
        if d < 0:
            sign = -1
    while n % 2 == 0:
        n //= 2
        if d % 2 == 0:
            return 0
        r = d % 8
        if r == 3 or r == 5:
            sign = -sign
    d %= n
    while d != 0:
        while d % 2 == 0:
            d //= 2
            r = n % 8
            if r == 3 or r == 5:
                sign = -sign
        t = d
        d = n
        n = t
        if d % 4 == 3 and n % 4 == 3:
            sign = -sign
        d %= n
    if n == 1:
        return sign
    return 0


@njit(cache=True, nogil=True)
def _fill_chi(chi, p):
    """Legendre-symbol table mod an odd prime p: chi[r] = (r/p).

    Squares are enumerated incrementally ((y+1)^2 - y^2 = 2y+1) so the
    whole build is additions and conditional subtractions, no division.
    """
    chi[:p] = -1
    chi[0] = 0
    sq = 0
    step = 1
    for _ in range((p - 1) // 2):
        sq += step
        sq -= p * (sq >= p)
        step += 2
        step -= p * (step >= p)
        chi[sq] = 1


@njit(cache=True, nogil=True)
def ap_char_chunk(a, b, primes, out):
    """a_p = -sum_x ((x^3+ax+b)/p) for each odd prime in `primes`.

    The cubic is evaluated by forward differences. At good primes this is
    the Frobenius trace; at odd primes where the model degenerates it
    yields the standard extended coefficient in {-1, 0, 1}.
    """
    maxp = primes[-1]
    chi = np.empty(maxp, dtype=np.int8)
    for i in range(primes.shape[0]):
        p = primes[i]
        _fill_chi(chi, p)
        am = a % p
        bm = b % p
        acc = 0
        if p <= 389:
            # small primes: direct evaluation (the strided chains below
            # need their constant increment 384 to stay under p)
            for x in range(p):
                acc += chi[(((x * x) % p * x) % p + (am * x) % p + bm) % p]
            out[i] = -acc
            continue
        # Four interleaved difference chains over x = 4t + r break the
        # serial dependency on the table gather. With stride 4 the
        # differences of f(x) = x^3 + ax + b are D1(x) = 12x^2+48x+64+4a,
        # D2(x) = 96x+384, D3 = 384.
        f0 = bm
        f1 = (1 + am + bm) % p
        f2 = (8 + 2 * am + bm) % p
        f3 = (27 + 3 * am + bm) % p
        e0 = (64 + 4 * am) % p
        e1 = (124 + 4 * am) % p
        e2 = (208 + 4 * am) % p
        e3 = (316 + 4 * am) % p
        g0 = 384 % p
        g1 = 480 % p
        g2 = 576 % p
        g3 = 672 % p
        n4 = p // 4
        for _ in range(n4):
            acc += chi[f0] + chi[f1] + chi[f2] + chi[f3]
            f0 += e0
            f0 -= p * (f0 >= p)
            f1 += e1
            f1 -= p * (f1 >= p)
            f2 += e2
            f2 -= p * (f2 >= p)
            f3 += e3
            f3 -= p * (f3 >= p)
            e0 += g0
            e0 -= p * (e0 >= p)
            e1 += g1
            e1 -= p * (e1 >= p)
            e2 += g2
            e2 -= p * (e2 >= p)
            e3 += g3
            e3 -= p * (e3 >= p)
            g0 += 384
            g0 -= p * (g0 >= p)
            g1 += 384
            g1 -= p * (g1 >= p)
            g2 += 384
            g2 -= p * (g2 >= p)
            g3 += 384
            g3 -= p * (g3 >= p)
        for x in range(4 * n4, p):
            acc += chi[(((x * x) % p * x) % p + (am * x) % p + bm) % p]
        out[i] = -acc


@njit(cache=True, nogil=True)
def residue_table_chunk(primes, coef, dvals, out):
    """Per-twist inner-sum accumulation, prime-major with residue tables.

    For each odd prime p, builds the length-p Legendre table once and adds
    chi[d mod p] * coef[p] into every twist's slot. `out` must be zeroed
    by the caller; chunking over primes keeps tables cache-resident, so
    callers should route primes too large for that to the factored path.
    """
    maxp = primes[-1]
    chi = np.empty(maxp, dtype=np.int8)
    nd = dvals.shape[0]
    for i in range(primes.shape[0]):
        p = primes[i]
        c = coef[i]
        if c == 0.0:
            continue
        _fill_chi(chi, p)
        for j in range(nd):
            s = chi[dvals[j] % p]
            if s == 1:
                out[j] += c
            elif s == -1:
                out[j] -= c
    return out


@njit(cache=True, nogil=True)
def residue_factored_chunk(primes, coef, qprimes, dfac, dlen, dneg, out):
    """Prime-major accumulation for primes p larger than every |d|.

    chi_d(p) is assembled from the factorization of d: Euler's criterion
    gives (q/p) for each base prime q (one modular exponentiation), the
    symbol of a squarefree d is the product over its prime factors, and
    (-1/p) depends on p mod 4 only. dfac[j] holds indices into qprimes
    for twist j, dlen[j] the factor count, dneg[j] the sign of d.
    """
    nq = qprimes.shape[0]
    chiq = np.empty(nq, dtype=np.int8)
    for i in range(primes.shape[0]):
        p = primes[i]
        c = coef[i]
        if c == 0.0:
            continue
        m = np.uint64(p)
        for t in range(nq):
            e = (p - 1) // 2
            base = np.uint64(qprimes[t])     # qprimes[t] < p always
            r = np.uint64(1)
            while e:
                if e & 1:
                    r = (r * base) % m
                base = (base * base) % m
                e >>= 1
            chiq[t] = 1 if r == np.uint64(1) else -1
        chi_m1 = 1 if p % 4 == 1 else -1
        for j in range(dfac.shape[0]):
            s = 1
            for t in range(dlen[j]):
                s *= chiq[dfac[j, t]]
            if dneg[j]:
                s *= chi_m1
            if s == 1:
                out[j] += c
            else:
                out[j] -= c
    return out


@njit(cache=True, nogil=True)
def twist_path_chunk(primes, coef, dvals, out):
    """Per-twist inner sums, twist-major with direct Kronecker symbols."""
    for j in range(dvals.shape[0]):
        d = dvals[j]
        s = 0.0
        for i in range(primes.shape[0]):
            k = kron64(d, primes[i])
            if k == 1:
                s += coef[i]
            elif k == -1:
                s -= coef[i]
        out[j] = s
    return out


@njit(cache=True, nogil=True)
def kron_vec(d, nvals, out):
    """out[i] = (d / nvals[i])."""
    for i in range(nvals.shape[0]):
        out[i] = kron64(d, nvals[i])
    return out


@njit(cache=True, nogil=True)
def hecke_an(M, spf, app, isbad):
    """Integer Hecke coefficients a_1..a_M from prime data.

    app[p] holds a_p at primes p <= M; isbad[p] marks primes where the
    Euler factor is degree one (a_{p^k} = a_p^k). spf is a smallest-prime-
    factor table. Values stay integer-exact in float64 at this scale.
    """
    a = np.zeros(M + 1, dtype=np.float64)
    a[1] = 1.0
    for n in range(2, M + 1):
        p = spf[n]
        m = n // p
        if m % p == 0 and not isbad[p]:
            a[n] = app[p] * a[m] - p * a[m // p]
        else:
            a[n] = app[p] * a[m]
    return a
