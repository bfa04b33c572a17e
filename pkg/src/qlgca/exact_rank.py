"""Exact rank of integer matrices.

The workhorse is Gaussian elimination over a prime field, run for several
random primes above 2**30. Ranks over F_p never exceed the rational rank and
agree with it unless ``p`` divides a particular nonzero minor, so agreement of
independent primes is taken as the answer; disagreement escalates to
fraction-free (Bareiss) elimination over the integers.
"""

from __future__ import annotations

import logging

import numpy as np
from sympy import nextprime

log = logging.getLogger(__name__)

PRIME_LOW = 1 << 30
PRIME_HIGH = 1 << 31  # keeps (p-1)**2 inside int64


def random_primes(count: int = 2, seed: int = 0) -> list[int]:
    rng = np.random.default_rng(seed)
    primes: list[int] = []
    while len(primes) < count:
        lo = int(rng.integers(PRIME_LOW, PRIME_HIGH - (1 << 20)))
        p = int(nextprime(lo))
        if p not in primes:
            primes.append(p)
    return primes


def strip_zero_lines(a: np.ndarray) -> np.ndarray:
    """Drop all-zero rows and columns; the rank is unchanged."""
    a = np.asarray(a)
    if a.size == 0:
        return a
    return a[np.any(a != 0, axis=1)][:, np.any(a != 0, axis=0)]


def rank_mod_p(a: np.ndarray, p: int) -> int:
    """Rank of an integer matrix over F_p (``p < 2**31``)."""
    if p >= PRIME_HIGH:
        raise ValueError("prime too large for int64 elimination")
    m = np.mod(np.asarray(a, dtype=np.int64), p)
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(m[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            m[[r, piv]] = m[[piv, r]]
        inv = pow(int(m[r, c]), p - 2, p)
        m[r] = (m[r] * inv) % p
        below = r + 1 + np.flatnonzero(m[r + 1:, c])
        if below.size:
            f = m[below, c][:, None]
            m[below] = (m[below] - f * m[r][None, :]) % p
        r += 1
    return r


def rank_bareiss(a) -> int:
    """Exact rank over the rationals by fraction-free elimination on Python ints."""
    m = [[int(v) for v in row] for row in np.asarray(a, dtype=object)]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    r = 0
    prev = 1
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pr = m[r]
        for i in range(r + 1, rows):
            row = m[i]
            f = row[c]
            for j in range(c + 1, cols):
                row[j] = (pr[c] * row[j] - f * pr[j]) // prev
            row[c] = 0
        prev = pr[c]
        r += 1
        if r == rows:
            break
    return r


def rank_float(a: np.ndarray, rtol: float = 1e-9) -> int:
    s = np.linalg.svd(np.asarray(a, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def exact_rank(a: np.ndarray, n_primes: int = 2, seed: int = 0) -> int:
    """Rank of an integer matrix: agreeing modular ranks, Bareiss as arbiter."""
    core = strip_zero_lines(np.asarray(a, dtype=np.int64))
    if core.size == 0:
        return 0
    ranks = [rank_mod_p(core, p) for p in random_primes(n_primes, seed)]
    if len(set(ranks)) == 1:
        return ranks[0]
    log.warning("modular ranks disagree (%s); falling back to Bareiss", ranks)
    return rank_bareiss(core)
