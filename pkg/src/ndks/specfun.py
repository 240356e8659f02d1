"""Special functions used by the closed-form expressions.

Laguerre families are evaluated with their three-term recurrences, which stay
accurate at the moderate orders and arguments (x up to a few tens) needed by
phase-space grids. All functions accept numpy arrays for the real/complex
argument and broadcast over it.
"""

import math

import numpy as np
from scipy.special import gammaln

from ndks.errors import NonConvergence

HYP1F1_SAFE_RADIUS = 50.0
HYP1F1_MAX_TERMS = 1000
HYP1F1_REL_TOL = 1e-16


def log_factorial(n):
    """Return ln(n!) for a non-negative integer (or integer array)."""
    if np.isscalar(n):
        if n < 0:
            raise ValueError(f"log_factorial needs n >= 0, got {n}")
        return math.lgamma(n + 1)
    n = np.asarray(n)
    if np.any(n < 0):
        raise ValueError("log_factorial needs n >= 0")
    return gammaln(n + 1.0)


def laguerre(p: int, x):
    """Laguerre polynomial L_p(x)."""
    return assoc_laguerre(p, 0, x)


def assoc_laguerre(n: int, m: int, x):
    """Associated Laguerre polynomial L_n^m(x) for integers n, m >= 0.

    Uses (k+1) L_{k+1} = (2k+m+1-x) L_k - (k+m) L_{k-1}.
    """
    if n < 0 or m < 0:
        raise ValueError(f"assoc_laguerre needs n, m >= 0, got n={n}, m={m}")
    scalar = np.isscalar(x)
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return float(prev) if scalar else prev
    cur = 1.0 + m - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + m + 1 - x) * cur - (k + m) * prev) / (k + 1)
    return float(cur) if scalar else cur


def assoc_laguerre_table(nmax: int, m: int, x) -> np.ndarray:
    """All of L_0^m(x) .. L_nmax^m(x), stacked along the first axis."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = 1.0 + m - x
    for k in range(1, nmax):
        out[k + 1] = ((2 * k + m + 1 - x) * out[k] - (k + m) * out[k - 1]) / (k + 1)
    return out


def hyp1f1(a: int, b: int, z, *, max_terms: int = HYP1F1_MAX_TERMS,
           safe_radius: float = HYP1F1_SAFE_RADIUS) -> complex:
    """Confluent hypergeometric function 1F1(a; b; z) for integer a, b >= 1.

    Plain power series, stopped once a term drops below 1e-16 of the running
    sum. Only small |z| is expected (|z| = |alpha|^2 in practice).

    Raises
    ------
    NonConvergence
        If ``max_terms`` terms are summed without meeting the stopping rule.
    """
    if a < 1 or b < 1:
        raise ValueError(f"hyp1f1 supports integer a, b >= 1, got a={a}, b={b}")
    z = complex(z)
    if abs(z) > safe_radius:
        raise ValueError(f"|z| = {abs(z):.3g} exceeds the safe radius {safe_radius}")
    term = 1.0 + 0.0j
    total = term
    for k in range(max_terms):
        term *= (a + k) * z / ((b + k) * (k + 1))
        total += term
        if abs(term) < HYP1F1_REL_TOL * abs(total):
            return total
        if term == 0:
            return total
    raise NonConvergence(
        f"hyp1f1({a}, {b}, {z}) did not converge in {max_terms} terms"
    )

