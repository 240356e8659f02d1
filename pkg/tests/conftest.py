"""Extended-precision oracles shared by the test modules.

Everything here is computed with mpmath or exact integers and never touches
the package's own special functions.
"""

import mpmath as mp
import numpy as np
import pytest

mp.mp.dps = 50


def mp_displacement(n: int, m: int, beta) -> complex:
    """<n|D(beta)|m> from the finite double sum of the normal-ordered form.

    D = e^{-|b|^2/2} e^{b a^dag} e^{-b* a}, so
    <n|D|m> = e^{-|b|^2/2} sum_k (-b*)^(m-k) b^(n-k) sqrt(n! m!) / (k! (m-k)! (n-k)!).
    """
    b = mp.mpc(complex(beta))
    bc = mp.conj(b)
    total = mp.mpc(0)
    for k in range(min(n, m) + 1):
        total += ((-bc) ** (m - k) * b ** (n - k)
                  / (mp.factorial(k) * mp.factorial(m - k) * mp.factorial(n - k)))
    val = mp.exp(-abs(b) ** 2 / 2) * mp.sqrt(mp.factorial(n) * mp.factorial(m)) * total
    return complex(val)


def mp_ndks_amplitude(n: int, alpha, beta, gamma: float, p: int, terms: int = 160) -> complex:
    """<n|D(beta) U_K(gamma)|alpha^p> by direct summation at 50 digits."""
    a = mp.mpc(complex(alpha))
    x = abs(a) ** 2
    norm = mp.sqrt(mp.factorial(p) * mp.laguerre(p, 0, -x))
    total = mp.mpc(0)
    for m in range(terms):
        k = m + p
        c = (mp.exp(-x / 2) * a**m * mp.sqrt(mp.factorial(k)) / mp.factorial(m) / norm
             * mp.expj(mp.mpf(gamma) / 2 * k * (k - 1)))
        total += c * mp.mpc(mp_displacement(n, k, beta))
    return complex(total)


def mp_displaced_state(amps, beta, levels: int):
    """<l|D(beta)|psi> for l < levels at 50 digits.

    With the normal-ordered sum, <l|D|psi> = e^{-|b|^2/2} sqrt(l!) sum_k
    b^(l-k)/((l-k)! k!) R_k where R_k = sum_m psi_m sqrt(m!) (-b*)^(m-k)/(m-k)!.
    """
    b = mp.mpc(complex(beta))
    w = -mp.conj(b)
    dim = len(amps)
    top = max(dim, levels)
    fact = [mp.factorial(j) for j in range(top)]
    pw_b = [b**j / fact[j] for j in range(top)]
    pw_w = [w**j / fact[j] for j in range(dim)]
    psi = [mp.mpc(complex(c)) * mp.sqrt(fact[m]) for m, c in enumerate(amps)]
    r = [mp.fsum(psi[m] * pw_w[m - k] for m in range(k, dim)) for k in range(dim)]
    pref = mp.exp(-abs(b) ** 2 / 2)
    out = []
    for l in range(levels):
        s = mp.fsum(pw_b[l - k] * r[k] / fact[k] for k in range(min(l, dim - 1) + 1))
        out.append(pref * mp.sqrt(fact[l]) * s)
    return out


def mp_wigner(amps, zeta, levels: int) -> float:
    """(2/pi) sum_l (-1)^l |<l|D(-zeta)|psi>|^2 at 50 digits."""
    v = mp_displaced_state(amps, -zeta, levels)
    return float(2 / mp.pi * mp.fsum((-1) ** l * abs(c) ** 2 for l, c in enumerate(v)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
