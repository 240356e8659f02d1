"""Truncated Fock-space states and operators.

States are plain 1-D complex arrays (``amps[n] = <n|psi>``) and operators are
dense 2-D complex arrays indexed by photon number. Builders return read-only
arrays so cached values can be shared safely.
"""

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from ndks.errors import CutoffTooSmall, NonConvergence
from ndks.specfun import assoc_laguerre, assoc_laguerre_table, laguerre, log_factorial

TAIL_TOL = 1e-9
SERIES_REL_WEIGHT = 1e-14
MAX_SERIES_TERMS = 5000
MAX_CUTOFF = 512

ROUTES = ("closed_form", "operator_oracle")


@dataclass(frozen=True)
class NdksParams:
    """Parameters of D(beta) U_K(gamma) |alpha^p> plus the Fock cutoff.

    Defaults are alpha=1, beta=2, gamma=0.05, p=0, the lightest of the
    reference parameter points.
    """

    alpha: complex = 1.0
    beta: complex = 2.0
    gamma: float = 0.05
    p: int = 0
    cutoff: int = 60

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        object.__setattr__(self, "gamma", float(self.gamma))
        if not all(map(math.isfinite, (self.alpha.real, self.alpha.imag,
                                       self.beta.real, self.beta.imag))):
            raise ValueError("alpha and beta must be finite")
        if not math.isfinite(self.gamma):
            raise ValueError("gamma must be finite")
        if int(self.p) != self.p or self.p < 0:
            raise ValueError(f"p must be a non-negative integer, got {self.p}")
        if int(self.cutoff) != self.cutoff or self.cutoff < self.p + 2:
            raise ValueError(f"cutoff must be an integer >= p + 2, got {self.cutoff}")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "cutoff", int(self.cutoff))

    def with_cutoff(self, cutoff: int) -> "NdksParams":
        return replace(self, cutoff=cutoff)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def displacement_guard(beta: complex) -> int:
    """Smallest dimension accepted for a truncated D(beta) matrix."""
    b = abs(beta)
    return math.ceil(b * b + 4 * b + 10)


def oracle_padding(beta: complex, dim: int) -> int:
    """Extra levels used when exponentiating the truncated D(beta) generator.

    The truncated exponential is only exact well below its edge, so it is
    computed in ``dim + padding`` levels and cropped.
    """
    b = abs(beta)
    return math.ceil(b * b + 3 * b * math.sqrt(dim) + 10)


def interior_size(beta: complex, dim: int, tol: float = 1e-12) -> int:
    """Number of leading columns of a truncated D(beta) that keep their norm.

    Column m of the exact operator is the displaced number state D(beta)|m>;
    it counts as interior while its probability above ``dim`` stays below
    ``tol``.
    """
    beta = complex(beta)
    extra = oracle_padding(beta, dim)
    block = _displacement_block(beta, dim + extra, dim)
    leak = np.sum(np.abs(block[dim:]) ** 2, axis=0)
    bad = np.nonzero(leak > tol)[0]
    return int(bad[0]) if len(bad) else dim


def ladder_matrices(dim: int):
    """Annihilation, creation and number matrices of size ``dim``."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    adag = a.conj().T.copy()
    num = np.diag(np.arange(dim, dtype=float)).astype(complex)
    return _frozen(a), _frozen(adag), _frozen(num)


def kerr_phases(gamma: float, n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    return np.exp(0.5j * gamma * n * (n - 1))


def kerr_matrix(gamma: float, dim: int) -> np.ndarray:
    """Diagonal Kerr evolution exp(i gamma/2 N(N-1)) truncated to ``dim``."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return _frozen(np.diag(kerr_phases(gamma, np.arange(dim))))


def _pow_log_abs(w, k: int):
    """k * ln|w| with the k == 0 case exact even at w == 0."""
    if k == 0:
        return np.zeros(np.shape(w))
    with np.errstate(divide="ignore"):
        return k * np.log(np.abs(w))


def displacement_element(n: int, m: int, beta):
    """<n|D(beta)|m> from the associated-Laguerre formula.

    ``beta`` may be an array; the result broadcasts over it. Factorial ratios
    and powers of |beta| are combined in log space before exponentiating.
    """
    if n < 0 or m < 0:
        raise ValueError("Fock indices must be non-negative")
    scalar = np.isscalar(beta)
    beta = np.asarray(beta, dtype=complex)
    x = np.abs(beta) ** 2
    if n >= m:
        k, w, lo, hi = n - m, beta, m, n
    else:
        k, w, lo, hi = m - n, -np.conj(beta), n, m
    lag = assoc_laguerre(lo, k, x)
    logmag = -0.5 * x + 0.5 * (log_factorial(lo) - log_factorial(hi)) + _pow_log_abs(w, k)
    val = np.exp(logmag) * np.exp(1j * k * np.angle(w)) * lag
    return complex(val) if scalar else val


@lru_cache(maxsize=64)
def _displacement_block(beta: complex, nrows: int, ncols: int) -> np.ndarray:
    """Rows 0..nrows-1, columns 0..ncols-1 of D(beta), filled diagonal by diagonal."""
    x = abs(beta) ** 2
    out = np.zeros((nrows, ncols), dtype=complex)
    lf = log_factorial(np.arange(max(nrows, ncols)))
    # n - m = k >= 0
    for k in range(nrows):
        count = min(ncols, nrows - k)
        if count <= 0:
            break
        m = np.arange(count)
        lag = assoc_laguerre_table(count - 1, k, x)
        logmag = -0.5 * x + 0.5 * (lf[m] - lf[m + k]) + _pow_log_abs(beta, k)
        out[m + k, m] = np.exp(logmag) * np.exp(1j * k * np.angle(beta)) * lag
    # m - n = k > 0
    w = -np.conj(beta)
    for k in range(1, ncols):
        count = min(nrows, ncols - k)
        if count <= 0:
            break
        n = np.arange(count)
        lag = assoc_laguerre_table(count - 1, k, x)
        logmag = -0.5 * x + 0.5 * (lf[n] - lf[n + k]) + _pow_log_abs(w, k)
        out[n, n + k] = np.exp(logmag) * np.exp(1j * k * np.angle(w)) * lag
    return _frozen(out)


def displacement_matrix(beta: complex, dim: int, route: str = "closed_form") -> np.ndarray:
    """Truncated D(beta) = exp(beta a^dag - beta^* a).

    ``closed_form`` fills entries from :func:`displacement_element`;
    ``exponential_oracle`` exponentiates the generator (Pade
    scaling-and-squaring) in a padded space and crops to ``dim``.

    Raises
    ------
    CutoffTooSmall
        If ``dim < |beta|^2 + 4|beta| + 10``.
    """
    beta = complex(beta)
    need = displacement_guard(beta)
    if dim < need:
        raise CutoffTooSmall(f"D({beta}) needs dim >= {need}, got {dim}")
    if route == "closed_form":
        return _displacement_block(beta, dim, dim)
    if route == "exponential_oracle":
        big = dim + oracle_padding(beta, dim)
        a, adag, _ = ladder_matrices(big)
        full = expm(beta * adag - np.conj(beta) * a)
        return _frozen(np.ascontiguousarray(full[:dim, :dim]))
    raise ValueError(f"unknown route {route!r}")


def _finalize(amps: np.ndarray, tail_tol: float, what: str) -> np.ndarray:
    mass = float(np.vdot(amps, amps).real)
    if 1.0 - mass > tail_tol:
        raise CutoffTooSmall(
            f"{what}: truncation to {len(amps)} levels loses {1.0 - mass:.3e} "
            f"of the probability (tolerance {tail_tol:.1e})"
        )
    return _frozen(amps / math.sqrt(mass))


def _pacs_raw(alpha: complex, p: int, dim: int) -> np.ndarray:
    amps = np.zeros(dim, dtype=complex)
    if dim <= p:
        return amps
    x = abs(alpha) ** 2
    lognorm = 0.5 * (log_factorial(p) + math.log(laguerre(p, -x)))
    if alpha == 0:
        amps[p] = math.exp(-lognorm + 0.5 * log_factorial(p))
        return amps
    m = np.arange(dim - p)
    logmag = (-0.5 * x + m * math.log(abs(alpha)) + 0.5 * log_factorial(m + p)
              - log_factorial(m) - lognorm)
    amps[p:] = np.exp(logmag + 1j * m * np.angle(alpha))
    return amps


def build_coherent(alpha: complex, dim: int, tail_tol: float = TAIL_TOL) -> np.ndarray:
    """Coherent state |alpha>, renormalized over the truncation."""
    return _finalize(_pacs_raw(complex(alpha), 0, dim), tail_tol, f"coherent({alpha})")


def build_pacs(alpha: complex, p: int, dim: int, tail_tol: float = TAIL_TOL) -> np.ndarray:
    """Photon-added coherent state (a^dag)^p |alpha> / sqrt(p! L_p(-|alpha|^2))."""
    if p < 0:
        raise ValueError("p must be >= 0")
    return _finalize(_pacs_raw(complex(alpha), p, dim), tail_tol,
                     f"pacs(alpha={alpha}, p={p})")


@lru_cache(maxsize=256)
def kerr_pacs_series(alpha: complex, gamma: float, p: int):
    """Nonzero number-basis coefficients of U_K(gamma)|alpha^p>.

    Returns ``(levels, coeffs)`` where ``levels = m + p``. The m-sum is cut
    once the coherent weight e^{-|alpha|^2/2}|alpha|^m sqrt((m+p)!)/m! falls
    below 1e-14 of its maximum.
    """
    x = abs(alpha) ** 2
    lognorm = 0.5 * (log_factorial(p) + math.log(laguerre(p, -x)))
    if alpha == 0:
        levels = np.array([p])
        logw = np.array([0.5 * log_factorial(p)])
    else:
        cut = math.log(SERIES_REL_WEIGHT)
        la = math.log(abs(alpha))
        logw = []
        best = -math.inf
        for m in range(MAX_SERIES_TERMS):
            w = m * la + 0.5 * log_factorial(m + p) - log_factorial(m)
            logw.append(w)
            if w > best:
                best = w
            elif w < best + cut:
                break
        else:
            raise NonConvergence(f"coherent series for alpha={alpha}, p={p} did not decay")
        logw = np.array(logw)
        levels = np.arange(len(logw)) + p
    m = levels - p
    coeffs = np.exp(-0.5 * x + logw - lognorm + 1j * m * np.angle(alpha))
    coeffs = coeffs * kerr_phases(gamma, levels)
    return _frozen(levels), _frozen(coeffs)


def _ndks_closed_raw(params: NdksParams) -> np.ndarray:
    levels, coeffs = kerr_pacs_series(params.alpha, params.gamma, params.p)
    block = _displacement_block(params.beta, params.cutoff, int(levels[-1]) + 1)
    return block[:, levels] @ coeffs


def _ndks_oracle_raw(params: NdksParams) -> np.ndarray:
    size = params.cutoff
    while True:
        try:
            pacs = build_pacs(params.alpha, params.p, size, tail_tol=1e-13)
            break
        except CutoffTooSmall:
            if size > 4 * MAX_CUTOFF:
                raise
            size *= 2
    work = max(params.cutoff, size, displacement_guard(params.beta))
    d = displacement_matrix(params.beta, work, route="exponential_oracle")
    state = pacs * kerr_phases(params.gamma, np.arange(size))
    return (d[: params.cutoff, :size] @ state)


@lru_cache(maxsize=128)
def _build_ndks_cached(params: NdksParams, route: str, tail_tol: float) -> np.ndarray:
    if route == "closed_form":
        raw = _ndks_closed_raw(params)
    elif route == "operator_oracle":
        raw = _ndks_oracle_raw(params)
    else:
        raise ValueError(f"unknown route {route!r}")
    return _finalize(raw, tail_tol, f"NDKS {params}")


def build_ndks(params: NdksParams, route: str = "closed_form",
               tail_tol: float = TAIL_TOL) -> np.ndarray:
    """Number-basis amplitudes of the normalized D(beta) U_K(gamma)|alpha^p>.

    ``closed_form`` sums the coherent series against Laguerre displacement
    elements; ``operator_oracle`` multiplies truncated matrices (matrix
    exponential for the displacement) in a padded space and keeps the first
    ``cutoff`` levels.

    Raises
    ------
    CutoffTooSmall
        If more than ``tail_tol`` of the probability lies above the cutoff.
    """
    return _build_ndks_cached(params, route, float(tail_tol))


def _top_bins_mass(amps: np.ndarray, bins: int = 5) -> float:
    return float(np.sum(np.abs(amps[-bins:]) ** 2))


def initial_cutoff(params: NdksParams) -> int:
    s = abs(params.alpha) + abs(params.beta)
    return math.ceil(s * s + 6 * s + params.p + 10)


def choose_cutoff(params: NdksParams, tail_tol: float = TAIL_TOL,
                  max_cutoff: int = MAX_CUTOFF) -> int:
    """Pick a Fock cutoff by construct-and-test doubling.

    Starts from ceil((|alpha|+|beta|)^2 + 6(|alpha|+|beta|) + p + 10) and
    doubles until both the top five bins and the discarded tail hold less
    than ``tail_tol`` of the probability.
    """
    if not 0 < tail_tol <= 1e-3:
        raise ValueError(f"tail_tol must lie in (0, 1e-3], got {tail_tol}")
    _, coeffs = kerr_pacs_series(params.alpha, params.gamma, params.p)
    total = float(np.vdot(coeffs, coeffs).real)
    n = max(initial_cutoff(params), params.p + 2)
    while n <= max_cutoff:
        raw = _ndks_closed_raw(params.with_cutoff(n))
        mass = float(np.vdot(raw, raw).real)
        if total - mass < tail_tol and _top_bins_mass(raw) / mass < tail_tol:
            return n
        n *= 2
    raise NonConvergence(
        f"no cutoff <= {max_cutoff} meets tail_tol={tail_tol} for {params}"
    )


def auto_cutoff(params: NdksParams, tail_tol: float = TAIL_TOL) -> NdksParams:
    return params.with_cutoff(choose_cutoff(params, tail_tol))


def align_phase(amps: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude amplitude is real positive."""
    amps = np.asarray(amps)
    k = int(np.argmax(np.abs(amps)))
    ref = amps[k]
    if ref == 0:
        return amps.copy()
    return amps * (np.conj(ref) / abs(ref))


def displace_state(psi: np.ndarray, z, levels: int) -> np.ndarray:
    """First ``levels`` number-basis amplitudes of D(z) psi for each point of ``z``.

    The matrix elements are run as normalized Laguerre recurrences,
    M[k, d] = e^{-x/2} |z|^d sqrt(k!/(k+d)!) L_k^d(x) with x = |z|^2, in the
    degree k for all diagonals d at once. Then
    <k+d|D|k> = e^{i d arg z} M[k, d] and <k|D|k+d> = e^{i d arg(-z*)} M[k, d].
    Every entry is exact, so nothing is lost however far ``z`` moves the
    state. The result has shape ``(levels,) + z.shape``.
    """
    psi = np.asarray(psi, dtype=complex)
    z = np.asarray(z, dtype=complex)
    support = np.nonzero(psi)[0]
    kdim = int(support[-1]) + 1 if len(support) else 1
    flat = z.ravel()
    x = np.abs(flat) ** 2
    d = np.arange(levels)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        log0 = d * np.log(np.abs(flat)) - 0.5 * x - 0.5 * log_factorial(d)
    log0 = np.where(d == 0, -0.5 * x, log0)
    up = np.exp(1j * d * np.angle(flat))
    down = np.exp(1j * d * np.angle(-np.conj(flat)))
    out = np.zeros((levels, flat.size), dtype=complex)
    m_prev = None
    m_cur = np.exp(log0)
    for k in range(kdim):
        if k == 1:
            m_prev, m_cur = m_cur, (1.0 + d - x) * m_cur / np.sqrt(1.0 + d)
        elif k > 1:
            a = (2 * k - 1 + d - x) * np.sqrt(k / (k + d))
            b = (k - 1 + d) * np.sqrt((k - 1) * k / ((k - 1 + d) * (k + d)))
            m_prev, m_cur = m_cur, (a * m_cur - b * m_prev) / k
        n = levels - k
        if n <= 0:
            break
        if psi[k] != 0:
            out[k:] += psi[k] * up[:n] * m_cur[:n]
        tail = min(kdim - k, levels)
        if tail > 1:
            out[k] += np.sum(down[1:tail] * m_cur[1:tail] * psi[k + 1:k + tail, None], axis=0)
    return out.reshape((levels,) + z.shape)
