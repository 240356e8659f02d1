"""Entanglement potential of the NDKS through a 50:50 beam splitter.

The single-mode state enters port ``a`` with vacuum in port ``b`` and the
output is scored by its logarithmic negativity. Two-mode amplitudes are kept
as flat arrays with index ``n_a * dim_b + n_b``. Displacement is dropped
throughout because it only adds local operators on the two output modes.
"""

import math
from dataclasses import dataclass

import numpy as np

from ndks.errors import DimensionMismatch, NotHermitian
from ndks.fock import NdksParams, build_pacs, kerr_pacs_series, kerr_phases, _frozen
from ndks.specfun import log_factorial

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-10
PSD_FLOOR = -1e-9
EP_FLOOR = 1e-9
MAX_EIG_DIM = 512
PROJECTION_TAIL = 1e-13


@dataclass(frozen=True)
class BipartiteState:
    """Pure two-mode state with amplitudes indexed ``n_a * dim_b + n_b``."""

    dim_a: int
    dim_b: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex).ravel()
        if amps.size != self.dim_a * self.dim_b:
            raise DimensionMismatch(
                f"{amps.size} amplitudes for a {self.dim_a}x{self.dim_b} space")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"two-mode state has norm {norm:.12g}")
        object.__setattr__(self, "amps", _frozen(amps))

    def matrix(self) -> np.ndarray:
        """Amplitudes as a (dim_a, dim_b) array."""
        return self.amps.reshape(self.dim_a, self.dim_b)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.dim_a, self.dim_b, np.outer(self.amps, self.amps.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Two-mode density matrix in the same flat product basis.

    Only Hermiticity and unit trace are enforced here. Positivity is checked
    by :func:`log_negativity` since partial transposes are not positive.
    """

    dim_a: int
    dim_b: int
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        n = self.dim_a * self.dim_b
        if m.shape != (n, n):
            raise DimensionMismatch(f"matrix of shape {m.shape} for a {self.dim_a}x{self.dim_b} space")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise NotHermitian("density matrix is not Hermitian to 1e-10")
        tr = np.trace(m)
        if abs(tr - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix has trace {tr:.12g}")
        object.__setattr__(self, "entries", _frozen(m))


@dataclass(frozen=True)
class EigenResult:
    eigenvalues: np.ndarray
    vectors: np.ndarray | None = None


def beam_splitter_apply(input_a, dim_b: int) -> BipartiteState:
    """Mix a single-mode state with vacuum on a 50:50 beam splitter.

    |n>|0> -> 2^{-n/2} sum_k sqrt(C(n, k)) (-1)^k |n-k>|k>. The sign makes
    the input creation operator map to (a^dag - b^dag)/sqrt(2).
    """
    psi = np.asarray(input_a, dtype=complex)
    dim_a = len(psi)
    if dim_b < dim_a:
        raise DimensionMismatch(f"dim_b={dim_b} cannot hold {dim_a - 1} photons")
    out = np.zeros((dim_a, dim_b), dtype=complex)
    lf = log_factorial(np.arange(dim_a))
    for n in np.nonzero(psi)[0]:
        k = np.arange(n + 1)
        logc = 0.5 * (lf[n] - lf[k] - lf[n - k]) - 0.5 * n * math.log(2.0)
        out[n - k, k] += psi[n] * np.where(k % 2, -1.0, 1.0) * np.exp(logc)
    return BipartiteState(dim_a, dim_b, out.ravel())


def truncated_input(params: NdksParams) -> np.ndarray:
    """Keep the |p> and |p+1> terms of the Kerr-evolved PACS series.

    The amplitudes are e^{i(gamma/2)(p-1)p} and alpha sqrt(p+1)
    e^{i(gamma/2)p(p+1)} before renormalization.
    """
    p, a = params.p, params.alpha
    amps = np.zeros(p + 2, dtype=complex)
    phases = kerr_phases(params.gamma, np.array([p, p + 1]))
    amps[p] = phases[0]
    amps[p + 1] = a * math.sqrt(p + 1) * phases[1]
    return amps / math.sqrt(1.0 + abs(a) ** 2 * (p + 1))


def density_p0(alpha: complex) -> DensityMatrix:
    """Closed-form two-qubit density matrix of the truncated p=0 input.

    Basis order is |00>, |01>, |10>, |11>.
    """
    a = complex(alpha)
    x = abs(a) ** 2
    s = math.sqrt(2.0)
    m = np.array([
        [1.0, -a.conjugate() / s, a.conjugate() / s, 0.0],
        [-a / s, x / 2, -x / 2, 0.0],
        [a / s, -x / 2, x / 2, 0.0],
        [0.0, 0.0, 0.0, 0.0],
    ], dtype=complex)
    return DensityMatrix(2, 2, m / (1.0 + x))


def partial_transpose_a(rho: DensityMatrix) -> DensityMatrix:
    """Transpose the mode-a indices: ((m,n),(m',n')) -> ((m',n),(m,n'))."""
    da, db = rho.dim_a, rho.dim_b
    t = rho.entries.reshape(da, db, da, db).transpose(2, 1, 0, 3)
    return DensityMatrix(da, db, t.reshape(da * db, da * db))


def hermitian_eigenvalues(m, *, vectors: bool = False) -> EigenResult:
    """Ascending eigenvalues of a Hermitian matrix (LAPACK ``heevd``)."""
    a = m.entries if isinstance(m, DensityMatrix) else np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_EIG_DIM:
        raise DimensionMismatch(f"dimension {a.shape[0]} exceeds {MAX_EIG_DIM}")
    dev = np.max(np.abs(a - a.conj().T), initial=0.0)
    if dev > HERMITIAN_TOL:
        raise NotHermitian(f"matrix deviates from Hermitian by {dev:.3e}")
    if vectors:
        w, v = np.linalg.eigh(a)
        return EigenResult(w, v)
    return EigenResult(np.linalg.eigvalsh(a))


def _clamp(ep: float) -> float:
    return 0.0 if abs(ep) < EP_FLOOR else ep


def log_negativity(rho: DensityMatrix) -> float:
    """log2 of the trace norm of the partial transpose over mode a."""
    lam = hermitian_eigenvalues(rho).eigenvalues
    if lam[0] < PSD_FLOOR:
        raise ValueError(f"density matrix has eigenvalue {lam[0]:.3e}")
    mu = hermitian_eigenvalues(partial_transpose_a(rho)).eigenvalues
    return _clamp(math.log2(float(np.sum(np.abs(mu)))))


def ep_closed_p0(alpha: complex) -> float:
    x = abs(alpha) ** 2
    return math.log2((1.0 + 2.0 * x) / (1.0 + x))


def eigenvalues_p0(alpha: complex) -> np.ndarray:
    """Closed-form partial-transpose eigenvalues of :func:`density_p0`, ascending."""
    x = abs(alpha) ** 2
    d = 2.0 * (1.0 + x)
    r = math.sqrt(1.0 + 2.0 * x)
    return np.sort([x / d, -x / d, (1.0 + x + r) / d, (1.0 + x - r) / d])


def _kerr_pacs_block(params: NdksParams) -> np.ndarray:
    levels, coeffs = kerr_pacs_series(params.alpha, params.gamma, params.p)
    dim = int(levels[-1]) + 1
    psi = np.zeros(dim, dtype=complex)
    psi[levels] = coeffs
    return psi / np.linalg.norm(psi)


def ep_truncated(params: NdksParams, variant: str = "two_term") -> float:
    """Entanglement potential of a truncated input.

    ``two_term`` sends :func:`truncated_input` through the beam splitter
    (mode dimensions p+2 each). ``projection`` sends the full Kerr-evolved
    PACS through and keeps only the {|0>,|1>} x {|0>,|1>} block of the
    output, renormalized; it is zero when that block is empty.
    """
    if variant == "two_term":
        psi = truncated_input(params)
        return log_negativity(beam_splitter_apply(psi, len(psi)).density())
    if variant == "projection":
        psi = _kerr_pacs_block(params)
        out = beam_splitter_apply(psi, len(psi)).matrix()[:2, :2].ravel()
        norm = np.linalg.norm(out)
        if norm < 1e-150:
            return 0.0
        return log_negativity(BipartiteState(2, 2, out / norm).density())
    raise ValueError(f"unknown variant {variant!r}")


def schmidt_log_negativity(state: BipartiteState) -> float:
    """LN of a pure state from its Schmidt coefficients, 2 log2(sum sigma)."""
    sigma = np.linalg.svd(state.matrix(), compute_uv=False)
    return _clamp(2.0 * math.log2(float(np.sum(sigma))))


def ep_full(params: NdksParams, dim: int | None = None) -> float:
    """EP of the untruncated U_K(gamma)|alpha^p> mixed with vacuum.

    ``dim`` defaults to ``params.cutoff``; the PACS must fit in it with the
    default tail tolerance or :class:`CutoffTooSmall` is raised. The output is
    pure, so LN is taken from the Schmidt decomposition.
    """
    dim = params.cutoff if dim is None else dim
    psi = build_pacs(params.alpha, params.p, dim) * kerr_phases(params.gamma, np.arange(dim))
    return schmidt_log_negativity(beam_splitter_apply(psi, dim))
