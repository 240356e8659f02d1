"""Single-mode nonclassicality measures of the NDKS.

Each measure has a closed-form route (series in the state parameters) and an
oracle route that works on the number-basis vector from
:func:`ndks.fock.build_ndks` with ``route="operator_oracle"``. Phase-space
point functions accept a scalar or an array of complex points and broadcast
over it.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ndks.errors import GridEvaluationError, NonConvergence, VacuumState
from ndks.fock import (
    NdksParams,
    build_ndks,
    displace_state,
    kerr_pacs_series,
    displacement_element,
    ladder_matrices,
)
from ndks.specfun import hyp1f1, laguerre, log_factorial

PHASE_SPACE_MASS_TOL = 1e-12
MAX_LEVELS = 5000
MAX_GRID_POINTS = 10**6
GRID_BLOCK = 2048
NEGATIVITY_THRESHOLD = -1e-6
POISSONIAN_BAND = 1e-8


def pnd(params: NdksParams, route: str = "closed_form") -> np.ndarray:
    """Photon-number distribution P(n) for n < cutoff."""
    if route == "closed_form":
        amps = build_ndks(params, "closed_form")
    elif route == "state_oracle":
        amps = build_ndks(params, "operator_oracle")
    else:
        raise ValueError(f"unknown route {route!r}")
    probs = np.abs(amps) ** 2
    return probs / probs.sum()


def number_moments(probs: np.ndarray):
    n = np.arange(len(probs), dtype=float)
    mean = float(probs @ n)
    return mean, float(probs @ n**2) - mean**2


def mandel_q(params: NdksParams, route: str = "closed_form") -> float:
    """Mandel's Q = (Var N - <N>) / <N> from the photon-number distribution."""
    mean, var = number_moments(pnd(params, route))
    if mean <= 0.0:
        raise VacuumState(f"<N> = 0 for {params}; Mandel Q is undefined")
    return (var - mean) / mean


def classify_statistics(q: float) -> str:
    if abs(q) < POISSONIAN_BAND:
        return "Poissonian"
    return "sub-Poissonian" if q < 0 else "super-Poissonian"


def expectations_closed(params: NdksParams):
    """<a>, <a^2>, <a^dag a> from the 1F1 closed forms.

    Two terms of the published <a^dag a> are corrected here: the PACS number
    term carries a factor |alpha|^2 in front of 1F1(2+p; 2; |alpha|^2), and the
    displacement term is |beta|^2 rather than beta^2.
    """
    a, b, g, p = params.alpha, params.beta, params.gamma, params.p
    x = abs(a) ** 2
    pref = math.exp(-x) / laguerre(p, -x)
    rot = cmath.exp(1j * g)
    f1 = hyp1f1(p + 1, 1, x)
    f2 = hyp1f1(p + 2, 2, rot * x)
    f2_conj = hyp1f1(p + 2, 2, x / rot)
    f2_real = hyp1f1(p + 2, 2, x)
    f3 = hyp1f1(p + 3, 3, rot * rot * x)
    kerr_a = a * (p + 1) * cmath.exp(1j * p * g) * f2
    expect_a = pref * (kerr_a + b * f1)
    expect_a2 = pref * (
        0.5 * a * a * (p + 2) * (p + 1) * cmath.exp(1j * (2 * p + 1) * g) * f3
        + 2 * b * kerr_a
        + b * b * f1
    )
    expect_n = pref * (
        np.conj(b) * kerr_a
        + b * np.conj(a) * (p + 1) * cmath.exp(-1j * p * g) * f2_conj
        + x * (p + 1) * f2_real
        + p * f1
        + abs(b) ** 2 * f1
    )
    return complex(expect_a), complex(expect_a2), float(expect_n.real)


def expectations_oracle(params: NdksParams):
    """Same three expectations from truncated ladder matrices."""
    psi = build_ndks(params, "operator_oracle")
    a, adag, num = ladder_matrices(len(psi))
    apsi = a @ psi
    return (
        complex(np.vdot(psi, apsi)),
        complex(np.vdot(psi, a @ apsi)),
        float(np.vdot(psi, num @ psi).real),
    )


@dataclass(frozen=True)
class SqueezingResult:
    s_x: float
    s_p: float
    expect_a: complex
    expect_a2: complex
    expect_n: float

    @property
    def uncertainty_product(self) -> float:
        """(s_x + 1)(s_p + 1) = 16 <dx^2><dp^2>, bounded below by 1."""
        return (self.s_x + 1.0) * (self.s_p + 1.0)


def squeezing(params: NdksParams, route: str = "closed_form") -> SqueezingResult:
    """Quadrature squeezing parameters s_x = 4<dx^2> - 1, s_p = 4<dp^2> - 1.

    Quadratures are x = (a + a^dag)/2 and p = (a - a^dag)/2i.
    """
    if route == "closed_form":
        ea, ea2, en = expectations_closed(params)
    elif route == "state_oracle":
        ea, ea2, en = expectations_oracle(params)
    else:
        raise ValueError(f"unknown route {route!r}")
    common = 2 * en - 2 * abs(ea) ** 2
    cross = 2 * (ea2 - ea * ea).real
    return SqueezingResult(common + cross, common - cross, ea, ea2, en)


def _alternating_sum(levels, norm: float, what: str):
    """(2/pi) sum_l (-1)^l |v_l|^2, stopped when the unseen mass < tol everywhere.

    Rounding in the level recurrence can leave ~1e-11 of mass unaccounted for
    at large shifts, so a point also counts as finished once its bulk is
    consumed and the current level has decayed below 1e-24.
    """
    total = None
    seen = None
    for l, v in enumerate(levels):
        prob = np.abs(v) ** 2
        if total is None:
            total = np.zeros_like(prob)
            seen = np.zeros_like(prob)
        total += prob if l % 2 == 0 else -prob
        seen += prob
        left = norm - seen
        done = (left < PHASE_SPACE_MASS_TOL) | ((left < 1e-6) & (prob < 1e-24))
        if np.all(done):
            return 2.0 / math.pi * total
        if l >= MAX_LEVELS:
            break
    raise NonConvergence(f"{what}: displaced-basis sum not converged after {MAX_LEVELS} levels")


def _displaced_parity(psi: np.ndarray, shift: np.ndarray) -> np.ndarray:
    """(2/pi) sum_l (-1)^l |(D(shift) psi)_l|^2 with the level count grown until
    the unseen mass is below tolerance at every point."""
    psi = np.asarray(psi)
    mag = np.abs(psi)
    # amplitudes this far below the peak cannot move W at the 1e-12 level
    psi = np.where(mag > 1e-17 * mag.max(), psi, 0)
    norm = float(np.vdot(psi, psi).real)
    tail = np.cumsum((mag**2)[::-1])[::-1]
    kdim = int(np.nonzero(tail > 1e-16 * norm)[0][-1]) + 1
    reach = math.sqrt(kdim) + float(np.max(np.abs(shift), initial=0.0))
    levels = int(math.ceil(reach**2 + 4.0 * reach + 20))
    while levels <= MAX_LEVELS:
        v = displace_state(psi, shift, levels)
        prob = np.abs(v) ** 2
        left = norm - prob.sum(axis=0)
        if np.all(left < PHASE_SPACE_MASS_TOL):
            sign = np.where(np.arange(levels) % 2 == 0, 1.0, -1.0)
            return 2.0 / math.pi * np.tensordot(sign, prob, axes=1)
        levels *= 2
    raise NonConvergence(f"wigner: displaced-basis sum not converged within {MAX_LEVELS} levels")


def _closed_levels(params: NdksParams, shift):
    levels, coeffs = kerr_pacs_series(params.alpha, params.gamma, params.p)
    l = 0
    while True:
        yield sum(c * displacement_element(l, int(k), shift) for k, c in zip(levels, coeffs))
        l += 1


def wigner_point(params: NdksParams, zeta, route: str = "displaced_basis_oracle"):
    """Wigner function W(zeta) = (2/pi) sum_l (-1)^l |<l|D(-zeta)|psi>|^2.

    ``displaced_basis_oracle`` applies D(-zeta) to the number-basis state with
    exact Laguerre matrix elements. ``closed_form`` expands the same overlaps over
    the coherent series with Laguerre displacement elements
    <l|D(beta - zeta)|m + p>; it is much slower and meant for spot checks.
    """
    scalar = np.isscalar(zeta)
    zeta = np.asarray(zeta, dtype=complex)
    if route == "displaced_basis_oracle":
        psi = build_ndks(params, "operator_oracle")
        out = _displaced_parity(psi, -zeta)
    elif route == "closed_form":
        _, coeffs = kerr_pacs_series(params.alpha, params.gamma, params.p)
        norm = float(np.vdot(coeffs, coeffs).real)
        shift = params.beta - zeta
        out = _alternating_sum(_closed_levels(params, shift), norm, "wigner")
    else:
        raise ValueError(f"unknown route {route!r}")
    return float(out) if scalar else out


def _husimi_closed(params: NdksParams, xi: np.ndarray) -> np.ndarray:
    a, b, g, p = params.alpha, params.beta, params.gamma, params.p
    x = abs(a) ** 2
    w = np.conj(xi) - np.conj(b)
    step = a * w
    term = w**p
    total = term * np.exp(0.5j * g * p * (p - 1))
    peak = np.abs(term)
    m = 0
    # terms a^m w^(m+p)/m! peak near m = |a w|, then decay factorially
    while True:
        m += 1
        term = term * step / m
        total = total + term * np.exp(0.5j * g * (m + p) * (m + p - 1))
        mag = np.abs(term)
        peak = np.maximum(peak, mag)
        if m > np.max(np.abs(step)) and np.all(mag <= 1e-17 * peak):
            break
        if m >= MAX_LEVELS:
            raise NonConvergence("husimi closed-form series did not converge")
    norm = math.exp(log_factorial(p)) * laguerre(p, -x)
    pref = np.exp(-x - abs(b) ** 2 - np.abs(xi) ** 2) / (math.pi * norm)
    return pref * np.abs(np.exp(np.conj(xi) * b) * total) ** 2


def coherent_overlap(psi: np.ndarray, xi) -> np.ndarray:
    """<xi|psi> for each point of the array ``xi``."""
    psi = np.asarray(psi, dtype=complex)
    xi = np.asarray(xi, dtype=complex)
    n = np.arange(len(psi)).reshape((-1,) + (1,) * xi.ndim)
    r = np.abs(xi)
    with np.errstate(divide="ignore", invalid="ignore"):
        logmag = n * np.log(r) - 0.5 * log_factorial(n)
    logmag = np.where(n == 0, 0.0, logmag) - 0.5 * r**2
    bra = np.exp(logmag - 1j * n * np.angle(xi))
    return np.tensordot(psi, bra, axes=(0, 0))


def husimi_point(params: NdksParams, xi, route: str = "closed_form"):
    """Husimi function Q(xi) = <xi|rho|xi> / pi."""
    scalar = np.isscalar(xi)
    xi = np.asarray(xi, dtype=complex)
    if route == "closed_form":
        out = _husimi_closed(params, xi)
    elif route == "overlap_oracle":
        psi = build_ndks(params, "operator_oracle")
        out = np.abs(coherent_overlap(psi, xi)) ** 2 / math.pi
    else:
        raise ValueError(f"unknown route {route!r}")
    return float(out) if scalar else out


@dataclass(frozen=True)
class GridSpec:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("grid bounds must satisfy min < max")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 points per axis")
        if self.nx * self.ny > MAX_GRID_POINTS:
            raise ValueError(f"grid exceeds {MAX_GRID_POINTS} points")

    @property
    def re_axis(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.nx)

    @property
    def im_axis(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.ny)

    @property
    def cell_area(self) -> float:
        return ((self.re_max - self.re_min) / (self.nx - 1)
                * (self.im_max - self.im_min) / (self.ny - 1))

    def points(self) -> np.ndarray:
        """Complex points with shape (ny, nx); row j has Im = im_axis[j]."""
        return self.re_axis[None, :] + 1j * self.im_axis[:, None]


@dataclass(frozen=True)
class GridResult:
    spec: GridSpec
    values: np.ndarray
    integral: float

    def rows(self):
        """(re, im, value) triples in row-major order."""
        re, im = self.spec.re_axis, self.spec.im_axis
        for j in range(self.spec.ny):
            for i in range(self.spec.nx):
                yield re[i], im[j], self.values[j, i]

    def argmax_point(self) -> complex:
        j, i = np.unravel_index(np.argmax(self.values), self.values.shape)
        return complex(self.spec.re_axis[i], self.spec.im_axis[j])


PointFn = Callable[[NdksParams, np.ndarray], np.ndarray]


def grid_eval(point_fn: PointFn, params: NdksParams, spec: GridSpec) -> GridResult:
    """Evaluate a phase-space function on a rectangular grid in blocks of rows.

    A failing block is re-run point by point so the error names the first bad
    coordinate.
    """
    pts = spec.points()
    values = np.empty(pts.shape)
    step = max(1, GRID_BLOCK // spec.nx)
    for j in range(0, spec.ny, step):
        block = pts[j:j + step]
        try:
            values[j:j + step] = point_fn(params, block)
        except Exception as exc:
            for z in block.ravel():
                try:
                    point_fn(params, np.array([z]))
                except Exception as inner:
                    raise GridEvaluationError(complex(z), inner) from inner
            raise GridEvaluationError(complex(block[0, 0]), exc) from exc
    values.flags.writeable = False
    return GridResult(spec, values, float(values.sum() * spec.cell_area))


def wigner_window(params: NdksParams, n: int = 161, half_width: float = 4.0) -> GridSpec:
    c = params.alpha + params.beta
    return GridSpec(c.real - half_width, c.real + half_width,
                    c.imag - half_width, c.imag + half_width, n, n)


def husimi_window(n: int = 201, half_width: float = 6.0) -> GridSpec:
    return GridSpec(-half_width, half_width, -half_width, half_width, n, n)


def covering_window(params: NdksParams, n: int = 161, margin: float = 4.0) -> GridSpec:
    """Square window around <a> wide enough to hold the whole state."""
    ea, _, en = expectations_closed(params)
    spread = math.sqrt(max(en - abs(ea) ** 2, 0.0) + 0.25)
    half = 2.0 * spread + margin
    return GridSpec(ea.real - half, ea.real + half, ea.imag - half, ea.imag + half, n, n)


def wigner_grid(params: NdksParams, spec: GridSpec | None = None) -> GridResult:
    return grid_eval(wigner_point, params, spec or wigner_window(params))


def husimi_grid(params: NdksParams, spec: GridSpec | None = None) -> GridResult:
    return grid_eval(husimi_point, params, spec or husimi_window())
