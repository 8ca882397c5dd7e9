"""Field evaluation: normalized circular beams, LG modes, LG expansion, pupil field.

Every field function broadcasts over array-valued ``r`` and ``phi``; ``z`` is
a scalar plane. Complex powers use the principal branch throughout.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import specfun
from .errors import (
    CibeamError,
    ConvergenceError,
    DomainError,
    ExpansionInvalidError,
    FieldEvaluationError,
    InvalidBeamError,
)
from .params import BeamParams, ModeIndices, PropagatedFrame, classify, frame_at
from .specfun import DEFAULT_CONTROL, SeriesControl

__all__ = [
    "FieldPoint",
    "ExpansionCoefficients",
    "Grid",
    "lg_field",
    "psi_norm",
    "cib_field",
    "expansion_coeffs",
    "pupil_field",
    "sample_grid",
    "PUPIL_SWITCH",
]

# |z - d1| below this fraction of z0 is treated as the pupil plane itself.
PUPIL_SWITCH = 1e-9


class FieldPoint(NamedTuple):
    r: float
    phi: float
    z: float


def _lg_norm(n: int, m_abs: int) -> float:
    return math.sqrt(2 / math.pi) * math.exp(0.5 * (math.lgamma(n + 1) - math.lgamma(n + m_abs + 1)))


def lg_field(n: int, m: int, params: BeamParams, r, phi, z: float):
    """Standard Laguerre-Gauss mode LG_{n,m} with its waist at ``z = d0``.

    Normalized to unit power in every plane.
    """
    if n < 0:
        raise DomainError(f"radial index n must be >= 0, got {n}")
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    m_abs = abs(m)
    fr = frame_at(params, z)
    w = fr.w_z
    u = 2 * r**2 / w**2
    amp = _lg_norm(n, m_abs) / w * (math.sqrt(2) * r / w) ** m_abs * specfun.laguerre(n, m_abs, u)
    phase = -0.5j * params.k * r**2 / fr.q_z + 1j * m * phi + 1j * (2 * n + m_abs + 1) * fr.gouy
    out = amp * np.exp(phase)
    return complex(out) if np.ndim(out) == 0 else out


def psi_norm(p, m: int, xi, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Normalization constant Psi as a function of ``p``, ``m`` and ``xi``.

    Infinite for ``xi = inf`` (``q1 = q0*``); field code handles that case in
    scaled form instead.
    """
    xi = complex(xi)
    if math.isinf(xi.real) or math.isinf(xi.imag):
        ell = ModeIndices(p, m).ell
        if ell is None:
            raise specfun.DivergentSeriesError("Psi diverges for |xi| = inf unless p = 2*ell")
        return 1.0 if ell == 0 else math.inf
    return specfun.hyp2f1_psi(p, abs(m), abs(xi) ** 2, ctl)


def _xi_sq(params: BeamParams) -> float:
    # Exactly 1 on the unit circle so the closed form is selected.
    return 1.0 if params.xi_regime == 0 else abs(params.xi) ** 2


def _psi_scaled(modes: ModeIndices, params: BeamParams, ctl: SeriesControl) -> float:
    """Psi for |xi| <= 1, or Psi / |xi|^(2 ell) for |xi| > 1 (finite sums)."""
    if params.xi_regime == 1:
        ell = modes.ell
        w2 = abs(params.xi_inv) ** 2
        terms = specfun.conj_pair_terms(-modes.p / 2, modes.m_abs + 1, 1.0, ell)
        return float(sum(t * w2 ** (ell - n) for n, t in enumerate(terms)))
    return specfun.hyp2f1_psi(modes.p, modes.m_abs, _xi_sq(params), ctl)


def _envelope(modes: ModeIndices, params: BeamParams, fr: PropagatedFrame, ctl) -> complex:
    """``[(1 + xi) q~/q]^(p/2) / sqrt(Psi)``, evaluated without overflow."""
    q = fr.q_z
    q_ratio = q.conjugate() / q
    if params.xi_regime == 1:
        ell = modes.ell
        w = params.xi_inv
        unit = 1.0 if w == 0 else (w.conjugate() / abs(w))
        return (unit * (w + q_ratio)) ** ell / math.sqrt(_psi_scaled(modes, params, ctl))
    base = 1 + params.xi * q_ratio
    psi = _psi_scaled(modes, params, ctl)
    if base == 0:
        return 0j if modes.p.real > 0 or modes.ell else complex(math.nan, math.nan)
    return complex(np.exp(modes.p / 2 * np.log(base))) / math.sqrt(psi)


def _prefactor(params: BeamParams, m_abs: int) -> complex:
    return (1j * math.sqrt(2) * params.z0 / params.w0) ** (m_abs + 1) / math.sqrt(
        math.pi * math.factorial(m_abs)
    )


def _check_valid(params, modes):
    cls = classify(params, modes)
    if not cls.valid:
        raise InvalidBeamError(cls.detail)
    return cls


def _at_pupil(params: BeamParams, z: float) -> bool:
    return (
        params.xi_regime == 0
        and not params.q1_at_infinity
        and abs(z - params.d1) < PUPIL_SWITCH * params.z0
    )


def cib_field(modes: ModeIndices, params: BeamParams, r, phi, z: float,
              ctl: SeriesControl = DEFAULT_CONTROL):
    """Normalized circular beam CiB_{p,m}^{(q0,q1)} at ``(r, phi, z)``.

    In the pupil plane of a real ``q1`` (``|z - d1| < 1e-9 z0``) the closed
    limit is used, taken from the ``z > d1`` side.

    Raises
    ------
    InvalidBeamError
        If the parameters fall in no admissible case.
    """
    _check_valid(params, modes)
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    m_abs = modes.m_abs
    p = modes.p
    q = complex(z) + params.q0
    base = _prefactor(params, m_abs) / q * np.exp(1j * modes.m * phi) * (r / q) ** m_abs
    kernel = -0.5j * params.k * r**2 / q
    if _at_pupil(params, z):
        out = base * _pupil_radial(modes, params, r, ctl) * np.exp(kernel)
        return complex(out) if np.ndim(out) == 0 else out
    fr = frame_at(params, z)
    env = _envelope(modes, params, fr, ctl)
    x = r**2 * fr.inv_chi_sq
    mant, scale = specfun.hyp1f1_scaled(-p / 2, m_abs + 1, x, ctl)
    out = base * env * mant * np.exp(kernel + scale)
    return complex(out) if np.ndim(out) == 0 else out


def _pupil_radial(modes, params, r, ctl):
    """Limit of envelope * 1F1 at z = d1: (2 r^2/W^2)^(p/2) Gamma(b)/Gamma(b - a) / sqrt(Psi)."""
    p, m_abs = modes.p, modes.m_abs
    w_sq = frame_at(params, params.d1).w_z ** 2
    psi = _psi_scaled(modes, params, ctl)
    log_c = specfun.ln_gamma(m_abs + 1) - specfun.ln_gamma(m_abs + 1 + p / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        rad = np.where(r > 0, np.exp(p / 2 * np.log(2 * r**2 / w_sq + 0j)), 1.0 if p == 0 else 0.0)
    return np.exp(log_c) * rad / math.sqrt(psi)


@dataclass(frozen=True)
class ExpansionCoefficients:
    """Truncated LG expansion of a circular beam.

    ``tail_bound`` bounds the discarded power ``sum_{n > N} |A_n|^2``.
    """

    m: int
    p: complex
    xi: complex
    psi: float
    coeffs: np.ndarray
    tail_bound: float

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def power(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))


def expansion_coeffs(modes: ModeIndices, params: BeamParams, N: int | None = None,
                     target_tail: float | None = None,
                     ctl: SeriesControl = DEFAULT_CONTROL) -> ExpansionCoefficients:
    """Coefficients A_n of ``CiB = sum_n A_n LG_{n,m}(r, phi, z - d0)``.

    Give either a fixed truncation ``N`` or a ``target_tail`` on the discarded
    power. Finite sums (``p = 2 ell``) are always returned complete.
    """
    if params.is_lg:
        raise ExpansionInvalidError("LG expansion does not hold for q1 = q0*")
    if (N is None) == (target_tail is None):
        raise ValueError("give exactly one of N or target_tail")
    _check_valid(params, modes)
    p, m_abs = modes.p, modes.m_abs
    xi = params.xi
    a = -p / 2
    ell = modes.ell
    psi = specfun.hyp2f1_psi(p, m_abs, _xi_sq(params), ctl)

    def build(n_max):
        # A_n / A_{n-1} = (a + n - 1) xi / sqrt(n (n + |m|)); a running product
        # keeps every partial value in range where separate factors overflow.
        n = np.arange(1, n_max + 1)
        steps = (a + n - 1) * xi / np.sqrt(n * (n + m_abs))
        return np.concatenate(([1.0 + 0j], np.cumprod(steps))) / math.sqrt(psi)

    if ell is not None:
        n_max = ell if N is None else N
        coeffs = build(n_max)[: ell + 1]
        tail = float(np.sum(np.abs(build(ell)[n_max + 1:]) ** 2)) if n_max < ell else 0.0
        return ExpansionCoefficients(modes.m, p, xi, psi, coeffs, tail)

    if N is not None:
        coeffs = build(N)
        return ExpansionCoefficients(modes.m, p, xi, psi, coeffs,
                                     _tail_bound(coeffs, a, m_abs, xi, params))

    n_max = 16
    while True:
        coeffs = build(n_max)
        if _tail_bound(coeffs, a, m_abs, xi, params) <= target_tail:
            break
        if n_max >= ctl.max_terms:
            raise ConvergenceError(f"tail {target_tail} not reached within {ctl.max_terms} terms")
        n_max = min(2 * n_max, ctl.max_terms)
    for keep in range(n_max + 1):
        tail = _tail_bound(coeffs[: keep + 1], a, m_abs, xi, params)
        if tail <= target_tail:
            return ExpansionCoefficients(modes.m, p, xi, psi, coeffs[: keep + 1], tail)
    raise AssertionError("unreachable")


def _tail_bound(coeffs, a, m_abs, xi, params) -> float:
    """Bound on sum_{n > N} |A_n|^2.

    Inside the unit disk the term ratio tends to |xi|^2, giving a geometric
    bound; on the unit circle Psi is exact and the tail is ``1 - sum``.
    """
    N = len(coeffs) - 1
    s = abs(xi) ** 2
    last = abs(coeffs[-1]) ** 2
    if params.xi_regime == 0:
        return max(0.0, 1.0 - float(np.sum(np.abs(coeffs) ** 2)))
    ratio = abs(a + N) ** 2 * s / ((N + 1) * (N + 1 + m_abs))
    rho = max(ratio, s)
    if rho >= 1:
        return math.inf
    # Ratios beyond N are bounded by rho once they decrease monotonically.
    return last * rho / (1 - rho)


def pupil_field(modes: ModeIndices, params: BeamParams, r, phi):
    """Unnormalized field in the plane ``z = d1`` of a real ``q1``.

    ``exp(-i k r^2 / (2 (d1 - d0 + i z0))) r^(p+|m|) exp(i m phi) / (d1 - d0 + i z0)``:
    a Gaussian at distance ``d1 - d0`` from its waist times a vortex phase and a
    power-law transmittance of order ``p + |m|``.
    """
    if params.q1_at_infinity or params.q1.imag != 0:
        raise DomainError("pupil field requires a real q1 (Im(q1) = 0)")
    if modes.p.real < -modes.m_abs:
        raise DomainError(f"pupil field requires Re(p) >= -|m|, got {modes.p.real}")
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    qd = params.d1 - params.d0 + 1j * params.z0
    expo = modes.p + modes.m_abs
    with np.errstate(divide="ignore", invalid="ignore"):
        rad = np.where(r > 0, np.exp(expo * np.log(r + 0j)), 1.0 if expo == 0 else 0.0)
    out = np.exp(-0.5j * params.k * r**2 / qd) * rad * np.exp(1j * modes.m * phi) / qd
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Grid:
    """Cartesian samples; ``values[i, j]`` sits at ``(x[j], y[i])``.

    Row 0 is the top (``y = +extent``), matching image row order.
    """

    nx: int
    ny: int
    extent: float
    z: float
    values: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.extent, self.extent, self.nx)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(self.extent, -self.extent, self.ny)

    @property
    def pixel_area(self) -> float:
        return (2 * self.extent / (self.nx - 1)) * (2 * self.extent / (self.ny - 1))


def _thread_count() -> int:
    env = os.environ.get("CIBEAM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


def sample_grid(field: Callable, nx: int, ny: int, extent: float, z: float = 0.0,
                threads: int | None = None) -> Grid:
    """Sample ``field(r, phi)`` on an ``ny x nx`` Cartesian grid.

    Rows may be evaluated concurrently; ``field`` must be free of side effects.
    Failures are re-raised as :class:`FieldEvaluationError` naming the pixel.
    """
    if nx < 2 or ny < 2:
        raise DomainError("grid needs nx, ny >= 2")
    if not extent > 0:
        raise DomainError("extent must be positive")
    xs = np.linspace(-extent, extent, nx)
    ys = np.linspace(extent, -extent, ny)
    values = np.empty((ny, nx), dtype=complex)
    threads = threads or _thread_count()
    chunk = max(1, ny // (4 * threads))
    starts = range(0, ny, chunk)

    def run(i0):
        X, Y = np.meshgrid(xs, ys[i0:i0 + chunk])
        r = np.hypot(X, Y)
        phi = np.arctan2(Y, X)
        try:
            values[i0:i0 + chunk] = np.broadcast_to(field(r, phi), r.shape)
        except CibeamError as exc:
            _locate_failure(field, r, phi, i0, exc)
            raise

    if threads == 1:
        for i0 in starts:
            run(i0)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, starts))
    return Grid(nx, ny, extent, z, values)


def _locate_failure(field, r, phi, i0, exc):
    for (i, j), rv in np.ndenumerate(r):
        try:
            field(rv, phi[i, j])
        except CibeamError as inner:
            raise FieldEvaluationError(f"pixel ({i0 + i}, {j}): {inner}", pixel=(i0 + i, j)) from inner
    raise FieldEvaluationError(f"grid evaluation failed: {exc}") from exc
