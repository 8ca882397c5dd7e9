"""Complex special functions used by the beam formulas.

All functions are pure. The confluent series is evaluated in double
precision whenever that is well conditioned; ill-conditioned or very large
arguments fall back to mpmath through a per-thread context, so no global
precision state is touched.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special as sp

from .errors import ConvergenceError, DivergentSeriesError, DomainError, PoleError

__all__ = [
    "SeriesControl",
    "DEFAULT_CONTROL",
    "ln_gamma",
    "gamma_ratio_seq",
    "hyp1f1",
    "hyp1f1_scaled",
    "hyp2f1_psi",
    "conj_pair_series",
    "conj_pair_terms",
    "laguerre",
    "nonpositive_integer",
]

# Largest |x| summed directly; beyond this the terms approach double overflow.
_SERIES_MAX_ABS_X = 500.0
# Sum(|t_n|)/|S| above this loses more than ~4 of 16 digits.
_MAX_CONDITION = 1e4
# Terms peak near e^|x| while the sum grows like e^Re(x); beyond this gap the
# series is skipped outright (the condition test would reject it anyway).
_MAX_LOG_GAP = 12.0
_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for the infinite series."""

    rel_tol: float = 1e-12
    max_terms: int = 10_000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise ValueError(f"max_terms must be a positive integer, got {self.max_terms}")


DEFAULT_CONTROL = SeriesControl()

_local = threading.local()


def _mp():
    ctx = getattr(_local, "ctx", None)
    if ctx is None:
        ctx = mpmath.MPContext()
        ctx.dps = 30
        _local.ctx = ctx
    return ctx


def nonpositive_integer(a) -> int | None:
    """Return ell if ``a == -ell`` exactly for an integer ell >= 0, else None."""
    a = complex(a)
    if a.imag != 0 or a.real > 0 or a.real != math.floor(a.real):
        return None
    return int(-a.real)


def ln_gamma(z):
    """Principal branch of log Gamma(z) for complex z.

    Raises
    ------
    PoleError
        If any ``z`` is a nonpositive integer.
    """
    arr = np.asarray(z, dtype=complex)
    poles = (arr.imag == 0) & (arr.real <= 0) & (arr.real == np.floor(arr.real))
    if np.any(poles):
        raise PoleError(f"Gamma has a pole at {arr[poles].ravel()[0].real:g}")
    out = sp.loggamma(arr)
    return complex(out) if np.ndim(out) == 0 else out


def gamma_ratio_seq(a, N: int) -> np.ndarray:
    """Return ``Gamma(n + a) / Gamma(a)`` for ``n = 0..N`` by forward recurrence.

    The products are exact zeros past ``n = ell`` when ``a = -ell``, which is
    how the finite sums for even radial orders arise.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    factors = np.empty(N + 1, dtype=complex)
    factors[0] = 1.0
    factors[1:] = complex(a) + np.arange(N)
    return np.cumprod(factors)


def _series_1f1_scalar(a, b, x, ctl):
    total = term = 1 + 0j
    abs_sum = 1.0
    run = 0
    n = 0
    while run < 3:
        if n >= ctl.max_terms:
            raise ConvergenceError(
                f"1F1({a}, {b}; x) did not converge in {ctl.max_terms} terms"
            )
        term *= (a + n) * x / ((b + n) * (n + 1))
        total += term
        at = abs(term)
        abs_sum += at
        run = run + 1 if at <= ctl.rel_tol * abs(total) else 0
        n += 1
    return total, (abs_sum / abs(total) if total else math.inf)


def _series_1f1(a, b, x, ctl):
    """Direct power series on a flat array; returns (sum, condition number)."""
    if x.size <= 4:
        pairs = [_series_1f1_scalar(a, b, complex(v), ctl) for v in x]
        return (np.array([t for t, _ in pairs], dtype=complex),
                np.array([c for _, c in pairs], dtype=float))
    total = np.ones_like(x)
    term = np.ones_like(x)
    abs_sum = np.ones(x.shape)
    run = np.zeros(x.shape, dtype=int)
    active = np.arange(x.size)
    n = 0
    while active.size:
        if n >= ctl.max_terms:
            raise ConvergenceError(
                f"1F1({a}, {b}; x) did not converge in {ctl.max_terms} terms"
            )
        xa = x[active]
        t = term[active] * ((a + n) / ((b + n) * (n + 1))) * xa
        term[active] = t
        total[active] += t
        at = np.abs(t)
        abs_sum[active] += at
        small = at <= ctl.rel_tol * np.abs(total[active])
        run[active] = np.where(small, run[active] + 1, 0)
        active = active[run[active] < 3]
        n += 1
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = abs_sum / np.abs(total)
    return total, cond


def hyp1f1_scaled(a, b, x, ctl: SeriesControl = DEFAULT_CONTROL):
    """Confluent hypergeometric 1F1(a; b; x) in overflow-safe scaled form.

    Returns ``(mantissa, log_scale)`` with ``1F1 = mantissa * exp(log_scale)``.
    ``log_scale`` is ``max(Re x, 0)`` for non-terminating series (the natural
    growth rate) and 0 for polynomials. ``x`` may be any array shape.

    For ``Re x < 0`` Kummer's transformation
    ``1F1(a; b; x) = e^x 1F1(b - a; b; -x)`` is applied first.
    """
    a = complex(a)
    b = float(b)
    if b < 1:
        raise DomainError(f"b must be >= 1, got {b}")
    x_in = np.asarray(x, dtype=complex)
    shape = x_in.shape
    xf = x_in.ravel()
    mant = np.empty_like(xf)
    scale = np.zeros(xf.shape)
    poly = nonpositive_integer(a) is not None

    direct = np.ones(xf.shape, dtype=bool)
    if not poly:
        neg = xf.real < 0
        if np.any(neg):
            m2, s2 = hyp1f1_scaled(b - a, b, -xf[neg], ctl)
            mant[neg] = np.exp(xf[neg] + s2) * m2
            direct &= ~neg

    idx = np.flatnonzero(direct)
    if idx.size:
        xs = xf[idx]
        if poly:
            fallback = np.zeros(idx.size, dtype=bool)
        else:
            ax = np.abs(xs)
            fallback = (ax > _SERIES_MAX_ABS_X) | (ax - np.maximum(xs.real, 0) > _MAX_LOG_GAP)
        ok = idx[~fallback]
        if ok.size:
            total, cond = _series_1f1(a, b, xf[ok], ctl)
            s = np.zeros(ok.size) if poly else np.maximum(xf[ok].real, 0.0)
            mant[ok] = total * np.exp(-s)
            scale[ok] = s
            bad = ~(cond <= _MAX_CONDITION) | ~np.isfinite(total)
            fallback[np.flatnonzero(~fallback)[bad]] = True
        for k in idx[fallback]:
            mant[k], scale[k] = _mp_1f1_scaled(a, b, xf[k], poly)
    return mant.reshape(shape), scale.reshape(shape)


def _mp_1f1_scaled(a, b, x, poly):
    ctx = _mp()
    v = ctx.hyp1f1(ctx.mpc(a), ctx.mpf(b), ctx.mpc(x))
    s = 0.0 if poly else max(float(x.real), 0.0)
    return complex(v * ctx.exp(-s)), s


def hyp1f1(a, b, x, ctl: SeriesControl = DEFAULT_CONTROL):
    """Confluent hypergeometric function 1F1(a; b; x) for complex a and x.

    Examples
    --------
    >>> hyp1f1(-1, 2, 1.5)
    (0.25+0j)
    """
    mant, scale = hyp1f1_scaled(a, b, x, ctl)
    with np.errstate(over="ignore"):
        out = mant * np.exp(scale)
    return complex(out) if np.ndim(out) == 0 else out


def conj_pair_terms(a, c: float, s: float, N: int) -> np.ndarray:
    """Terms ``|(a)_n|^2 s^n / ((c)_n n!)`` for ``n = 0..N``."""
    ratios = gamma_ratio_seq(a, N)
    out = np.empty(N + 1)
    out[0] = 1.0
    lpoch = 0.0
    for n in range(1, N + 1):
        lpoch += math.log((c + n - 1) * n)
        r = abs(ratios[n])
        if r == 0.0:
            out[n:] = 0.0
            break
        out[n] = math.exp(2 * math.log(r) + n * math.log(s) - lpoch) if s > 0 else 0.0
    return out


def conj_pair_series(a, c: float, s: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Sum ``2F1(a, a*; c; s)`` for ``0 <= s < 1`` (or any s if a = -ell).

    Every term is nonnegative, so the loop stops on a geometric tail bound
    ``t_n * rho / (1 - rho) <= rel_tol * S`` held for three consecutive terms,
    where ``rho`` is the larger of the current term ratio and ``s``.
    """
    a = complex(a)
    ell = nonpositive_integer(a)
    if ell is not None:
        return float(np.sum(conj_pair_terms(a, c, s, ell)))
    if not 0 <= s < 1:
        raise DivergentSeriesError(f"2F1 series diverges at |xi|^2 = {s}")
    total = 1.0
    term = 1.0
    run = 0
    for n in range(ctl.max_terms):
        ratio = abs(a + n) ** 2 * s / ((c + n) * (n + 1))
        term *= ratio
        total += term
        rho = max(ratio, s)
        if rho < 1 and term * rho / (1 - rho) <= ctl.rel_tol * total:
            run += 1
            if run >= 3:
                return total
        else:
            run = 0
    raise ConvergenceError(f"2F1 series did not converge in {ctl.max_terms} terms (s={s})")


def hyp2f1_psi(p, m_abs: int, xi_sq: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Normalization series ``2F1(-p/2, -p*/2; 1 + |m|; |xi|^2)``.

    Uses the finite polynomial when ``p = 2*ell``, the Gauss closed form
    ``|m|! Gamma(|m|+1+Re p) / |Gamma(|m|+1+p/2)|^2`` when ``|xi|^2 = 1``,
    and the power series inside the unit disk.
    """
    p = complex(p)
    if xi_sq < 0:
        raise DomainError("xi_sq must be nonnegative")
    a = -p / 2
    if nonpositive_integer(a) is not None:
        return conj_pair_series(a, m_abs + 1, xi_sq, ctl)
    if abs(xi_sq - 1) <= _UNIT_TOL:
        if not p.real > -1 - m_abs:
            raise DivergentSeriesError(
                f"2F1 at |xi|=1 diverges for Re(p) = {p.real} <= -1-|m|"
            )
        log_val = (
            math.lgamma(m_abs + 1)
            + math.lgamma(m_abs + 1 + p.real)
            - 2 * ln_gamma(m_abs + 1 + p / 2).real
        )
        return math.exp(log_val)
    if xi_sq > 1:
        raise DivergentSeriesError(
            f"2F1 diverges for |xi|^2 = {xi_sq} > 1 unless p is a nonnegative even integer"
        )
    return conj_pair_series(a, m_abs + 1, xi_sq, ctl)


def laguerre(n: int, alpha, x):
    """Generalized Laguerre polynomial L_n^(alpha)(x) via the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)
