"""Second moments, rms and encircled-energy divergence of circular beams."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from . import specfun
from .errors import DomainError, InvalidBeamError, NoBracketError, UndefinedMomentError
from .modes import _psi_scaled, _xi_sq
from .params import BeamParams, ModeIndices, classify, even_order, frame_at
from .specfun import DEFAULT_CONTROL, SeriesControl

__all__ = [
    "DEFAULT_I0",
    "DivergenceReport",
    "SecondMomentCoupling",
    "coupling",
    "lg_second_moment",
    "phi_factor",
    "sigma_rms_sq",
    "theta_rms",
    "theta_ee",
    "optimal_im_p",
    "minimize_im_p_numeric",
    "divergence_report",
]

DEFAULT_I0 = 1 - math.exp(-1)
_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class SecondMomentCoupling:
    b: float
    c: complex


def coupling(l: int, m: int, params: BeamParams, z: float) -> SecondMomentCoupling:
    """``B = |m| + 2l + 1`` and ``C = sqrt(l (|m| + l)) exp(2 i gouy(z))``."""
    gouy = frame_at(params, z).gouy
    return SecondMomentCoupling(
        abs(m) + 2 * l + 1, math.sqrt(l * (abs(m) + l)) * complex(math.cos(2 * gouy), math.sin(2 * gouy))
    )


def lg_second_moment(n: int, l: int, m: int, params: BeamParams, z: float) -> complex:
    """Closed form of ``int r^2 LG_{l,m} LG*_{n,m} dA`` in plane ``z``.

    Only ``|n - l| <= 1`` couple; everything else vanishes.
    """
    w_sq = frame_at(params, z).w_z ** 2
    out = 0j
    if n == l:
        out += coupling(l, m, params, z).b
    if n + 1 == l:
        out -= coupling(l, m, params, z).c
    if n == l + 1:
        out -= coupling(n, m, params, z).c.conjugate()
    return w_sq * out / 2


def _regime_of(xi: complex) -> int:
    if math.isinf(xi.real) or math.isinf(xi.imag):
        return 1
    s = abs(xi) ** 2
    if abs(s - 1) <= _UNIT_TOL:
        return 0
    return -1 if s < 1 else 1


def _moments(p: complex, m_abs: int, xi: complex, regime: int, ctl: SeriesControl):
    """Return ``(Phi, xi * (p - Phi))``.

    Raises UndefinedMomentError where the intensity has an r^-4 (or heavier)
    tail, i.e. on the unit circle with ``Re(p) + |m| <= 0`` and p not 2*ell.
    """
    if p == 0:
        return 0.0, 0j
    if regime == 0:
        if not p.real + m_abs > 0:
            raise UndefinedMomentError(
                f"second moment diverges for |xi|=1 and Re(p) + |m| = {p.real + m_abs:g} <= 0"
            )
        phi = abs(p) ** 2 / (2 * (p.real + m_abs))
        return phi, xi * (p - phi)
    a = -p / 2
    c = m_abs + 1
    if regime == -1:
        s = abs(xi) ** 2
        num = specfun.conj_pair_series(a + 1, c + 1, s, ctl)
        den = specfun.conj_pair_series(a, c, s, ctl)
        phi = abs(p * xi) ** 2 / (2 + 2 * m_abs) * num / den
        return phi, xi * (p - phi)
    ell = even_order(p)
    if ell is None:
        raise specfun.DivergentSeriesError("|xi| > 1 requires p = 2*ell")
    # Polynomials in w = 1/xi so that q1 = q0* (w = 0) is the plain limit.
    w = 0j if math.isinf(abs(xi)) else 1 / xi
    w2 = abs(w) ** 2
    d = specfun.conj_pair_terms(a, c, 1.0, ell)
    e = specfun.conj_pair_terms(a + 1, c + 1, 1.0, ell - 1)
    den = sum(t * w2 ** (ell - n) for n, t in enumerate(d))
    num = sum(t * w2 ** (ell - 1 - n) for n, t in enumerate(e))
    phi = abs(p) ** 2 / (2 + 2 * m_abs) * num / den
    return phi, (0j if w == 0 else (p - phi) / w)


def phi_factor(p, m: int, xi, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Hypergeometric ratio ``Phi`` entering the rms width; equals ``2 <n>`` over LG modes.

    On ``|xi| = 1`` the closed form ``|p|^2 / (2 (Re p + |m|))`` is used.
    """
    p, xi = complex(p), complex(xi)
    return _moments(p, abs(m), xi, _regime_of(xi), ctl)[0]


def _beam_moments(modes: ModeIndices, params: BeamParams, ctl):
    cls = classify(params, modes)
    if not cls.valid:
        raise InvalidBeamError(cls.detail)
    xi = params.xi
    regime = params.xi_regime
    if regime == 0:
        xi = -1 + 0j if params.q1_at_infinity else xi / abs(xi)
    return _moments(modes.p, modes.m_abs, xi, regime, ctl)


def sigma_rms_sq(modes: ModeIndices, params: BeamParams, z: float,
                 ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Intensity second moment ``int r^2 |CiB|^2 dA`` in plane ``z``.

    ``W`` and the Gouy phase are taken at the offset ``z - d0`` from the waist.
    """
    phi, coupling_term = _beam_moments(modes, params, ctl)
    fr = frame_at(params, z)
    rot = complex(math.cos(2 * fr.gouy), math.sin(2 * fr.gouy))
    return fr.w_z**2 / 2 * (1 + modes.m_abs + phi + (coupling_term * rot).real)


def theta_rms(modes: ModeIndices, params: BeamParams,
              ctl: SeriesControl = DEFAULT_CONTROL) -> float | None:
    """Far-field rms divergence, or None where the second moment is infinite.

    None occurs for real ``q1`` with ``Re(p) = -|m|`` (r^-4 intensity tail) and,
    for ``q1`` at infinity, whenever ``Re(p) <= -|m|``.
    """
    try:
        phi, coupling_term = _beam_moments(modes, params, ctl)
    except UndefinedMomentError:
        return None
    return params.theta0 * math.sqrt(1 + modes.m_abs + phi - coupling_term.real)


def _log_abs_pow(base: complex, p: complex) -> float:
    """``log |base^p|`` on the principal branch."""
    return (p * complex(math.log(abs(base)), math.atan2(base.imag, base.real))).real


def _ee_problem(modes: ModeIndices, params: BeamParams, i0: float, ctl):
    """Return ``(log_integrand(t), target)`` of the encircled-energy equation."""
    p, m_abs = modes.p, modes.m_abs
    if params.q1_at_infinity:
        # xi -> -1 limit: |H(xi t/(1+xi))|^2 / |(1+xi)^p| tends to
        # t^Re(p) |Gamma(|m|+1)/Gamma(|m|+1+p/2)|^2, and Psi has its closed form.
        expo = m_abs + p.real
        target = i0 * math.gamma(expo + 1)

        def log_g(t):
            return -t + expo * np.log(t)

        return log_g, target
    a, b = -p / 2, m_abs + 1
    psi = _psi_scaled(modes, params, ctl)
    if params.xi_regime == 1:
        w = params.xi_inv
        y = 1 / (1 + w)
        log_norm = math.log(psi) - 2 * modes.ell * math.log(abs(1 + w))
    else:
        xi = params.xi
        y = xi / (1 + xi)
        log_norm = math.log(psi) - _log_abs_pow(1 + xi, p)
    target = i0 * math.factorial(m_abs) * math.exp(log_norm)

    def log_g(t):
        mant, scale = specfun.hyp1f1_scaled(a, b, y * np.asarray(t), ctl)
        with np.errstate(divide="ignore"):
            return -t + m_abs * np.log(t) + 2 * np.log(np.abs(mant)) + 2 * scale

    return log_g, target


def theta_ee(modes: ModeIndices, params: BeamParams, i0: float = DEFAULT_I0,
             ctl: SeriesControl = DEFAULT_CONTROL, rel_tol: float = 1e-12) -> float:
    """Encircled-energy divergence holding power fraction ``i0`` in the far field.

    Solves ``int_0^u e^-t t^|m| |1F1(-p/2; |m|+1; xi t/(1+xi))|^2 dt = target``
    for ``u = (theta/theta0)^2`` by bracketing and Brent's method; the left side
    is nondecreasing in ``u``.
    """
    if not 0 < i0 < 1:
        raise DomainError(f"i0 must lie in (0, 1), got {i0}")
    cls = classify(params, modes)
    if not cls.valid:
        raise InvalidBeamError(cls.detail)
    log_g, target = _ee_problem(modes, params, i0, ctl)

    def g(t):
        # quad never samples the endpoint t = 0
        return float(np.exp(log_g(t))) if t > 0 else 0.0

    cache = {0.0: 0.0}

    def excess(u):
        lo = max(k for k in cache if k <= u)
        val, _ = integrate.quad(g, lo, u, epsabs=0.0, epsrel=rel_tol, limit=400)
        cache[u] = cache[lo] + val
        return cache[u] - target

    hi = max(1.0, modes.m_abs + 1 + abs(modes.p))
    while excess(hi) < 0:
        hi *= 2
        if hi > 1e7:
            raise NoBracketError("encircled-energy target exceeds the total integral")
    u = optimize.brentq(excess, 0.0, hi, xtol=1e-15, rtol=1e-13, maxiter=200)
    return params.theta0 * math.sqrt(u)


def optimal_im_p(re_p: float, m: int, params: BeamParams) -> tuple[float, float]:
    """Imaginary part of p minimizing theta_rms for real ``q1 = -d1``, and that minimum."""
    if params.q1_at_infinity or params.q1.imag != 0:
        raise DomainError("optimal_im_p requires a real q1")
    s = re_p + abs(m)
    if not s > 0:
        raise DomainError(f"optimal_im_p requires Re(p) + |m| > 0, got {s}")
    delta = params.d1 - params.d0
    z0 = params.z0
    im_p = s * delta / z0
    theta = params.theta0 * math.sqrt(1 + m**2 / s * z0**2 / (z0**2 + delta**2))
    return im_p, theta


def minimize_im_p_numeric(re_p: float, m: int, params: BeamParams,
                          ctl: SeriesControl = DEFAULT_CONTROL) -> tuple[float, float]:
    """Golden-section minimization of theta_rms over Im(p) (independent check)."""
    s = re_p + abs(m)
    guess = s * (params.d1 - params.d0) / params.z0
    width = max(10 * abs(params.d1 - params.d0) / params.z0 * s, 1.0)

    def f(im_p):
        return theta_rms(ModeIndices(complex(re_p, im_p), m), params, ctl) / params.theta0

    res = optimize.minimize_scalar(
        f, bracket=(guess - width / 2, guess + width / 2), method="golden",
        options={"xtol": 1e-12},
    )
    return float(res.x), float(res.fun) * params.theta0


@dataclass(frozen=True)
class DivergenceReport:
    theta0: float
    theta_rms: float | None
    theta_ee: float
    phi_factor: float | None
    psi: float
    i0: float
    notes: str = ""


def divergence_report(modes: ModeIndices, params: BeamParams, i0: float = DEFAULT_I0,
                      ctl: SeriesControl = DEFAULT_CONTROL) -> DivergenceReport:
    """Collect theta0, theta_rms, theta_EE, Phi and Psi for one beam."""
    notes = []
    try:
        phi, _ = _beam_moments(modes, params, ctl)
    except UndefinedMomentError as exc:
        phi = None
        notes.append(str(exc))
    th_rms = theta_rms(modes, params, ctl)
    if th_rms is None:
        notes.append("theta_rms undefined: intensity second moment diverges")
    if params.is_lg:
        psi = math.inf if modes.ell else 1.0
    else:
        psi = specfun.hyp2f1_psi(modes.p, modes.m_abs, _xi_sq(params), ctl)
    return DivergenceReport(
        theta0=params.theta0,
        theta_rms=th_rms,
        theta_ee=theta_ee(modes, params, i0, ctl),
        phi_factor=phi,
        psi=psi,
        i0=i0,
        notes="; ".join(notes),
    )
