"""Beam parameters, propagated frames, validity classes and the dual symmetry.

Lengths are in arbitrary but consistent units (the wavelength's unit).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import DomainError, DualNotConstructibleError

__all__ = [
    "AT_INFINITY",
    "BeamParams",
    "ModeIndices",
    "PropagatedFrame",
    "Case",
    "ValidityClass",
    "make_params",
    "frame_at",
    "classify",
    "dual",
    "even_order",
]

EVEN_ORDER_TOL = 1e-12


class _Infinity(enum.Enum):
    AT_INFINITY = "inf"

    def __repr__(self):
        return "AT_INFINITY"


AT_INFINITY = _Infinity.AT_INFINITY
"""Marker for ``q1`` at infinity (``Im q1 -> +inf``)."""


def even_order(p) -> int | None:
    """Return ell when ``p`` is meant as the even integer ``2*ell >= 0``.

    The imaginary part must be exactly zero and ``p/2`` within 1e-12 of a
    nonnegative integer.
    """
    p = complex(p)
    if p.imag != 0:
        return None
    half = p.real / 2
    ell = round(half)
    if ell < 0 or abs(half - ell) > EVEN_ORDER_TOL:
        return None
    return int(ell)


@dataclass(frozen=True)
class ModeIndices:
    """Complex radial order ``p`` and integer OAM index ``m``.

    ``p`` is snapped to an exact even integer when it is one within tolerance.
    """

    p: complex
    m: int

    def __post_init__(self):
        if int(self.m) != self.m:
            raise DomainError(f"m must be an integer, got {self.m}")
        object.__setattr__(self, "m", int(self.m))
        ell = even_order(self.p)
        p = complex(2 * ell) if ell is not None else complex(self.p)
        object.__setattr__(self, "p", p)

    @property
    def m_abs(self) -> int:
        return abs(self.m)

    @property
    def ell(self) -> int | None:
        """Half the radial order when the expansion is a finite sum."""
        return even_order(self.p)


@dataclass(frozen=True)
class BeamParams:
    """Complex beam parameters ``q0 = i z0 - d0`` and ``q1`` (finite or AT_INFINITY)."""

    wavelength: float
    q0: complex
    q1: complex | _Infinity
    k: float = field(init=False)
    z0: float = field(init=False)
    d0: float = field(init=False)
    w0: float = field(init=False)
    theta0: float = field(init=False)
    xi: complex = field(init=False)

    def __post_init__(self):
        if not self.wavelength > 0:
            raise DomainError(f"wavelength must be positive, got {self.wavelength}")
        q0 = complex(self.q0)
        if not q0.imag > 0:
            raise DomainError(f"Im(q0) = z0 must be positive, got {q0.imag}")
        object.__setattr__(self, "q0", q0)
        if self.q1 is not AT_INFINITY:
            object.__setattr__(self, "q1", complex(self.q1))
        z0 = q0.imag
        w0 = math.sqrt(self.wavelength * z0 / math.pi)
        set_ = object.__setattr__
        set_(self, "k", 2 * math.pi / self.wavelength)
        set_(self, "z0", z0)
        set_(self, "d0", -q0.real)
        set_(self, "w0", w0)
        set_(self, "theta0", w0 / (math.sqrt(2) * z0))
        set_(self, "xi", _xi(q0, self.q1))

    @property
    def q1_at_infinity(self) -> bool:
        return self.q1 is AT_INFINITY

    @property
    def z1(self) -> float:
        return math.inf if self.q1_at_infinity else self.q1.imag

    @property
    def d1(self) -> float:
        if self.q1_at_infinity:
            raise DomainError("d1 is undefined when q1 is at infinity")
        return -self.q1.real

    @property
    def is_lg(self) -> bool:
        """True when ``q1 == q0*``, where the beam is a single LG mode."""
        return not self.q1_at_infinity and self.q1 == self.q0.conjugate()

    @property
    def xi_regime(self) -> int:
        """-1, 0 or +1 for |xi| <, =, > 1, decided on Im(q1) exactly."""
        if self.q1_at_infinity or self.q1.imag == 0:
            return 0
        return -1 if self.q1.imag > 0 else 1

    @property
    def xi_inv(self) -> complex:
        """``1/xi``; zero for ``q1 = q0*`` (xi taken as +infinity there)."""
        if self.q1_at_infinity:
            return -1 + 0j
        return (self.q0.conjugate() - self.q1) / (self.q1 - self.q0)


def _xi(q0, q1):
    if q1 is AT_INFINITY:
        return -1 + 0j
    den = q0.conjugate() - q1
    if den == 0:
        # Limit along q1 = q0* + i*eps, which reproduces LG = (-1)^n CiB_{2n}.
        return complex(math.inf, 0.0)
    return (q1 - q0) / den


def make_params(wavelength: float, z0: float, d0: float, q1) -> BeamParams:
    """Build :class:`BeamParams` from the waist description and ``q1``.

    Parameters
    ----------
    wavelength : float
        Wavelength, > 0.
    z0, d0 : float
        Confocal parameter (> 0) and waist location; ``q0 = i z0 - d0``.
    q1 : complex or AT_INFINITY
    """
    if not wavelength > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength}")
    if not z0 > 0:
        raise DomainError(f"z0 must be positive, got {z0}")
    return BeamParams(wavelength, complex(-d0, z0), q1)


@dataclass(frozen=True)
class PropagatedFrame:
    """z-dependent quantities. ``qt_z`` is AT_INFINITY when ``q1`` is.

    ``one_plus_xi_qt`` holds ``(1 + xi) * qt_z``, whose limit ``2 i z0`` is used
    for ``q1`` at infinity (infinite for ``q1 = q0*``).
    """

    z: float
    q_z: complex
    qt_z: complex | _Infinity
    inv_chi_sq: complex
    w_z: float
    gouy: float
    one_plus_xi_qt: complex

    @property
    def chi_sq(self) -> complex:
        if self.inv_chi_sq == 0:
            return complex(math.inf, 0)
        return 1 / self.inv_chi_sq


def frame_at(params: BeamParams, z: float) -> PropagatedFrame:
    """Evaluate q(z), q~(z), 1/chi^2(z), W(z) and the Gouy phase at plane z."""
    q_z = z + params.q0
    dz = z - params.d0
    w_z = params.w0 * math.hypot(1.0, dz / params.z0)
    gouy = math.atan2(dz, params.z0)
    ik2 = 0.5j * params.k
    if params.q1_at_infinity:
        return PropagatedFrame(z, q_z, AT_INFINITY, ik2 / q_z, w_z, gouy, 2j * params.z0)
    qt_z = z + params.q1
    if qt_z == 0:
        inv_chi_sq = complex(math.inf, math.inf)
    else:
        inv_chi_sq = ik2 * (1 / q_z - 1 / qt_z)
    if params.is_lg:
        one_plus_xi_qt = complex(math.inf, 0)
    else:
        one_plus_xi_qt = (1 + params.xi) * qt_z
    return PropagatedFrame(z, q_z, qt_z, inv_chi_sq, w_z, gouy, one_plus_xi_qt)


class Case(enum.Enum):
    CASE_I = "CASE_I"
    CASE_II = "CASE_II"
    CASE_III = "CASE_III"
    CASE_IV = "CASE_IV"
    INVALID = "INVALID"


@dataclass(frozen=True)
class ValidityClass:
    tag: Case
    canonical: bool = True
    detail: str = ""

    @property
    def valid(self) -> bool:
        return self.tag is not Case.INVALID


def classify(params: BeamParams, modes: ModeIndices) -> ValidityClass:
    """Sort a beam into one of the four admissible cases or INVALID.

    ``Im(q1)`` is compared with zero exactly; q1 is user input, not computed.
    """
    p, m_abs = modes.p, modes.m_abs
    if params.q1_at_infinity:
        if p.real > -m_abs - 1:
            return ValidityClass(Case.CASE_I)
        return ValidityClass(
            Case.INVALID,
            detail=f"non-square-integrable: |xi|=1 with Re(p) = {p.real:g} <= -|m|-1",
        )
    z1 = params.q1.imag
    if z1 > 0:
        return ValidityClass(Case.CASE_IV)
    if z1 < 0:
        if modes.ell is not None:
            return ValidityClass(Case.CASE_II)
        return ValidityClass(
            Case.INVALID,
            detail="non-square-integrable: |xi|>1 with p not a nonnegative even integer",
        )
    if p.real >= -m_abs:
        return ValidityClass(Case.CASE_III)
    reason = f"singular at z=d1: Re(p) = {p.real:g} < -|m| = {-m_abs}"
    if p.real <= -m_abs - 1:
        reason += "; also non-square-integrable: |xi|=1 with Re(p) <= -|m|-1"
    return ValidityClass(Case.INVALID, detail=reason)


def dual(params: BeamParams, modes: ModeIndices) -> tuple[BeamParams, ModeIndices]:
    """Apply ``(p, m, q0, q1) -> (-p - 2|m| - 2, m, q1, q0)``.

    Only constructible when ``Im(q1) > 0`` so the image keeps ``Im(q0) > 0``.
    """
    if params.q1_at_infinity or not params.q1.imag > 0:
        raise DualNotConstructibleError(
            "dual requires finite q1 with Im(q1) > 0"
        )
    new_p = -modes.p - 2 * modes.m_abs - 2
    return (
        BeamParams(params.wavelength, params.q1, params.q0),
        ModeIndices(new_p, modes.m),
    )
