"""Direct quadrature checks, independent of the closed forms they verify.

Intensities of fields with OAM index ``m`` are azimuthally uniform, so the
angular integral is done exactly (a factor 2*pi) and only the radial integral
is numerical.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .errors import NoBracketError
from .modes import cib_field, lg_field
from .params import BeamParams, ModeIndices, frame_at

__all__ = [
    "radial_moment",
    "cib_power",
    "cib_second_moment",
    "lg_overlap",
    "lg_r2_overlap",
    "encircled_radius",
]


def _segments(scale: float, n: int = 6):
    edges = [0.0] + [scale * 2.0**k for k in range(-1, n)]
    return list(zip(edges[:-1], edges[1:])), edges[-1]


def radial_moment(density: Callable[[float], float], scale: float, power: int = 1,
                  rel_tol: float = 1e-11) -> float:
    """``2 pi int_0^inf r^power density(r) dr`` on dyadic panels of width ~``scale``.

    The absolute floor lets integrals that vanish (orthogonal modes) terminate.
    """
    f = lambda r: r**power * density(r)
    pieces, r_end = _segments(scale)
    floor = 1e-15 * scale ** (power - 1)
    total = 0.0
    for lo, hi in pieces:
        val, _ = integrate.quad(f, lo, hi, epsabs=floor, epsrel=rel_tol, limit=200)
        total += val
    val, _ = integrate.quad(f, r_end, math.inf, epsabs=floor, epsrel=rel_tol, limit=200)
    return 2 * math.pi * (total + val)


def _cib_density(modes, params, z):
    return lambda r: abs(cib_field(modes, params, r, 0.0, z)) ** 2


def cib_power(modes: ModeIndices, params: BeamParams, z: float) -> float:
    """Total power of the circular beam in plane ``z``."""
    return radial_moment(_cib_density(modes, params, z), frame_at(params, z).w_z)


def cib_second_moment(modes: ModeIndices, params: BeamParams, z: float) -> float:
    """``int |CiB|^2 r^2 dA`` in plane ``z``."""
    return radial_moment(_cib_density(modes, params, z), frame_at(params, z).w_z, power=3)


def lg_overlap(n1: int, n2: int, m: int, params: BeamParams, z: float) -> complex:
    """``int LG*_{n1,m} LG_{n2,m} dA``."""
    return _lg_radial(n1, n2, m, params, z, power=1)


def lg_r2_overlap(n: int, l: int, m: int, params: BeamParams, z: float) -> complex:
    """``int r^2 LG_{l,m} LG*_{n,m} dA``."""
    return _lg_radial(n, l, m, params, z, power=3)


def _lg_radial(n1, n2, m, params, z, power):
    w = frame_at(params, z).w_z

    def part(fn):
        return radial_moment(lambda r: fn(np.conj(lg_field(n1, m, params, r, 0.0, z))
                                          * lg_field(n2, m, params, r, 0.0, z)), w, power)

    return complex(part(np.real), part(np.imag))


def encircled_radius(modes: ModeIndices, params: BeamParams, z: float, i0: float,
                     rel_tol: float = 1e-10) -> float:
    """Radius whose centered disc holds power ``i0`` of the (unit-power) beam at ``z``.

    Energies are fractions of unit power, so a 1e-13 absolute floor is safe and
    stops quad from chasing faint interference fringes in the far tail.
    """
    density = _cib_density(modes, params, z)
    w = frame_at(params, z).w_z
    f = lambda r: 2 * math.pi * r * density(r)
    cache = {0.0: 0.0}

    def energy(radius):
        lo = max(k for k in cache if k <= radius)
        val, _ = integrate.quad(f, lo, radius, epsabs=1e-13, epsrel=rel_tol, limit=200)
        cache[radius] = cache[lo] + val
        return cache[radius] - i0

    hi = w
    while energy(hi) < 0:
        hi *= 2
        if hi > 1e8 * w:
            raise NoBracketError("encircled energy never reaches i0")
    return optimize.brentq(energy, 0.0, hi, xtol=1e-14 * hi, rtol=1e-13)
