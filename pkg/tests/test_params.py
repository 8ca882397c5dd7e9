"""Beam parameters, propagated frames, case classification and the dual map."""

import cmath
import math

import numpy as np
import pytest

from cibeam import (
    AT_INFINITY,
    BeamParams,
    Case,
    ModeIndices,
    classify,
    dual,
    frame_at,
    hyp2f1_psi,
    make_params,
)
from cibeam.errors import DivergentSeriesError, DomainError, DualNotConstructibleError


class TestMakeParams:
    def test_q1_equal_q0(self):
        assert make_params(1, 1, 0, 1j).xi == 0

    def test_q1_at_infinity(self):
        prm = make_params(1, 1, 0, AT_INFINITY)
        assert prm.xi == -1
        assert prm.q1_at_infinity
        assert prm.z1 == math.inf

    def test_q1_real_part_of_q0(self):
        assert make_params(1, 1, 0, 0).xi == pytest.approx(1, abs=1e-15)

    def test_derived_scales(self):
        prm = make_params(0.6, 2.0, -0.3, 0.1 + 0.5j)
        assert prm.k == pytest.approx(2 * math.pi / 0.6)
        assert prm.w0**2 == pytest.approx(0.6 * 2.0 / math.pi)
        assert prm.theta0 == pytest.approx(prm.w0 / (math.sqrt(2) * 2.0))
        assert prm.q0 == complex(0.3, 2.0)
        assert (prm.z0, prm.d0, prm.z1, prm.d1) == (2.0, -0.3, 0.5, -0.1)

    @pytest.mark.parametrize("lam,z0", [(0, 1), (-1, 1), (1, 0), (1, -2)])
    def test_rejects(self, lam, z0):
        with pytest.raises(DomainError):
            make_params(lam, z0, 0, 1j)

    def test_d1_undefined_at_infinity(self):
        with pytest.raises(DomainError):
            make_params(1, 1, 0, AT_INFINITY).d1

    def test_direct_constructor_checks_q0(self):
        with pytest.raises(DomainError):
            BeamParams(1.0, 1 - 1j, 2j)


class TestFrame:
    def test_waist_plane(self):
        prm = make_params(1, 1.3, 0.7, 2j)
        fr = frame_at(prm, 0.7)
        assert fr.w_z == pytest.approx(prm.w0, rel=1e-15)
        assert fr.gouy == 0

    def test_rayleigh_plane(self):
        prm = make_params(1, 1.3, 0.7, 2j)
        fr = frame_at(prm, 2.0)
        assert fr.w_z == pytest.approx(prm.w0 * math.sqrt(2), rel=1e-15)
        assert fr.gouy == pytest.approx(math.pi / 4, rel=1e-15)

    def test_pupil_plane(self):
        prm = make_params(1, 1.0, 0.0, -0.4 + 2.5j)
        assert frame_at(prm, 0.4).qt_z == 2.5j

    def test_at_infinity_limits(self):
        prm = make_params(1, 1.5, 0.2, AT_INFINITY)
        fr = frame_at(prm, 3.0)
        assert fr.qt_z is AT_INFINITY
        assert fr.inv_chi_sq == pytest.approx(0.5j * prm.k / fr.q_z)
        assert fr.one_plus_xi_qt == 3j

    def test_identities_random(self, rng):
        for _ in range(200):
            z0, d0 = rng.uniform(0.1, 5), rng.uniform(-3, 3)
            q1 = complex(*rng.uniform(-4, 4, 2))
            prm = make_params(rng.uniform(0.2, 2), z0, d0, q1)
            z = rng.uniform(-10, 10)
            fr = frame_at(prm, z)
            assert fr.q_z == pytest.approx(z + prm.q0, rel=1e-15)
            assert fr.qt_z == pytest.approx(z + q1, rel=1e-15)
            ref = 0.5j * prm.k * (1 / fr.q_z - 1 / fr.qt_z)
            assert abs(fr.inv_chi_sq - ref) <= 1e-14 * abs(ref)
            assert fr.chi_sq * fr.inv_chi_sq == pytest.approx(1, rel=1e-14)
            assert fr.w_z == pytest.approx(prm.w0 * math.hypot(1, (z - d0) / z0), rel=1e-14)
            unit = complex(z0, z - d0) / abs(complex(z0, z - d0))
            assert cmath.exp(1j * fr.gouy) == pytest.approx(unit, rel=1e-14)


class TestModeIndices:
    def test_snaps_even_order(self):
        modes = ModeIndices(4 + 1e-14, 1)
        assert modes.p == 4 and modes.ell == 2

    def test_keeps_nearby_values(self):
        assert ModeIndices(4 + 1e-9, 1).ell is None
        assert ModeIndices(complex(4, 1e-300), 1).ell is None
        assert ModeIndices(-2, 1).ell is None
        assert ModeIndices(3, 1).ell is None

    def test_integer_m(self):
        assert ModeIndices(0, -3).m_abs == 3
        with pytest.raises(DomainError):
            ModeIndices(0, 1.5)


class TestClassify:
    def test_any_p_for_positive_z1(self):
        prm = BeamParams(1.0, 1j, 2j)
        assert classify(prm, ModeIndices(-3.7 + 5j, 1)).tag is Case.CASE_IV

    def test_lg_parameters(self):
        prm = BeamParams(1.0, 1j, -1j)
        assert classify(prm, ModeIndices(4, 2)).tag is Case.CASE_II

    def test_singular_pupil(self):
        cls = classify(BeamParams(1.0, 1j, 0), ModeIndices(-2, 1))
        assert cls.tag is Case.INVALID and not cls.valid
        assert "singular" in cls.detail

    @pytest.mark.parametrize(
        "q1,p,m,tag",
        [
            (AT_INFINITY, -2.5, 2, Case.CASE_I),
            (AT_INFINITY, -3.0, 2, Case.INVALID),
            (AT_INFINITY, 1 + 9j, 0, Case.CASE_I),
            (-1j, 6, 3, Case.CASE_II),
            (-1j, 3, 2, Case.INVALID),
            (-1j, 4 + 1e-3j, 2, Case.INVALID),
            (-1j, -2, 0, Case.INVALID),
            (0.5, -2, 2, Case.CASE_III),
            (0.5, -2.5 + 3j, 2, Case.INVALID),
            (0.5, -3.5, 2, Case.INVALID),
            (0.5 + 1e-300j, -30, 2, Case.CASE_IV),
        ],
    )
    def test_truth_table(self, q1, p, m, tag):
        assert classify(make_params(1, 1, 0, q1), ModeIndices(p, m)).tag is tag

    def test_canonical(self):
        assert classify(BeamParams(1.0, 1j, 2j), ModeIndices(0, 0)).canonical


class TestDual:
    def test_simple(self):
        prm, modes = dual(BeamParams(1.0, 1j, 2j), ModeIndices(0, 0))
        assert (prm.q0, prm.q1, modes.p, modes.m) == (2j, 1j, -2, 0)

    def test_arithmetic(self):
        prm, modes = dual(BeamParams(1.0, 1j, 1j), ModeIndices(-1, 2))
        assert modes.p == -5 and modes.m == 2
        assert (prm.q0, prm.q1) == (1j, 1j)

    @pytest.mark.parametrize("q1", [AT_INFINITY, 0.3, 0.3 - 1j])
    def test_not_constructible(self, q1):
        with pytest.raises(DualNotConstructibleError):
            dual(make_params(1, 1, 0, q1), ModeIndices(0, 0))

    def test_involution(self, rng):
        for _ in range(100):
            prm = make_params(rng.uniform(0.5, 2), rng.uniform(0.1, 3), rng.uniform(-2, 2),
                              complex(rng.uniform(-2, 2), rng.uniform(0.1, 3)))
            modes = ModeIndices(complex(*rng.uniform(-5, 5, 2)), int(rng.integers(-4, 5)))
            back_prm, back_modes = dual(*dual(prm, modes))
            assert back_prm == prm
            assert back_modes.p == pytest.approx(modes.p, abs=1e-14) and back_modes.m == modes.m


def test_xi_regimes_random(rng):
    for _ in range(500):
        prm = make_params(1, rng.uniform(0.05, 5), rng.uniform(-5, 5),
                          complex(rng.uniform(-5, 5), rng.choice([-1, 0, 1]) * rng.uniform(0.05, 5)))
        s = abs(prm.xi)
        if prm.q1.imag > 0:
            assert s < 1 and prm.xi_regime == -1
        elif prm.q1.imag < 0:
            assert s > 1 and prm.xi_regime == 1
        else:
            assert s == pytest.approx(1, abs=1e-13) and prm.xi_regime == 0


def test_classify_consistent_with_normalization(rng):
    for _ in range(400):
        kind = rng.integers(4)
        q1 = [AT_INFINITY, complex(rng.uniform(-2, 2), -rng.uniform(0.1, 2)),
              complex(rng.uniform(-2, 2), 0), complex(rng.uniform(-2, 2), rng.uniform(0.1, 2))][kind]
        prm = make_params(1, rng.uniform(0.2, 2), rng.uniform(-1, 1), q1)
        if rng.uniform() < 0.3:
            p = complex(2 * int(rng.integers(-2, 5)))
        else:
            p = complex(rng.uniform(-8, 6), rng.choice([0, 1]) * rng.uniform(-4, 4))
        modes = ModeIndices(p, int(rng.integers(-4, 5)))
        cls = classify(prm, modes)
        s = 1.0 if prm.xi_regime == 0 else abs(prm.xi) ** 2
        if cls.valid and not prm.is_lg:
            assert hyp2f1_psi(modes.p, modes.m_abs, s) > 0
        elif "non-square-integrable" in cls.detail:
            with pytest.raises(DivergentSeriesError):
                hyp2f1_psi(modes.p, modes.m_abs, s)
