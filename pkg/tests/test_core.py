from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from agk.core import (HomogeneousPoly2, Params, PhaseState, agk_quartic, as_rational, energy,
                      exact_or_snapped, force_xy, grad_V, hessian_V, potential_xy, snap_rational,
                      split_homogeneous)

coord = st.floats(-3, 3, allow_nan=False)
param = st.floats(-5, 5, allow_nan=False)
small = st.fractions(min_value=-20, max_value=20, max_denominator=50)


class TestRationals:
    def test_strings_are_exact(self):
        assert as_rational("1/3") == Fraction(1, 3)
        assert as_rational("0.1") == Fraction(1, 10)

    def test_float_keeps_binary_value(self):
        assert as_rational(0.1) != Fraction(1, 10)
        assert as_rational(0.1) == Fraction(0.1)

    def test_bool_rejected(self):
        with pytest.raises(TypeError):
            as_rational(True)

    @given(small)
    def test_snap_recovers_short_fractions(self, q):
        assert snap_rational(float(q)) == q

    def test_snap_gives_up_without_short_approximant(self):
        assert snap_rational(np.sqrt(2), tol=1e-15) is None
        assert snap_rational(np.pi, max_den=100) is None

    def test_snap_is_within_tolerance(self):
        q = snap_rational(np.pi)
        assert q.denominator <= 10**6 and abs(float(q) - np.pi) <= 1e-9 * np.pi

    def test_exact_or_snapped_flags(self):
        assert exact_or_snapped(Fraction(1, 3)) == (Fraction(1, 3), False)
        assert exact_or_snapped(0.5) == (Fraction(1, 2), False)
        assert exact_or_snapped(0.1) == (Fraction(1, 10), True)


class TestParams:
    def test_kappa_exact(self):
        assert Params(-5, 3, 1).kappa == Fraction(1, 3)

    def test_kappa_undefined_at_a0(self):
        with pytest.raises(ValueError):
            Params(1, 0, 1).kappa

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            Params(float("nan"), 1, 0)

    def test_real_state_rejects_imaginary_part(self):
        with pytest.raises(ValueError):
            PhaseState(1j, 0, 0, 0)
        assert PhaseState(1j, 0, 0, 0, complex_mode=True).x == 1j


class TestPotential:
    @given(coord, coord, param, param, param)
    def test_force_is_minus_gradient(self, x, y, mu, a, b):
        p = Params(mu, a, b)
        e = 1e-6
        gx = (potential_xy(x + e, y, p) - potential_xy(x - e, y, p)) / (2 * e)
        gy = (potential_xy(x, y + e, p) - potential_xy(x, y - e, p)) / (2 * e)
        fx, fy = force_xy(x, y, p)
        scale = 1 + abs(mu) + abs(a) * 30 + abs(b) * 30
        assert abs(fx + gx) < 1e-6 * scale
        assert abs(fy + gy) < 1e-6 * scale

    @given(coord, coord, param, param, param)
    def test_hessian_matches_gradient_differences(self, x, y, mu, a, b):
        p = Params(mu, a, b)
        e = 1e-6
        H = hessian_V(PhaseState(x, y, 0, 0), p)
        gxp = grad_V(PhaseState(x + e, y, 0, 0), p)
        gxm = grad_V(PhaseState(x - e, y, 0, 0), p)
        scale = 1 + abs(mu) + abs(a) * 30 + abs(b) * 30
        assert np.allclose(H[:, 0], (gxp - gxm) / (2 * e), atol=1e-5 * scale)
        assert H[0, 1] == H[1, 0]

    def test_energy_at_rest_is_potential(self):
        p = Params(-5, 1, 0)
        assert energy(PhaseState(1, 0, 0, 0), p) == pytest.approx(2.5 - 0.25)


class TestHomogeneous:
    @given(small, small, coord, coord)
    def test_euler_identity(self, a, b, x, y):
        if a == 0 and b == 0:
            return
        V = agk_quartic(a, b)
        g = V.grad(x, y)
        assert x * g[0] + y * g[1] == pytest.approx(4 * V(x, y), abs=1e-9 * (1 + abs(V(x, y))))

    def test_quartic_matches_potential(self):
        p = Params(0, 2, 3)
        V = agk_quartic(2, 3)
        assert V(0.7, -1.3) == pytest.approx(potential_xy(0.7, -1.3, p))

    def test_monomial_degree_checked(self):
        with pytest.raises(ValueError):
            HomogeneousPoly2(4, {(1, 2): 1})
        with pytest.raises(ValueError):
            HomogeneousPoly2(3, {0: 0})

    def test_split(self):
        low, high = split_homogeneous(Params(0, 1, 0))
        assert low is None and high.degree == 4
        low, high = split_homogeneous(Params(1, 0, 0))
        assert low.degree == 2 and high is None
