import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from agk.core import HomogeneousPoly2, agk_quartic
from agk.homogeneous import (certify_lambda, darboux_points, exact_lambda_values, lambda_set,
                             polar_form, poly_roots, rational_integrability_necessary, spectra)

kappas = st.fractions(min_value=-6, max_value=6, max_denominator=30).filter(lambda k: k != -2)


def closed_form(kappa):
    return sorted({4 + 4 * float(kappa), 4 - 8 * float(kappa) / (2 + float(kappa))})


class TestPolarForm:
    @given(st.fractions(-5, 5, max_denominator=9), st.fractions(-5, 5, max_denominator=9),
           st.floats(0.1, 2), st.floats(0, 2 * math.pi))
    def test_matches_direct_evaluation(self, a, b, r, th):
        assume(a != 0 or b != 0)
        V = agk_quartic(a, b)
        pf = polar_form(V)
        assert pf(r, th) == pytest.approx(V(r * math.cos(th), r * math.sin(th)), abs=1e-12)

    def test_odd_degree(self):
        V = HomogeneousPoly2(3, {3: 1, 1: -3})
        pf = polar_form(V)
        assert pf(1.3, 0.4) == pytest.approx(V(1.3 * math.cos(0.4), 1.3 * math.sin(0.4)))


class TestRoots:
    @given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False), min_size=1, max_size=6))
    def test_planted_roots(self, roots):
        roots = [r for r in roots if all(abs(r - s) > 1e-2 for s in roots if s is not r)] or roots[:1]
        c = np.polynomial.polynomial.polyfromroots(roots)
        got = poly_roots(c)
        for r in roots:
            assert np.min(np.abs(got - r)) < 1e-6


class TestLambdaSet:
    @given(kappas)
    def test_closed_form(self, kappa):
        lam = lambda_set(polar_form(agk_quartic(1, kappa)))
        want = closed_form(kappa)
        assert len(lam) == len(want)
        assert np.allclose(sorted(float(np.real(v)) for v in lam), want, atol=1e-9)

    def test_rotation_invariant(self):
        assert lambda_set(polar_form(agk_quartic(1, 0))) == [4.0]

    @pytest.mark.parametrize("coeffs", [{4: 1, 3: 1}, {4: 2, 2: -1, 1: 3, 0: 1}, {3: 1, 0: 2}])
    def test_generic_quartic_matches_hessian_spectra(self, coeffs):
        # independent oracle: eigenvalues of the Hessian at Darboux points
        V = HomogeneousPoly2(4, coeffs)
        lam = [complex(v) for v in lambda_set(polar_form(V))]
        hess = [complex(r.eigenvalues[1]) for r in spectra(V)]
        assert hess
        for h in hess:
            assert min(abs(h - l) for l in lam) < 1e-8
        for l in lam:
            assert min(abs(h - l) for h in hess) < 1e-8

    @given(kappas)
    def test_certified_values_are_exact(self, kappa):
        pf = polar_form(agk_quartic(1, kappa))
        for v, q in exact_lambda_values(pf):
            assert q is not None
            assert certify_lambda(pf, q)
            assert not certify_lambda(pf, q + Fraction(1, 997))


class TestDarboux:
    @given(kappas)
    def test_defining_equation_and_trivial_eigenvalue(self, kappa):
        V = agk_quartic(1, kappa)
        for d in darboux_points(V):
            assert d.residual(V) < 1e-9
        for r in spectra(V):
            assert abs(r.eigenvalues[0] - 12) < 1e-9

    @pytest.mark.parametrize("a, b, expected", [
        (1, 0, [(12, 4)]),
        (1, 2, [(12, 12), (12, 0)]),
        (1, -1, [(12, 0), (12, 12)]),
    ])
    def test_spectra(self, a, b, expected):
        got = {tuple(round(float(np.real(e)), 6) for e in r.eigenvalues) for r in spectra(agk_quartic(a, b))}
        assert got == {tuple(float(e) for e in pair) for pair in expected}

    @given(st.dictionaries(st.integers(0, 4), st.integers(-4, 4), min_size=1))
    def test_points_of_random_quartics_satisfy_definition(self, coeffs):
        assume(any(coeffs.values()))
        V = HomogeneousPoly2(4, coeffs)
        for d in darboux_points(V):
            assert d.residual(V) < 1e-8 * max(1.0, float(np.max(np.abs(d.c))) ** 3)

    def test_vertical_direction(self):
        # x^3 y + 2 y^4 has a Darboux point on the y axis with spectrum (12, 0)
        V = HomogeneousPoly2(4, {3: 1, 0: 2})
        on_axis = [r for r in spectra(V) if abs(r.point.c[0]) < 1e-12]
        assert len(on_axis) == 1
        assert abs(on_axis[0].eigenvalues[1]) < 1e-9

    def test_circle_flag(self):
        pts = darboux_points(agk_quartic(1, 0))
        assert len(pts) == 1 and pts[0].circle


class TestRationalCheck:
    @pytest.mark.parametrize("kappa", [-1, 0, 2])
    def test_integrable_families_not_excluded(self, kappa):
        assert rational_integrability_necessary(agk_quartic(1, kappa)).status == "not-excluded"

    @pytest.mark.parametrize("kappa", [1, Fraction(1, 2), -3, 6])
    def test_generic_excluded(self, kappa):
        rc = rational_integrability_necessary(agk_quartic(1, kappa))
        assert rc.status == "excluded"
        assert rc.failing

    def test_scale_invariance(self):
        a = rational_integrability_necessary(agk_quartic(1, 3))
        b = rational_integrability_necessary(agk_quartic(-7, -21))
        assert [e.exact for e in a.entries] == [e.exact for e in b.entries]
