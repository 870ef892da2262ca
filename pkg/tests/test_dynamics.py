import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from agk.core import Params, PhaseState, energy
from agk.dynamics import (BRANCHES, PLANES, ParticularSolution, PoleError, fundamental_matrix,
                          integrate_flow, mathieu_coefficients, mathieu_equation, monodromy,
                          normal_coefficient, poschl_teller_form, restricted_hamiltonian,
                          tabulated_variational_flow, transformed_nve_coefficient, variational_flow,
                          variational_matrix, variational_rhs)

VALID = [key for key, b in BRANCHES.items() if b.sigma is not None]
DEFECTIVE = [key for key, b in BRANCHES.items() if b.sigma is None]
pos = st.floats(0.2, 5)
times = st.floats(0.05, 2.0)


class TestFlow:
    def test_energy_conserved(self):
        p = Params(-1, -0.5, 0.3)
        s0 = PhaseState(0.3, -0.2, 0.1, 0.4)
        s1 = integrate_flow(s0, p, 5.0)
        assert energy(PhaseState(*s1), p) == pytest.approx(energy(s0, p), abs=1e-10)

    @pytest.mark.parametrize("name", ["G1", "G2", "G3", "G6"])
    def test_invariant_planes(self, name):
        plane = PLANES[name]
        p = Params(-1, -0.5, 0.7)
        traj = integrate_flow(plane.embed(0.4, 0.3), p, 4.0, t_eval=np.linspace(0, 4, 9))
        assert max(plane.residual(s) for s in traj) < 1e-10

    @pytest.mark.parametrize("name", ["G4", "G5"])
    def test_mixed_reflections_are_not_invariant(self, name):
        plane = PLANES[name]
        assert not plane.invariant
        traj = integrate_flow(plane.embed(0.4, 0.3), Params(-1, -0.5, 0.7), 1.0)
        assert plane.residual(traj) > 1e-3

    def test_restricted_hamiltonian(self):
        assert restricted_hamiltonian("G3", Params(1, 2, 3)).quartic == 7
        with pytest.raises(ValueError):
            restricted_hamiltonian("G2", Params(1, 2, 3))


class TestParticularSolutions:
    @pytest.mark.parametrize("key", VALID)
    @given(mu=pos, c=pos, t=times)
    def test_valid_branches_solve_the_restricted_equation(self, key, mu, c, t):
        ps = ParticularSolution("G1", *key, Params(mu, c, 0))
        try:
            assert ps.energy_residual(t) < 1e-10
            # central difference of x': relative truncation error grows like (1e-4/t)^2
            assert ps.ode_residual(t) < 1e-4
        except PoleError:
            pass

    @pytest.mark.parametrize("key", DEFECTIVE)
    @given(mu=pos, c=pos, t=times)
    def test_defective_branches_solve_the_sign_flipped_equation(self, key, mu, c, t):
        # the printed form solves x'^2 = -2h + mu x^2 - (c/2) x^4 (a -> -a) under some time rotation
        ps = ParticularSolution("G1", *key, Params(mu, c, 0))
        best = math.inf
        for sigma in (1, 1j):
            try:
                x, dx = ps.printed(sigma * t)
            except PoleError:
                return
            dx *= sigma
            terms = (dx * dx, -2 * ps.h, mu * x * x, -0.5 * c * x ** 4)
            scale = max(1.0, *(abs(v) for v in terms))
            best = min(best, abs(terms[0] - terms[1] - terms[2] - terms[3]) / scale)
        assert best < 1e-10
        assert not ps.valid

    def test_g3_uses_two_a_plus_b(self):
        ps = ParticularSolution("G3", "h0", 1, Params(1.5, 1, 0.5))
        assert ps.coeff == 2.5
        s = ps.phase_state(0.3)
        assert s.x == s.y and s.px == s.py

    def test_pole_detected(self):
        ps = ParticularSolution("G1", "h0", 4, Params(1, 1, 0))
        with pytest.raises(PoleError):
            ps.printed(0.0)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            ParticularSolution("G1", "h0", 5, Params(1, 1, 0))
        with pytest.raises(ValueError):
            ParticularSolution("G3", "h0", 1, Params(1, 1, -2))

    def test_real_branch_is_a_flow_orbit(self):
        # h0-4 with mu > 0, a > 0 is real: compare against direct integration
        p = Params(1.2, 0.8, 0.4)
        ps = ParticularSolution("G1", "h0", 4, p)
        s0 = ps.phase_state(0.5).as_array().real
        s1 = integrate_flow(s0, p, 0.4)
        x1, dx1 = ps.trajectory(0.9)
        assert s1[0] == pytest.approx(x1.real, rel=1e-9)
        assert s1[2] == pytest.approx(dx1.real, rel=1e-9)


class TestVariational:
    @given(st.floats(-2, 2), st.floats(-2, 2))
    def test_matrix_is_hamiltonian(self, x, y):
        A = variational_matrix(x, y, Params(0.7, -1.1, 0.4))
        J = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
        assert np.allclose(A.T @ J + J @ A, 0)

    @pytest.mark.parametrize("plane, state", [("G1", (0.5, 0, 0, 0)), ("G3", (0.5, 0.5, 0, 0))])
    def test_tabulated_matches_general(self, plane, state):
        p = Params(0.7, -1.1, 0.4)
        assert np.allclose(variational_rhs(plane, p, state[0]), variational_matrix(state[0], state[1], p))

    def test_transition_matrix_is_symplectic(self):
        _, Phi = variational_flow(Params(1, -1, 0.5), [0.3, 0.1, 0.2, -0.1], 2.0)
        J = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
        assert np.allclose(Phi.T @ J @ Phi, J, atol=1e-9)

    def test_tabulated_flow_along_closed_form(self):
        p = Params(1, -1, 0.5)
        ps = ParticularSolution("G1", "h0", 1, p)
        s0 = ps.phase_state(-1.0).as_array().real
        _, Phi = variational_flow(p, s0, 2.5)
        assert np.allclose(tabulated_variational_flow(ps, -1.0, 1.5), Phi, rtol=1e-7, atol=1e-8)


class TestReductions:
    @pytest.mark.parametrize("kappa", [-1, 0, 1, 2, 3])
    @pytest.mark.parametrize("plane", ["G1", "G3"])
    def test_poschl_teller(self, kappa, plane):
        D, c = poschl_teller_form(kappa, plane)
        p = Params(2.0, 1.0, float(kappa))
        for tau in np.linspace(-4, 4, 17):
            got = transformed_nve_coefficient(p, plane, tau)
            assert abs(got - (-D / math.cosh(tau) ** 2 + c)) < 1e-9

    def test_normal_coefficients(self):
        p = Params(1, 2, 3)
        assert normal_coefficient("G1", p, 2.0) == 1 + 5 * 4
        assert normal_coefficient("G3", p, 2.0) == 1 + 1 * 4

    def test_mathieu_form(self):
        c0, c1, w = mathieu_coefficients(Params(2, 0, 1))
        assert (c0, c1, w) == (2.5, 0.5, 2 * math.sqrt(2))
        assert mathieu_coefficients(Params(2, 0, 1), "G3")[1] == -0.5
        with pytest.raises(ValueError):
            mathieu_coefficients(Params(2, 1, 1))


class TestMonodromy:
    @given(st.floats(-2, 2), st.floats(0.5, 3))
    def test_unit_determinant(self, b, mu):
        q, T = mathieu_equation(Params(mu, 0, b))
        assert abs(np.linalg.det(monodromy(q, T)) - 1) < 1e-9

    def test_wronskian_constant(self):
        q, T = mathieu_equation(Params(1.0, 0, -3.0))
        for fm in fundamental_matrix(q, (0, 3 * T), t_eval=np.linspace(0, 3 * T, 7)):
            assert abs(fm.wronskian - 1) < 1e-9

    @pytest.mark.parametrize("c, T", [(2.0, 1.3), (-3.0, 2.0), (0.0, 1.0)])
    def test_constant_coefficient(self, c, T):
        M = monodromy(lambda t: c, T)
        from scipy.linalg import expm
        assert np.allclose(M, expm(np.array([[0, 1], [c, 0]]) * T), atol=1e-9)
