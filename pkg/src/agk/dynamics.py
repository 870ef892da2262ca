"""Invariant planes, closed-form particular solutions and variational equations."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .core import Params, PhaseState, force_xy, hessian_V

RTOL = 1e-12
ATOL = 1e-12
POLE_TOL = 1e-8


class IntegrationError(RuntimeError):
    pass


class PoleError(ValueError):
    """The requested time sits on (or next to) a pole of the closed form."""


# --- flow ------------------------------------------------------------------

def flow_rhs(params: Params):
    def rhs(t, s):
        x, y, px, py = s
        fx, fy = force_xy(x, y, params)
        return np.array([px, py, fx, fy])
    return rhs


def integrate_flow(state, params: Params, t_final: float, t_eval=None,
                   rtol: float = RTOL, atol: float = ATOL) -> np.ndarray:
    """DOP853 solution of the Hamiltonian flow; returns the states at t_eval (or t_final)."""
    s0 = state.as_array() if isinstance(state, PhaseState) else np.asarray(state, dtype=float)
    sol = solve_ivp(flow_rhs(params), (0.0, t_final), s0, method="DOP853",
                    rtol=rtol, atol=atol, t_eval=t_eval)
    if not sol.success:
        raise IntegrationError(sol.message)
    return sol.y.T if t_eval is not None else sol.y[:, -1]


# --- invariant planes --------------------------------------------------------

@dataclass(frozen=True)
class InvariantPlane:
    """Plane {y = sy x, py = sp px} (or {x = px = 0} for G2)."""

    name: str
    sy: int | None
    sp: int | None
    invariant: bool = True

    def residual(self, s) -> float:
        x, y, px, py = (s.as_array() if isinstance(s, PhaseState) else np.asarray(s))
        if self.sy is None:
            return float(max(abs(x), abs(px)))
        return float(max(abs(y - self.sy * x), abs(py - self.sp * px)))

    def embed(self, q: float, p: float) -> PhaseState:
        """On-plane state with coordinate q and momentum p along the plane."""
        if self.sy is None:
            return PhaseState(0.0, q, 0.0, p)
        return PhaseState(q, self.sy * q, p, self.sp * p)


# G4 and G5 mix a reflection of positions with a different reflection of
# momenta; they are not preserved by the flow and are kept only as listed.
PLANES = {
    "G1": InvariantPlane("G1", 0, 0),
    "G2": InvariantPlane("G2", None, None),
    "G3": InvariantPlane("G3", 1, 1),
    "G4": InvariantPlane("G4", -1, 1, invariant=False),
    "G5": InvariantPlane("G5", 1, -1, invariant=False),
    "G6": InvariantPlane("G6", -1, -1),
}


def _plane_name(plane) -> str:
    name = plane.name if isinstance(plane, InvariantPlane) else str(plane)
    if name not in PLANES:
        raise ValueError(f"unknown plane {plane!r}")
    return name


@dataclass(frozen=True)
class RestrictedHamiltonian:
    """p^2/2 - mu/2 q^2 - quartic/4 q^4 = h, with H = energy_factor * h."""

    mu: float
    quartic: float
    energy_factor: int


def restricted_hamiltonian(plane, params: Params) -> RestrictedHamiltonian:
    name = _plane_name(plane)
    if name == "G1":
        return RestrictedHamiltonian(params.mu, params.a, 1)
    if name == "G3":
        return RestrictedHamiltonian(params.mu, 2 * params.a + params.b, 2)
    raise ValueError(f"restricted Hamiltonian is defined for G1 and G3 only, got {name}")


# --- particular solutions ------------------------------------------------------

# name -> (g, g', denominator)
_FUNCS = {
    "sech": (lambda z: 1 / cmath.cosh(z), lambda z: -cmath.tanh(z) / cmath.cosh(z), cmath.cosh),
    "sec": (lambda z: 1 / cmath.cos(z), lambda z: cmath.tan(z) / cmath.cos(z), cmath.cos),
    "csc": (lambda z: 1 / cmath.sin(z), lambda z: -cmath.cos(z) / cmath.sin(z) ** 2, cmath.sin),
    "csch": (lambda z: 1 / cmath.sinh(z), lambda z: -cmath.cosh(z) / cmath.sinh(z) ** 2, cmath.sinh),
    "tanh": (cmath.tanh, lambda z: 1 / cmath.cosh(z) ** 2, cmath.cosh),
    "tan": (cmath.tan, lambda z: 1 / cmath.cos(z) ** 2, cmath.cos),
    "cot": (lambda z: cmath.cos(z) / cmath.sin(z), lambda z: -1 / cmath.sin(z) ** 2, cmath.sin),
    "coth": (lambda z: cmath.cosh(z) / cmath.sinh(z), lambda z: -1 / cmath.sinh(z) ** 2, cmath.sinh),
}


@dataclass(frozen=True)
class Branch:
    """x(t) = A * g(w t) as printed, A = prefactor_unit * amplitude, w = freq_unit * frequency.

    ``sigma`` is the time rotation (t -> sigma t) under which the printed
    function solves the equation of motion; None marks a branch that solves
    it under no rotation sigma in {1, i} as printed.
    """

    energy_case: str
    index: int
    g: str
    prefactor_unit: complex
    freq_unit: complex
    sigma: complex | None


BRANCHES = {
    ("h0", 1): Branch("h0", 1, "sech", 1j, 1, 1),
    ("h0", 2): Branch("h0", 2, "sec", 1j, 1j, 1),
    ("h0", 3): Branch("h0", 3, "csc", 1, 1j, None),
    ("h0", 4): Branch("h0", 4, "csch", 1, 1, 1),
    ("hstar", 1): Branch("hstar", 1, "tanh", 1j, 1, 1j),
    ("hstar", 2): Branch("hstar", 2, "tan", 1j, 1j, None),
    ("hstar", 3): Branch("hstar", 3, "cot", 1, 1j, 1j),
    ("hstar", 4): Branch("hstar", 4, "coth", 1, 1, None),
}


@dataclass(frozen=True)
class ParticularSolution:
    plane: str
    energy_case: str
    branch: int
    params: Params
    sign: int = 1

    def __post_init__(self):
        if (self.energy_case, self.branch) not in BRANCHES:
            raise ValueError(f"no branch {self.branch} for energy case {self.energy_case!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        rh = restricted_hamiltonian(self.plane, self.params)
        if rh.mu == 0:
            raise ValueError("particular solutions need mu != 0")
        if rh.quartic == 0:
            raise ValueError(f"quartic coefficient vanishes on {self.plane}")

    @property
    def table_entry(self) -> Branch:
        return BRANCHES[(self.energy_case, self.branch)]

    @property
    def coeff(self) -> float:
        return float(restricted_hamiltonian(self.plane, self.params).quartic)

    @property
    def h(self) -> float:
        """Energy level of the restricted one-degree-of-freedom Hamiltonian."""
        mu = float(self.params.mu)
        return 0.0 if self.energy_case == "h0" else mu * mu / (4 * self.coeff)

    @property
    def valid(self) -> bool:
        return self.table_entry.sigma is not None

    def _amp_freq(self):
        mu, c = float(self.params.mu), self.coeff
        if self.energy_case == "h0":
            return cmath.sqrt(2 * mu / c), cmath.sqrt(mu)
        return cmath.sqrt(mu / c), cmath.sqrt(mu / 2)

    def printed(self, tau: complex) -> tuple[complex, complex]:
        """The tabulated x(tau) and dx/dtau at complex tau."""
        b = self.table_entry
        amp, freq = self._amp_freq()
        A = self.sign * b.prefactor_unit * amp
        w = b.freq_unit * freq
        g, dg, den = _FUNCS[b.g]
        z = w * tau
        if abs(den(z)) < POLE_TOL:
            raise PoleError(f"branch {b.energy_case}-{b.index} has a pole at t={tau}")
        return A * g(z), A * w * dg(z)

    def trajectory(self, t: complex) -> tuple[complex, complex]:
        """(x, dx/dt) of the solution of the flow obtained as x(t) = P(sigma t)."""
        sigma = self.table_entry.sigma if self.valid else 1
        x, dx = self.printed(sigma * t)
        return x, sigma * dx

    def energy_residual(self, t: complex) -> float:
        """Scale-normalized residual of (dx/dt)^2 = 2h + mu x^2 + (coeff/2) x^4."""
        x, dx = self.trajectory(t)
        mu, c = float(self.params.mu), self.coeff
        terms = (dx * dx, 2 * self.h, mu * x * x, 0.5 * c * x ** 4)
        scale = max(1.0, *(abs(v) for v in terms))
        return abs(terms[0] - terms[1] - terms[2] - terms[3]) / scale

    def ode_residual(self, t: complex, dt: float = 1e-4) -> float:
        """Scale-normalized residual of x'' = mu x + coeff x^3 (x'' by central difference of x')."""
        x, _ = self.trajectory(t)
        ddx = (self.trajectory(t + dt)[1] - self.trajectory(t - dt)[1]) / (2 * dt)
        mu, c = float(self.params.mu), self.coeff
        rhs = mu * x + c * x ** 3
        return abs(ddx - rhs) / max(1.0, abs(ddx), abs(rhs))

    def phase_state(self, t: complex) -> PhaseState:
        x, dx = self.trajectory(t)
        p = PLANES[self.plane]
        if p.sy is None:
            return PhaseState(0, x, 0, dx, complex_mode=True)
        return PhaseState(x, p.sy * x, dx, p.sp * dx, complex_mode=True)


def particular_solution_eval(ps: ParticularSolution, t: complex) -> tuple[complex, complex]:
    return ps.printed(t)


# --- variational equations ----------------------------------------------------

def _companion(B) -> np.ndarray:
    dtype = complex if np.iscomplexobj(B) else float
    A = np.zeros((4, 4), dtype=dtype)
    A[0, 2] = A[1, 3] = 1
    A[2:, :2] = B
    return A


def variational_matrix(x, y, params: Params) -> np.ndarray:
    """General 4x4 linearization at (x, y)."""
    if isinstance(x, complex) or isinstance(y, complex):
        st = PhaseState(x, y, 0, 0, complex_mode=True)
    else:
        st = PhaseState(x, y, 0, 0)
    return _companion(-hessian_V(st, params))


def variational_rhs(plane, params: Params, x) -> np.ndarray:
    """The 4x4 matrix along a solution on G1 (y = 0) or G3 (y = x)."""
    name = _plane_name(plane)
    mu, a, b = params.floats()
    x2 = x * x
    if name == "G1":
        B = [[mu + 3 * a * x2, 0 * x2], [0 * x2, mu + (a + b) * x2]]
    elif name == "G3":
        d = mu + (4 * a + b) * x2
        c = 2 * (a + b) * x2
        B = [[d, c], [c, d]]
    else:
        raise ValueError(f"variational equations are tabulated for G1 and G3 only, got {name}")
    return _companion(np.array(B))


def normal_coefficient(plane, params: Params, x):
    name = _plane_name(plane)
    mu, a, b = params.floats()
    if name == "G1":
        return mu + (a + b) * x * x
    if name == "G3":
        return mu + (2 * a - b) * x * x
    raise ValueError(f"normal variational equation is tabulated for G1 and G3 only, got {name}")


def tangential_coefficient(plane, params: Params, x):
    name = _plane_name(plane)
    mu, a, b = params.floats()
    if name == "G1":
        return mu + 3 * a * x * x
    if name == "G3":
        return mu + 3 * (2 * a + b) * x * x
    raise ValueError(f"unsupported plane {name}")


def mathieu_coefficients(params: Params, plane="G1") -> tuple[float, float, float]:
    """(constant, cosine amplitude, frequency) of xi'' = (c0 + c1 cos(w t)) xi along x = cos(sqrt(mu) t)."""
    if params.a != 0:
        raise ValueError("the Mathieu reduction needs a = 0")
    mu, _, b = params.floats()
    if mu <= 0:
        raise ValueError("mu must be positive for a real frequency")
    if _plane_name(plane) == "G3":
        b = -b
    elif _plane_name(plane) != "G1":
        raise ValueError("Mathieu reduction is tabulated for G1 and G3")
    return b / 2 + mu, b / 2, 2 * math.sqrt(mu)


def mathieu_equation(params: Params, plane="G1") -> tuple[Callable[[float], float], float]:
    """Coefficient q(t) and its period."""
    c0, c1, w = mathieu_coefficients(params, plane)
    return (lambda t: c0 + c1 * math.cos(w * t)), 2 * math.pi / w


# --- fundamental matrices -------------------------------------------------------

@dataclass(frozen=True)
class FundamentalMatrix:
    t: float
    matrix: np.ndarray

    @property
    def wronskian(self) -> complex:
        return complex(np.linalg.det(self.matrix))


def fundamental_matrix(q: Callable, t_span, t_eval=None, rtol: float = RTOL,
                       atol: float = ATOL) -> list[FundamentalMatrix]:
    """Solutions of xi'' = q(t) xi with basis data (1, 0), (0, 1) at t_span[0].

    Rows of each matrix are (xi, xi'); columns are the two basis solutions.
    """
    t0, t1 = t_span
    if t_eval is None:
        t_eval = [t1]
    probe = q(t0)
    dtype = complex if isinstance(probe, complex) or np.iscomplexobj(probe) else float

    def rhs(t, s):
        qt = q(t)
        return np.array([s[1], qt * s[0], s[3], qt * s[2]], dtype=dtype)

    sol = solve_ivp(rhs, (t0, t1), np.array([1, 0, 0, 1], dtype=dtype), method="DOP853",
                    rtol=rtol, atol=atol, t_eval=t_eval)
    if not sol.success:
        raise IntegrationError(f"fundamental matrix integration failed: {sol.message}")
    return [FundamentalMatrix(float(t), np.array([[s[0], s[2]], [s[1], s[3]]]))
            for t, s in zip(sol.t, sol.y.T)]


def monodromy(q: Callable, period: float, rtol: float = RTOL, atol: float = ATOL) -> np.ndarray:
    if not period > 0:
        raise ValueError("period must be positive")
    return fundamental_matrix(q, (0.0, period), rtol=rtol, atol=atol)[-1].matrix


def variational_flow(params: Params, s0, t_final: float, rtol: float = RTOL,
                     atol: float = ATOL) -> tuple[np.ndarray, np.ndarray]:
    """Nonlinear state and 4x4 state-transition matrix at t_final."""
    rhs_f = flow_rhs(params)

    def rhs(t, z):
        s = z[:4]
        Phi = z[4:].reshape(4, 4)
        A = variational_matrix(s[0], s[1], params)
        return np.concatenate([rhs_f(t, s), (A @ Phi).ravel()])

    z0 = np.concatenate([np.asarray(s0, dtype=float), np.eye(4).ravel()])
    sol = solve_ivp(rhs, (0.0, t_final), z0, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError(sol.message)
    z = sol.y[:, -1]
    return z[:4], z[4:].reshape(4, 4)


def tabulated_variational_flow(ps: ParticularSolution, t0: float, t1: float,
                               rtol: float = RTOL, atol: float = ATOL) -> np.ndarray:
    """State-transition matrix of the tabulated plane system along the closed form."""
    def rhs(t, z):
        x = ps.trajectory(t)[0]
        if abs(x.imag) > 1e-9 * max(1.0, abs(x)):
            raise ValueError("closed-form solution is not real on this segment")
        A = variational_rhs(ps.plane, ps.params, x.real)
        return (A @ z.reshape(4, 4)).ravel()

    sol = solve_ivp(rhs, (t0, t1), np.eye(4).ravel(), method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError(sol.message)
    return sol.y[:, -1].reshape(4, 4)


# --- Poschl-Teller form ---------------------------------------------------------

def poschl_teller_form(kappa, plane="G1", energy_case="h0") -> tuple:
    """(well depth D, asymptotic constant c_inf) of xi'' = (-D/cosh^2 tau + c_inf) xi.

    For the h = mu^2/(4a) level the tabulated form (2(1+kappa), 2kappa+1) is
    returned on G1 and its analogue (D, D-1) on G3.
    """
    name = _plane_name(plane)
    if name == "G1":
        D = 2 * (1 + kappa)
    elif name == "G3":
        if kappa == -2:
            raise ValueError("kappa = -2 is singular on G3")
        D = 2 * (2 - kappa) / (2 + kappa)
    else:
        raise ValueError(f"unsupported plane {name}")
    if energy_case == "h0":
        return D, 1
    if energy_case == "hstar":
        return D, D - 1
    raise ValueError(f"unknown energy case {energy_case!r}")


def transformed_nve_coefficient(params: Params, plane, tau) -> complex:
    """Normal coefficient along the h = 0 branch-1 solution, divided by mu, at tau = sqrt(mu) t."""
    ps = ParticularSolution(_plane_name(plane), "h0", 1, params)
    mu = float(params.mu)
    t = tau / math.sqrt(mu)
    x, _ = ps.trajectory(t)
    return normal_coefficient(plane, params, x) / mu
