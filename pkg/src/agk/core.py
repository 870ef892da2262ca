"""Shared value types and the AGK potential.

The Hamiltonian is

    H = (px**2 + py**2)/2 - mu/2 (x**2 + y**2) - a/4 (x**2 + y**2)**2 - b/2 x**2 y**2

and is the only sign convention exposed by this package. Some restatements of
the model flip the sign of the quadratic (and quartic) term; conclusions that
depend only on kappa = b/a are unaffected, but numerical scenarios are not
(see :mod:`agk.poincare.scenarios`).
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

Rational = Fraction
Scalar = Union[int, float, Fraction]

SNAP_TOL = 1e-9
SNAP_MAX_DEN = 10**6


def as_rational(value) -> Fraction:
    """Exact conversion of ints, Fractions and decimal/"p/q" strings.

    Floats are converted through their exact binary value; use
    :func:`snap_rational` when a float is meant to stand for a short fraction.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a number")
    if isinstance(value, (int, numbers.Integral)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def snap_rational(value: float, tol: float = SNAP_TOL,
                  max_den: int = SNAP_MAX_DEN) -> Fraction | None:
    """Best continued-fraction approximant with denominator <= max_den.

    Returns None when no such approximant lies within ``tol`` of ``value``.
    """
    if isinstance(value, Fraction):
        return value
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {value!r}")
    cand = Fraction(value).limit_denominator(max_den)
    if abs(float(cand) - value) <= tol * max(1.0, abs(value)):
        return cand
    return None


def exact_or_snapped(value: Scalar) -> tuple[Fraction | None, bool]:
    """Exact inputs pass through; floats are snapped.

    The flag is True when the returned fraction differs from the float's
    exact binary value. (None, False) means the float has no short rational
    approximant.
    """
    if isinstance(value, float):
        q = snap_rational(value)
        if q is None:
            return None, False
        return q, q != Fraction(value)
    return as_rational(value), False


def _check_finite(name: str, v) -> None:
    if isinstance(v, Fraction):
        return
    try:
        ok = math.isfinite(v)
    except TypeError:
        raise TypeError(f"{name} must be a real number, got {type(v).__name__}") from None
    if not ok:
        raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class Params:
    """Model parameters (mu, a, b); entries may be ints, floats or Fractions."""

    mu: Scalar
    a: Scalar
    b: Scalar

    def __post_init__(self):
        for name in ("mu", "a", "b"):
            _check_finite(name, getattr(self, name))

    @property
    def kappa(self):
        """b/a, exact when both entries are rational."""
        if self.a == 0:
            raise ValueError("kappa = b/a is undefined for a = 0")
        if isinstance(self.a, float) or isinstance(self.b, float):
            return float(self.b) / float(self.a)
        return as_rational(self.b) / as_rational(self.a)

    def floats(self) -> tuple[float, float, float]:
        return float(self.mu), float(self.a), float(self.b)

    def scaled(self, s) -> "Params":
        return Params(self.mu, self.a * s, self.b * s)


@dataclass(frozen=True)
class PhaseState:
    """Point (x, y, px, py) of phase space.

    Real mode (the default) stores floats and rejects nonzero imaginary
    parts; complex mode is used for the complex particular solutions.
    """

    x: complex
    y: complex
    px: complex
    py: complex
    complex_mode: bool = field(default=False)

    def __post_init__(self):
        for name in ("x", "y", "px", "py"):
            v = getattr(self, name)
            if self.complex_mode:
                v = complex(v)
                if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                    raise ValueError(f"{name} must be finite, got {v!r}")
            else:
                if isinstance(v, complex) or np.iscomplexobj(v):
                    if complex(v).imag != 0:
                        raise ValueError(f"real-mode state has complex {name}={v!r}")
                    v = complex(v).real
                v = float(v)
                if not math.isfinite(v):
                    raise ValueError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_array(cls, arr, complex_mode: bool = False) -> "PhaseState":
        x, y, px, py = arr
        return cls(x, y, px, py, complex_mode=complex_mode)

    def as_array(self) -> np.ndarray:
        dtype = complex if self.complex_mode else float
        return np.array([self.x, self.y, self.px, self.py], dtype=dtype)


# --- the AGK potential -----------------------------------------------------

def potential_xy(x, y, p: Params):
    mu, a, b = p.floats()
    r2 = x * x + y * y
    return -0.5 * mu * r2 - 0.25 * a * r2 * r2 - 0.5 * b * x * x * y * y


def potential(state: PhaseState, p: Params):
    return potential_xy(state.x, state.y, p)


def energy(state: PhaseState, p: Params):
    return 0.5 * (state.px * state.px + state.py * state.py) + potential(state, p)


def force_xy(x, y, p: Params):
    """-grad V, i.e. the right-hand side of the momentum equations."""
    mu, a, b = p.floats()
    r2 = x * x + y * y
    return mu * x + a * r2 * x + b * x * y * y, mu * y + a * r2 * y + b * x * x * y


def grad_V(state: PhaseState, p: Params) -> np.ndarray:
    fx, fy = force_xy(state.x, state.y, p)
    return -np.array([fx, fy])


def hessian_V(state: PhaseState, p: Params) -> np.ndarray:
    mu, a, b = p.floats()
    x, y = state.x, state.y
    hxx = mu + 3 * a * x * x + (a + b) * y * y
    hyy = mu + (a + b) * x * x + 3 * a * y * y
    hxy = 2 * (a + b) * x * y
    return -np.array([[hxx, hxy], [hxy, hyy]])


# --- homogeneous bivariate polynomials ------------------------------------

@dataclass(frozen=True)
class HomogeneousPoly2:
    """Homogeneous polynomial sum c[i] x**i y**(k-i) with rational coefficients.

    ``coeffs`` maps the x-exponent i to its coefficient; zero entries are dropped.
    """

    degree: int
    coeffs: dict

    def __post_init__(self):
        clean = {}
        for key, c in self.coeffs.items():
            if isinstance(key, tuple):
                i, j = key
                if i + j != self.degree:
                    raise ValueError(f"monomial x^{i} y^{j} has degree {i + j}, expected {self.degree}")
            else:
                i = key
            if not 0 <= i <= self.degree:
                raise ValueError(f"x-exponent {i} outside 0..{self.degree}")
            c = as_rational(c) if not isinstance(c, Fraction) else c
            if c != 0:
                clean[i] = clean.get(i, Fraction(0)) + c
        clean = {i: c for i, c in clean.items() if c != 0}
        if not clean:
            raise ValueError("the zero polynomial has no well-defined degree")
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    def terms(self):
        """Yields (i, j, c) for c x^i y^j."""
        for i, c in self.coeffs.items():
            yield i, self.degree - i, c

    def scaled(self, s) -> "HomogeneousPoly2":
        s = as_rational(s)
        return HomogeneousPoly2(self.degree, {i: c * s for i, c in self.coeffs.items()})

    def __call__(self, x, y):
        return sum(float(c) * x**i * y**j for i, j, c in self.terms())

    def grad(self, x, y) -> np.ndarray:
        gx = sum(float(c) * i * x ** (i - 1) * y**j for i, j, c in self.terms() if i)
        gy = sum(float(c) * j * x**i * y ** (j - 1) for i, j, c in self.terms() if j)
        return np.array([gx, gy])

    def hessian(self, x, y) -> np.ndarray:
        hxx = sum(float(c) * i * (i - 1) * x ** (i - 2) * y**j for i, j, c in self.terms() if i > 1)
        hyy = sum(float(c) * j * (j - 1) * x**i * y ** (j - 2) for i, j, c in self.terms() if j > 1)
        hxy = sum(float(c) * i * j * x ** (i - 1) * y ** (j - 1) for i, j, c in self.terms() if i and j)
        return np.array([[hxx, hxy], [hxy, hyy]])


def agk_quartic(a, b) -> HomogeneousPoly2:
    """Top-degree part -a/4 (x^2+y^2)^2 - b/2 x^2 y^2."""
    a, b = as_rational(a), as_rational(b)
    return HomogeneousPoly2(4, {4: -a / 4, 2: -a / 2 - b / 2, 0: -a / 4})


def agk_quadratic(mu) -> HomogeneousPoly2:
    mu = as_rational(mu)
    return HomogeneousPoly2(2, {2: -mu / 2, 0: -mu / 2})


def split_homogeneous(p: Params) -> tuple[HomogeneousPoly2 | None, HomogeneousPoly2 | None]:
    """(lowest, highest) homogeneous parts of V; a vanishing part is None."""
    low = agk_quadratic(p.mu) if p.mu != 0 else None
    high = agk_quartic(p.a, p.b) if (p.a != 0 or p.b != 0) else None
    return low, high
