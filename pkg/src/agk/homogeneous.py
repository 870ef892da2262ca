"""Polar form, Darboux points and Hessian spectra of homogeneous potentials.

A homogeneous V of degree k is written V(r cos t, r sin t) = r**k F(e^{it})
with F a Laurent polynomial. The nontrivial Hessian eigenvalues at Darboux
points are the values k - z^2 F''(z)/F(z) over the critical points z of F.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import SNAP_MAX_DEN, SNAP_TOL, HomogeneousPoly2, as_rational
from .mr_table import EXCLUDED_DEGREES, MRWitness, mr_member, nearest_table_distance

ROOT_TOL = 1e-12
CLUSTER_RADIUS = 1e-8
DEGENERACY_TOL = 1e-9
INTERVAL_WIDTH = 1e-6


class QI:
    """Exact Gaussian rational re + i*im."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    def __add__(self, o):
        o = _qi(o)
        return QI(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = _qi(o)
        return QI(self.re - o.re, self.im - o.im)

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __mul__(self, o):
        o = _qi(o)
        return QI(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = _qi(o)
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return QI((self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n)

    def __eq__(self, o):
        o = _qi(o)
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return f"QI({self.re})"
        return f"QI({self.re}, {self.im})"


def _qi(v) -> QI:
    if isinstance(v, QI):
        return v
    if isinstance(v, complex):
        return QI(Fraction(v.real), Fraction(v.imag))
    return QI(as_rational(v))


class LaurentPoly:
    """Finite Laurent polynomial in z with exact Gaussian-rational coefficients."""

    def __init__(self, terms=None):
        self.terms: dict[int, QI] = {}
        for e, c in (terms or {}).items():
            c = _qi(c)
            if c:
                self.terms[int(e)] = c

    @classmethod
    def monomial(cls, exp: int, coeff=1) -> "LaurentPoly":
        return cls({exp: coeff})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, o: "LaurentPoly") -> "LaurentPoly":
        out = dict(self.terms)
        for e, c in o.terms.items():
            out[e] = out[e] + c if e in out else c
        return LaurentPoly(out)

    def __mul__(self, o) -> "LaurentPoly":
        if not isinstance(o, LaurentPoly):
            o = _qi(o)
            return LaurentPoly({e: c * o for e, c in self.terms.items()})
        out: dict[int, QI] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = e1 + e2
                out[e] = out[e] + c1 * c2 if e in out else c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LaurentPoly":
        out = LaurentPoly({0: 1})
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, o):
        return isinstance(o, LaurentPoly) and self.terms == o.terms

    def derivative(self) -> "LaurentPoly":
        return LaurentPoly({e - 1: c * e for e, c in self.terms.items() if e != 0})

    def shift(self, n: int) -> "LaurentPoly":
        """Multiply by z**n."""
        return LaurentPoly({e + n: c for e, c in self.terms.items()})

    @property
    def low(self) -> int:
        return min(self.terms)

    @property
    def high(self) -> int:
        return max(self.terms)

    def __call__(self, z):
        return sum(complex(c) * z**e for e, c in self.terms.items())

    def magnitude(self, z) -> float:
        """Sum of |c_e z^e|, the natural scale for rounding error in F(z)."""
        return sum(abs(complex(c)) * abs(z) ** e for e, c in self.terms.items())

    def to_poly(self) -> tuple[int, list[QI]]:
        """(low, coefficients): self = z**low * sum(coeffs[i] z**i)."""
        if self.is_zero():
            return 0, []
        lo = self.low
        return lo, [self.terms.get(e, QI()) for e in range(lo, self.high + 1)]

    def __repr__(self):
        return "LaurentPoly({" + ", ".join(f"{e}: {c!r}" for e, c in sorted(self.terms.items())) + "})"


@dataclass(frozen=True)
class PolarForm:
    k: int
    F: LaurentPoly

    def __call__(self, r, theta):
        return r**self.k * self.F(np.exp(1j * theta))


def polar_form(p: HomogeneousPoly2) -> PolarForm:
    """Substitute cos t = (z + 1/z)/2, sin t = (z - 1/z)/(2i)."""
    if p.degree < 1:
        raise ValueError("polar form needs degree >= 1")
    X = LaurentPoly({1: Fraction(1, 2), -1: Fraction(1, 2)})
    Y = LaurentPoly({1: QI(0, Fraction(-1, 2)), -1: QI(0, Fraction(1, 2))})
    xp, yp = [LaurentPoly({0: 1})], [LaurentPoly({0: 1})]
    for _ in range(p.degree):
        xp.append(xp[-1] * X)
        yp.append(yp[-1] * Y)
    F = LaurentPoly()
    for i, j, c in p.terms():
        F = F + xp[i] * yp[j] * c
    return PolarForm(p.degree, F)


# --- root finding --------------------------------------------------------

def poly_roots(coeffs) -> np.ndarray:
    """Roots of sum(coeffs[i] z**i) via companion eigenvalues and Newton polish."""
    c = np.array([complex(v) for v in coeffs], dtype=complex)
    nz = np.nonzero(np.abs(c) > 0)[0]
    if nz.size == 0:
        raise ValueError("zero polynomial")
    c = c[: nz[-1] + 1]
    n = c.size - 1
    if n == 0:
        return np.empty(0, dtype=complex)
    monic = c[:-1] / c[-1]
    comp = np.zeros((n, n), dtype=complex)
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -monic
    roots = np.linalg.eigvals(comp)
    d = np.polynomial.polynomial.polyder(c)
    for _ in range(3):
        pv = np.polynomial.polynomial.polyval(roots, c)
        dv = np.polynomial.polynomial.polyval(roots, d)
        ok = np.abs(dv) > 0
        step = np.zeros_like(roots)
        step[ok] = pv[ok] / dv[ok]
        roots = roots - step
    return roots


def _cluster(values, radius):
    out = []
    for v in values:
        if not any(abs(v - u) <= radius * max(1.0, abs(u)) for u in out):
            out.append(v)
    return out


@dataclass
class CriticalClass:
    """A critical point z of F and its lambda value."""

    z: complex
    lam: complex


def critical_classes(pf: PolarForm) -> list[CriticalClass]:
    """Nondegenerate critical points of F (z != 0, F(z) != 0), one per distinct z."""
    if pf.F.is_zero():
        raise ValueError("F is identically zero")
    dF = pf.F.derivative()
    if dF.is_zero():
        return []
    d2F = dF.derivative()
    _, coeffs = dF.to_poly()
    zs = [z for z in poly_roots(coeffs) if abs(z) > ROOT_TOL]
    zs = _cluster(zs, CLUSTER_RADIUS)
    out = []
    for z in zs:
        fz = pf.F(z)
        if abs(fz) <= DEGENERACY_TOL * pf.F.magnitude(z):
            continue
        out.append(CriticalClass(z, pf.k - z * z * d2F(z) / fz))
    return out


def _clean(v: complex):
    if abs(v.imag) <= 1e-12 * max(1.0, abs(v.real)):
        return float(v.real)
    return v


def lambda_set(pf: PolarForm) -> list:
    """Distinct values of k - z^2 F''(z)/F(z) over nondegenerate critical points of F.

    Constant F (rotation-invariant V) gives {k}.
    """
    if pf.F.is_zero():
        raise ValueError("F is identically zero")
    if pf.F.derivative().is_zero():
        return [float(pf.k)]
    lams = _cluster([c.lam for c in critical_classes(pf)], CLUSTER_RADIUS)
    return sorted((_clean(v) for v in lams), key=lambda v: (complex(v).real, complex(v).imag))


# --- exact certificate for rational lambda -------------------------------

def _strip(p: list[QI]) -> list[QI]:
    p = list(p)
    while p and not p[-1]:
        p.pop()
    return p


def _aligned(lp: LaurentPoly, lo: int) -> list[QI]:
    """Coefficients of z**(-lo) * lp, lowest power first."""
    return _strip([lp.terms.get(e, QI()) for e in range(lo, lp.high + 1)])


def _poly_divmod(n: list[QI], d: list[QI]):
    n, d = _strip(n), _strip(d)
    if not d:
        raise ZeroDivisionError("polynomial division by zero")
    q = [QI()] * max(0, len(n) - len(d) + 1)
    r = list(n)
    lead = d[-1]
    while len(r) >= len(d) and r:
        shift = len(r) - len(d)
        f = r[-1] / lead
        q[shift] = f
        for i, c in enumerate(d):
            r[i + shift] = r[i + shift] - f * c
        r = _strip(r)
    return q, r


def _poly_gcd(a: list[QI], b: list[QI]) -> list[QI]:
    a, b = _strip(a), _strip(b)
    while b:
        _, r = _poly_divmod(a, b)
        a, b = b, r
    if not a:
        return a
    lead = a[-1]
    return [c / lead for c in a]


def certify_lambda(pf: PolarForm, lam: Fraction) -> bool:
    """True iff lam is exactly a value of k - z^2 F''/F at some z != 0 with
    F'(z) = 0 and F(z) != 0 (polynomial gcd over Q(i))."""
    dF = pf.F.derivative()
    if dF.is_zero():
        return lam == pf.k
    d2F = dF.derivative()
    G = pf.F * QI(pf.k - lam) + (d2F.shift(2) * QI(-1))
    if G.is_zero():
        # every critical point with F != 0 qualifies
        return bool(critical_classes(pf))
    lo = min(pf.F.low, G.low, dF.low)
    P, Q, Fp = (_aligned(lp, lo) for lp in (dF, G, pf.F))
    g = _poly_gcd(P, Q)
    # drop the root z = 0 and roots shared with F
    while len(g) > 1 and not g[0]:
        g = g[1:]
    while len(g) > 1:
        h = _poly_gcd(g, Fp)
        if len(h) <= 1:
            break
        g, _ = _poly_divmod(g, h)
        g = _strip(g)
    return len(g) > 1


# --- rational integrability test ------------------------------------------

@dataclass
class LambdaCheck:
    value: complex | float
    exact: Fraction | None
    witness: MRWitness | None
    status: str  # "member", "excluded", "inconclusive"
    note: str = ""


@dataclass
class RationalCheck:
    """Outcome of the necessary condition for rational integrability."""

    status: str  # "not-excluded", "excluded", "inconclusive"
    k: int
    entries: list[LambdaCheck] = field(default_factory=list)

    @property
    def failing(self) -> list[LambdaCheck]:
        return [e for e in self.entries if e.status != "member"]


def exact_lambda_values(pf: PolarForm) -> list[tuple[complex | float, Fraction | None]]:
    """Numeric lambda values paired with their certified rational value (or None)."""
    out = []
    for v in lambda_set(pf):
        if isinstance(v, complex):
            out.append((v, None))
            continue
        cand = Fraction(v).limit_denominator(SNAP_MAX_DEN)
        if abs(float(cand) - v) <= SNAP_TOL * max(1.0, abs(v)) and certify_lambda(pf, cand):
            out.append((v, cand))
        else:
            out.append((v, None))
    return out


def rational_integrability_necessary(p_max: HomogeneousPoly2) -> RationalCheck:
    """Check every lambda of the polar form against the Morales-Ramis table.

    "not-excluded" iff all lambdas are (exactly) members; irrational values
    exclude only when they sit farther than INTERVAL_WIDTH from every row value.
    """
    k = p_max.degree
    if k in EXCLUDED_DEGREES:
        raise ValueError(f"degree {k} is not covered by the table")
    pf = polar_form(p_max)
    entries = []
    for v, exact in exact_lambda_values(pf):
        if exact is not None:
            w = mr_member(k, exact)
            entries.append(LambdaCheck(v, exact, w, "member" if w else "excluded"))
            continue
        if isinstance(v, complex):
            entries.append(LambdaCheck(v, None, None, "excluded", "non-real lambda"))
            continue
        dist = nearest_table_distance(k, v)
        st = "excluded" if dist > INTERVAL_WIDTH else "inconclusive"
        entries.append(LambdaCheck(v, None, None, st, f"non-rational lambda, distance to table {dist:.3g}"))
    if all(e.status == "member" for e in entries):
        status = "not-excluded"
    elif any(e.status == "excluded" for e in entries):
        status = "excluded"
    else:
        status = "inconclusive"
    return RationalCheck(status, k, entries)


# --- Darboux points --------------------------------------------------------

@dataclass(frozen=True)
class DarbouxPoint:
    c: np.ndarray
    alpha: complex
    circle: bool = False  # representative of a continuum of Darboux points

    def residual(self, p: HomogeneousPoly2) -> float:
        return float(np.max(np.abs(p.grad(*self.c) - self.alpha * self.c)))


def _directions(p: HomogeneousPoly2) -> tuple[list[np.ndarray], bool]:
    """Directions u with grad V(u) parallel to u: roots of x V_y - y V_x."""
    k = p.degree
    # G(x, y) = x V_y - y V_x as coefficients of x^i y^(k-i)
    G = {}
    for i, j, c in p.terms():
        if j:
            G[i + 1] = G.get(i + 1, Fraction(0)) + c * j
        if i:
            G[i - 1] = G.get(i - 1, Fraction(0)) - c * i
    G = {i: c for i, c in G.items() if c != 0}
    if not G:
        return [np.array([1.0 + 0j, 0j])], True
    # y = t x  ->  g(t) = sum G[i] t^(k-i); x = 0 is a direction (a root of g at
    # infinity) when G has no y^k term
    coeffs = [G.get(k - e, Fraction(0)) for e in range(k + 1)]
    dirs = [np.array([1.0 + 0j, t]) for t in poly_roots(coeffs)] if any(coeffs[1:]) else []
    if G.get(0, 0) == 0:
        dirs.append(np.array([0j, 1.0 + 0j]))
    out = []
    for u in dirs:
        if not any(np.allclose(u, v, atol=1e-10) for v in out):
            out.append(u)
    return out, False


def darboux_points(p: HomogeneousPoly2, alpha=None) -> list[DarbouxPoint]:
    """Darboux points c with grad V(c) = alpha c, one per direction class.

    Rotation-invariant potentials return a single representative with
    ``circle=True``. Directions where V vanishes carry no Darboux point.
    """
    k = p.degree
    if alpha is None:
        alpha = k
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    if k == 2:
        raise ValueError("degree 2 has no isolated Darboux points")
    dirs, circle = _directions(p)
    out = []
    for u in dirs:
        uu = u @ u
        if abs(uu) < 1e-12:
            continue  # isotropic direction
        u = u / np.sqrt(uu)
        beta = k * p(*u)  # grad V(u) = beta u by Euler's identity
        if abs(beta) < 1e-12:
            continue
        s = (complex(alpha) / complex(beta)) ** (1.0 / (k - 2))
        out.append(DarbouxPoint(s * u, complex(alpha), circle))
    return out


@dataclass
class SpectrumReport:
    point: DarbouxPoint
    eigenvalues: tuple  # (trivial, nontrivial), normalised to alpha = k
    lambdas: tuple      # contributions to the lambda set
    degenerate: bool = False


def hessian_spectrum(p: HomogeneousPoly2, d: DarbouxPoint) -> SpectrumReport:
    """Hessian eigenvalues at d, rescaled to the normalisation alpha = k."""
    k = p.degree
    H = p.hessian(*d.c) * (k / d.alpha)
    ev = np.linalg.eigvals(H)
    trivial = k * (k - 1)
    i = int(np.argmin(np.abs(ev - trivial)))
    other = ev[1 - i]
    eig = (_clean(complex(ev[i])), _clean(complex(other)))
    return SpectrumReport(d, eig, (eig[1],), d.circle)


def spectra(p: HomogeneousPoly2) -> list[SpectrumReport]:
    return [hessian_spectrum(p, d) for d in darboux_points(p)]
