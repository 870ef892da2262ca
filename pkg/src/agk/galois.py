"""Triangular-number sets, the Legendre integrability test and ``classify``.

All set-membership questions are answered in exact rational arithmetic.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

from .core import Params, agk_quartic, as_rational, exact_or_snapped
from .homogeneous import rational_integrability_necessary


class Level(str, enum.Enum):
    LIOUVILLE = "liouville-integrable"
    RATIONAL_EXCLUDED = "rational-excluded"
    MEROMORPHIC_EXCLUDED = "meromorphic-excluded"
    NOT_EXCLUDED = "not-excluded"
    INCONCLUSIVE = "inconclusive"


RULES = {
    "angular-momentum": "b = 0: rotation invariance, angular momentum x*py - y*px is conserved",
    "harmonic": "a = b = 0: isotropic harmonic oscillator",
    "rotation-split": "b = 2a: 45-degree symplectic rotation splits H into two quartic oscillators",
    "duffing-split": "b = -a: H is the sum of two identical uncoupled Duffing oscillators",
    "mathieu-nve": "a = 0, b, mu != 0: normal variational equation is a Mathieu equation with Galois group SL(2,C)",
    "quantic-nve": "a = 0, mu = 0, b != 0: normal variational equations are quartic oscillators at zero energy, not integrable",
    "legendre-nve": "a, mu != 0: Poschl-Teller normal variational equations on the invariant planes; kappa outside Lambda1 or Lambda2",
    "lambda-set": "a, mu != 0 and kappa in Lambda: no obstruction from the normal variational equations",
    "homogeneous-rational": "mu = 0: Darboux-point spectrum tested against the Morales-Ramis table; Cauchy-Euler normal variational equations give no obstruction",
}


@dataclass
class Verdict:
    level: Level
    rule: str
    witnesses: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def description(self) -> str:
        return RULES[self.rule]

    def to_dict(self) -> dict:
        return {
            "level": self.level.value,
            "rule": self.rule,
            "description": self.description,
            "witnesses": {k: _jsonable(v) for k, v in self.witnesses.items()},
            "notes": list(self.notes),
        }


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


# --- triangular numbers ----------------------------------------------------

def triangular(l: int) -> Fraction:
    if l < 0:
        raise ValueError("triangular numbers are indexed by l >= 0")
    return Fraction(l * (l + 1), 2)


def triangular_index(T) -> int | None:
    """l >= 0 with T_l = T, or None."""
    T = as_rational(T)
    if T.denominator != 1 or T < 0:
        return None
    d = 8 * T.numerator + 1
    s = isqrt(d)
    if s * s != d:
        return None
    return (s - 1) // 2


def lambda1_member(kappa) -> int | None:
    """l with kappa = T_l - 1."""
    return triangular_index(as_rational(kappa) + 1)


def lambda2_member(kappa) -> int | None:
    """l with kappa = 2 (1 - T_l)/(1 + T_l), i.e. T_l = (2 - kappa)/(2 + kappa)."""
    kappa = as_rational(kappa)
    if kappa == -2:
        return None
    return triangular_index((2 - kappa) / (2 + kappa))


def lambda_member(kappa) -> bool:
    return lambda1_member(kappa) is not None and lambda2_member(kappa) is not None


# --- Legendre equation -----------------------------------------------------

@dataclass(frozen=True)
class LegendreParams:
    """Parameters (nu, mu~) of the associated Legendre equation.

    ``nu`` and ``mu_t`` are exact when rational and None otherwise; the
    defining quantities nu(nu+1) and mu~^2 are always kept exactly.
    """

    nu_nu1: Fraction
    mu_t_sq: Fraction
    nu: Fraction | None = None
    mu_t: Fraction | None = None

    @classmethod
    def from_values(cls, nu, mu_t) -> "LegendreParams":
        nu, mu_t = as_rational(nu), as_rational(mu_t)
        return cls(nu * (nu + 1), mu_t * mu_t, nu, mu_t)

    @property
    def irrational(self) -> bool:
        return self.nu is None or self.mu_t is None


def rational_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    n, d = isqrt(q.numerator), isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


def _frac(x: Fraction) -> Fraction:
    return x - math.floor(x)


def _in_shift(x: Fraction, offsets, scale=1) -> bool:
    """x in (1/scale) Z + offsets, offsets given modulo 1/scale."""
    return _frac(x * scale) in {_frac(o * scale) for o in offsets}


F = Fraction
# (name, mu~ offsets in Z, nu offsets in Z/2, offset of mu~ + nu in Z)
# Case (c) prints "Z + 1/0"; read as Z + 1/10 like cases (d) and (e).
LEGENDRE_FAMILIES = (
    ("a", (F(1, 2),), None, None),
    ("b", (F(1, 3), F(-1, 3)), (F(1, 3), F(-1, 3)), F(1, 6)),
    ("c", (F(2, 5), F(-2, 5)), (F(1, 5), F(-1, 5)), F(1, 10)),
    ("d", (F(1, 3), F(-1, 3)), (F(2, 5), F(-2, 5)), F(1, 10)),
    ("e", (F(1, 5), F(-1, 5)), (F(2, 5), F(-2, 5)), F(1, 10)),
    ("f", (F(2, 5), F(-2, 5)), (F(1, 3), F(-1, 3)), F(1, 6)),
)


def _family_match(mu_t: Fraction, nu: Fraction | None) -> str | None:
    for name, mu_off, nu_off, sum_off in LEGENDRE_FAMILIES:
        if not _in_shift(mu_t, mu_off):
            continue
        if nu_off is None:
            return name
        if nu is None or not _in_shift(nu, nu_off, scale=2):
            continue
        if _in_shift(mu_t + nu, (sum_off,)):
            return name
    return None


def legendre_integrable(p: LegendreParams) -> tuple[bool, str]:
    """Integrability of the associated Legendre equation, with the clause that decided it.

    Irrational parameters: nu irrational rules out every clause except family
    (a); mu~ irrational leaves only nu in Z; both irrational (quadratic surds)
    can never make mu~ +- nu an integer.
    """
    nu, mu_t = p.nu, p.mu_t
    if nu is not None and nu.denominator == 1:
        return True, "nu in Z"
    if nu is not None and mu_t is not None:
        if (mu_t + nu).denominator == 1:
            return True, "mu~ + nu in Z"
        if (mu_t - nu).denominator == 1:
            return True, "mu~ - nu in Z"
    if mu_t is None:
        return False, "no clause (irrational mu~)"
    nus = (None,) if nu is None else (nu, -1 - nu)
    for s_mu in (mu_t, -mu_t):
        for n in nus:
            fam = _family_match(s_mu, n)
            if fam:
                return True, f"family ({fam})"
    return False, "no clause"


def _nu_from(nu_nu1: Fraction) -> Fraction | None:
    # nu = (-1 + sqrt(1 + 4 nu(nu+1)))/2, the root with larger real part
    s = rational_sqrt(1 + 4 * nu_nu1)
    return None if s is None else (s - 1) / 2


def legendre_params_from_kappa(kappa, plane: str = "G1", energy_case: str = "h0") -> LegendreParams:
    kappa = as_rational(kappa)
    if plane == "G1":
        nn = 2 * (1 + kappa)
    elif plane == "G3":
        if kappa == -2:
            raise ValueError("kappa = -2 is singular on G3")
        nn = 2 * (2 - kappa) / (2 + kappa)
    else:
        raise ValueError(f"unsupported plane {plane!r}")
    if energy_case == "h0":
        mt2 = Fraction(1)
    elif energy_case == "hstar":
        mt2 = 2 * kappa + 1
    else:
        raise ValueError(f"unknown energy case {energy_case!r}")
    return LegendreParams(nn, mt2, _nu_from(nn), rational_sqrt(mt2))


# --- classification ----------------------------------------------------------

KNOWN_KAPPAS = {Fraction(-1): "duffing-split", Fraction(0): "angular-momentum", Fraction(2): "rotation-split"}


def _exact(name, value, notes):
    q, snapped = exact_or_snapped(value)
    if snapped:
        notes.append(f"{name}={value!r} snapped to {q}")
    return q


def classify(p: Params) -> Verdict:
    """Integrability verdict for the AGK Hamiltonian with parameters p."""
    notes: list[str] = []
    for name in ("mu", "a", "b"):
        v = getattr(p, name)
        if isinstance(v, float) and not math.isfinite(v):
            raise ValueError(f"{name} must be finite")
    mu = _exact("mu", p.mu, notes)
    a = _exact("a", p.a, notes)
    b = _exact("b", p.b, notes)
    is_zero = lambda q, raw: (q == 0) if q is not None else raw == 0  # noqa: E731

    if is_zero(b, p.b):
        if is_zero(a, p.a):
            return Verdict(Level.LIOUVILLE, "harmonic", {"second_integral": "angular momentum"}, notes)
        return Verdict(Level.LIOUVILLE, "angular-momentum", {"second_integral": "angular momentum"}, notes)

    if is_zero(a, p.a):
        if is_zero(mu, p.mu):
            return Verdict(Level.RATIONAL_EXCLUDED, "quantic-nve", {"planes": ["G1", "G3"]}, notes)
        if b is not None and mu is not None:
            w = {"mathieu_G1": [str(v) for v in (b / 2 + mu, b / 2)], "mathieu_G3": [str(v) for v in (-b / 2 + mu, -b / 2)]}
        else:
            w = {}
        return Verdict(Level.RATIONAL_EXCLUDED, "mathieu-nve", w, notes)

    if a is None or b is None:
        kappa_f = float(p.b) / float(p.a)
        kappa = _exact("kappa", kappa_f, notes)
    else:
        kappa = b / a
    if kappa is None:
        notes.append(f"kappa={kappa_f!r} has no rational approximant; treated as irrational")
    elif kappa in KNOWN_KAPPAS:
        rule = KNOWN_KAPPAS[kappa]
        desc = {"duffing-split": "two uncoupled Duffing energies",
                "rotation-split": "energies of the rotated coordinates u, v"}[rule]
        return Verdict(Level.LIOUVILLE, rule, {"kappa": kappa, "second_integral": desc}, notes)

    witnesses: dict = {"kappa": kappa if kappa is not None else kappa_f}
    if kappa is not None:
        rc = rational_integrability_necessary(agk_quartic(1, kappa))
        witnesses["rational_check"] = rc.status
        witnesses["lambdas"] = [
            {"lambda": str(e.exact) if e.exact is not None else repr(e.value),
             "member": e.witness is not None,
             "family": e.witness.family if e.witness else None,
             "j": e.witness.j if e.witness else None}
            for e in rc.entries
        ]
    else:
        rc = None

    if is_zero(mu, p.mu):
        notes.append("Cauchy-Euler normal variational equations give no obstruction")
        if rc is None:
            return Verdict(Level.INCONCLUSIVE, "homogeneous-rational", witnesses, notes)
        level = {"excluded": Level.RATIONAL_EXCLUDED, "not-excluded": Level.NOT_EXCLUDED,
                 "inconclusive": Level.INCONCLUSIVE}[rc.status]
        return Verdict(level, "homogeneous-rational", witnesses, notes)

    if kappa is None:
        # Lambda = {-1, 0, 2}; a kappa with no short rational approximant is not in it
        return Verdict(Level.MEROMORPHIC_EXCLUDED, "legendre-nve", witnesses, notes)
    l1, l2 = lambda1_member(kappa), lambda2_member(kappa)
    witnesses["lambda1_l"] = l1
    witnesses["lambda2_l"] = l2
    if l1 is None or l2 is None:
        failing = []
        if l1 is None:
            lp = legendre_params_from_kappa(kappa, "G1")
            failing.append({"plane": "G1", "nu(nu+1)": lp.nu_nu1, "nu": lp.nu})
        if l2 is None:
            if kappa == -2:
                failing.append({"plane": "G3", "note": "2a + b = 0, no particular solution"})
            else:
                lp = legendre_params_from_kappa(kappa, "G3")
                failing.append({"plane": "G3", "nu(nu+1)": lp.nu_nu1, "nu": lp.nu})
        witnesses["non_integrable_nve"] = failing
        return Verdict(Level.MEROMORPHIC_EXCLUDED, "legendre-nve", witnesses, notes)
    # Lambda coincides with the three integrable families, so this is unreachable
    return Verdict(Level.NOT_EXCLUDED, "lambda-set", witnesses, notes)
