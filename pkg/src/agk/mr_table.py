"""Exact membership test against the Morales-Ramis table.

Each row is a quadratic in the integer index j, ``A j^2 + B j + C``, with
rational coefficients. Membership of lambda reduces to finding an integer
root of ``A j^2 + B j + (C - lambda)``, which is done with integer square
roots only.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt, lcm

from .core import as_rational

F = Fraction


@dataclass(frozen=True)
class MRRow:
    family: str
    k: int | None  # None: valid for every admissible k
    kind: str      # "generic1", "generic2" or "shifted"
    c0: Fraction = F(0)
    c1: Fraction = F(0)
    c2: Fraction = F(0)
    c3: Fraction = F(0)

    def applies(self, k: int) -> bool:
        return self.k is None or self.k == k

    def coefficients(self, k: int) -> tuple[Fraction, Fraction, Fraction]:
        """(A, B, C) with value(j) = A j^2 + B j + C."""
        if self.kind == "generic1":
            # jk(jk + k - 2)/2
            return F(k * k, 2), F(k * (k - 2), 2), F(0)
        if self.kind == "generic2":
            # (jk + 1)(jk + k - 1)/2
            return F(k * k, 2), F(k * k, 2), F(k - 1, 2)
        # c0 + c1 (c2 + c3 j)^2
        return (self.c1 * self.c3 * self.c3,
                2 * self.c1 * self.c2 * self.c3,
                self.c0 + self.c1 * self.c2 * self.c2)

    def value(self, k: int, j: int) -> Fraction:
        A, B, C = self.coefficients(k)
        return A * j * j + B * j + C


def _shift(family, k, c0, c1, c2, c3):
    return MRRow(family, k, "shifted", F(c0), F(c1), F(c2), F(c3))


# Row order: left column top to bottom, then right column.
# Constants are kept exactly as printed; the last k=5 row carries 6j where
# its sibling has 10j.
TABLE: tuple[MRRow, ...] = (
    MRRow("1", None, "generic1"),
    MRRow("2", None, "generic2"),
    _shift("3", -5, F(-49, 8), F(1, 8), F(10, 3), 10),
    _shift("4", -5, F(-49, 8), F(1, 8), 4, 10),
    _shift("5", -4, F(-9, 2), F(1, 2), F(4, 3), 4),
    _shift("6", -3, F(-25, 8), F(1, 8), 2, 6),
    _shift("7", -3, F(-25, 8), F(1, 8), F(3, 2), 6),
    _shift("8", -3, F(-25, 8), F(1, 8), F(6, 5), 6),
    _shift("9", -3, F(-25, 8), F(1, 8), F(12, 5), 6),
    _shift("10", 3, F(-1, 8), F(1, 8), 2, 6),
    _shift("11", 3, F(-1, 8), F(1, 8), F(3, 2), 6),
    _shift("12", 3, F(-1, 8), F(1, 8), F(6, 5), 6),
    _shift("13", 3, F(-1, 8), F(1, 8), F(12, 5), 6),
    _shift("14", 4, F(-1, 2), F(1, 2), F(4, 3), 4),
    _shift("15", 5, F(-9, 8), F(1, 8), F(10, 3), 10),
    _shift("16", 5, F(-9, 8), F(1, 8), 4, 6),
)

EXCLUDED_DEGREES = frozenset({-2, 0, 2})


@dataclass(frozen=True)
class MRWitness:
    family: str
    j: int
    lam: Fraction
    k: int


def trivial_lambda(k: int) -> Fraction:
    return Fraction(k * (k - 1))


def integer_roots(A: Fraction, B: Fraction, C: Fraction) -> list[int]:
    """Integer solutions of A j^2 + B j + C = 0, exactly."""
    den = lcm(A.denominator, B.denominator, C.denominator)
    a, b, c = int(A * den), int(B * den), int(C * den)
    if a == 0:
        if b == 0:
            raise ValueError("degenerate row: constant in j")
        return [-c // b] if c % b == 0 else []
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    s = isqrt(disc)
    if s * s != disc:
        return []
    roots = set()
    for num in (-b + s, -b - s):
        if num % (2 * a) == 0:
            roots.add(num // (2 * a))
    return sorted(roots, key=lambda j: (abs(j), j < 0))


def _check_k(k: int) -> None:
    if int(k) != k:
        raise ValueError("degree must be an integer")
    if k in EXCLUDED_DEGREES:
        raise ValueError(f"degree k={k} is excluded from the table (k must avoid -2, 0, 2)")


def mr_member(k: int, lam, table=None) -> MRWitness | None:
    """First table row (in printed order) admitting (k, lam), or None."""
    _check_k(k)
    lam = as_rational(lam)
    for row in TABLE if table is None else table:
        if not row.applies(k):
            continue
        A, B, C = row.coefficients(k)
        roots = integer_roots(A, B, C - lam)
        if roots:
            return MRWitness(row.family, roots[0], lam, k)
    return None


def nearest_table_distance(k: int, lam: float, table=None) -> float:
    """Distance from a float lam to the closest value of any applicable row."""
    _check_k(k)
    best = float("inf")
    for row in TABLE if table is None else table:
        if not row.applies(k):
            continue
        A, B, C = (float(v) for v in row.coefficients(k))
        cands = [-B / (2 * A)]
        disc = B * B - 4 * A * (C - lam)
        if disc >= 0:
            s = disc ** 0.5
            cands += [(-B + s) / (2 * A), (-B - s) / (2 * A)]
        for jr in cands:
            for j in (int(jr // 1), int(jr // 1) + 1):
                best = min(best, abs(float(row.value(k, j)) - lam))
    return best
