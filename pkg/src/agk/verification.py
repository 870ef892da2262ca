"""Self-verification suite: the acceptance checks behind ``agk verify``."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .core import Params, agk_quartic
from .dynamics import (BRANCHES, ParticularSolution, PoleError, integrate_flow, mathieu_equation,
                       monodromy, poschl_teller_form, tabulated_variational_flow,
                       transformed_nve_coefficient)
from .homogeneous import lambda_set, polar_form, rational_integrability_necessary, spectra

SEED = 20240917


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float
    limit: float

    @property
    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number:2d} {self.name}: {self.detail} ({self.elapsed:.2f}s / {self.limit:g}s)"

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "detail": self.detail, "elapsed": round(self.elapsed, 3), "limit": self.limit}


def _timed(number: int, name: str, limit: float, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    t0 = time.perf_counter()
    ok, detail = fn()
    el = time.perf_counter() - t0
    if el > limit:
        ok = False
        detail += f"; runtime {el:.1f}s over {limit:g}s"
    return CheckResult(number, name, ok, detail, el, limit)


# --- 1 ---------------------------------------------------------------------------

def rational_grid(pmax: int = 12, qmax: int = 12) -> list[Fraction]:
    return sorted({Fraction(p, q) for p in range(-pmax, pmax + 1) for q in range(1, qmax + 1)})


def integrable_set_on_grid() -> set[Fraction]:
    return {k for k in rational_grid()
            if rational_integrability_necessary(agk_quartic(1, k)).status == "not-excluded"}


def check_integrable_set() -> tuple[bool, str]:
    got = integrable_set_on_grid()
    want = {Fraction(-1), Fraction(0), Fraction(2)}
    return got == want, f"not excluded on {len(rational_grid())} grid points: {sorted(map(str, got))}"


# --- 2 ---------------------------------------------------------------------------

EXPECTED_SPECTRA = {
    (1, 0): {(12, 4)},
    (1, 2): {(12, 12), (12, 0)},
    (1, -1): {(12, 0), (12, 12)},
}


def spectrum_classes(a, b, tol: float = 1e-9) -> set[tuple[int, int]] | None:
    """Integer spectra found at the Darboux points, or None if any is off an integer."""
    out = set()
    for rep in spectra(agk_quartic(a, b)):
        pair = []
        for v in rep.eigenvalues:
            v = complex(v)
            r = round(v.real)
            if abs(v - r) > tol:
                return None
            pair.append(r)
        out.add(tuple(pair))
    return out


def check_spectra() -> tuple[bool, str]:
    bad = []
    for (a, b), want in EXPECTED_SPECTRA.items():
        got = spectrum_classes(a, b)
        if got != want:
            bad.append(f"(a={a}, b={b}) gave {got}")
    return not bad, "; ".join(bad) or "[12,4], [12,12]/[12,0], [12,0]/[12,12] within 1e-9"


# --- 3 ---------------------------------------------------------------------------

def enumerate_lambda(lmax: int = 10**6) -> set[Fraction]:
    """Lambda_1 and Lambda_2 for l = 0..lmax, intersected."""
    lam1 = {l * (l + 1) // 2 - 1 for l in range(lmax + 1)}
    common = set()
    for l in range(lmax + 1):
        T = l * (l + 1) // 2
        num, den = 2 * (1 - T), 1 + T
        g = math.gcd(num, den)
        num, den = num // g, den // g
        if den == 1 and num in lam1:
            common.add(Fraction(num))
    return common


def check_lambda_sets() -> tuple[bool, str]:
    got = enumerate_lambda()
    return got == {Fraction(-1), Fraction(0), Fraction(2)}, f"Lambda1 & Lambda2 = {sorted(map(str, got))}"


# --- 4 ---------------------------------------------------------------------------

def closed_form_lambdas(kappa) -> list[float]:
    k = float(kappa)
    return [4 + 4 * k, 4 - 8 * k / (2 + k)]


def random_kappas(n: int = 50, seed: int = SEED) -> list[Fraction]:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        q = int(rng.integers(1, 50))
        p = int(rng.integers(-6 * q, 6 * q + 1))
        k = Fraction(p, q)
        if k != -2:
            out.append(k)
    return out


def _same_set(a, b, tol):
    return all(any(abs(x - y) <= tol for y in b) for x in a) and all(any(abs(x - y) <= tol for x in a) for y in b)


def check_lambda_law() -> tuple[bool, str]:
    worst = 0.0
    bad = []
    for k in random_kappas():
        got = [complex(v) for v in lambda_set(polar_form(agk_quartic(1, k)))]
        want = closed_form_lambdas(k)
        if not _same_set(got, want, 1e-9):
            bad.append(str(k))
        for g in got:
            worst = max(worst, min(abs(g - w) for w in want))
    return not bad, f"50 random kappa, max deviation {worst:.1e}" + (f"; mismatches {bad}" if bad else "")


# --- 5 ---------------------------------------------------------------------------

def branch_residuals(n_pairs: int = 5, n_times: int = 100, seed: int = SEED) -> dict:
    """Worst normalized energy residual per branch over random (mu, coeff) and t in [0.1, 3]."""
    rng = np.random.default_rng(seed)
    pairs = rng.uniform(0.2, 5.0, size=(n_pairs, 2))
    times = rng.uniform(0.1, 3.0, size=(n_pairs, n_times))
    out = {}
    for key in BRANCHES:
        worst = 0.0
        for (mu, c), ts in zip(pairs, times):
            ps = ParticularSolution("G1", key[0], key[1], Params(float(mu), float(c), 0.0))
            for t in ts:
                try:
                    worst = max(worst, ps.energy_residual(float(t)))
                except PoleError:
                    continue
        out[key] = worst
    return out


def check_particular_solutions() -> tuple[bool, str]:
    res = branch_residuals()
    bad = [f"{e}-{i} ({r:.1e})" for (e, i), r in res.items() if not r < 1e-10]
    good = sum(1 for r in res.values() if r < 1e-10)
    detail = f"{good}/8 branches within 1e-10"
    if bad:
        detail += "; failing: " + ", ".join(bad)
    return not bad, detail


# --- 6 ---------------------------------------------------------------------------

def fd_flow_jacobian(params: Params, s0: np.ndarray, T: float, eps: float = 1e-3) -> np.ndarray:
    """Fourth-order central differences of the flow map."""
    J = np.empty((4, 4))
    for k in range(4):
        e = np.zeros(4)
        e[k] = eps
        f = [integrate_flow(s0 + c * e, params, T, rtol=1e-13, atol=1e-14) for c in (2, 1, -1, -2)]
        J[:, k] = (-f[0] + 8 * f[1] - 8 * f[2] + f[3]) / (12 * eps)
    return J


VARIATIONAL_CASES = (("G1", Params(1.0, -1.0, 0.5)), ("G3", Params(1.0, -1.0, 0.5)))


def variational_errors(t0: float = -1.0, t1: float = 1.5) -> dict:
    out = {}
    for plane, params in VARIATIONAL_CASES:
        ps = ParticularSolution(plane, "h0", 1, params)
        s0 = np.real(ps.phase_state(t0).as_array())
        Phi = tabulated_variational_flow(ps, t0, t1)
        J = fd_flow_jacobian(params, s0, t1 - t0)
        out[plane] = float(np.max(np.abs(Phi - J)) / np.max(np.abs(J)))
    return out


def check_variational() -> tuple[bool, str]:
    errs = variational_errors()
    return all(e < 1e-6 for e in errs.values()), ", ".join(f"{k} rel. error {v:.1e}" for k, v in errs.items())


# --- 7 ---------------------------------------------------------------------------

def poschl_teller_errors(kappas=(-1, 0, 1, 2, 3), n: int = 200) -> dict:
    taus = np.linspace(-5, 5, n)
    out = {}
    for k in kappas:
        for plane in ("G1", "G3"):
            D, c = poschl_teller_form(Fraction(k), plane, "h0")
            worst = 0.0
            for mu, a in ((2.0, 1.0), (0.7, -1.5)):
                p = Params(mu, a, k * a)
                for tau in taus:
                    v = transformed_nve_coefficient(p, plane, float(tau))
                    worst = max(worst, abs(v - (-float(D) / math.cosh(tau) ** 2 + c)))
            out[(k, plane)] = worst
    return out


def check_poschl_teller() -> tuple[bool, str]:
    errs = poschl_teller_errors()
    worst = max(errs.values())
    return worst < 1e-9, f"10 (kappa, plane) cases, max pointwise error {worst:.1e}"


# --- 8 ---------------------------------------------------------------------------

CROSSINGS = 10**4


def scenario_energy_report(name: str, crossings: int = CROSSINGS) -> dict:
    from .poincare import get_scenario, run_scenario

    s = get_scenario(name)
    t0 = time.perf_counter()
    ds = run_scenario(s, record_events=False, max_crossings=crossings,
                      max_time=max(s.config.max_time, 1e6))
    kept = [m for m in ds.metrics if not m.escaped]
    return {
        "name": name,
        "seeds": len(ds.metrics),
        "bounded": len(kept),
        "max_energy_error": max((m.max_energy_error for m in kept), default=0.0),
        "min_crossings": min((m.crossings for m in kept), default=crossings),
        "elapsed": time.perf_counter() - t0,
    }


def check_symplectic(names=None, crossings: int = CROSSINGS) -> tuple[bool, str]:
    from .poincare import REGISTRY, SMOKE

    names = list(REGISTRY) if names is None else list(names)
    reps = [scenario_energy_report(n, crossings) for n in names]
    bad = [f"{r['name']} dH={r['max_energy_error']:.1e} crossings={r['min_crossings']}"
           for r in reps if not (r["max_energy_error"] < 1e-8 and r["min_crossings"] >= crossings)]
    worst = max(reps, key=lambda r: r["max_energy_error"])
    detail = f"{len(reps)} scenarios, worst dH {worst['max_energy_error']:.1e} ({worst['name']})"
    smoke = [r for r in reps if r["name"] in SMOKE]
    ok = not bad
    if len(smoke) == len(SMOKE):
        st = sum(r["elapsed"] for r in smoke)
        detail += f"; smoke subset {st:.1f}s"
        if st > 30:
            ok = False
            detail += " over 30s"
    if bad:
        detail += "; failing: " + ", ".join(bad)
    return ok, detail


# --- 9 ---------------------------------------------------------------------------

FAMILY_CASES = {
    "angular momentum (b=0)": ("fig1-top", (1,)),
    "Duffing energies (b=-a)": ("fig4-top", (2, 3)),
    "rotated energies (b=2a)": ("fig3-top", (4, 5)),
}


def family_drifts(t_final: float = 1e3, n_seeds: int = 10) -> dict:
    from .poincare import get_scenario
    from .poincare import kernel as K

    out = {}
    for label, (name, cols) in FAMILY_CASES.items():
        s = get_scenario(name)
        seeds = s.seeds()
        pick = seeds[np.linspace(0, len(seeds) - 1, n_seeds).round().astype(int)]
        kick, drift = K.SCHEMES[s.config.method]
        mu, a, b = s.params.floats()
        n_steps = int(round(t_final / s.config.step))
        worst = 0.0
        for sd in pick:
            d = K.integral_drifts(np.ascontiguousarray(sd), mu, a, b, s.config.step, kick, drift, n_steps)
            worst = max(worst, max(d[c] for c in cols))
        out[label] = worst
    return out


def check_families() -> tuple[bool, str]:
    d = family_drifts()
    return all(v < 1e-8 for v in d.values()), ", ".join(f"{k} {v:.1e}" for k, v in d.items())


# --- 10 --------------------------------------------------------------------------

SWEEP_ESCAPE = ("fig1-top", "fig1-bottom", "fig2-top", "fig2-bottom")
SWEEP_BOUNDED = ("fig5-integrable", "fig5-top", "fig5-bottom")


def escape_fractions(names) -> dict:
    from .poincare import get_scenario, run_scenario

    return {n: run_scenario(get_scenario(n), record_events=False).escape_fraction for n in names}


def check_phenomenology() -> tuple[bool, str]:
    up = escape_fractions(SWEEP_ESCAPE)
    flat = escape_fractions(SWEEP_BOUNDED)
    seq = [up[n] for n in SWEEP_ESCAPE]
    ok = all(x <= y for x, y in zip(seq, seq[1:])) and seq[-1] > 0 and all(v == 0 for v in flat.values())
    return ok, ("escape fraction b=0..0.5: " + ", ".join(f"{v:.3f}" for v in seq)
                + "; mu=1 sweep: " + ", ".join(f"{v:.3f}" for v in flat.values()))


# --- 11 --------------------------------------------------------------------------

def mathieu_determinants(n: int = 20, seed: int = SEED) -> list[float]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        b = float(rng.uniform(-2.0, 2.0))
        mu = float(rng.uniform(0.5, 3.0))
        q, T = mathieu_equation(Params(mu, 0, b))
        out.append(float(np.linalg.det(monodromy(q, T))))
    return out


def constant_coefficient_error() -> float:
    worst = 0.0
    for c, T in ((0.0, 1.0), (2.0, 1.3), (-3.0, 2.0), (0.5, 4.0)):
        M = monodromy(lambda t, c=c: c, T)
        if c > 0:
            w = math.sqrt(c)
            ref = [[math.cosh(w * T), math.sinh(w * T) / w], [w * math.sinh(w * T), math.cosh(w * T)]]
        elif c < 0:
            w = math.sqrt(-c)
            ref = [[math.cos(w * T), math.sin(w * T) / w], [-w * math.sin(w * T), math.cos(w * T)]]
        else:
            ref = [[1.0, T], [0.0, 1.0]]
        worst = max(worst, float(np.max(np.abs(M - np.array(ref)))))
    return worst


def check_monodromy() -> tuple[bool, str]:
    dets = mathieu_determinants()
    dev = max(abs(d - 1) for d in dets)
    cc = constant_coefficient_error()
    return dev < 1e-9 and cc < 1e-9, f"max |det - 1| {dev:.1e} over 20 Mathieu cases; constant-coefficient error {cc:.1e}"


# --- registry --------------------------------------------------------------------

CHECKS = (
    (1, "integrable set", 10, check_integrable_set),
    (2, "Hessian spectra", 1, check_spectra),
    (3, "Lambda sets", 5, check_lambda_sets),
    (4, "closed-form lambda law", 5, check_lambda_law),
    (5, "particular solutions", 5, check_particular_solutions),
    (6, "variational consistency", 10, check_variational),
    (7, "Poschl-Teller reduction", 5, check_poschl_teller),
    (8, "symplectic quality", 600, check_symplectic),
    (9, "integrable-family conservation", 60, check_families),
    (10, "chaos phenomenology", 300, check_phenomenology),
    (11, "monodromy sanity", 5, check_monodromy),
)


def run_check(number: int) -> CheckResult:
    for n, name, limit, fn in CHECKS:
        if n == number:
            return _timed(n, name, limit, fn)
    raise KeyError(f"no check {number}")


def run_all(numbers=None, echo: Callable[[str], None] | None = None) -> list[CheckResult]:
    out = []
    for n, *_ in CHECKS:
        if numbers is not None and n not in numbers:
            continue
        r = run_check(n)
        if echo:
            echo(r.line)
        out.append(r)
    return out
