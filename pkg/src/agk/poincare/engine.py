"""Poincare sections of the AGK flow at y = 0, py > 0."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..core import Params, PhaseState, potential_xy
from . import kernel as K

DEFAULT_ESCAPE_RADIUS = 50.0
DEFAULT_MAX_TIME = 1e4
DEFAULT_REFINE_TOL = 1e-12
MIN_REFINE_TOL = 1e-13


class IntegrationError(RuntimeError):
    def __init__(self, message: str, seed_index: int | None = None):
        super().__init__(message if seed_index is None else f"seed {seed_index}: {message}")
        self.seed_index = seed_index


class OffEnergySurface(ValueError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "yoshida4"
    step: float = 4e-3
    max_time: float = DEFAULT_MAX_TIME
    escape_radius: float = DEFAULT_ESCAPE_RADIUS
    crossing_refine_tol: float = DEFAULT_REFINE_TOL
    max_crossings: int = 1000

    def __post_init__(self):
        if self.method not in K.SCHEMES:
            raise ValueError(f"unknown method {self.method!r}; choose from {sorted(K.SCHEMES)}")
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ValueError("step must be positive and finite")
        if not self.max_time >= 0:
            raise ValueError("max_time must be nonnegative")
        if not self.escape_radius > 0:
            raise ValueError("escape_radius must be positive")
        if not self.crossing_refine_tol >= MIN_REFINE_TOL:
            raise ValueError(f"crossing_refine_tol must be at least {MIN_REFINE_TOL}")
        if self.max_crossings < 0:
            raise ValueError("max_crossings must be nonnegative")

    @property
    def max_steps(self) -> int:
        return int(math.ceil(self.max_time / self.step - 1e-9))


@dataclass(frozen=True)
class SectionEvent:
    index: int
    t: float
    x: float
    px: float
    energy_error: float


@dataclass(frozen=True)
class ChaosMetrics:
    escaped: bool
    escape_time: float | None
    crossings: int
    second_integral_drift: float | None
    max_energy_error: float
    final_time: float = 0.0


# --- single steps and seeds --------------------------------------------------

def symplectic_step(state: PhaseState, params: Params, dt: float, method: str = "yoshida4") -> PhaseState:
    if state.complex_mode:
        raise ValueError("symplectic_step needs a real-mode state")
    kick, drift = K.SCHEMES[method]
    mu, a, b = params.floats()
    out = K.step(state.x, state.y, state.px, state.py, float(dt), mu, a, b, kick, drift)
    if not all(math.isfinite(v) for v in out):
        raise IntegrationError("non-finite state after step")
    return PhaseState(*out)


def seed_on_energy_surface(x: float, px: float, h: float, params: Params) -> PhaseState:
    d = 2.0 * (h - potential_xy(x, 0.0, params)) - px * px
    if d < 0:
        raise OffEnergySurface(f"(x={x}, px={px}) is off the energy surface h={h}: deficit {-d:.6g}")
    return PhaseState(x, 0.0, px, math.sqrt(d))


def _g(X, mu, a, h):
    # h - V(x, 0) as a function of X = x^2
    return h + 0.5 * mu * X + 0.25 * a * X * X


def allowed_region(params: Params, h: float) -> tuple[float, float]:
    """Half-widths (W, P) of the box holding the bounded allowed region at y = 0.

    W bounds |x| on the bounded component of {h - V(x, 0) >= 0}; P bounds |px|.
    Without a bounded component W falls back to sqrt(2|h|/|mu|).
    """
    mu, a, _ = params.floats()
    if a != 0:
        disc = mu * mu - 4 * a * h
        roots = [] if disc < 0 else sorted({(-mu - s) / a for s in (math.sqrt(disc), -math.sqrt(disc))})
    elif mu != 0:
        roots = [-2 * h / mu]
    else:
        roots = []
    roots = [r for r in roots if r > 0]
    if _g(0.0, mu, a, h) >= 0:
        X1 = roots[0] if roots else None
    else:
        X1 = roots[1] if len(roots) > 1 else None
    if X1 is None:
        X1 = 2 * abs(h) / abs(mu) if mu != 0 else 1.0
    cands = [0.0, X1]
    if a != 0 and 0 < -mu / a < X1:
        cands.append(-mu / a)
    gmax = max(_g(X, mu, a, h) for X in cands)
    return math.sqrt(X1), math.sqrt(max(2 * gmax, 0.0))


@dataclass(frozen=True)
class SeedGrid:
    nx: int = 24
    npx: int = 24

    def __post_init__(self):
        if self.nx < 1 or self.npx < 1:
            raise ValueError("seed grid needs at least one cell per axis")


def _symmetric_centres(half: float, n: int) -> np.ndarray:
    """Centres of n equal cells on [-half, half], exactly odd under negation."""
    c = -half + (np.arange(n) + 0.5) * (2 * half / n)
    k = n // 2
    c[:k] = -c[n - k:][::-1]
    if n % 2:
        c[k] = 0.0
    return c


def seed_grid(params: Params, h: float, grid: SeedGrid = SeedGrid()) -> np.ndarray:
    """Cell-centred lattice in (x, px) over the allowed box, filtered to the energy surface.

    Rows (x, 0, px, py) in row-major (x outer, px inner) order.
    """
    W, P = allowed_region(params, h)
    xs = _symmetric_centres(W, grid.nx)
    ps = _symmetric_centres(P, grid.npx)
    rows = []
    for x in xs:
        d0 = 2.0 * (h - potential_xy(x, 0.0, params))
        for px in ps:
            d = d0 - px * px
            if d > 0:
                rows.append((x, 0.0, px, math.sqrt(d)))
    return np.array(rows, dtype=float).reshape(-1, 4)


# --- second integrals ----------------------------------------------------------

@dataclass(frozen=True)
class SecondIntegral:
    name: str
    family: int
    mu: float
    a: float

    def __call__(self, s: PhaseState) -> float:
        return K.second_integral(self.family, s.x, s.y, s.px, s.py, self.mu, self.a)


def second_integral(params: Params) -> SecondIntegral | None:
    """The extra first integral of the integrable families, if params belong to one."""
    mu, a, b = params.floats()
    if params.b == 0:
        return SecondIntegral("angular momentum", K.FAMILY_L, mu, a)
    if params.a != 0 and params.b == -params.a:
        return SecondIntegral("Duffing energy E_x", K.FAMILY_EX, mu, a)
    if params.a != 0 and params.b == 2 * params.a:
        return SecondIntegral("rotated energy E_u", K.FAMILY_EU, mu, a)
    return None


# --- batches ---------------------------------------------------------------------

@dataclass
class BatchResult:
    seeds: np.ndarray
    events: list  # per seed: (n, 4) array of (t, x, px, energy_error)
    metrics: list

    def section_events(self, i: int) -> list[SectionEvent]:
        return [SectionEvent(k, *map(float, row)) for k, row in enumerate(self.events[i])]


MIN_CHUNK = 64  # lanes per worker below which vectorization suffers


def _usable_cpus() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _threads(threads: int | None, n_seeds: int) -> int:
    """Worker count: explicit value, else AGK_THREADS capped by the usable CPUs."""
    if threads is None:
        threads = _usable_cpus()
        env = os.environ.get("AGK_THREADS")
        if env:
            threads = min(threads, int(env))
    return max(1, min(threads, -(-n_seeds // MIN_CHUNK)))


def _run_chunk(seeds, params, config, cap, family):
    kick, drift = K.SCHEMES[config.method]
    mu, a, b = params.floats()
    m = len(seeds)
    events = np.zeros((m, cap, 4))
    stats = np.zeros((m, 5))
    K.integrate_batch(np.ascontiguousarray(seeds), mu, a, b, float(config.step), kick, drift,
                      config.max_steps, int(config.max_crossings), float(config.escape_radius),
                      float(config.crossing_refine_tol), family, events, stats)
    return events, stats


def _mirror_partners(seeds: np.ndarray) -> np.ndarray | None:
    """partner[i] = index of the seed (-x, 0, -px, py), or None if the set is not mirror-closed.

    Seeds on x = 0 are their own partners and are always integrated.
    """
    lookup = {(r[0], r[2]): i for i, r in enumerate(seeds)}
    partner = np.empty(len(seeds), dtype=np.int64)
    for i, r in enumerate(seeds):
        j = lookup.get((-r[0], -r[2]))
        if r[0] == 0.0:
            partner[i] = i
            continue
        if j is None or seeds[j, 3] != r[3]:
            return None
        partner[i] = j
    return partner


def integrate_seeds(seeds: np.ndarray, params: Params, config: IntegratorConfig,
                    record_events: bool = True, threads: int | None = None,
                    use_mirror: bool = True) -> BatchResult:
    """Integrate a batch of seeds; results are ordered like ``seeds``.

    With ``use_mirror`` only seeds with x > 0 are integrated when the batch
    is closed under (x, px) -> (-x, -px). The map is an exact symmetry of the
    floating-point step (every force term is odd in x), so the mirrored
    orbits are reproduced bit for bit.
    """
    seeds = np.asarray(seeds, dtype=float).reshape(-1, 4)
    if not np.all(np.isfinite(seeds)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(seeds), axis=1))[0])
        raise IntegrationError("non-finite seed", bad)
    sec = second_integral(params)
    family = sec.family if sec else K.FAMILY_NONE
    cap = int(config.max_crossings) if record_events else 0
    partner = _mirror_partners(seeds) if use_mirror else None
    run_idx = np.flatnonzero(seeds[:, 0] >= 0) if partner is not None else np.arange(len(seeds))

    n = _threads(threads, len(run_idx))
    chunks = [c for c in np.array_split(run_idx, n) if len(c)] if len(run_idx) else []
    if len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(lambda c: _run_chunk(seeds[c], params, config, cap, family), chunks))
    else:
        parts = [_run_chunk(seeds[c], params, config, cap, family) for c in chunks]

    events = [None] * len(seeds)
    stats = np.zeros((len(seeds), 5))
    for c, (ev, st) in zip(chunks, parts):
        for k, i in enumerate(c):
            stats[i] = st[k]
            events[i] = ev[k, : min(int(st[k, K.STAT_CROSSINGS]), cap)].copy()
    if partner is not None:
        for i in np.flatnonzero(seeds[:, 0] < 0):
            j = partner[i]
            stats[i] = stats[j]
            ev = events[j].copy()
            ev[:, 1:3] *= -1.0
            events[i] = ev

    for i, st in enumerate(stats):
        if st[K.STAT_STATUS] == K.NONFINITE:
            raise IntegrationError(f"non-finite state at t={st[K.STAT_T]:g}", i)
    metrics = [_metrics(st, family) for st in stats]
    return BatchResult(seeds, events, metrics)


def _metrics(st, family) -> ChaosMetrics:
    escaped = st[K.STAT_STATUS] == K.ESCAPED
    return ChaosMetrics(
        escaped=bool(escaped),
        escape_time=float(st[K.STAT_T]) if escaped else None,
        crossings=int(st[K.STAT_CROSSINGS]),
        second_integral_drift=float(st[K.STAT_IDRIFT]) if family != K.FAMILY_NONE else None,
        max_energy_error=float(st[K.STAT_EMAX]),
        final_time=float(st[K.STAT_T]),
    )


def section(seed: PhaseState, params: Params, config: IntegratorConfig = IntegratorConfig()
            ) -> tuple[list[SectionEvent], ChaosMetrics]:
    """Section events and metrics of a single orbit."""
    if seed.complex_mode:
        raise ValueError("section needs a real-mode seed")
    res = integrate_seeds(seed.as_array()[None, :], params, config, use_mirror=False, threads=1)
    return res.section_events(0), res.metrics[0]


def with_overrides(config: IntegratorConfig, **kw) -> IntegratorConfig:
    return replace(config, **{k: v for k, v in kw.items() if v is not None})
