"""Compiled fixed-step symplectic integration of batches of AGK orbits.

Seeds are integrated in lock step with the lane index innermost so the
force loops vectorize. Finished lanes are swapped to the end of the active
range. Floating-point contraction is disabled so runs are bit-reproducible
and mirror-image seeds stay exact mirror images.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = -(2.0 ** (1.0 / 3.0)) * _W1

# kick-drift-kick coefficients: kicks[i] dt, drift[i] dt, kicks[i+1] dt ...
SCHEMES = {
    "leapfrog2": (np.array([0.5, 0.5]), np.array([1.0])),
    "yoshida4": (np.array([_W1 / 2, (_W1 + _W0) / 2, (_W1 + _W0) / 2, _W1 / 2]),
                 np.array([_W1, _W0, _W1])),
}

RUNNING, ESCAPED, DONE_CROSSINGS, NONFINITE = 0, 1, 2, 3
FAMILY_NONE, FAMILY_L, FAMILY_EX, FAMILY_EU = 0, 1, 2, 3
STAT_STATUS, STAT_T, STAT_CROSSINGS, STAT_IDRIFT, STAT_EMAX = range(5)
_ISQ2 = 1.0 / math.sqrt(2.0)


@njit(cache=True, nogil=True)
def _force(x, y, mu, a, b):
    r2 = x * x + y * y
    return mu * x + a * r2 * x + b * x * y * y, mu * y + a * r2 * y + b * x * x * y


@njit(cache=True, nogil=True)
def energy(x, y, px, py, mu, a, b):
    r2 = x * x + y * y
    return 0.5 * (px * px + py * py) - 0.5 * mu * r2 - 0.25 * a * r2 * r2 - 0.5 * b * x * x * y * y


@njit(cache=True, nogil=True)
def second_integral(family, x, y, px, py, mu, a):
    if family == FAMILY_L:
        return x * py - y * px
    if family == FAMILY_EX:
        return 0.5 * px * px - 0.5 * mu * x * x - 0.25 * a * x ** 4
    if family == FAMILY_EU:
        u = (x + y) * _ISQ2
        pu = (px + py) * _ISQ2
        return 0.5 * pu * pu - 0.5 * mu * u * u - 0.5 * a * u ** 4
    return 0.0


@njit(cache=True, nogil=True)
def step(x, y, px, py, dt, mu, a, b, kick, drift):
    """One composed kick-drift-kick step of a single orbit."""
    n = drift.shape[0]
    for s in range(n + 1):
        fx, fy = _force(x, y, mu, a, b)
        px += kick[s] * dt * fx
        py += kick[s] * dt * fy
        if s < n:
            x += drift[s] * dt * px
            y += drift[s] * dt * py
    return x, y, px, py


@njit(cache=True, nogil=True)
def _henon_rhs(x, px, py, fx, fy):
    # d/dy of (x, px, py, t) along the flow
    inv = 1.0 / py
    return px * inv, fx * inv, fy * inv, inv


@njit(cache=True, nogil=True)
def henon_step(x, y, px, py, mu, a, b):
    """RK4 step with y as independent variable, from y to 0.

    Returns the state on y = 0 and the elapsed time (negative when y > 0).
    """
    h = -y
    fx, fy = _force(x, y, mu, a, b)
    k1 = _henon_rhs(x, px, py, fx, fy)
    x2, px2, py2 = x + 0.5 * h * k1[0], px + 0.5 * h * k1[1], py + 0.5 * h * k1[2]
    fx, fy = _force(x2, y + 0.5 * h, mu, a, b)
    k2 = _henon_rhs(x2, px2, py2, fx, fy)
    x3, px3, py3 = x + 0.5 * h * k2[0], px + 0.5 * h * k2[1], py + 0.5 * h * k2[2]
    fx, fy = _force(x3, y + 0.5 * h, mu, a, b)
    k3 = _henon_rhs(x3, px3, py3, fx, fy)
    x4, px4, py4 = x + h * k3[0], px + h * k3[1], py + h * k3[2]
    fx, fy = _force(x4, 0.0, mu, a, b)
    k4 = _henon_rhs(x4, px4, py4, fx, fy)
    c = h / 6.0
    xs = x + c * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    pxs = px + c * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    pys = py + c * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    ts = c * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
    return xs, 0.0, pxs, pys, ts


@njit(cache=True, nogil=True)
def refine_crossing(x, y, px, py, dt, tol, mu, a, b, kick, drift):
    """Locate y = 0 on the discrete flow between the previous and current step.

    The current state (y >= 0) was reached from y < 0 in one step of size dt.
    Returns (delta, x, y, px, py) with the crossing at time offset delta in
    [-dt, 0] and |y| < tol, or delta = nan when no crossing could be located.
    """
    delta = henon_step(x, y, px, py, mu, a, b)[4]
    ok = False
    if py > 0.0 and -dt <= delta <= 0.0:
        for _ in range(4):
            xs, ys, pxs, pys = step(x, y, px, py, delta, mu, a, b, kick, drift)
            if abs(ys) < tol:
                ok = True
                break
            if pys <= 0.0:
                break
            delta -= ys / pys
            if delta < -dt or delta > 0.0:
                break
    if ok and pys > 0.0:
        return delta, xs, ys, pxs, pys
    # bisection fallback on [-dt, 0]
    lo, hi = -dt, 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        xs, ys, pxs, pys = step(x, y, px, py, mid, mu, a, b, kick, drift)
        if abs(ys) < tol:
            return mid, xs, ys, pxs, pys
        if ys < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 0.0:
            break
    return math.nan, x, y, px, py


@njit(cache=True, nogil=True)
def integrate_batch(seeds, mu, a, b, dt, kick, drift, max_steps, max_crossings,
                    escape_radius, tol, family, events, stats):
    """Integrate every seed until escape, max_crossings or max_steps.

    seeds:  (m, 4) initial states (x, y, px, py).
    events: (m, cap, 4) buffer receiving (t, x, px, energy_error) per crossing;
            cap may be 0 to skip recording.
    stats:  (m, 5) output rows (status, end or escape time, crossings,
            second-integral drift, max |energy error|).
    """
    m = seeds.shape[0]
    cap = events.shape[1]
    X = seeds[:, 0].copy()
    Y = seeds[:, 1].copy()
    PX = seeds[:, 2].copy()
    PY = seeds[:, 3].copy()
    FX = np.empty(m)
    FY = np.empty(m)
    YP = np.empty(m)
    H0 = np.empty(m)
    I0 = np.empty(m)
    EM = np.zeros(m)
    ID = np.zeros(m)
    CNT = np.zeros(m, np.int64)
    IDX = np.arange(m)
    FLAG = np.zeros(m, np.bool_)
    for j in range(m):
        H0[j] = energy(X[j], Y[j], PX[j], PY[j], mu, a, b)
        I0[j] = second_integral(family, X[j], Y[j], PX[j], PY[j], mu, a)
        FX[j], FY[j] = _force(X[j], Y[j], mu, a, b)
    r2max = escape_radius * escape_radius
    nk = drift.shape[0]
    active = m
    for it in range(max_steps):
        if active == 0:
            break
        for j in range(active):
            YP[j] = Y[j]
        # the force at the end of a step is cached for the first kick of the next
        for s in range(nk + 1):
            k = kick[s] * dt
            if s > 0:
                for j in range(active):
                    x = X[j]
                    y = Y[j]
                    r2 = x * x + y * y
                    FX[j] = mu * x + a * r2 * x + b * x * y * y
                    FY[j] = mu * y + a * r2 * y + b * x * x * y
            for j in range(active):
                PX[j] += k * FX[j]
                PY[j] += k * FY[j]
            if s < nk:
                d = drift[s] * dt
                for j in range(active):
                    X[j] += d * PX[j]
                    Y[j] += d * PY[j]
        t = (it + 1) * dt
        last = it == max_steps - 1
        nflag = 0
        for j in range(active):
            x, y, px, py = X[j], Y[j], PX[j], PY[j]
            r2 = x * x + y * y
            e = abs(0.5 * (px * px + py * py) - 0.5 * mu * r2 - 0.25 * a * r2 * r2
                    - 0.5 * b * x * x * y * y - H0[j])
            EM[j] = max(EM[j], e)
            f = (YP[j] < 0.0) & (y >= 0.0) | (r2 >= r2max) | (not e < 1e300)
            FLAG[j] = f
            nflag += f
        if family == FAMILY_L:
            for j in range(active):
                ID[j] = max(ID[j], abs(X[j] * PY[j] - Y[j] * PX[j] - I0[j]))
        elif family != FAMILY_NONE:
            for j in range(active):
                ID[j] = max(ID[j], abs(second_integral(family, X[j], Y[j], PX[j], PY[j], mu, a) - I0[j]))
        if nflag == 0 and not last:
            continue
        for j in range(active - 1, -1, -1):
            if not (FLAG[j] or last):
                continue
            x, y, px, py = X[j], Y[j], PX[j], PY[j]
            status = RUNNING
            if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(px) and math.isfinite(py)):
                status = NONFINITE
            else:
                if YP[j] < 0.0 and y >= 0.0:
                    delta, xs, ys, pxs, pys = refine_crossing(x, y, px, py, dt, tol, mu, a, b, kick, drift)
                    if math.isfinite(delta) and pys > 0.0:
                        c = CNT[j]
                        if c < cap:
                            ev = events[IDX[j]]
                            ev[c, 0] = t + delta
                            ev[c, 1] = xs
                            ev[c, 2] = pxs
                            ev[c, 3] = energy(xs, ys, pxs, pys, mu, a, b) - H0[j]
                        CNT[j] = c + 1
                        if CNT[j] >= max_crossings:
                            status = DONE_CROSSINGS
                if x * x + y * y >= r2max:
                    status = ESCAPED
            if status == RUNNING and not last:
                continue
            row = stats[IDX[j]]
            row[STAT_STATUS] = status
            row[STAT_T] = t
            row[STAT_CROSSINGS] = CNT[j]
            row[STAT_IDRIFT] = ID[j]
            row[STAT_EMAX] = EM[j]
            active -= 1
            q = active
            X[j], X[q] = X[q], X[j]
            Y[j], Y[q] = Y[q], Y[j]
            PX[j], PX[q] = PX[q], PX[j]
            PY[j], PY[q] = PY[q], PY[j]
            FX[j], FX[q] = FX[q], FX[j]
            FY[j], FY[q] = FY[q], FY[j]
            YP[j], YP[q] = YP[q], YP[j]
            H0[j], H0[q] = H0[q], H0[j]
            I0[j], I0[q] = I0[q], I0[j]
            EM[j], EM[q] = EM[q], EM[j]
            ID[j], ID[q] = ID[q], ID[j]
            CNT[j], CNT[q] = CNT[q], CNT[j]
            IDX[j], IDX[q] = IDX[q], IDX[j]
    return active


@njit(cache=True, nogil=True)
def integral_drifts(seed, mu, a, b, dt, kick, drift, n_steps):
    """Max drift of (H, L, E_x, E_y, E_u, E_v) along one orbit, checked every step."""
    x, y, px, py = seed[0], seed[1], seed[2], seed[3]

    def vals(x, y, px, py):
        u = (x + y) * _ISQ2
        v = (y - x) * _ISQ2
        pu = (px + py) * _ISQ2
        pv = (py - px) * _ISQ2
        return (energy(x, y, px, py, mu, a, b),
                x * py - y * px,
                0.5 * px * px - 0.5 * mu * x * x - 0.25 * a * x ** 4,
                0.5 * py * py - 0.5 * mu * y * y - 0.25 * a * y ** 4,
                0.5 * pu * pu - 0.5 * mu * u * u - 0.5 * a * u ** 4,
                0.5 * pv * pv - 0.5 * mu * v * v - 0.5 * a * v ** 4)

    v0 = vals(x, y, px, py)
    out = np.zeros(6)
    for _ in range(n_steps):
        x, y, px, py = step(x, y, px, py, dt, mu, a, b, kick, drift)
        v = vals(x, y, px, py)
        for k in range(6):
            d = abs(v[k] - v0[k])
            if d > out[k]:
                out[k] = d
    return out
