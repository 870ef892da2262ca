"""Command-line interface: ``agk classify|darboux|poincare|scan|verify``.

Exit codes: 0 success, 1 failed verification, 2 bad input, 3 integration failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from fractions import Fraction

import numpy as np

from .core import Params, agk_quartic
from .galois import classify
from .homogeneous import exact_lambda_values, polar_form, rational_integrability_necessary, spectra
from .poincare import (REGISTRY, IntegrationError, IntegratorConfig, SeedGrid, get_scenario, load_config,
                       run_scenario)
from .poincare.io import atomic_write, write_dataset
from .poincare.scenarios import Scenario, apply_overrides

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTEGRATION = 0, 1, 2, 3

_VALUE_FLAGS = {"--mu", "--a", "--b", "--h", "--dt", "--max-time", "--escape-radius", "--values"}
_NEGATIVE = re.compile(r"^-[\d.][\d./eE+\-,:]*$")  # negative number, list or range


class UsageError(Exception):
    pass


def number(text: str) -> Fraction | float:
    """Exact rational for "p/q" and decimal strings; float for exponents or inf/nan."""
    t = text.strip()
    try:
        return Fraction(t)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        v = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return v


def seed_grid_arg(text: str) -> SeedGrid:
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected NxM, got {text!r}")
    try:
        return SeedGrid(int(m[1]), int(m[2]))
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _normalize_argv(argv: list[str]) -> list[str]:
    # argparse would read "--b -1/2" as two options
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and _NEGATIVE.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _chop(v, tol: float = 1e-12):
    """Drop rounding residue: tiny real or imaginary parts of complex values."""
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        scale = max(1.0, abs(v))
        re_, im = (0.0 if abs(x) < tol * scale else x for x in (v.real, v.imag))
        return complex(re_, im) if im else re_
    if isinstance(v, (float, np.floating)):
        return 0.0 if abs(v) < tol else float(v)
    return v


def _show(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, complex):
        return f"{v.real:.12g}{v.imag:+.12g}i"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _json_value(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, complex):
        return [v.real, v.imag] if v.imag else v.real
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def _emit(args, text_lines: list[str], payload: dict) -> None:
    if args.json:
        print(json.dumps(_json_value(payload), indent=2))
    else:
        print("\n".join(text_lines))


# --- classify -------------------------------------------------------------------

def cmd_classify(args) -> int:
    p = Params(args.mu, args.a, args.b)
    v = classify(p)
    lines = [f"mu={_show(p.mu)} a={_show(p.a)} b={_show(p.b)}",
             f"verdict: {v.level.value}",
             f"rule: {v.rule} ({v.description})"]
    for k, w in v.witnesses.items():
        lines.append(f"  {k}: {json.dumps(_json_value(w))}")
    lines += [f"note: {n}" for n in v.notes]
    _emit(args, lines, {"params": {"mu": p.mu, "a": p.a, "b": p.b}, **v.to_dict()})
    return EXIT_OK


# --- darboux --------------------------------------------------------------------

def darboux_report(a, b) -> dict:
    if a == 0 and b == 0:
        raise UsageError("a = b = 0: the quartic part vanishes and there are no Darboux points")
    quartic = agk_quartic(a, b)
    lam = [q if q is not None else _chop(v) for v, q in exact_lambda_values(polar_form(quartic))]
    points = [{"c": [_chop(c) for c in r.point.c], "circle": r.point.circle,
               "spectrum": [_chop(e) for e in r.eigenvalues]} for r in spectra(quartic)]
    rc = rational_integrability_necessary(quartic)
    table = [{"lambda": e.exact if e.exact is not None else e.value, "status": e.status,
              "witness": {"family": e.witness.family, "j": e.witness.j} if e.witness else None,
              "note": e.note} for e in rc.entries]
    return {"a": a, "b": b, "lambda_tilde": lam, "darboux_points": points,
            "table_membership": table, "rational_check": rc.status}


def cmd_darboux(args) -> int:
    rep = darboux_report(args.a, args.b)
    lines = [f"a={_show(args.a)} b={_show(args.b)}",
             "Lambda~: {" + ", ".join(_show(v) for v in rep["lambda_tilde"]) + "}"]
    for d in rep["darboux_points"]:
        c = ", ".join(_show(x) for x in d["c"])
        tag = " (circle of Darboux points)" if d["circle"] else ""
        lines.append(f"  c=({c}){tag}: spectrum [{', '.join(_show(x) for x in d['spectrum'])}]")
    for t in rep["table_membership"]:
        w = t["witness"]
        why = f"row {w['family']}, j={w['j']}" if w else (t["note"] or "no witness")
        lines.append(f"  lambda={_show(t['lambda'])}: {t['status']} ({why})")
    lines.append(f"rational integrability: {rep['rational_check']}")
    _emit(args, lines, rep)
    return EXIT_OK


# --- poincare -------------------------------------------------------------------

def _overrides(args) -> dict:
    ov = {}
    for key in ("mu", "a", "b", "h"):
        v = getattr(args, key, None)
        if v is not None:
            ov[key] = str(v)
    for key, attr in (("step", "dt"), ("max_time", "max_time"), ("escape_radius", "escape_radius"),
                      ("max_crossings", "max_crossings")):
        v = getattr(args, attr, None)
        if v is not None:
            ov[key] = str(float(v)) if key != "max_crossings" else str(v)
    if getattr(args, "seeds", None) is not None:
        ov["grid"] = f"{args.seeds.nx}x{args.seeds.npx}"
    return ov


def _matching_registered(params: Params, h: float) -> Scenario | None:
    for s in REGISTRY.values():
        if s.params == params and s.h == h:
            return s
    return None


def build_scenario(args) -> Scenario:
    """Scenario from --scenario and/or --config, then explicit flags on top."""
    base = None
    if args.scenario:
        try:
            base = get_scenario(args.scenario)
        except KeyError as e:
            raise UsageError(e.args[0]) from None
    if args.config:
        try:
            base = load_config(args.config, base)
        except (OSError, KeyError, ValueError) as e:
            raise UsageError(f"config {args.config}: {e}") from None
    explicit = {k: getattr(args, k) for k in ("mu", "a", "b", "h")}
    if base is None:
        missing = [k for k, v in explicit.items() if v is None]
        if missing:
            raise UsageError("give --scenario, --config, or all of --mu --a --b --h "
                             f"(missing {', '.join('--' + m for m in missing)})")
        p = Params(*(explicit[k] for k in ("mu", "a", "b")))
        h = float(explicit["h"])
        reg = _matching_registered(p, h)
        base = Scenario("custom", p, h, config=reg.config if reg else IntegratorConfig())
    try:
        return apply_overrides(base, _overrides(args))
    except ValueError as e:
        raise UsageError(str(e)) from None


def _summary(ds) -> dict:
    kept = [m for m in ds.metrics if not m.escaped]
    drifts = [m.second_integral_drift for m in kept if m.second_integral_drift is not None]
    s = ds.scenario
    return {
        "scenario": s.name,
        "params": {"mu": s.params.mu, "a": s.params.a, "b": s.params.b, "h": s.h},
        "seeds": len(ds.metrics),
        "escaped": sum(m.escaped for m in ds.metrics),
        "escape_fraction": ds.escape_fraction,
        "events": sum(len(e) for e in ds.events),
        "max_energy_error": max((m.max_energy_error for m in kept), default=0.0),
        "max_second_integral_drift": max(drifts) if drifts else None,
    }


def cmd_poincare(args) -> int:
    s = build_scenario(args)
    try:
        ds = run_scenario(s)
    except IntegrationError as e:
        print(f"integration failed: {e}", file=sys.stderr)
        return EXIT_INTEGRATION
    if args.format == "json":
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"{ds.scenario.name}.json")
        doc = {"summary": _summary(ds), "metrics": [m.__dict__ for m in ds.metrics],
               "events": [e.tolist() for e in ds.events]}
        atomic_write(path, json.dumps(_json_value(doc)) + "\n")
        paths = {"json": path}
    else:
        paths = write_dataset(ds, args.out, svg=args.format == "svg")
    summ = _summary(ds)
    lines = [f"{summ['scenario']}: {summ['seeds']} seeds, {summ['escaped']} escaped, "
             f"{summ['events']} events, max energy error {summ['max_energy_error']:.3g}"]
    if summ["max_second_integral_drift"] is not None:
        lines.append(f"max second-integral drift {summ['max_second_integral_drift']:.3g}")
    lines += [f"wrote {p}" for p in paths.values()]
    _emit(args, lines, {**summ, "files": paths})
    return EXIT_OK


# --- scan -----------------------------------------------------------------------

SCAN_COLUMNS = ("param", "value", "seeds", "escape_fraction", "mean_second_integral_drift",
                "max_energy_error", "verdict", "rule")


def scan_values(text: str) -> list:
    """Comma list ("0,1/100,1/2") or range "start:stop:count" (inclusive, exact)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("range must be start:stop:count")
        lo, hi, n = number(parts[0]), number(parts[1]), int(parts[2])
        if n < 1:
            raise argparse.ArgumentTypeError("count must be at least 1")
        if n == 1:
            return [lo]
        return [lo + (hi - lo) * Fraction(k, n - 1) if isinstance(lo, Fraction) and isinstance(hi, Fraction)
                else lo + (hi - lo) * k / (n - 1) for k in range(n)]
    return [number(t) for t in text.split(",") if t.strip()]


def scan_rows(base: Scenario, param: str, values) -> list[dict]:
    rows = []
    for v in values:
        s = apply_overrides(base, {param: str(v), "name": f"{base.name}[{param}={v}]"})
        ds = run_scenario(s, record_events=False)
        kept = [m for m in ds.metrics if not m.escaped]
        drifts = [m.second_integral_drift for m in kept if m.second_integral_drift is not None]
        verdict = classify(s.params)
        rows.append({
            "param": param, "value": v, "seeds": len(ds.metrics),
            "escape_fraction": ds.escape_fraction,
            "mean_second_integral_drift": sum(drifts) / len(drifts) if drifts else None,
            "max_energy_error": max((m.max_energy_error for m in kept), default=0.0),
            "verdict": verdict.level.value, "rule": verdict.rule,
        })
    return rows


def scan_csv(rows: list[dict]) -> str:
    def cell(v):
        if v is None:
            return ""
        return repr(v) if isinstance(v, float) else str(v)
    lines = [",".join(SCAN_COLUMNS)]
    lines += [",".join(cell(r[c]) for c in SCAN_COLUMNS) for r in rows]
    return "\n".join(lines) + "\n"


def cmd_scan(args) -> int:
    if args.scenario is None and args.config is None and any(getattr(args, k) is None for k in ("mu", "a", "b", "h")):
        args.scenario = "fig1-top"
    base = build_scenario(args)
    try:
        rows = scan_rows(base, args.param, args.values)
    except IntegrationError as e:
        print(f"integration failed: {e}", file=sys.stderr)
        return EXIT_INTEGRATION
    text = scan_csv(rows)
    if args.out:
        atomic_write(args.out, text)
    if args.json:
        print(json.dumps(_json_value(rows), indent=2))
    elif not args.out:
        sys.stdout.write(text)
    else:
        print(f"wrote {args.out} ({len(rows)} rows)")
    return EXIT_OK


# --- verify ---------------------------------------------------------------------

def cmd_verify(args) -> int:
    from .verification import run_all

    echo = None if args.json else print
    results = run_all(args.only, echo=echo)
    ok = all(r.passed for r in results)
    if args.json:
        print(json.dumps({"passed": ok, "checks": [r.to_dict() for r in results]}, indent=2))
    else:
        print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return EXIT_OK if ok else EXIT_FAIL


def check_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated check numbers, got {text!r}") from None


# --- parser ---------------------------------------------------------------------

def _add_run_flags(sp, with_out=True):
    sp.add_argument("--scenario", help="built-in scenario name (see 'agk poincare --list')")
    sp.add_argument("--config", help="file of 'key = value' lines overriding the scenario")
    sp.add_argument("--mu", type=number)
    sp.add_argument("--a", type=number)
    sp.add_argument("--b", type=number)
    sp.add_argument("--h", type=number, help="energy level of the section")
    sp.add_argument("--dt", type=float, help="integrator step")
    sp.add_argument("--max-time", type=float)
    sp.add_argument("--escape-radius", type=float)
    sp.add_argument("--max-crossings", type=int)
    sp.add_argument("--seeds", type=seed_grid_arg, help="seed lattice NxM in (x, px)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="agk", description="Integrability tests and Poincare sections "
                                 "for H = (px^2 + py^2)/2 - mu r^2/2 - a r^4/4 - b x^2 y^2/2.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("classify", help="integrability verdict for (mu, a, b)")
    for k in ("mu", "a", "b"):
        sp.add_argument(f"--{k}", type=number, required=True)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("darboux", help="Darboux points, Hessian spectra and table membership")
    sp.add_argument("--a", type=number, required=True)
    sp.add_argument("--b", type=number, required=True)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_darboux)

    sp = sub.add_parser("poincare", help="section at y = 0, py > 0 for a scenario")
    _add_run_flags(sp)
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--format", choices=("csv", "json", "svg"), default="csv",
                    help="csv: events and metrics; svg: csv plus scatter; json: one document")
    sp.add_argument("--list", action="store_true", help="list built-in scenarios and exit")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_poincare)

    sp = sub.add_parser("scan", help="escape fraction and verdict along a parameter grid")
    _add_run_flags(sp)
    sp.add_argument("--param", choices=("a", "b"), default="b")
    sp.add_argument("--values", type=scan_values, required=True,
                    help="comma list or start:stop:count, e.g. 0,1/100,3/10,1/2")
    sp.add_argument("--out", help="CSV path (default stdout)")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("verify", help="run the acceptance checks")
    sp.add_argument("--only", type=check_list, help="comma-separated check numbers")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_verify)
    return ap


def _list_scenarios() -> None:
    for s in REGISTRY.values():
        p = s.params
        note = f"  # {s.note}" if s.note else ""
        print(f"{s.name:24s} mu={_show(p.mu)} a={_show(p.a)} b={_show(p.b)} h={s.h:g} dt={s.config.step:g}{note}")


def main(argv: list[str] | None = None) -> int:
    argv = _normalize_argv(list(sys.argv[1:] if argv is None else argv))
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if getattr(args, "list", False):
        _list_scenarios()
        return EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ValueError, KeyError) as e:
        msg = e.args[0] if e.args else str(e)
        print(f"agk {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
