"""CSV and SVG writers for section datasets. Files are written atomically."""
from __future__ import annotations

import csv
import io
import os
import tempfile

from .engine import allowed_region

EVENT_COLUMNS = ("scenario", "seed_index", "crossing_index", "t", "x", "px", "energy_error")
METRIC_COLUMNS = ("scenario", "seed_index", "escaped", "escape_time", "crossings",
                  "second_integral_drift", "max_energy_error")


def atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def events_csv(ds) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EVENT_COLUMNS)
    name = ds.scenario.name
    for i, ev in enumerate(ds.events):
        for k, (t, x, px, err) in enumerate(ev):
            w.writerow([name, i, k, _fmt(float(t)), _fmt(float(x)), _fmt(float(px)), _fmt(float(err))])
    return buf.getvalue()


def metrics_csv(ds) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRIC_COLUMNS)
    for i, m in enumerate(ds.metrics):
        w.writerow([ds.scenario.name, i, _fmt(m.escaped), _fmt(m.escape_time), m.crossings,
                    _fmt(m.second_integral_drift), _fmt(m.max_energy_error)])
    return buf.getvalue()


def section_svg(ds, size: int = 600, radius: float = 0.6) -> str:
    """Scatter of all events in (x, px) over the allowed region."""
    W, P = allowed_region(ds.scenario.params, ds.scenario.h)
    W, P = 1.05 * W, 1.05 * P
    sx, sy = size / (2 * W), size / (2 * P)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}" width="{size}" height="{size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<line x1="0" y1="{size / 2}" x2="{size}" y2="{size / 2}" stroke="#ccc"/>',
        f'<line x1="{size / 2}" y1="0" x2="{size / 2}" y2="{size}" stroke="#ccc"/>',
        f'<g fill="black"><title>{ds.scenario.name}: x horizontal in [{-W:.4g}, {W:.4g}], '
        f'px vertical in [{-P:.4g}, {P:.4g}]</title>',
    ]
    for ev in ds.events:
        for _, x, px, _ in ev:
            if abs(x) <= W and abs(px) <= P:
                parts.append(f'<circle cx="{(x + W) * sx:.2f}" cy="{(P - px) * sy:.2f}" r="{radius}"/>')
    parts.append("</g></svg>\n")
    return "\n".join(parts)


def write_dataset(ds, out_dir, svg: bool = False) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    name = ds.scenario.name
    paths = {"events": os.path.join(out_dir, f"{name}-events.csv"),
             "metrics": os.path.join(out_dir, f"{name}-metrics.csv")}
    atomic_write(paths["events"], events_csv(ds))
    atomic_write(paths["metrics"], metrics_csv(ds))
    if svg:
        paths["svg"] = os.path.join(out_dir, f"{name}.svg")
        atomic_write(paths["svg"], section_svg(ds))
    return paths
