"""
Trace comparison of the three operator families over a grid of weights.

For each weight t a row holds Tr(e^H #_t e^K), Tr e^{(1-t)H+tK} and
Tr e^{(1-t)H} e^{tK}, and the ordering expected in every regime that
contains t is checked. Rows whose matrices overflow, or are too badly
conditioned to stay positive definite in double precision, are kept and
marked rather than aborting the sweep.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from . import inequalities as iq
from .errors import DomainError, RangeError
from .linalg import hermitian_eig

CSV_HEADER = ("t", "trace_geom_mean", "trace_exp_sum", "trace_product", "regime")
SERIES = (
    ("trace_geom_mean", "#d62728", "Tr (e^H #_t e^K)"),
    ("trace_exp_sum", "#2ca02c", "Tr e^((1-t)H + tK)"),
    ("trace_product", "#1f77b4", "Tr e^((1-t)H) e^(tK)"),
)
OVERFLOW = "overflow"
# past the guard, e^{tK} either overflows or loses positive definiteness in double precision
_UNREPRESENTABLE = (RangeError, DomainError)


@dataclass
class SweepRow:
    t: float
    trace_geom_mean: float
    trace_exp_sum: float
    trace_product: float
    regime: str
    overflow: bool = False
    violations: list = field(default_factory=list)

    def value(self, name: str) -> float:
        return getattr(self, name)


def _traces(H, K, ts, decH, decK):
    mean = np.sum(iq.mean_singular_values(H, K, ts, decH=decH, decK=decK), axis=-1)
    exp = np.sum(iq.exp_singular_values(H, K, ts), axis=-1)
    sym = np.sum(iq.sym_singular_values(H, K, ts, decH, decK), axis=-1)
    return mean, exp, sym


def _ordering_violations(t: float, vals: dict) -> list[str]:
    out = []
    for regime in iq.regimes(t):
        for x, y in iq.REGIME_ORDERINGS[regime]:
            tol = float(iq.default_tol(vals[x], vals[y]))
            if not vals[y] - vals[x] >= -tol:
                out.append(f"{regime}:{x}<={y}")
    return out


def sweep_rows(H, K, ts) -> list[SweepRow]:
    """Evaluate the three traces at every weight in ``ts`` (r = 1)."""
    H, K = iq._prep(H, K)
    ts = [float(t) for t in ts]
    decH, decK = hermitian_eig(H), hermitian_eig(K)
    try:
        cols = _traces(H, K, ts, decH, decK)
        ok = np.all([np.isfinite(c) for c in cols], axis=0)
        values = [tuple(float(c[i]) for c in cols) if ok[i] else None for i in range(len(ts))]
    except _UNREPRESENTABLE:
        # fall back to one weight at a time to isolate the overflowing rows
        values = []
        for t in ts:
            try:
                c = _traces(H, K, [t], decH, decK)
                v = tuple(float(x[0]) for x in c)
                values.append(v if all(np.isfinite(v)) else None)
            except _UNREPRESENTABLE:
                values.append(None)
    rows = []
    for t, v in zip(ts, values):
        label = iq.regime_label(t)
        if v is None:
            rows.append(SweepRow(t, float("nan"), float("nan"), float("nan"), label, overflow=True))
            continue
        row = SweepRow(t, *v, label)
        row.violations = _ordering_violations(t, {"mean": v[0], "exp": v[1], "sym": v[2]})
        rows.append(row)
    return rows


def rows_to_csv(rows: list[SweepRow]) -> str:
    """CSV with shortest round-trip floats; overflowed rows carry ``overflow`` in every value column."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        if r.overflow:
            w.writerow([repr(r.t), OVERFLOW, OVERFLOW, OVERFLOW, r.regime])
        else:
            w.writerow([repr(r.t), repr(r.trace_geom_mean), repr(r.trace_exp_sum), repr(r.trace_product), r.regime])
    return buf.getvalue()


def _ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    span = hi - lo
    raw = span / max(count - 1, 1)
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    k0 = int(np.ceil(lo / step - 1e-9))
    k1 = int(np.floor(hi / step + 1e-9))
    return [0.0 if k == 0 else float(k * step) for k in range(k0, k1 + 1)]


def _num(x: float) -> str:
    return f"{x:.2f}"


def _label(x: float) -> str:
    return f"{x:.6g}"


def render_svg(rows: list[SweepRow], title: str = "") -> str:
    """Line chart of the three trace curves; overflowed rows are left out."""
    width, height = 800, 500
    left, right, top, bottom = 80, 30, 50, 60
    good = [r for r in rows if not r.overflow]
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2:.0f}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>')
    if good:
        ts = [r.t for r in good]
        vals = [r.value(name) for r in good for name, _, _ in SERIES]
        x0, x1 = min(ts), max(ts)
        y0, y1 = min(vals), max(vals)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    # curves that agree to rounding get the flat-range padding
    if y1 - y0 <= 1e-9 * max(abs(y0), abs(y1), 1.0):
        pad = max(abs(y0), 1.0) * 0.05
        y0, y1 = y0 - pad, y1 + pad
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>')
    for x in _ticks(x0, x1):
        px = _num(sx(x))
        out.append(f'<line x1="{px}" y1="{top + ph}" x2="{px}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px}" y="{top + ph + 20}" text-anchor="middle" font-size="12">{_label(x)}</text>')
    for y in _ticks(y0, y1):
        py = _num(sy(y))
        out.append(f'<line x1="{left - 5}" y1="{py}" x2="{left}" y2="{py}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py}" text-anchor="end" dominant-baseline="middle" font-size="12">{_label(y)}</text>')
    # regime boundaries
    for b in (-1.0, 0.0, 1.0, 2.0):
        if x0 < b < x1:
            px = _num(sx(b))
            out.append(f'<line x1="{px}" y1="{top}" x2="{px}" y2="{top + ph}" stroke="#999999" stroke-dasharray="4,4"/>')
    out.append(f'<text x="{left + pw / 2:.0f}" y="{height - 15}" text-anchor="middle" font-size="14">t</text>')
    out.append(f'<text x="20" y="{top + ph / 2:.0f}" text-anchor="middle" font-size="14" '
               f'transform="rotate(-90 20 {top + ph / 2:.0f})">trace</text>')
    for name, color, _ in SERIES:
        pts = " ".join(f"{_num(sx(r.t))},{_num(sy(r.value(name)))}" for r in good)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
    bad = [r for r in good if r.violations]
    for r in bad:
        out.append(f'<circle cx="{_num(sx(r.t))}" cy="{_num(sy(r.trace_geom_mean))}" r="4" fill="none" stroke="black"/>')
    lx, ly = left + 12, top + 16
    for i, (_, color, text) in enumerate(SERIES):
        y = ly + 18 * i
        out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 24}" y2="{y}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 30}" y="{y}" dominant-baseline="middle" font-size="12">{escape(text)}</text>')
    skipped = len(rows) - len(good)
    note = (f"regime ordering holds at all {len(good)} points" if not bad
            else f"regime ordering violated at {len(bad)} of {len(good)} points (circled)")
    if skipped:
        note += f"; {skipped} overflowed points omitted"
    out.append(f'<text x="{lx}" y="{ly + 18 * len(SERIES)}" dominant-baseline="middle" font-size="11">{escape(note)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
