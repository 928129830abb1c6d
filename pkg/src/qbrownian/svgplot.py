"""Self-contained SVG line plots (no external renderer).

Good enough for the reproduction figures: axes with tick labels, optional
log scales, a legend built from column names, and one polyline per curve.
"""

from __future__ import annotations

import math

import numpy as np

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

_W, _H = 840, 540
_ML, _MR, _MT, _MB = 78, 24, 30, 58


def _nice_ticks(lo, hi, n=6):
    if not math.isfinite(lo) or not math.isfinite(hi) or lo == hi:
        return [lo]
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** math.floor(math.log10(abs(raw)))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    x = start
    while x <= hi + 1e-12 * abs(step):
        ticks.append(0.0 if abs(x) < 1e-12 * step else x)
        x += step
    return ticks


def _log_ticks(lo, hi):
    lo_d = math.floor(math.log10(lo))
    hi_d = math.ceil(math.log10(hi))
    return [10.0**d for d in range(lo_d, hi_d + 1) if lo <= 10.0**d <= hi]


def _fmt(x):
    if x == 0:
        return "0"
    if abs(x) >= 1e4 or abs(x) < 1e-3:
        return f"{x:.1e}"
    return f"{x:.6g}"


class _Axis:
    def __init__(self, lo, hi, pixel_lo, pixel_hi, log=False):
        if log:
            lo = max(lo, 1e-300)
            hi = max(hi, lo * 10)
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        self.lo, self.hi, self.log = lo, hi, log
        self.plo, self.phi = pixel_lo, pixel_hi

    def __call__(self, x):
        if self.log:
            with np.errstate(divide="ignore", invalid="ignore"):
                u = (np.log10(x) - math.log10(self.lo)) / (
                    math.log10(self.hi) - math.log10(self.lo)
                )
        else:
            u = (x - self.lo) / (self.hi - self.lo)
        return self.plo + u * (self.phi - self.plo)

    def ticks(self):
        return _log_ticks(self.lo, self.hi) if self.log else _nice_ticks(self.lo, self.hi)


def line_plot(x, curves, labels, out_path, xlabel="", title="", logx=False, logy=False):
    """Write an SVG with one polyline per curve.

    x: abscissa array; curves: list of y arrays; labels: legend names.
    Nonfinite points (and nonpositive ones on log scales) break the line.
    """
    x = np.asarray(x, dtype=float)
    curves = [np.asarray(c, dtype=float) for c in curves]
    if x.size == 0 or not curves:
        raise ValueError("nothing to plot")

    def finite(vals, log):
        ok = np.isfinite(vals)
        if log:
            ok &= vals > 0
        return vals[ok]

    xs = finite(x, logx)
    ys = np.concatenate([finite(c, logy) for c in curves] or [np.array([0.0])])
    ys = ys[np.isfinite(ys)]
    if xs.size == 0 or ys.size == 0:
        raise ValueError("no finite data to plot")
    ax = _Axis(xs.min(), xs.max(), _ML, _W - _MR, log=logx)
    pad = 0.05 * (ys.max() - ys.min() or abs(ys.max()) or 1.0)
    ay = _Axis(
        ys.min() - (0 if logy else pad),
        ys.max() + (0 if logy else pad),
        _H - _MB,
        _MT,
        log=logy,
    )

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="Helvetica,Arial,sans-serif" font-size="13">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W-_ML-_MR}" height="{_H-_MT-_MB}" '
        f'fill="none" stroke="#333" stroke-width="1"/>',
    ]
    for tx in ax.ticks():
        px = ax(tx)
        if not np.isfinite(px):
            continue
        parts.append(
            f'<line x1="{px:.1f}" y1="{_H-_MB}" x2="{px:.1f}" y2="{_H-_MB+5}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{px:.1f}" y="{_H-_MB+20}" text-anchor="middle">{_fmt(tx)}</text>'
        )
    for ty in ay.ticks():
        py = ay(ty)
        if not np.isfinite(py):
            continue
        parts.append(f'<line x1="{_ML-5}" y1="{py:.1f}" x2="{_ML}" y2="{py:.1f}" stroke="#333"/>')
        parts.append(
            f'<text x="{_ML-8}" y="{py+4:.1f}" text-anchor="end">{_fmt(ty)}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{(_ML+_W-_MR)/2}" y="{_H-14}" text-anchor="middle">{xlabel}</text>'
        )
    if title:
        parts.append(f'<text x="{_ML}" y="20" font-size="15">{title}</text>')

    for i, (c, label) in enumerate(zip(curves, labels)):
        color = _PALETTE[i % len(_PALETTE)]
        pts = []
        segs = []
        for xi, yi in zip(x, c):
            ok = np.isfinite(xi) and np.isfinite(yi)
            if ok and logx:
                ok = xi > 0
            if ok and logy:
                ok = yi > 0
            if ok:
                pts.append(f"{ax(xi):.2f},{ay(yi):.2f}")
            elif pts:
                segs.append(pts)
                pts = []
        if pts:
            segs.append(pts)
        for seg in segs:
            if len(seg) == 1:
                cx, cy = seg[0].split(",")
                parts.append(f'<circle cx="{cx}" cy="{cy}" r="2" fill="{color}"/>')
            else:
                parts.append(
                    f'<polyline points="{" ".join(seg)}" fill="none" '
                    f'stroke="{color}" stroke-width="1.6"/>'
                )
        ly = _MT + 18 + 18 * i
        parts.append(
            f'<line x1="{_W-_MR-150}" y1="{ly-4}" x2="{_W-_MR-120}" y2="{ly-4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(f'<text x="{_W-_MR-114}" y="{ly}">{label}</text>')
    parts.append("</svg>")
    with open(out_path, "w", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
