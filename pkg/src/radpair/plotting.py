"""Minimal SVG line plots: axes, ticks and one polyline per data series.

Output is a pure function of the inputs, so figures are byte-reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 720, 480
COLORS = ("#1f4e99", "#c23b22", "#2a7f3f", "#7a3fa0")


def _num(x: float) -> str:
    return format(x, ".2f")


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9) * step
    ticks, t = [], start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _tick_label(v: float) -> str:
    return format(v, ".6g")


@dataclass
class Frame:
    """Maps data coordinates into a pixel rectangle."""

    x0: float
    y0: float
    w: float
    h: float
    xlim: tuple[float, float]
    ylim: tuple[float, float]
    ylog: bool = False

    def _ty(self, y):
        return np.log10(y) if self.ylog else y

    def px(self, x):
        a, b = self.xlim
        return self.x0 + (np.asarray(x, dtype=float) - a) / (b - a) * self.w

    def py(self, y):
        a, b = (self._ty(v) for v in self.ylim)
        return self.y0 + self.h - (self._ty(np.asarray(y, dtype=float)) - a) / (b - a) * self.h


def _limits(values, log=False, pad=0.05):
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if log:
        v = v[v > 0]
    if v.size == 0:
        return (0.1, 10.0) if log else (0.0, 1.0)
    lo, hi = float(v.min()), float(v.max())
    if log:
        lo, hi = 10 ** math.floor(math.log10(lo)), 10 ** math.ceil(math.log10(hi))
        if lo == hi:
            lo, hi = lo / 10, hi * 10
        return lo, hi
    if lo == hi:
        lo, hi = lo - 1, hi + 1
    span = hi - lo
    return lo - pad * span, hi + pad * span


def polyline(frame: Frame, x, y, color: str, width: float = 1.5, dash: str | None = None) -> str:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    if frame.ylog:
        ok &= y > 0
    pts = " ".join(f"{_num(a)},{_num(b)}" for a, b in zip(frame.px(x[ok]), frame.py(y[ok])))
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline fill="none" stroke="{color}" stroke-width="{width}"{extra} '
            f'points="{pts}"/>')


def _axes(frame: Frame, xlabel: str, ylabel: str, right: bool = False,
          color: str = "#000") -> list[str]:
    out = []
    x0, y0, w, h = frame.x0, frame.y0, frame.w, frame.h
    if not right:
        out.append(f'<rect x="{_num(x0)}" y="{_num(y0)}" width="{_num(w)}" '
                   f'height="{_num(h)}" fill="none" stroke="#000"/>')
        for t in nice_ticks(*frame.xlim):
            px = float(frame.px(t))
            out.append(f'<line x1="{_num(px)}" y1="{_num(y0 + h)}" x2="{_num(px)}" '
                       f'y2="{_num(y0 + h + 5)}" stroke="#000"/>')
            out.append(f'<text x="{_num(px)}" y="{_num(y0 + h + 18)}" font-size="11" '
                       f'text-anchor="middle">{_tick_label(t)}</text>')
        out.append(f'<text x="{_num(x0 + w / 2)}" y="{_num(y0 + h + 36)}" font-size="13" '
                   f'text-anchor="middle">{escape(xlabel)}</text>')
    if frame.ylog:
        lo, hi = (int(round(math.log10(v))) for v in frame.ylim)
        yt = [10.0**k for k in range(lo, hi + 1)]
    else:
        yt = nice_ticks(*frame.ylim)
    edge = x0 + w if right else x0
    sign = 1 if right else -1
    anchor = "start" if right else "end"
    for t in yt:
        py = float(frame.py(t))
        out.append(f'<line x1="{_num(edge)}" y1="{_num(py)}" x2="{_num(edge + 5 * sign)}" '
                   f'y2="{_num(py)}" stroke="{color}"/>')
        out.append(f'<text x="{_num(edge + 8 * sign)}" y="{_num(py + 4)}" font-size="11" '
                   f'text-anchor="{anchor}" fill="{color}">{_tick_label(t)}</text>')
    lx = edge + 52 * sign
    ly = y0 + h / 2
    out.append(f'<text x="{_num(lx)}" y="{_num(ly)}" font-size="13" fill="{color}" '
               f'text-anchor="middle" transform="rotate(-90 {_num(lx)} {_num(ly)})">'
               f'{escape(ylabel)}</text>')
    return out


def _document(body: list[str], title: str) -> str:
    head = (f'<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">\n'
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#fff"/>\n'
            f'<text x="{WIDTH / 2}" y="24" font-size="15" text-anchor="middle">'
            f'{escape(title)}</text>\n')
    return head + "\n".join(body) + "\n</svg>\n"


def lifetime_figure(B, T_E, zoom_B=None, zoom_T_E=None,
                    title: str = "Entanglement lifetime vs field") -> str:
    """T_E(B) with the zoom pass drawn in an inset and its window shaded."""
    main = Frame(80, 40, 580, 370, _limits(B, pad=0.0), _limits(T_E))
    body = _axes(main, "B (mT)", "T_E (ns)")
    if zoom_B is not None and len(zoom_B):
        a, b = float(np.min(zoom_B)), float(np.max(zoom_B))
        xa, xb = float(main.px(a)), float(main.px(b))
        body.append(f'<rect x="{_num(xa)}" y="{_num(main.y0)}" width="{_num(max(xb - xa, 1))}" '
                    f'height="{_num(main.h)}" fill="{COLORS[1]}" fill-opacity="0.12"/>')
    body.append(polyline(main, B, T_E, COLORS[0]))
    if zoom_B is not None and len(zoom_B):
        inset = Frame(420, 60, 220, 140, _limits(zoom_B, pad=0.0), _limits(zoom_T_E))
        body.append(f'<rect x="{_num(inset.x0)}" y="{_num(inset.y0)}" width="{_num(inset.w)}" '
                    f'height="{_num(inset.h)}" fill="#fff" stroke="#555"/>')
        body.append(polyline(inset, zoom_B, zoom_T_E, COLORS[1], 1.2))
        body.append(f'<text x="{_num(inset.x0 + inset.w / 2)}" y="{_num(inset.y0 + inset.h + 16)}" '
                    f'font-size="11" text-anchor="middle">zoom {_tick_label(a)} to '
                    f'{_tick_label(b)} mT</text>')
    return _document(body, title)


def scan_figure(B, T_E, r, title: str = "Lifetime and sensitivity ratio") -> str:
    """T_E(B) on the left axis, r(B) on a log right axis with r = 1 marked."""
    r = np.asarray(r, dtype=float)
    left = Frame(80, 40, 540, 370, _limits(B, pad=0.0), _limits(T_E))
    rlim = _limits(np.append(r[np.isfinite(r)], 1.0), log=True)
    right = Frame(80, 40, 540, 370, left.xlim, rlim, ylog=True)
    body = _axes(left, "B (mT)", "T_E (ns)", color=COLORS[0])
    body += _axes(right, "", "r", right=True, color=COLORS[1])
    body.append(polyline(left, B, T_E, COLORS[0]))
    body.append(polyline(right, B, r, COLORS[1]))
    body.append(polyline(right, list(left.xlim), [1.0, 1.0], "#555", 1.0, dash="4 3"))
    return _document(body, title)
