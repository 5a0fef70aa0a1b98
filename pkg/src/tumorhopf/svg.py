"""Self-contained SVG line plots of trajectories (no plotting library)."""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from typing import Optional

import numpy as np

from tumorhopf.errors import EmptyTrajectory
from tumorhopf.integrator import Trajectory

WIDTH, PANEL_HEIGHT = 800, 360
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 80, 20, 40, 50
MAX_COLUMNS = 1200


def nice_ticks(lo: float, hi: float, target: int = 6):
    if not hi > lo:
        span = abs(lo) if lo else 1.0
        lo, hi = lo - 0.5 * span, hi + 0.5 * span
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks, lo, hi


def decimate(t: np.ndarray, y: np.ndarray, columns: int = MAX_COLUMNS):
    """Keep min and max of each column so oscillation envelopes survive."""
    n = t.shape[0]
    if n <= 2 * columns:
        return t, y
    edges = np.linspace(0, n, columns + 1).astype(int)
    keep = []
    for a, b in zip(edges[:-1], edges[1:]):
        seg = y[a:b]
        i, j = a + int(np.argmin(seg)), a + int(np.argmax(seg))
        keep.extend(sorted((i, j)))
    keep.append(n - 1)
    idx = np.unique(np.asarray(keep))
    return t[idx], y[idx]


def _fmt(v):
    return f"{v:.6g}"


def _panel(root, top, t, y, x_range, ylabel, reference=None, end_marker=False, show_xlabel=True):
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    x0, y0 = MARGIN_LEFT, top + MARGIN_TOP
    ymin, ymax = float(np.min(y)), float(np.max(y))
    if reference is not None:
        ymin, ymax = min(ymin, reference), max(ymax, reference)
    # rounding-level wiggles of a flat curve must not fill the panel
    min_span = 1e-6 * max(abs(ymin), abs(ymax), 1e-300)
    if ymax - ymin < min_span:
        mid = 0.5 * (ymin + ymax)
        ymin, ymax = mid - min_span / 2, mid + min_span / 2
    pad = 0.05 * (ymax - ymin)
    yt, ylo, yhi = nice_ticks(ymin - pad, ymax + pad)
    xt, xlo, xhi = nice_ticks(*x_range)

    def sx(v):
        return x0 + (v - xlo) / (xhi - xlo) * plot_w

    def sy(v):
        return y0 + plot_h - (v - ylo) / (yhi - ylo) * plot_h

    g = ET.SubElement(root, "g", {"font-family": "sans-serif", "font-size": "12"})
    ET.SubElement(g, "rect", x=_fmt(x0), y=_fmt(y0), width=_fmt(plot_w), height=_fmt(plot_h),
                  fill="none", stroke="#444")
    for v in xt:
        px = sx(v)
        ET.SubElement(g, "line", x1=_fmt(px), y1=_fmt(y0 + plot_h), x2=_fmt(px), y2=_fmt(y0 + plot_h + 5), stroke="#444")
        ET.SubElement(g, "text", x=_fmt(px), y=_fmt(y0 + plot_h + 18), **{"text-anchor": "middle"}).text = _fmt(v)
    for v in yt:
        py = sy(v)
        ET.SubElement(g, "line", x1=_fmt(x0 - 5), y1=_fmt(py), x2=_fmt(x0), y2=_fmt(py), stroke="#444")
        ET.SubElement(g, "text", x=_fmt(x0 - 8), y=_fmt(py + 4), **{"text-anchor": "end"}).text = _fmt(v)
    if show_xlabel:
        ET.SubElement(g, "text", x=_fmt(x0 + plot_w / 2), y=_fmt(y0 + plot_h + 38),
                      **{"text-anchor": "middle"}).text = "t"
    ET.SubElement(g, "text", x=_fmt(18), y=_fmt(y0 + plot_h / 2),
                  transform=f"rotate(-90 18 {_fmt(y0 + plot_h / 2)})", **{"text-anchor": "middle"}).text = ylabel
    if reference is not None:
        ET.SubElement(g, "line", x1=_fmt(x0), y1=_fmt(sy(reference)), x2=_fmt(x0 + plot_w), y2=_fmt(sy(reference)),
                      stroke="#c33", **{"stroke-dasharray": "6,4", "class": "reference"})
    pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(t, y))
    ET.SubElement(g, "polyline", points=pts, fill="none", stroke="#1f5fa8", **{"stroke-width": "1.2", "class": "trajectory"})
    if end_marker:
        ET.SubElement(g, "circle", cx=_fmt(sx(t[-1])), cy=_fmt(sy(y[-1])), r="4", fill="#c33",
                      **{"class": "positivity-loss"})


def emit_plot(
    traj: Trajectory,
    omega_s: Optional[float] = None,
    title: Optional[str] = None,
    show_radius: bool = False,
) -> str:
    """Render omega(t), and optionally R(t) in a second panel, as an SVG string.

    A trajectory that lost positivity ends at its last positive node, which is
    marked with a dot.
    """
    if len(traj) == 0:
        raise EmptyTrajectory("nothing to plot")
    n_panels = 2 if show_radius else 1
    height = PANEL_HEIGHT * n_panels
    root = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", version="1.1",
                      width=str(WIDTH), height=str(height), viewBox=f"0 0 {WIDTH} {height}")
    ET.SubElement(root, "rect", width="100%", height="100%", fill="white")
    if title is None:
        d = traj.delays
        title = f"tau1 = {d.tau1:.6g}, tau2 = {d.tau2:.6g}, Gamma = {traj.gamma:.6g}"
        if not traj.completed:
            title += f" (positivity lost at t = {traj.t_fail:.6g})"
    ET.SubElement(root, "text", x=str(WIDTH // 2), y="24", **{"text-anchor": "middle", "font-family": "sans-serif",
                                                             "font-size": "15"}).text = title
    t_axis = (0.0, max(traj.t_end, traj.t_last) if traj.completed else float(traj.t_fail))
    t, w = decimate(traj.t, traj.omega)
    end = not traj.completed
    _panel(root, 0, t, w, t_axis, "omega", reference=omega_s, end_marker=end, show_xlabel=not show_radius)
    if show_radius:
        t, r = decimate(traj.t, traj.radius)
        ref = None if omega_s is None else omega_s ** (1.0 / 3.0) / math.sqrt(traj.gamma)
        _panel(root, PANEL_HEIGHT, t, r, t_axis, "R", reference=ref, end_marker=end)
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"
