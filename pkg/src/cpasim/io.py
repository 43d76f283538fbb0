"""Config parsing and result emission (CSV, self-contained SVG).

All numeric config values are in units of the atomic linewidth gamma; the
``gamma_scale`` argument on the emitters converts to physical units at output
time only (rates and intensities multiply, times divide).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .cpa import CPAReport, cpa_cavity_detuning
from .dynamics import TimeTrace
from .errors import IoError, ParseError, ValidationError
from .model import SystemParams
from .sweep import BoundaryMap, CurvePoint, HysteresisCurve
from .steady import EPS_RES, EPS_STAB

_SCALAR_KEYS = {
    "gamma", "kappa", "kappa_l", "kappa_r", "g", "delta_c", "delta_tls",
    "g_nl_mag", "phi", "omega_d",
    "input_min", "input_max", "t_end", "sample_dt",
    "beta_min", "beta_max", "g_fixed", "delta_tls_fixed",
    "tol_res", "tol_stab",
}
_INT_KEYS = {"input_points", "beta_points"}
_LIST_KEYS = {"deltas", "initial_state"}
_BOOL_KEYS = {"cpa_auto_detuning"}
_ALL_KEYS = _SCALAR_KEYS | _INT_KEYS | _LIST_KEYS | _BOOL_KEYS


@dataclass
class RunConfig:
    """Validated parameter bundle for one CLI run."""

    # None when the config defines no cavity (boundary maps need none)
    params: SystemParams | None
    gamma: float = 1.0
    cpa_auto_detuning: bool = False
    input_min: float = 0.0
    input_max: float | None = None
    input_points: int = 301
    deltas: list[float] = field(default_factory=list)
    t_end: float | None = None
    sample_dt: float | None = None
    initial_state: list[float] | None = None
    beta_min: float | None = None
    beta_max: float | None = None
    beta_points: int = 201
    g_fixed: float | None = None
    delta_tls_fixed: float | None = None
    tol_res: float = EPS_RES
    tol_stab: float = EPS_STAB

    def input_grid(self) -> np.ndarray:
        if self.input_max is None:
            raise ValidationError("input_max is required for a sweep")
        return np.linspace(self.input_min, self.input_max, self.input_points)

    def beta_grid(self) -> np.ndarray:
        if self.beta_min is None or self.beta_max is None:
            raise ValidationError("beta_min and beta_max are required for a boundary map")
        return np.linspace(self.beta_min, self.beta_max, self.beta_points)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValidationError(message)


def parse_config(text: str) -> RunConfig:
    """Parse a YAML mapping into a RunConfig.

    Unknown keys are rejected (ParseError); physical invariants are enforced
    through SystemParams and re-raised as ValidationError naming the field.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ParseError(f"invalid config document{where}: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ParseError("config must be a key/value mapping")

    unknown = sorted(set(doc) - _ALL_KEYS)
    if unknown:
        raise ParseError(f"unknown config keys: {', '.join(unknown)}")

    def number(key):
        v = doc[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(f"key '{key}' must be a number, got {v!r}")
        return float(v)

    vals = {k: number(k) for k in _SCALAR_KEYS if k in doc}
    for k in _INT_KEYS:
        if k in doc:
            v = doc[k]
            if isinstance(v, bool) or not isinstance(v, int):
                raise ParseError(f"key '{k}' must be an integer, got {v!r}")
            _require(v >= 2, f"{k} must be at least 2")
            vals[k] = v
    for k in _LIST_KEYS:
        if k in doc:
            v = doc[k]
            if not isinstance(v, list) or not v or any(
                    isinstance(x, bool) or not isinstance(x, (int, float)) for x in v):
                raise ParseError(f"key '{k}' must be a non-empty list of numbers")
            vals[k] = [float(x) for x in v]
    if "cpa_auto_detuning" in doc:
        v = doc["cpa_auto_detuning"]
        if not isinstance(v, bool):
            raise ParseError(f"key 'cpa_auto_detuning' must be true or false, got {v!r}")
        vals["cpa_auto_detuning"] = v

    _require(not ("kappa" in vals and ("kappa_l" in vals or "kappa_r" in vals)),
             "kappa and kappa_l/kappa_r are mutually exclusive")
    _require(("kappa_l" in vals) == ("kappa_r" in vals),
             "kappa_l and kappa_r must be given together")
    auto = vals.get("cpa_auto_detuning", False)
    _require(not (auto and "delta_c" in vals),
             "delta_c and cpa_auto_detuning are mutually exclusive")

    gamma = vals.get("gamma", 1.0)
    _require(gamma > 0.0 and math.isfinite(gamma), "gamma must be positive")

    if "kappa" in vals:
        kl = kr = vals["kappa"] / 2.0
    elif "kappa_l" in vals:
        kl, kr = vals["kappa_l"], vals["kappa_r"]
    else:
        kl = kr = None
        _require(not auto, "cpa_auto_detuning needs a cavity (kappa missing)")
        stray = sorted({"g", "delta_c", "delta_tls", "g_nl_mag", "phi",
                        "omega_d"} & set(vals))
        _require(not stray,
                 f"{', '.join(stray)} given without a cavity decay rate (kappa)")

    params = None
    if kl is not None:
        pkw = dict(
            kappa_l=kl, kappa_r=kr,
            g=vals.get("g", 0.0),
            delta_c=vals.get("delta_c", 0.0),
            delta_tls=vals.get("delta_tls", 0.0),
            g_nl_mag=vals.get("g_nl_mag", 0.0),
            phi=vals.get("phi", 0.0),
            omega_d=vals.get("omega_d", 0.0),
            gamma=gamma,
        )
        try:
            params = SystemParams(**pkw)
            if auto:
                pkw["delta_c"] = cpa_cavity_detuning(params)
                params = SystemParams(**pkw)
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc

    if "initial_state" in vals:
        st = vals["initial_state"]
        _require(len(st) == 5 and all(math.isfinite(x) for x in st),
                 "initial_state must be 5 finite numbers")
    if "input_min" in vals or "input_max" in vals:
        _require(vals.get("input_min", 0.0) >= 0.0, "input_min must be >= 0")
        if "input_max" in vals:
            _require(vals["input_max"] > vals.get("input_min", 0.0),
                     "input_max must exceed input_min")
    if "beta_min" in vals or "beta_max" in vals:
        _require(vals.get("beta_min", 0.0) > 0.0, "beta_min must be positive")
        if "beta_max" in vals and "beta_min" in vals:
            _require(vals["beta_max"] > vals["beta_min"],
                     "beta_max must exceed beta_min")
    if "t_end" in vals:
        _require(vals["t_end"] > 0.0, "t_end must be positive")
    if "sample_dt" in vals:
        _require(vals["sample_dt"] > 0.0, "sample_dt must be positive")
    for k in ("tol_res", "tol_stab"):
        if k in vals:
            _require(vals[k] > 0.0, f"{k} must be positive")

    return RunConfig(
        params=params,
        gamma=gamma,
        cpa_auto_detuning=auto,
        input_min=vals.get("input_min", 0.0),
        input_max=vals.get("input_max"),
        input_points=vals.get("input_points", 301),
        deltas=vals.get("deltas", []),
        t_end=vals.get("t_end"),
        sample_dt=vals.get("sample_dt"),
        initial_state=vals.get("initial_state"),
        beta_min=vals.get("beta_min"),
        beta_max=vals.get("beta_max"),
        beta_points=vals.get("beta_points", 201),
        g_fixed=vals.get("g_fixed"),
        delta_tls_fixed=vals.get("delta_tls_fixed"),
        tol_res=vals.get("tol_res", EPS_RES),
        tol_stab=vals.get("tol_stab", EPS_STAB),
    )


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write(path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def emit_csv(result, path, gamma_scale: float = 1.0) -> None:
    """Write a result to CSV with 17-significant-digit decimal formatting and
    deterministic row order.  Schema depends on the result type."""
    gs = float(gamma_scale)
    lines: list[str] = []
    if isinstance(result, HysteresisCurve):
        lines.append("input_intensity,n_c,output_intensity,stability,branch_id")
        pts = sorted(result.points, key=lambda q: (q.input_intensity, q.n_c))
        for q in pts:
            lines.append(f"{_fmt(q.input_intensity * gs)},{_fmt(q.n_c)},"
                         f"{_fmt(q.output_intensity * gs)},{q.stability},{q.branch_id}")
    elif isinstance(result, BoundaryMap):
        lines.append("beta,g_c,delta_tls_c,feasible")
        for b, g_c, d_c, ok in zip(result.axis, result.g_c_curve,
                                   result.delta_c_curve, result.region_mask):
            lines.append(f"{_fmt(b * gs)},{_fmt(g_c * gs)},{_fmt(d_c * gs)},"
                         f"{'true' if ok else 'false'}")
    elif isinstance(result, TimeTrace):
        lines.append("t,n_c,out_intensity")
        for t, n, out in zip(result.t, result.n_c, result.out_intensity):
            lines.append(f"{_fmt(t / gs)},{_fmt(n)},{_fmt(out * gs)}")
    elif isinstance(result, CPAReport):
        keys = ["n_c_cpa", "delta_c_required", "omega_d_cpa", "input_intensity",
                "feasible", "reasons", "residual_out", "branch_location",
                "cooperativity", "fold_lo", "fold_hi"]
        lo, hi = result.fold_window if result.fold_window else (math.nan, math.nan)
        vals = [_fmt(result.n_c_cpa), _fmt(result.delta_c_required * gs),
                _fmt(result.omega_d_cpa * gs), _fmt(result.input_intensity * gs),
                "true" if result.feasible else "false",
                ";".join(result.reasons),
                _fmt(result.residual_out * gs),
                str(result.branch_location) if result.branch_location else "",
                _fmt(result.cooperativity), _fmt(lo * gs), _fmt(hi * gs)]
        lines.append(",".join(keys))
        lines.append(",".join(vals))
    else:
        raise TypeError(f"no CSV schema for {type(result).__name__}")
    _write(path, "\n".join(lines) + "\n")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Header and raw string rows of a CSV written by emit_csv."""
    try:
        with open(path, encoding="utf-8") as fh:
            rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: empty CSV")
    return rows[0], rows[1:]


# ---------------------------------------------------------------- SVG ----

_W, _H = 820, 560
_ML, _MR, _MT, _MB = 72, 24, 40, 52
_DASH = {"Stable": None, "Unstable": "7 5", "Marginal": "2 4"}


def _axis_range(values) -> tuple[float, float]:
    vals = [v for v in values if math.isfinite(v)]
    if not vals:
        return 0.0, 1.0
    lo, hi = min(vals), max(vals)
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.04 * (hi - lo)
    return lo - pad, hi + pad


class _Plot:
    def __init__(self, xr, yr, xlabel, ylabel, title):
        self.xr, self.yr = xr, yr
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="13">',
            f'<rect width="{_W}" height="{_H}" fill="white"/>',
        ]
        if title:
            self.parts.append(
                f'<text x="{_W / 2:.6g}" y="24" text-anchor="middle" '
                f'font-size="16">{title}</text>')
        self._frame(xlabel, ylabel)

    def x(self, v: float) -> float:
        lo, hi = self.xr
        return _ML + (v - lo) / (hi - lo) * (_W - _ML - _MR)

    def y(self, v: float) -> float:
        lo, hi = self.yr
        return _H - _MB - (v - lo) / (hi - lo) * (_H - _MT - _MB)

    def _frame(self, xlabel, ylabel):
        x0, x1 = _ML, _W - _MR
        y0, y1 = _H - _MB, _MT
        self.parts.append(
            f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
            f'fill="none" stroke="black"/>')
        for v in np.linspace(self.xr[0], self.xr[1], 6):
            px = self.x(v)
            self.parts.append(f'<line x1="{px:.6g}" y1="{y0}" x2="{px:.6g}" '
                              f'y2="{y0 + 5}" stroke="black"/>')
            self.parts.append(f'<text x="{px:.6g}" y="{y0 + 20}" '
                              f'text-anchor="middle">{v:.4g}</text>')
        for v in np.linspace(self.yr[0], self.yr[1], 6):
            py = self.y(v)
            self.parts.append(f'<line x1="{x0 - 5}" y1="{py:.6g}" x2="{x0}" '
                              f'y2="{py:.6g}" stroke="black"/>')
            self.parts.append(f'<text x="{x0 - 8}" y="{py + 4:.6g}" '
                              f'text-anchor="end">{v:.4g}</text>')
        self.parts.append(f'<text x="{(x0 + x1) / 2:.6g}" y="{_H - 12}" '
                          f'text-anchor="middle">{xlabel}</text>')
        self.parts.append(
            f'<text x="16" y="{(y0 + y1) / 2:.6g}" text-anchor="middle" '
            f'transform="rotate(-90 16 {(y0 + y1) / 2:.6g})">{ylabel}</text>')

    def polyline(self, xs, ys, color, dash=None, width=1.6):
        pts = " ".join(f"{self.x(a):.6g},{self.y(b):.6g}" for a, b in zip(xs, ys))
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(f'<polyline points="{pts}" fill="none" '
                          f'stroke="{color}" stroke-width="{width}"{d}/>')

    def dot(self, xv, yv, color, r=4.5, label=None):
        px, py = self.x(xv), self.y(yv)
        self.parts.append(f'<circle cx="{px:.6g}" cy="{py:.6g}" r="{r}" '
                          f'fill="{color}" stroke="black"/>')
        if label:
            self.parts.append(f'<text x="{px + 8:.6g}" y="{py - 8:.6g}" '
                              f'font-size="14">{label}</text>')

    def diamond(self, xv, yv, color):
        px, py = self.x(xv), self.y(yv)
        s = 5.0
        self.parts.append(
            f'<polygon points="{px:.6g},{py - s:.6g} {px + s:.6g},{py:.6g} '
            f'{px:.6g},{py + s:.6g} {px - s:.6g},{py:.6g}" fill="{color}" '
            f'stroke="black"/>')

    def rect_band(self, x_lo, x_hi, color, opacity):
        a, b = self.x(x_lo), self.x(x_hi)
        self.parts.append(
            f'<rect x="{a:.6g}" y="{_MT}" width="{b - a:.6g}" '
            f'height="{_H - _MT - _MB}" fill="{color}" fill-opacity="{opacity}"/>')

    def text(self, xpix, ypix, s, color="black"):
        self.parts.append(f'<text x="{xpix}" y="{ypix}" fill="{color}">{s}</text>')

    def render(self) -> str:
        return "\n".join(self.parts) + "\n</svg>\n"


def _svg_curve(curve: HysteresisCurve, gs: float, title) -> str:
    pts = sorted(curve.points, key=lambda q: (q.branch_id, q.input_intensity, q.n_c))
    xr = _axis_range([q.input_intensity * gs for q in pts] or [0.0])
    yr = _axis_range([q.output_intensity * gs for q in pts] or [0.0])
    plot = _Plot(xr, yr, "input intensity", "output intensity", title)
    # branch polylines split where the stability class changes
    by_branch: dict[int, list[CurvePoint]] = {}
    for q in pts:
        by_branch.setdefault(q.branch_id, []).append(q)
    palette = ["#1f5fa8", "#c23b22", "#2e8b57", "#8860b2", "#b8860b"]
    for bid in sorted(by_branch):
        seg: list[CurvePoint] = []
        color = palette[bid % len(palette)]
        for q in by_branch[bid] + [None]:
            if q is not None and (not seg or q.stability is seg[-1].stability):
                seg.append(q)
                continue
            if len(seg) >= 2:
                plot.polyline([s.input_intensity * gs for s in seg],
                              [s.output_intensity * gs for s in seg],
                              color, _DASH[str(seg[-1].stability)])
            seg = [seg[-1], q] if (q is not None and seg) else ([q] if q else [])
    for f_in, f_n in curve.folds:
        near = min(pts, key=lambda q: abs(q.input_intensity - f_in) + abs(q.n_c - f_n),
                   default=None)
        if near is not None:
            plot.diamond(f_in * gs, near.output_intensity * gs, "#444444")
    n_a = n_b = 0
    for m in curve.cpa_markers:
        if m.observable:
            n_a += 1
            tag = f"A{n_a}"
        else:
            n_b += 1
            tag = f"B{n_b} (unobservable)"
        plot.dot(m.input_intensity * gs, m.output_intensity * gs, "#d4a017", label=tag)
    plot.text(_ML + 10, _MT + 18, f"pattern: {curve.pattern}")
    return plot.render()


def _svg_boundary(result: BoundaryMap, gs: float, title) -> str:
    xs = result.axis * gs
    xr = _axis_range(xs)
    yr = _axis_range(list(result.g_c_curve * gs) + list(result.delta_c_curve * gs))
    plot = _Plot(xr, yr, "beta", "critical coupling / critical detuning", title)
    # shaded feasible region: contiguous runs of the mask
    i = 0
    mask = result.region_mask
    while i < len(mask):
        if mask[i]:
            j = i
            while j + 1 < len(mask) and mask[j + 1]:
                j += 1
            plot.rect_band(xs[i], xs[j], "#add8e6", 0.35)
            i = j + 1
        else:
            i += 1
    plot.polyline(xs, result.g_c_curve * gs, "#1f5fa8")
    plot.polyline(xs, result.delta_c_curve * gs, "#c23b22")
    plot.text(_ML + 10, _MT + 18, "critical coupling", "#1f5fa8")
    plot.text(_ML + 10, _MT + 36, "critical detuning", "#c23b22")
    return plot.render()


def _svg_trace(result: TimeTrace, gs: float, title) -> str:
    ts = result.t / gs
    xr = _axis_range(ts)
    yr = _axis_range(list(result.out_intensity * gs) + list(result.n_c))
    plot = _Plot(xr, yr, "time", "output intensity / photon number", title)
    plot.polyline(ts, result.out_intensity * gs, "#1f5fa8")
    plot.polyline(ts, result.n_c, "#888888", dash="5 4", width=1.2)
    plot.text(_ML + 10, _MT + 18, "output intensity", "#1f5fa8")
    plot.text(_ML + 10, _MT + 36, "photon number", "#888888")
    return plot.render()


def _svg_cpa(result: CPAReport, gs: float, title) -> str:
    intensity = result.input_intensity * gs
    xs = [intensity]
    if result.fold_window:
        xs += [result.fold_window[0] * gs, result.fold_window[1] * gs]
    xs = [x for x in xs if math.isfinite(x)] or [1.0]
    xr = _axis_range([0.0] + [1.3 * max(xs)])
    yr = _axis_range([0.0, max(intensity, 1.0) if math.isfinite(intensity) else 1.0])
    plot = _Plot(xr, yr, "input intensity", "output intensity", title)
    if result.fold_window:
        plot.rect_band(result.fold_window[0] * gs, result.fold_window[1] * gs,
                       "#add8e6", 0.35)
        plot.text(_ML + 10, _H - _MB - 10, "bistable window", "#3a7ca5")
    if math.isfinite(intensity) and math.isfinite(result.residual_out):
        # output at the operating point is the nulling residual, i.e. ~0
        plot.dot(intensity, result.residual_out * gs, "#d4a017", label="A1")
    rows = [
        f"photon number {result.n_c_cpa:.6g}",
        f"required cavity detuning {result.delta_c_required * gs:.6g}",
        f"drive amplitude {result.omega_d_cpa * gs:.6g}",
        f"branch: {result.branch_location}" if result.branch_location else "",
        ("feasible" if result.feasible
         else "infeasible: " + "; ".join(result.reasons)),
    ]
    y = _MT + 18
    for row in rows:
        if row:
            plot.text(_ML + 10, y, row)
            y += 18
    return plot.render()


def emit_svg(result, path, gamma_scale: float = 1.0, title: str | None = None) -> None:
    """Write a self-contained SVG plot of a curve, boundary map, trace, or
    absorption report.

    Stable branches are solid, unstable dashed, marginal dotted; folds are
    diamonds; absorption points are labeled dots (A-series observable,
    B-series on unstable branches)."""
    gs = float(gamma_scale)
    if isinstance(result, HysteresisCurve):
        svg = _svg_curve(result, gs, title)
    elif isinstance(result, BoundaryMap):
        svg = _svg_boundary(result, gs, title)
    elif isinstance(result, TimeTrace):
        svg = _svg_trace(result, gs, title)
    elif isinstance(result, CPAReport):
        svg = _svg_cpa(result, gs, title)
    else:
        raise TypeError(f"no SVG rendering for {type(result).__name__}")
    _write(path, svg)
