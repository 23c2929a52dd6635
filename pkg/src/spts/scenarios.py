"""Synthetic ground-truth scenes: parametric object library, robotic press
events, bouncing-ball dynamics, and the interpolated raster-scan baseline."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import griddata

from .core import (CircuitParams, DomainError, GridGeometry, PressureMap,
                   TactileFrame, transduce)
from .frontend import AcquisitionConfig
from .perception import ObjectLibrary

SHAPE_KINDS = ("disk", "square", "rect", "T", "L", "cross", "ring", "triangle",
               "bar-h", "bar-v", "small-disk", "large-disk", "U", "H",
               "plus-small", "corner", "dot")


@dataclass(frozen=True)
class ShapeSpec:
    """Parametric contact footprint with a peak pressure.

    size/size2 are in pixels; their meaning depends on kind (radius for
    disks, side lengths for boxes, outer/inner radius for rings, base/height
    for triangles, arm span for crosses and letters).
    """

    label: str
    kind: str
    center: tuple[float, float]
    size: float
    size2: float = 0.0
    peak_pressure: float = 5e4

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise DomainError(f"unknown shape kind {self.kind!r}")
        if self.peak_pressure <= 0:
            raise DomainError("peak_pressure must be positive")


@dataclass(frozen=True)
class BounceSpec:
    """Ball-impact contact model: half-sine force envelope, Gaussian footprint."""

    contact_center: tuple[float, float]
    peak_pressure: float = 5e4
    contact_duration: float = 0.008
    max_radius: float = 4.0
    sigma: float = 1.5

    def __post_init__(self):
        if self.contact_duration <= 0:
            raise DomainError("contact_duration must be positive")
        if self.peak_pressure <= 0 or self.max_radius <= 0 or self.sigma <= 0:
            raise DomainError("peak_pressure, max_radius, sigma must be positive")


def _box(dr, dc, height, width):
    # half-open box so an even side length covers exactly side^2 pixels
    return (dr >= -height / 2) & (dr < height / 2) & (dc >= -width / 2) & (dc < width / 2)


def _shape_mask(spec: ShapeSpec, dr: np.ndarray, dc: np.ndarray) -> np.ndarray:
    k, s, s2 = spec.kind, spec.size, spec.size2
    d = np.hypot(dr, dc)
    if k in ("disk", "small-disk", "large-disk"):
        return d <= s
    if k == "dot":
        # exactly the pixel nearest the center
        m = np.zeros_like(dr, dtype=bool)
        m[np.unravel_index(np.argmin(d), d.shape)] = True
        return m
    if k == "square":
        return _box(dr, dc, s, s)
    if k == "rect":
        return _box(dr, dc, s, s2)
    if k == "ring":
        return (d <= s) & (d > s2)
    if k == "triangle":
        # isoceles, apex up: base s wide, height s2
        frac = (dr + s2 / 2) / s2
        return (dr >= -s2 / 2) & (dr < s2 / 2) & (np.abs(dc) <= frac * s / 2)
    if k == "bar-h":
        return _box(dr, dc, s2, s)
    if k == "bar-v":
        return _box(dr, dc, s, s2)
    if k == "cross":
        return _box(dr, dc, s2, s) | _box(dr, dc, s, s2)
    if k == "plus-small":
        return _box(dr, dc, 1.0, s) | _box(dr, dc, s, 1.0)
    if k == "T":
        top = _box(dr + s / 2 - s2 / 2, dc, s2, s)
        stem = _box(dr - s2 / 2, dc, s - s2, s2)
        return top | stem
    if k == "L":
        vert = _box(dr, dc + s / 2 - s2 / 2, s, s2)
        foot = _box(dr - s / 2 + s2 / 2, dc, s2, s)
        return vert | foot
    if k == "U":
        left = _box(dr, dc + s / 2 - s2 / 2, s, s2)
        right = _box(dr, dc - s / 2 + s2 / 2, s, s2)
        bottom = _box(dr - s / 2 + s2 / 2, dc, s2, s)
        return left | right | bottom
    if k == "H":
        left = _box(dr, dc + s / 2 - s2 / 2, s, s2)
        right = _box(dr, dc - s / 2 + s2 / 2, s, s2)
        mid = _box(dr, dc, s2, s)
        return left | right | mid
    if k == "corner":
        horiz = _box(dr + s / 2 - s2 / 2, dc, s2, s)
        vert = _box(dr, dc + s / 2 - s2 / 2, s, s2)
        return horiz | vert
    raise DomainError(f"unhandled shape kind {k!r}")


def _pixel_offsets(geometry: GridGeometry, center: tuple[float, float]):
    rows = np.arange(geometry.rows, dtype=np.float64)
    cols = np.arange(geometry.cols, dtype=np.float64)
    dr = rows[:, None] - center[0]
    dc = cols[None, :] - center[1]
    return np.broadcast_to(dr, (geometry.rows, geometry.cols)), \
        np.broadcast_to(dc, (geometry.rows, geometry.cols))


def _footprint_extent(spec: ShapeSpec) -> float:
    k, s, s2 = spec.kind, spec.size, spec.size2
    if k in ("disk", "small-disk", "large-disk", "ring"):
        return s
    if k == "dot":
        return 0.5
    if k == "rect":
        return max(s, s2) / 2
    if k == "triangle":
        return max(s, s2) / 2
    if k in ("bar-h", "bar-v"):
        return max(s, s2) / 2
    return s / 2  # square and the letter shapes span size in both axes


def render_shape(spec: ShapeSpec, geometry: GridGeometry,
                 scale: float = 1.0) -> PressureMap:
    """Rasterize a shape footprint at scale * peak_pressure.

    Raises if the nominal footprint extends beyond the grid.
    """
    ext = _footprint_extent(spec)
    cr, cc = spec.center
    if (cr - ext < -0.5 or cr + ext > geometry.rows - 0.5
            or cc - ext < -0.5 or cc + ext > geometry.cols - 0.5):
        raise DomainError(f"shape {spec.label!r} footprint exceeds the grid")
    dr, dc = _pixel_offsets(geometry, spec.center)
    mask = _shape_mask(spec, dr, dc)
    pressure = np.where(mask, scale * spec.peak_pressure, 0.0)
    return PressureMap(geometry, pressure.ravel())


def default_shape_specs(peak_pressure: float = 5e4,
                        center: tuple[float, float] = (4.5, 4.5)) -> list[ShapeSpec]:
    """The 17 parametric stand-ins spanning small (<40% area) and large contacts."""
    c = center
    p = peak_pressure
    return [
        ShapeSpec("dot", "dot", c, 0.5, peak_pressure=p),
        ShapeSpec("small-disk", "small-disk", c, 1.3, peak_pressure=p),
        ShapeSpec("disk", "disk", c, 2.0, peak_pressure=p),
        ShapeSpec("large-disk", "large-disk", c, 3.8, peak_pressure=p),
        ShapeSpec("square", "square", c, 4.0, peak_pressure=p),
        ShapeSpec("rect", "rect", c, 5.0, 8.0, peak_pressure=p),
        ShapeSpec("bar-h", "bar-h", c, 7.0, 2.0, peak_pressure=p),
        ShapeSpec("bar-v", "bar-v", c, 7.0, 2.0, peak_pressure=p),
        ShapeSpec("cross", "cross", c, 7.0, 2.0, peak_pressure=p),
        ShapeSpec("plus-small", "plus-small", c, 3.0, peak_pressure=p),
        ShapeSpec("ring", "ring", c, 4.4, 2.4, peak_pressure=p),
        ShapeSpec("triangle", "triangle", c, 7.0, 6.0, peak_pressure=p),
        ShapeSpec("T", "T", c, 7.0, 2.0, peak_pressure=p),
        ShapeSpec("L", "L", c, 6.0, 2.0, peak_pressure=p),
        ShapeSpec("U", "U", c, 6.0, 2.0, peak_pressure=p),
        ShapeSpec("H", "H", c, 6.0, 2.0, peak_pressure=p),
        ShapeSpec("corner", "corner", c, 5.0, 2.0, peak_pressure=p),
    ]


def shape_library(geometry: GridGeometry, specs: list[ShapeSpec],
                  params: CircuitParams) -> ObjectLibrary:
    """Render each spec at full pressure and transduce to exemplar frames."""
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        raise DomainError("shape labels must be distinct")
    entries = [(s.label, transduce(render_shape(s, geometry), params)) for s in specs]
    return ObjectLibrary(tuple(entries))


class PressureScene:
    """Deterministic time-varying pressure field, callable at any t."""

    def __init__(self, geometry: GridGeometry, fn):
        self.geometry = geometry
        self._fn = fn

    def __call__(self, t: float) -> PressureMap:
        return self._fn(t)


def press_event(shape: ShapeSpec, geometry: GridGeometry, rise: float,
                hold: float, release: float) -> PressureScene:
    """Robotic indentation: trapezoidal envelope times the shape pattern."""
    if rise < 0 or hold < 0 or release < 0 or rise + hold + release <= 0:
        raise DomainError("durations must be non-negative with positive total")
    peak = render_shape(shape, geometry)
    zero = PressureMap(geometry, np.zeros(geometry.n))
    pattern = peak.pressure

    def envelope(t: float) -> float:
        if t < 0 or t > rise + hold + release:
            return 0.0
        if t < rise:
            return t / rise
        if t <= rise + hold:
            return 1.0
        return (rise + hold + release - t) / release if release > 0 else 0.0

    def fn(t: float) -> PressureMap:
        e = envelope(t)
        if e <= 0:
            return zero
        if e >= 1:
            return peak
        return PressureMap(geometry, e * pattern)

    return PressureScene(geometry, fn)


def bounce_event(spec: BounceSpec, geometry: GridGeometry) -> PressureScene:
    """Ball impact: half-sine force envelope with Hertz-like contact growth.

    The Gaussian footprint width scales as envelope^(1/3) and the blob is
    truncated at max_radius, so the pattern stays radially symmetric about
    the contact center.
    """
    zero = PressureMap(geometry, np.zeros(geometry.n))
    dr, dc = _pixel_offsets(geometry, spec.contact_center)
    d2 = dr**2 + dc**2
    outside = np.hypot(dr, dc) > spec.max_radius

    def fn(t: float) -> PressureMap:
        if t <= 0 or t >= spec.contact_duration:
            return zero
        env = float(np.sin(np.pi * t / spec.contact_duration))
        sigma_t = spec.sigma * env ** (1.0 / 3.0)
        blob = spec.peak_pressure * env * np.exp(-d2 / (2.0 * sigma_t**2))
        blob = np.where(outside, 0.0, blob)
        return PressureMap(geometry, blob.ravel())

    return PressureScene(geometry, fn)


def tactile_scene(scene: PressureScene, params: CircuitParams):
    """Wrap a pressure scene as t -> TactileFrame for acquisition."""

    def fn(t: float) -> TactileFrame:
        return transduce(scene(t), params, timestamp=t)

    return fn


def jittered_spec(spec: ShapeSpec, rng: np.random.Generator,
                  center_jitter: float = 0.5, peak_jitter: float = 0.1) -> ShapeSpec:
    """Per-trial variability: +/-center_jitter px center shift, +/-peak_jitter pressure."""
    cr = spec.center[0] + rng.uniform(-center_jitter, center_jitter)
    cc = spec.center[1] + rng.uniform(-center_jitter, center_jitter)
    peak = spec.peak_pressure * (1.0 + rng.uniform(-peak_jitter, peak_jitter))
    return dataclasses.replace(spec, center=(cr, cc), peak_pressure=peak)


def jittered_bounce(spec: BounceSpec, rng: np.random.Generator,
                    center_jitter: float = 0.5, peak_jitter: float = 0.1) -> BounceSpec:
    cr = spec.contact_center[0] + rng.uniform(-center_jitter, center_jitter)
    cc = spec.contact_center[1] + rng.uniform(-center_jitter, center_jitter)
    peak = spec.peak_pressure * (1.0 + rng.uniform(-peak_jitter, peak_jitter))
    return dataclasses.replace(spec, contact_center=(cr, cc), peak_pressure=peak)


def raster_baseline(truth: TactileFrame, m: int,
                    cfg: AcquisitionConfig) -> tuple[TactileFrame, float]:
    """Down-sampled raster-scan control: sample m pixels, interpolate back.

    Pixels are picked uniformly along the row-major order (stratified 1-D
    selection); missing pixels are filled by bilinear interpolation with
    nearest-neighbor fallback outside the sample hull. Acquisition time is
    m / f_clk (one pixel per clock tick).
    """
    geom = truth.geometry
    n = geom.n
    if not (1 <= m <= n):
        raise DomainError(f"raster sample count {m} outside [1, {n}]")
    acq_time = m / cfg.f_clk
    if m == n:
        return TactileFrame(geom, truth.conductance, truth.timestamp), acq_time
    idx = np.floor(np.linspace(0, n - 1, m) + 0.5).astype(int)
    idx = np.unique(idx)
    rr, cc = np.divmod(idx, geom.cols)
    points = np.column_stack([rr, cc]).astype(float)
    values = truth.conductance[idx]
    grid_r, grid_c = np.meshgrid(np.arange(geom.rows), np.arange(geom.cols),
                                 indexing="ij")
    xi = np.column_stack([grid_r.ravel(), grid_c.ravel()]).astype(float)
    if points.shape[0] >= 4:
        try:
            est = griddata(points, values, xi, method="linear")
        except Exception:
            est = np.full(n, np.nan)
        nearest = griddata(points, values, xi, method="nearest")
        est = np.where(np.isnan(est), nearest, est)
    else:
        est = griddata(points, values, xi, method="nearest")
    return TactileFrame(geom, np.clip(est, 0.0, None), truth.timestamp), acq_time
