"""Grid geometry, tactile frames, and pressure-to-conductance transduction.

All quantities carry fixed SI units: siemens, ohms, volts, pascals, seconds.
Pixels are ordered row-major everywhere so weight columns, dictionary rows,
and frame vectors align by construction.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np


class DomainError(ValueError):
    """Raised when an input violates an operation's domain contract."""


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class GridGeometry:
    """Sensor array layout: rows x cols taxels with a physical pitch in meters."""

    rows: int
    cols: int
    pitch: float = 0.015

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise DomainError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        if not (self.pitch > 0):
            raise DomainError(f"pitch must be positive, got {self.pitch}")

    @property
    def n(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class CircuitParams:
    """Summing-amplifier and piezoresistive transduction constants.

    r_f is the feedback resistor of the inverting summer, v_dd the DAC supply.
    r_off / r_min bound the sensor element resistance at rest / full press,
    and p0 sets the pressure scale of the exponential resistance decay.
    """

    r_f: float = 4700.0
    v_dd: float = 3.3
    r_off: float = 1e6
    r_min: float = 1e3
    p0: float = 1e4

    def __post_init__(self):
        for name in ("r_f", "v_dd", "r_off", "r_min", "p0"):
            if not (getattr(self, name) > 0):
                raise DomainError(f"{name} must be strictly positive")
        if not (self.r_min < self.r_off):
            raise DomainError("r_min must be below r_off")

    @property
    def rest_conductance(self) -> float:
        """Conductance of an untouched pixel."""
        return 1.0 / self.r_off


@dataclass(frozen=True)
class TactileFrame:
    """One snapshot of the array: N per-pixel conductances plus a timestamp."""

    geometry: GridGeometry
    conductance: np.ndarray
    timestamp: float = 0.0

    def __post_init__(self):
        c = _readonly(np.asarray(self.conductance).ravel())
        if c.size != self.geometry.n:
            raise DomainError(
                f"conductance length {c.size} != N={self.geometry.n}")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise DomainError("conductances must be finite and non-negative")
        object.__setattr__(self, "conductance", c)

    def grid(self) -> np.ndarray:
        """Conductances reshaped to (rows, cols)."""
        return self.conductance.reshape(self.geometry.rows, self.geometry.cols)


@dataclass(frozen=True)
class PressureMap:
    """Ground-truth applied pressure, one value per pixel in pascals."""

    geometry: GridGeometry
    pressure: np.ndarray

    def __post_init__(self):
        p = _readonly(np.asarray(self.pressure).ravel())
        if p.size != self.geometry.n:
            raise DomainError(f"pressure length {p.size} != N={self.geometry.n}")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise DomainError("pressures must be finite and non-negative")
        object.__setattr__(self, "pressure", p)

    def grid(self) -> np.ndarray:
        return self.pressure.reshape(self.geometry.rows, self.geometry.cols)


def to_conductance(resistance):
    """Conductance C = 1/R in siemens. Rejects non-positive or non-finite R."""
    r = np.asarray(resistance, dtype=np.float64)
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise DomainError("resistance must be finite and strictly positive")
    out = 1.0 / r
    return float(out) if np.isscalar(resistance) else out


def pixel_resistance(pressure, params: CircuitParams) -> np.ndarray:
    """Piezoresistive element model: R(p) = r_min + (r_off - r_min) exp(-p/p0)."""
    p = np.asarray(pressure, dtype=np.float64)
    return params.r_min + (params.r_off - params.r_min) * np.exp(-p / params.p0)


def transduce(pmap: PressureMap, params: CircuitParams, timestamp: float = 0.0) -> TactileFrame:
    """Convert an applied pressure map to a conductance frame.

    Monotone: higher pressure -> lower resistance -> higher conductance,
    bounded between 1/r_off (rest) and 1/r_min (saturation).
    """
    r = pixel_resistance(pmap.pressure, params)
    return TactileFrame(pmap.geometry, 1.0 / r, timestamp)


def linear_index(row: int, col: int, geometry: GridGeometry) -> int:
    """Row-major pixel index: row*cols + col."""
    if not (0 <= row < geometry.rows and 0 <= col < geometry.cols):
        raise DomainError(f"({row},{col}) outside {geometry.rows}x{geometry.cols} grid")
    return row * geometry.cols + col


def grid_position(index: int, geometry: GridGeometry) -> tuple[int, int]:
    """Inverse of linear_index."""
    if not (0 <= index < geometry.n):
        raise DomainError(f"index {index} outside [0,{geometry.n})")
    return divmod(index, geometry.cols)


# --- frame / pressure-map JSON-lines files ---------------------------------

def write_frames_jsonl(path, frames: Iterable[TactileFrame]) -> None:
    """One frame per line: {"rows":R,"cols":C,"t":s,"conductance":[...]}."""
    with open(path, "w") as f:
        for fr in frames:
            rec = {"rows": fr.geometry.rows, "cols": fr.geometry.cols,
                   "t": fr.timestamp, "conductance": fr.conductance.tolist()}
            f.write(json.dumps(rec) + "\n")


def read_frames_jsonl(path) -> Iterator[TactileFrame]:
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            geom = GridGeometry(rec["rows"], rec["cols"])
            yield TactileFrame(geom, np.array(rec["conductance"]), rec.get("t", 0.0))


def write_pressure_jsonl(path, maps: Iterable[PressureMap]) -> None:
    with open(path, "w") as f:
        for pm in maps:
            rec = {"rows": pm.geometry.rows, "cols": pm.geometry.cols,
                   "pressure": pm.pressure.tolist()}
            f.write(json.dumps(rec) + "\n")


def read_pressure_jsonl(path) -> Iterator[PressureMap]:
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            geom = GridGeometry(rec["rows"], rec["cols"])
            yield PressureMap(geom, np.array(rec["pressure"]))
