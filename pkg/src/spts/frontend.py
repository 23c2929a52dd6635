"""Analog summing amplifier and ADC simulation.

The inverting summer realizes the analog inner product
V_out = -r_f * sum_k V_k * C_k, so a stack of M clocked weight rows applied
to a (possibly time-varying) scene yields the compressive measurement
vector y = phi @ x with x = -r_f * C.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .core import CircuitParams, DomainError, TactileFrame
from .firmware import SensingMatrix

_MEASUREMENT_MAGIC = b"SPTSMEA1"

Scene = Union[TactileFrame, Callable[[float], TactileFrame]]


@dataclass(frozen=True)
class AcquisitionConfig:
    """Measurement clock and ADC front-end settings.

    f_clk defaults to 70 kHz, back-derived from the M=20 <-> 3500 FPS
    operating point. noise_sigma is additive Gaussian at the amplifier
    output, in volts.
    """

    f_clk: float = 70000.0
    adc_bits: int = 12
    adc_range: float = 10.0
    noise_sigma: float = 0.0
    saturation: float = 10.0

    def __post_init__(self):
        if not (self.f_clk > 0):
            raise DomainError("f_clk must be positive")
        if not (1 <= self.adc_bits <= 24):
            raise DomainError("adc_bits must be in [1, 24]")
        if not (self.adc_range > 0) or not (self.saturation > 0):
            raise DomainError("adc_range and saturation must be positive")
        if self.noise_sigma < 0:
            raise DomainError("noise_sigma must be non-negative")


@dataclass(frozen=True)
class MeasurementVector:
    """Time-stamped amplifier output samples for one acquisition."""

    values: np.ndarray
    timestamps: np.ndarray
    matrix_id: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        t = np.array(self.timestamps, dtype=np.float64, copy=True)
        if v.shape != t.shape or v.ndim != 1:
            raise DomainError("values and timestamps must be 1-D and same length")
        if v.size > 1 and not np.all(np.diff(t) > 0):
            raise DomainError("timestamps must be strictly increasing")
        v.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "timestamps", t)

    @property
    def m(self) -> int:
        return self.values.size

    def prefix(self, m: int) -> "MeasurementVector":
        if not (1 <= m <= self.m):
            raise DomainError(f"prefix length {m} outside [1, {self.m}]")
        return MeasurementVector(self.values[:m], self.timestamps[:m], self.matrix_id)


def measure_once(weights: np.ndarray, frame: TactileFrame, params: CircuitParams) -> float:
    """One summing-amplifier output: -r_f * sum_k weights[k] * conductance[k]."""
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.size != frame.conductance.size:
        raise DomainError(
            f"weight row length {w.size} != frame length {frame.conductance.size}")
    return float(-params.r_f * (w @ frame.conductance))


def quantize(v, cfg: AcquisitionConfig):
    """Mid-rise uniform quantizer over [-adc_range, +adc_range].

    Clamps to +/-saturation, then maps to the nearest of 2^adc_bits levels at
    (k + 0.5)*delta. Exact cell boundaries round away from zero. Idempotent
    and monotone; output magnitude never exceeds adc_range.
    """
    scalar = np.isscalar(v)
    x = np.clip(np.asarray(v, dtype=np.float64), -cfg.saturation, cfg.saturation)
    levels = 2 ** cfg.adc_bits
    delta = 2.0 * cfg.adc_range / levels
    half = levels // 2
    # floor on the magnitude keeps boundary ties away from zero for either sign
    idx = np.where(x >= 0, np.floor(x / delta), -1.0 - np.floor(-x / delta))
    idx = np.clip(idx, -half, half - 1)
    out = (idx + 0.5) * delta
    return float(out) if scalar else out


def acquire(scene: Scene, phi: SensingMatrix, circuit: CircuitParams,
            cfg: AcquisitionConfig, rng: np.random.Generator | None = None,
            matrix_id: str = "") -> MeasurementVector:
    """Clocked compressive acquisition.

    Measurement i is taken at t_i = i/f_clk against scene(t_i) using weight
    row i, then corrupted by output noise and quantized. For a static scene
    at zero noise and high adc_bits this realizes y = phi @ x within one LSB.
    """
    if callable(scene):
        probe = scene(0.0)
    else:
        probe = scene
    if phi.n != probe.geometry.n:
        raise DomainError(f"sensing matrix N={phi.n} != scene N={probe.geometry.n}")
    m = phi.m
    timestamps = np.arange(m) / cfg.f_clk
    raw = np.empty(m)
    for i, t in enumerate(timestamps):
        frame = scene(t) if callable(scene) else scene
        raw[i] = measure_once(phi.weights[i], frame, circuit)
    if cfg.noise_sigma > 0:
        if rng is None:
            rng = np.random.default_rng(0)
        raw = raw + rng.normal(0.0, cfg.noise_sigma, size=m)
    return MeasurementVector(quantize(raw, cfg), timestamps, matrix_id)


def frame_rate(m: int, cfg: AcquisitionConfig) -> float:
    """Effective tactile frame rate in hertz: f_clk / m."""
    if m < 1:
        raise DomainError("need at least one measurement per frame")
    return cfg.f_clk / m


# --- file formats -----------------------------------------------------------

def write_measurements_jsonl(path, mv: MeasurementVector) -> None:
    """One sample per line: {"t": seconds, "v": volts, "row": i}."""
    with open(path, "w") as f:
        for i in range(mv.m):
            f.write(json.dumps({"t": mv.timestamps[i], "v": mv.values[i], "row": i}) + "\n")


def read_measurements_jsonl(path) -> MeasurementVector:
    ts, vs = [], []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            ts.append(rec["t"])
            vs.append(rec["v"])
    return MeasurementVector(np.array(vs), np.array(ts))


def save_measurements(path, mv: MeasurementVector) -> None:
    """Binary container sharing the sensing-matrix layout: values then timestamps."""
    with open(path, "wb") as f:
        f.write(_MEASUREMENT_MAGIC)
        f.write(struct.pack("<IId", mv.m, 1, 0.0))
        f.write(mv.values.astype("<f8").tobytes())
        f.write(mv.timestamps.astype("<f8").tobytes())


def load_measurements(path) -> MeasurementVector:
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != _MEASUREMENT_MAGIC:
            raise DomainError(f"bad measurement magic {magic!r}")
        m, _, _ = struct.unpack("<IId", f.read(16))
        values = np.frombuffer(f.read(8 * m), dtype="<f8")
        timestamps = np.frombuffer(f.read(8 * m), dtype="<f8")
    return MeasurementVector(values, timestamps)
