"""Bit-exact emulation of the per-pixel weight-generator firmware.

Every pixel runs the same 32-bit linear congruential generator; a shared
clock advances all generators in lockstep and each state is mapped to a
bipolar weighting voltage. Stacking M clock ticks over N pixels yields the
sensing matrix used for compressive acquisition.

The LCG recurrence uses the Numerical Recipes constants with an implicit
2^32 wraparound. The DAC fraction is taken as (state mod 2^24) / 2^24, i.e.
the low 24 bits normalized to [0,1); a literal 32-bit state divided by 2^24
would exceed the DAC range.
"""
from __future__ import annotations

import json
import struct
import warnings
from dataclasses import dataclass

import numpy as np

from .core import DomainError

LCG_A = 1664525
LCG_C = 1013904223
STATE_MODULUS = 2**32
FRACTION_DIVISOR = 2**24

_MATRIX_MAGIC = b"SPTSPHI1"


def lcg_step(seed: int) -> int:
    """One LCG advance: (a*seed + c) mod 2^32."""
    return (LCG_A * seed + LCG_C) % STATE_MODULUS


def unipolar_voltage(seed: int, v_dd: float = 3.3) -> float:
    """DAC output for a state: v_dd * (seed mod 2^24) / 2^24, in [0, v_dd)."""
    if not (v_dd > 0):
        raise DomainError("v_dd must be positive")
    return v_dd * ((seed % FRACTION_DIVISOR) / FRACTION_DIVISOR)


def bipolar_weight(u: float, v_dd: float = 3.3) -> float:
    """Level-shift a unipolar DAC voltage to the bipolar range [-v_dd, +v_dd].

    The op-amp stage maps u -> 2u - v_dd so the midpoint lands on 0 V and the
    weight ensemble has near-zero mean.
    """
    if not (0 <= u <= v_dd):
        raise DomainError(f"unipolar voltage {u} outside [0, {v_dd}]")
    return 2.0 * u - v_dd


@dataclass(frozen=True)
class SeedTable:
    """Per-pixel initial LCG states, derived deterministically from one master seed."""

    master_seed: int
    seeds: tuple

    def __post_init__(self):
        if not (0 <= self.master_seed < STATE_MODULUS):
            raise DomainError("master_seed must be a 32-bit unsigned integer")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    @property
    def n(self) -> int:
        return len(self.seeds)


def assign_seeds(master_seed: int, n: int) -> SeedTable:
    """Distribute initial seeds: pixel k receives the (k+1)-th LCG iterate of master_seed."""
    if n < 1:
        raise DomainError("need at least one pixel")
    seeds = []
    s = master_seed % STATE_MODULUS
    for _ in range(n):
        s = lcg_step(s)
        seeds.append(s)
    return SeedTable(master_seed % STATE_MODULUS, tuple(seeds))


@dataclass(frozen=True)
class SensingMatrix:
    """M x N matrix of bipolar weighting voltages, one row per clock tick."""

    weights: np.ndarray
    seed_table: SeedTable
    v_dd: float = 3.3

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, copy=True)
        if w.ndim != 2:
            raise DomainError("weights must be a 2-D matrix")
        if not np.all(np.isfinite(w)) or np.any(np.abs(w) > self.v_dd):
            raise DomainError("weights must be finite and within [-v_dd, v_dd]")
        if w.size >= 1000 and abs(w.mean()) > 0.05 * self.v_dd:
            # the orbit seeding makes entries depend on row+column only, so
            # the effective sample count is m+n and small matrices can drift
            # past the bias bound; flag it rather than refuse the matrix
            warnings.warn(
                f"weight ensemble mean {w.mean():.4f} V exceeds the "
                f"0.05*v_dd bias bound", RuntimeWarning)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return self.weights.shape[0]

    @property
    def n(self) -> int:
        return self.weights.shape[1]

    def prefix(self, m: int) -> "SensingMatrix":
        """First m rows; identical to generating an m-row matrix from the same seeds."""
        if not (1 <= m <= self.m):
            raise DomainError(f"prefix length {m} outside [1, {self.m}]")
        return SensingMatrix(self.weights[:m], self.seed_table, self.v_dd)


def generate_sensing_matrix(table: SeedTable, m: int, v_dd: float = 3.3) -> SensingMatrix:
    """Advance all pixel generators m times and collect the bipolar weights.

    Row i holds the weights after i+1 synchronous clock ticks: states are
    stepped before first use, so distributed seeds are never emitted directly.
    """
    if m < 1:
        raise DomainError("need at least one measurement")
    # uint64 keeps a*state + c exact (< 2^53) before masking back to 32 bits.
    state = np.array(table.seeds, dtype=np.uint64)
    a = np.uint64(LCG_A)
    c = np.uint64(LCG_C)
    mask32 = np.uint64(STATE_MODULUS - 1)
    mask24 = np.uint64(FRACTION_DIVISOR - 1)
    rows = np.empty((m, state.size), dtype=np.float64)
    for i in range(m):
        state = (a * state + c) & mask32
        frac = (state & mask24).astype(np.float64) / FRACTION_DIVISOR
        rows[i] = v_dd * (2.0 * frac - 1.0)
    return SensingMatrix(rows, table, v_dd)


# --- file formats -----------------------------------------------------------

def save_seed_table(path, table: SeedTable) -> None:
    with open(path, "w") as f:
        json.dump({"master_seed": table.master_seed, "seeds": list(table.seeds)}, f)


def load_seed_table(path) -> SeedTable:
    with open(path) as f:
        rec = json.load(f)
    return SeedTable(rec["master_seed"], tuple(rec["seeds"]))


def save_sensing_matrix(path, matrix: SensingMatrix) -> None:
    """Binary golden-file container: magic, u32 M, u32 N, f64 v_dd, f64 row-major data."""
    with open(path, "wb") as f:
        f.write(_MATRIX_MAGIC)
        f.write(struct.pack("<IId", matrix.m, matrix.n, matrix.v_dd))
        f.write(matrix.weights.astype("<f8").tobytes(order="C"))


def load_sensing_matrix(path, seed_table: SeedTable | None = None) -> SensingMatrix:
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != _MATRIX_MAGIC:
            raise DomainError(f"bad sensing-matrix magic {magic!r}")
        m, n, v_dd = struct.unpack("<IId", f.read(16))
        data = np.frombuffer(f.read(8 * m * n), dtype="<f8").reshape(m, n)
    table = seed_table if seed_table is not None else SeedTable(0, tuple([0] * n))
    return SensingMatrix(data, table, v_dd)
