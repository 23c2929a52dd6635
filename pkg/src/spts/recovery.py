"""Sparse recovery: OMP, full-frame reconstruction, and prefix-adaptive refinement."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import CircuitParams, DomainError, GridGeometry, TactileFrame
from .firmware import SensingMatrix
from .frontend import MeasurementVector

RESIDUAL_STOP = 1e-10  # early stop on exactly-sparse inputs


@dataclass(frozen=True)
class SparseCode:
    """Support indices and least-squares coefficients of a sparse solution."""

    indices: np.ndarray
    coefficients: np.ndarray
    sparsity: int

    def __post_init__(self):
        idx = np.array(self.indices, dtype=np.intp, copy=True)
        coef = np.array(self.coefficients, dtype=np.float64, copy=True)
        if idx.ndim != 1 or coef.shape != idx.shape:
            raise DomainError("indices and coefficients must be 1-D and aligned")
        if len(set(idx.tolist())) != idx.size:
            raise DomainError("support indices must be distinct")
        if idx.size > self.sparsity:
            raise DomainError("support exceeds target sparsity")
        idx.flags.writeable = False
        coef.flags.writeable = False
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "coefficients", coef)

    def dense(self, k: int) -> np.ndarray:
        out = np.zeros(k)
        out[self.indices] = self.coefficients
        return out


@dataclass(frozen=True)
class Reconstruction:
    """Decoded tactile frame plus the sparse code and recovery diagnostics."""

    frame: TactileFrame
    code: SparseCode
    m_used: int
    residual_norm: float
    clamped_pixels: int = 0

    def __post_init__(self):
        if self.m_used < 1:
            raise DomainError("m_used must be at least 1")
        if self.residual_norm < 0:
            raise DomainError("residual_norm must be non-negative")


def sparsity_target(m: int) -> int:
    """Target sparsity S = round(m/4), halves rounded up, floored at 1."""
    if m < 1:
        raise DomainError("measurement count must be at least 1")
    return max(1, int(np.floor(m / 4 + 0.5)))


def omp(a: np.ndarray, y: np.ndarray, s: int, tol: float = RESIDUAL_STOP) -> SparseCode:
    """Orthogonal Matching Pursuit.

    Greedily selects the column with the largest normalized correlation
    against the residual, re-solves least squares on the selected support,
    and stops at |support| = s or when the residual norm drops below tol.
    Columns that make the selected submatrix rank-deficient are dropped with
    a warning and excluded from further selection.
    """
    a = np.asarray(a, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if a.ndim != 2 or a.shape[0] != y.size:
        raise DomainError(f"matrix shape {a.shape} incompatible with y length {y.size}")
    if s < 1:
        raise DomainError("target sparsity must be at least 1")
    norms = np.linalg.norm(a, axis=0)
    if np.any(norms == 0):
        raise DomainError("matrix columns must be nonzero")

    support: list[int] = []
    excluded = np.zeros(a.shape[1], dtype=bool)
    coef = np.zeros(0)
    residual = y.copy()
    while len(support) < s and np.linalg.norm(residual) > tol:
        corr = np.abs(a.T @ residual) / norms
        corr[excluded] = -np.inf
        j = int(np.argmax(corr))
        if not np.isfinite(corr[j]):
            break  # every column excluded
        excluded[j] = True
        trial = support + [j]
        sub = a[:, trial]
        sol, _, rank, _ = np.linalg.lstsq(sub, y, rcond=None)
        if rank < len(trial):
            warnings.warn(f"omp: column {j} is rank-deficient on the current "
                          "support, dropping it", RuntimeWarning)
            continue
        support = trial
        coef = sol
        residual = y - sub @ sol
    return SparseCode(np.array(support, dtype=np.intp), coef, s)


def _phi_rows(phi, m: int) -> np.ndarray:
    w = phi.weights if isinstance(phi, SensingMatrix) else np.asarray(phi, dtype=np.float64)
    if w.shape[0] < m:
        raise DomainError(f"sensing matrix has {w.shape[0]} rows, need {m}")
    return w[:m]


def _atoms(psi) -> np.ndarray:
    # accepts a dictionary.Dictionary or a raw N x K array
    return psi.atoms if hasattr(psi, "atoms") else np.asarray(psi, dtype=np.float64)


def reconstruct(phi, psi, y: MeasurementVector, circuit: CircuitParams,
                geometry: GridGeometry) -> Reconstruction:
    """Recover a tactile frame from compressive measurements.

    Solves alpha = OMP(phi @ psi, y, S=round(M/4)), expands x = psi @ alpha,
    and decodes conductances C = -x/r_f, clamped to be non-negative.
    """
    m = y.m
    rows = _phi_rows(phi, m)
    atoms = _atoms(psi)
    if rows.shape[1] != atoms.shape[0]:
        raise DomainError(f"phi N={rows.shape[1]} != dictionary N={atoms.shape[0]}")
    if atoms.shape[0] != geometry.n:
        raise DomainError(f"dictionary N={atoms.shape[0]} != geometry N={geometry.n}")
    a = rows @ atoms
    code = omp(a, y.values, sparsity_target(m))
    x_hat = atoms @ code.dense(atoms.shape[1])
    conductance = -x_hat / circuit.r_f
    clamped = int(np.sum(conductance < 0))
    conductance = np.clip(conductance, 0.0, None)
    residual = float(np.linalg.norm(y.values - a @ code.dense(atoms.shape[1])))
    frame = TactileFrame(geometry, conductance, float(y.timestamps[-1]))
    return Reconstruction(frame, code, m, residual, clamped)


def adaptive_reconstruct(phi_full, psi, y_stream: MeasurementVector,
                         schedule: list[int], circuit: CircuitParams,
                         geometry: GridGeometry) -> list[Reconstruction]:
    """Reconstruct from growing measurement prefixes.

    Each schedule entry m' reuses the first m' weight rows and samples; the
    firmware prefix property makes this identical to a fresh m'-row
    acquisition.
    """
    if len(schedule) == 0:
        raise DomainError("schedule must be non-empty")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise DomainError("schedule must be strictly increasing")
    if schedule[0] < 1 or schedule[-1] > y_stream.m:
        raise DomainError(f"schedule must lie within [1, {y_stream.m}]")
    return [reconstruct(phi_full, psi, y_stream.prefix(m), circuit, geometry)
            for m in schedule]


def write_reconstructions_jsonl(path, recons: list[Reconstruction]) -> None:
    """Frame JSON-lines records extended with recovery diagnostics."""
    with open(path, "w") as f:
        for r in recons:
            rec = {"rows": r.frame.geometry.rows, "cols": r.frame.geometry.cols,
                   "t": r.frame.timestamp,
                   "conductance": r.frame.conductance.tolist(),
                   "m_used": r.m_used, "residual": r.residual_norm,
                   "support": r.code.indices.tolist()}
            f.write(json.dumps(rec) + "\n")
