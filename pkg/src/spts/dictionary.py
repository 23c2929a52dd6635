"""Training-data preprocessing and K-SVD learning of the tactile dictionary."""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .core import DomainError, TactileFrame
from .recovery import SparseCode, omp

_DICT_MAGIC = b"SPTSDIC1"

DEFAULT_ATOMS = 100
DEFAULT_TRAIN_SPARSITY = 30
DEFAULT_ITERATIONS = 30
SWEEP_IMPROVEMENT_TOL = 1e-4


class EmptyCorpusError(DomainError):
    """Preprocessing removed every training sample."""


@dataclass(frozen=True)
class TrainingCorpus:
    """Vectorized training signals, one column per sample."""

    signals: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        x = np.array(self.signals, dtype=np.float64, copy=True)
        if x.ndim != 2 or x.shape[1] == 0:
            raise DomainError("signals must be a non-empty N x P matrix")
        if self.labels and len(self.labels) != x.shape[1]:
            raise DomainError("labels must align with signal columns")
        x.flags.writeable = False
        object.__setattr__(self, "signals", x)
        object.__setattr__(self, "labels", tuple(self.labels))

    @classmethod
    def from_frames(cls, frames: list[TactileFrame], labels=()) -> "TrainingCorpus":
        return cls(np.column_stack([f.conductance for f in frames]), tuple(labels))

    @property
    def n(self) -> int:
        return self.signals.shape[0]

    @property
    def size(self) -> int:
        return self.signals.shape[1]


@dataclass(frozen=True)
class Dictionary:
    """Unit-norm atom matrix (N x K) with training provenance."""

    atoms: np.ndarray
    train_sparsity: int = DEFAULT_TRAIN_SPARSITY
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.array(self.atoms, dtype=np.float64, copy=True)
        if a.ndim != 2 or a.shape[1] < 1:
            raise DomainError("atoms must be an N x K matrix with K >= 1")
        norms = np.linalg.norm(a, axis=0)
        if not np.allclose(norms, 1.0, atol=1e-9):
            raise DomainError("every atom must have unit norm within 1e-9")
        gram = np.abs(a.T @ a)
        np.fill_diagonal(gram, 0.0)
        if np.any(gram > 1.0 - 1e-12):
            raise DomainError("dictionary contains duplicate atoms")
        a.flags.writeable = False
        object.__setattr__(self, "atoms", a)

    @property
    def n(self) -> int:
        return self.atoms.shape[0]

    @property
    def k(self) -> int:
        return self.atoms.shape[1]


def preprocess(corpus: TrainingCorpus, amp_threshold: float = 0.1,
               coherence_threshold: float = 0.95) -> TrainingCorpus:
    """Drop weak and redundant training samples.

    First removes samples whose max amplitude falls below
    amp_threshold * (corpus max), then greedily removes any sample whose
    cosine similarity with an already-kept sample exceeds
    coherence_threshold.
    """
    if not (0 <= amp_threshold <= 1 and 0 <= coherence_threshold <= 1):
        raise DomainError("thresholds must lie in [0, 1]")
    x = corpus.signals
    amps = np.abs(x).max(axis=0)
    peak = amps.max()
    if amp_threshold > 0:
        keep_amp = np.flatnonzero((amps >= amp_threshold * peak) & (amps > 0))
    else:
        keep_amp = np.arange(x.shape[1])
    if keep_amp.size == 0:
        raise EmptyCorpusError("amplitude filter removed every sample")

    kept: list[int] = []
    kept_unit: list[np.ndarray] = []
    for j in keep_amp:
        v = x[:, j]
        nrm = np.linalg.norm(v)
        if nrm == 0:
            kept.append(int(j))  # zero sample, coherence undefined; keep as-is
            continue
        u = v / nrm
        if any(abs(u @ w) > coherence_threshold for w in kept_unit):
            continue
        kept.append(int(j))
        kept_unit.append(u)
    if not kept:
        raise EmptyCorpusError("coherence filter removed every sample")
    labels = tuple(corpus.labels[j] for j in kept) if corpus.labels else ()
    return TrainingCorpus(x[:, kept], labels)


def sparse_code(psi: Dictionary, x: np.ndarray, s: int) -> SparseCode:
    """Sparse-code one signal in the dictionary via OMP."""
    return omp(psi.atoms, x, s)


def _init_atoms(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Seed the dictionary from distinct training columns, padded with random unit vectors."""
    n, p = x.shape
    order = rng.permutation(p)  # sample training columns without replacement
    cols = [x[:, j] for j in order if np.linalg.norm(x[:, j]) > 0]
    # keep only directionally distinct columns
    atoms: list[np.ndarray] = []
    for v in cols:
        u = v / np.linalg.norm(v)
        if all(abs(u @ w) < 1.0 - 1e-12 for w in atoms):
            atoms.append(u)
        if len(atoms) == k:
            break
    while len(atoms) < k:
        v = rng.standard_normal(n)
        u = v / np.linalg.norm(v)
        if all(abs(u @ w) < 1.0 - 1e-12 for w in atoms):
            atoms.append(u)
    return np.column_stack(atoms)


def _fixed_support_error(x: np.ndarray, d: np.ndarray, codes: list[SparseCode]) -> float:
    err = 0.0
    for j, code in enumerate(codes):
        r = x[:, j] - d[:, code.indices] @ code.coefficients
        err += float(r @ r)
    return err


def ksvd(corpus: TrainingCorpus, k: int = DEFAULT_ATOMS,
         s: int = DEFAULT_TRAIN_SPARSITY, iterations: int = DEFAULT_ITERATIONS,
         seed: int = 0, corpus_id: str = "") -> Dictionary:
    """Learn a dictionary by alternating OMP sparse coding with rank-1 atom updates.

    Each sweep updates every atom (and its coefficients) by the dominant
    singular pair of the restricted residual, which cannot increase the
    fixed-support representation error; this is asserted every sweep. Unused
    atoms are replaced by the worst-represented training signal. Training
    stops early once the relative coding-error improvement over a sweep
    drops below SWEEP_IMPROVEMENT_TOL.
    """
    if k < 1 or s < 1:
        raise DomainError("k and s must be at least 1")
    if iterations < 0:
        raise DomainError("iterations must be non-negative")
    rng = np.random.default_rng(seed)
    x = corpus.signals
    n, p = x.shape
    d = _init_atoms(x, k, rng)
    errors: list[float] = []
    prev_err = None

    for _ in range(iterations):
        codes = [omp(d, x[:, j], s) for j in range(p)]
        # coefficient matrix on the fixed supports
        coef = np.zeros((k, p))
        for j, code in enumerate(codes):
            coef[code.indices, j] = code.coefficients

        err_before = _fixed_support_error(x, d, codes)
        for atom in range(k):
            users = np.flatnonzero(coef[atom] != 0)
            if users.size == 0:
                d[:, atom] = _worst_represented(x, d, coef, rng)
                continue
            # residual over the users with atom's contribution restored
            resid = x[:, users] - d @ coef[:, users] + np.outer(d[:, atom], coef[atom, users])
            u, sv, vt = np.linalg.svd(resid, full_matrices=False)
            d[:, atom] = u[:, 0]
            coef[atom, users] = sv[0] * vt[0]
        err_after = float(np.linalg.norm(x - d @ coef) ** 2)
        if err_after > err_before * (1 + 1e-9) + 1e-12:
            raise AssertionError(
                f"atom-update sweep increased the fixed-support error: "
                f"{err_before} -> {err_after}")
        errors.append(err_after)
        if prev_err is not None and prev_err > 0:
            if (prev_err - err_after) / prev_err < SWEEP_IMPROVEMENT_TOL:
                break
        prev_err = err_after

    d = _dedupe_atoms(x, d, rng)
    meta = {"corpus_id": corpus_id, "iterations": len(errors), "seed": seed,
            "train_sparsity": s, "errors": errors}
    return Dictionary(d, s, meta)


def _worst_represented(x: np.ndarray, d: np.ndarray, coef: np.ndarray,
                       rng: np.random.Generator) -> np.ndarray:
    resid = x - d @ coef
    j = int(np.argmax(np.linalg.norm(resid, axis=0)))
    v = x[:, j]
    nrm = np.linalg.norm(v)
    if nrm == 0:
        v = rng.standard_normal(x.shape[0])
        nrm = np.linalg.norm(v)
    return v / nrm


def _dedupe_atoms(x: np.ndarray, d: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Replace exact duplicate atoms so the dictionary invariant holds."""
    k = d.shape[1]
    for i in range(k):
        for j in range(i + 1, k):
            if abs(d[:, i] @ d[:, j]) > 1.0 - 1e-12:
                v = rng.standard_normal(d.shape[0])
                d[:, j] = v / np.linalg.norm(v)
    return d


# --- file formats -----------------------------------------------------------

def save_dictionary(path, psi: Dictionary) -> None:
    """Binary container: magic, u32 N, u32 K, f64 column-major atoms, JSON trailer."""
    with open(path, "wb") as f:
        f.write(_DICT_MAGIC)
        f.write(struct.pack("<II", psi.n, psi.k))
        f.write(psi.atoms.astype("<f8").tobytes(order="F"))
        trailer = dict(psi.meta)
        trailer["train_sparsity"] = psi.train_sparsity
        f.write(json.dumps(trailer, sort_keys=True).encode("utf-8"))


def load_dictionary(path) -> Dictionary:
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != _DICT_MAGIC:
            raise DomainError(f"bad dictionary magic {magic!r}")
        n, k = struct.unpack("<II", f.read(8))
        atoms = np.frombuffer(f.read(8 * n * k), dtype="<f8").reshape((n, k), order="F")
        trailer = f.read()
    meta = json.loads(trailer.decode("utf-8")) if trailer else {}
    s = meta.pop("train_sparsity", DEFAULT_TRAIN_SPARSITY)
    return Dictionary(atoms, s, meta)


def export_atom_grids_csv(path, psi: Dictionary, rows: int, cols: int) -> None:
    """Per-atom grid images flattened to CSV for visual inspection."""
    if rows * cols != psi.n:
        raise DomainError(f"grid {rows}x{cols} incompatible with atom length {psi.n}")
    with open(path, "w") as f:
        f.write("atom,row,col,value\n")
        for a in range(psi.k):
            img = psi.atoms[:, a].reshape(rows, cols)
            for r in range(rows):
                for c in range(cols):
                    f.write(f"{a},{r},{c},{img[r, c]!r}\n")
