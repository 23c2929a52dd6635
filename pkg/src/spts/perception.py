"""Downstream tactile intelligence: classification, support scoring, localization,
and dynamic-event metrics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DomainError, TactileFrame
from .recovery import Reconstruction

DEFAULT_SUPPORT_THRESHOLD = 0.3
DEFAULT_VOTE_WINDOW = 20


class NoContactError(DomainError):
    """Raised when a frame carries no above-rest intensity to localize."""


@dataclass(frozen=True)
class ObjectLibrary:
    """Labeled exemplar frames for nearest-exemplar classification."""

    entries: tuple  # of (label, TactileFrame)

    def __post_init__(self):
        entries = tuple(self.entries)
        if not entries:
            raise DomainError("object library must contain at least one exemplar")
        geoms = {(fr.geometry.rows, fr.geometry.cols) for _, fr in entries}
        if len(geoms) != 1:
            raise DomainError("library exemplars must share one geometry")
        object.__setattr__(self, "entries", entries)

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.entries]


@dataclass(frozen=True)
class SupportMetrics:
    """Pixelwise contact-map agreement scores."""

    accuracy: float
    precision: float
    recall: float
    iou: float
    threshold_used: float

    def __post_init__(self):
        for name in ("accuracy", "precision", "recall", "iou"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise DomainError(f"{name}={v} outside [0,1]")


def _as_frame(obj) -> TactileFrame:
    return obj.frame if isinstance(obj, Reconstruction) else obj


def _normalized(v: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(v)
    return v / nrm if nrm > 0 else v


def classify(recon, library: ObjectLibrary) -> str:
    """Nearest-exemplar label under Euclidean distance between unit-normalized frames.

    Zero frames compare unnormalized. Ties break toward the lowest library
    index, so the result is deterministic.
    """
    frame = _as_frame(recon)
    if (frame.geometry.rows, frame.geometry.cols) != \
            (library.entries[0][1].geometry.rows, library.entries[0][1].geometry.cols):
        raise DomainError("frame geometry does not match library")
    q = _normalized(frame.conductance)
    best_label, best_dist = None, np.inf
    for label, exemplar in library.entries:
        d = float(np.linalg.norm(q - _normalized(exemplar.conductance)))
        if d < best_dist:
            best_label, best_dist = label, d
    return best_label


def vote(window: list[str]) -> str:
    """Majority vote over a window of labels; ties break to the earliest first occurrence."""
    if not window:
        raise DomainError("vote window must be non-empty")
    counts: dict[str, int] = {}
    for label in window:
        counts[label] = counts.get(label, 0) + 1
    best = max(counts.values())
    for label in window:  # first occurrence order resolves ties
        if counts[label] == best:
            return label
    raise AssertionError("unreachable")


def _binarize(frame: TactileFrame, threshold: float) -> np.ndarray:
    c = frame.conductance
    peak = c.max()
    if peak <= 0:
        return np.zeros(c.size, dtype=bool)
    return c >= threshold * peak


def support_accuracy(recon, truth: TactileFrame,
                     threshold: float = DEFAULT_SUPPORT_THRESHOLD) -> SupportMetrics:
    """Pixelwise contact-map agreement after per-frame relative binarization.

    Both frames are binarized at threshold times their own max (all-zero
    frames map to all-false). The headline accuracy is the fraction of
    matching pixels over all N; precision, recall, and IoU are reported from
    the contact-pixel confusion counts to disambiguate.
    """
    rframe = _as_frame(recon)
    if rframe.geometry.n != truth.geometry.n:
        raise DomainError("frames must share geometry")
    a = _binarize(rframe, threshold)
    b = _binarize(truth, threshold)
    n = a.size
    tp = int(np.sum(a & b))
    fp = int(np.sum(a & ~b))
    fn = int(np.sum(~a & b))
    tn = n - tp - fp - fn
    accuracy = (tp + tn) / n
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    union = tp + fp + fn
    iou = tp / union if union else 1.0
    return SupportMetrics(accuracy, precision, recall, iou, threshold)


def intensity(frame: TactileFrame, rest_conductance: float = 0.0) -> np.ndarray:
    """Above-rest conductance, clamped at zero."""
    return np.clip(frame.conductance - rest_conductance, 0.0, None)


def center_of_mass(frame: TactileFrame, rest_conductance: float = 0.0) -> tuple[float, float]:
    """Intensity-weighted mean pixel coordinate (fractional row, col)."""
    w = intensity(frame, rest_conductance)
    total = w.sum()
    if total <= 0:
        raise NoContactError("frame has no above-rest intensity")
    img = w.reshape(frame.geometry.rows, frame.geometry.cols)
    rows = np.arange(frame.geometry.rows)
    cols = np.arange(frame.geometry.cols)
    r = float((img.sum(axis=1) @ rows) / total)
    c = float((img.sum(axis=0) @ cols) / total)
    return r, c


def localization_error(estimate: tuple[float, float], truth: tuple[float, float]) -> float:
    """Euclidean distance between pixel coordinates."""
    dr = estimate[0] - truth[0]
    dc = estimate[1] - truth[1]
    return float(np.hypot(dr, dc))


def delta_pressure(frames: list[TactileFrame], rest_conductance: float = 0.0) -> float:
    """Mean over consecutive frame pairs of the mean absolute per-pixel intensity change."""
    if len(frames) < 2:
        raise DomainError("need at least two frames")
    deltas = []
    prev = intensity(frames[0], rest_conductance)
    for fr in frames[1:]:
        cur = intensity(fr, rest_conductance)
        if cur.size != prev.size:
            raise DomainError("frames must share geometry")
        deltas.append(float(np.abs(cur - prev).mean()))
        prev = cur
    return float(np.mean(deltas))


def max_pressure_trace(frames: list[TactileFrame],
                       rest_conductance: float = 0.0) -> list[tuple[float, float]]:
    """Per-frame (timestamp, maximum above-rest intensity) series."""
    if not frames:
        raise DomainError("need at least one frame")
    return [(fr.timestamp, float(intensity(fr, rest_conductance).max())) for fr in frames]
