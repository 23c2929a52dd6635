"""Deterministic experiment pipelines behind the CLI commands.

Every run function is a pure function of (config, master seed): sensing
matrices, trial jitter, and measurement noise all derive from the master
seed through fixed tags, so repeated runs produce identical outputs.
"""
from __future__ import annotations

import numpy as np

from .config import ExperimentConfig
from .core import TactileFrame, transduce
from .dictionary import Dictionary, TrainingCorpus, ksvd, preprocess
from .firmware import assign_seeds, generate_sensing_matrix
from .frontend import MeasurementVector, acquire, frame_rate, measure_once
from .perception import (ObjectLibrary, center_of_mass, classify,
                         delta_pressure, intensity, localization_error,
                         max_pressure_trace, support_accuracy, vote,
                         NoContactError)
from .recovery import adaptive_reconstruct, reconstruct
from .scenarios import (BounceSpec, bounce_event, default_shape_specs,
                        jittered_bounce, jittered_spec, press_event,
                        raster_baseline, render_shape, shape_library,
                        tactile_scene)

# fixed tags keep the per-purpose random streams independent
TAG_CORPUS = 1
TAG_PILOT = 2
TAG_CLASSIFY = 3
TAG_SUPPORT = 4
TAG_BOUNCE = 5
TAG_LOCALIZE = 6
TAG_ADAPT = 7
TAG_LIBRARY = 8


def _rng(cfg: ExperimentConfig, tag: int, *indices: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([cfg.master_seed, tag, *indices]))


def _u32(cfg: ExperimentConfig, tag: int, *indices: int) -> int:
    ss = np.random.SeedSequence([cfg.master_seed, tag, *indices])
    return int(ss.generate_state(1, np.uint32)[0])


def _phi(cfg: ExperimentConfig, m: int, tag: int, *indices: int):
    table = assign_seeds(_u32(cfg, tag, *indices), cfg.geometry.n)
    return generate_sensing_matrix(table, m, cfg.circuit.v_dd)


def _slice_measurements(mv: MeasurementVector, start: int, stop: int) -> MeasurementVector:
    return MeasurementVector(mv.values[start:stop], mv.timestamps[start:stop],
                             mv.matrix_id)


def resolve_shapes(cfg: ExperimentConfig):
    specs = default_shape_specs(cfg.peak_pressure,
                                ((cfg.geometry.rows - 1) / 2, (cfg.geometry.cols - 1) / 2))
    if cfg.shapes:
        by_label = {s.label: s for s in specs}
        missing = [lab for lab in cfg.shapes if lab not in by_label]
        if missing:
            raise ValueError(f"unknown shape labels in config: {missing}")
        specs = [by_label[lab] for lab in cfg.shapes]
    return specs


def object_library(cfg: ExperimentConfig) -> ObjectLibrary:
    """Labeled exemplar library with jittered variants per label.

    Emulates the pre-labeled indentation library: the nominal footprint plus
    library_exemplars-1 jittered presses per object, so nearest-exemplar
    classification tolerates per-trial placement variability.
    """
    rng = _rng(cfg, TAG_LIBRARY)
    entries = []
    for spec in resolve_shapes(cfg):
        entries.append((spec.label,
                        transduce(render_shape(spec, cfg.geometry), cfg.circuit)))
        for _ in range(cfg.library_exemplars - 1):
            sj = jittered_spec(spec, rng, cfg.center_jitter, cfg.peak_jitter)
            entries.append((spec.label,
                            transduce(render_shape(sj, cfg.geometry), cfg.circuit)))
    return ObjectLibrary(tuple(entries))


def default_bounce(cfg: ExperimentConfig) -> BounceSpec:
    return BounceSpec(tuple(cfg.bounce_center), cfg.peak_pressure,
                      cfg.bounce_duration, cfg.bounce_max_radius, cfg.bounce_sigma)


# --- dictionary training ----------------------------------------------------

def build_training_corpus(cfg: ExperimentConfig) -> TrainingCorpus:
    """Synthetic corpus: jittered shape presses plus ball-contact blobs.

    Blob exemplars cover the grid so contact localization has spatially
    localized atoms to work with.
    """
    rng = _rng(cfg, TAG_CORPUS)
    geom = cfg.geometry
    frames: list[TactileFrame] = []
    labels: list[str] = []
    for spec in resolve_shapes(cfg):
        for j in range(cfg.corpus_jitters):
            s = spec if j == 0 else jittered_spec(spec, rng, cfg.center_jitter,
                                                  cfg.peak_jitter)
            for level in cfg.envelope_levels:
                frames.append(transduce(render_shape(s, geom, scale=level), cfg.circuit))
                labels.append(spec.label)
    base = default_bounce(cfg)
    r_lo, r_hi = 1.0, geom.rows - 2.0
    c_lo, c_hi = 1.0, geom.cols - 2.0
    centers_r = np.arange(r_lo, r_hi + 1e-9, cfg.blob_stride)
    centers_c = np.arange(c_lo, c_hi + 1e-9, cfg.blob_stride)
    scene_times = (0.25, 0.5)  # fractions of the contact window
    for cr in centers_r:
        for cc in centers_c:
            spec = BounceSpec((float(cr), float(cc)), base.peak_pressure,
                              base.contact_duration, base.max_radius, base.sigma)
            scene = bounce_event(spec, geom)
            for ft in scene_times:
                pm = scene(ft * spec.contact_duration)
                frames.append(transduce(pm, cfg.circuit))
                labels.append("blob")
    corpus = TrainingCorpus.from_frames(frames, tuple(labels))
    return preprocess(corpus, cfg.amp_threshold, cfg.coherence_threshold)


def train_dictionary(cfg: ExperimentConfig) -> Dictionary:
    corpus = build_training_corpus(cfg)
    seed = _u32(cfg, TAG_CORPUS, 99)
    return ksvd(corpus, cfg.dict_k, cfg.dict_sparsity, cfg.dict_iterations,
                seed=seed, corpus_id=f"synthetic-{cfg.master_seed}")


# --- noise calibration ------------------------------------------------------

def pilot_noise_sigma(cfg: ExperimentConfig) -> float:
    """Output-noise sigma = noise_rel * RMS of a pilot noiseless acquisition."""
    if cfg.noise_rel == 0:
        return 0.0
    specs = resolve_shapes(cfg)
    frame = transduce(render_shape(specs[0], cfg.geometry), cfg.circuit)
    phi = _phi(cfg, 200, TAG_PILOT)
    acq = cfg.acquisition(0.0)
    y = acquire(frame, phi, cfg.circuit, acq)
    rms = float(np.sqrt(np.mean(y.values**2)))
    return cfg.noise_rel * rms


# --- classification sweep ---------------------------------------------------

def run_classify_sweep(cfg: ExperimentConfig, psi: Dictionary):
    """Press / acquire / reconstruct / classify / vote, per object x trial x M."""
    geom = cfg.geometry
    library = object_library(cfg)
    specs = resolve_shapes(cfg)
    sigma = pilot_noise_sigma(cfg)
    acq = cfg.acquisition(sigma)
    rows = []
    for oi, spec in enumerate(specs):
        for trial in range(cfg.trials):
            trial_rng = _rng(cfg, TAG_CLASSIFY, oi, trial)
            spec_j = jittered_spec(spec, trial_rng, cfg.center_jitter, cfg.peak_jitter)
            scene = press_event(spec_j, geom, cfg.press_rise, cfg.press_hold,
                                cfg.press_release)
            tscene = tactile_scene(scene, cfg.circuit)
            hold = lambda t: tscene(t + cfg.press_rise)  # acquire inside the hold phase
            truth = tscene(cfg.press_rise + cfg.press_hold / 2)
            for m in cfg.m_values:
                total = cfg.vote_window * m
                phi = _phi(cfg, total, TAG_CLASSIFY, oi, trial, m)
                y = acquire(hold, phi, cfg.circuit, acq, rng=trial_rng)
                labels = []
                for w in range(cfg.vote_window):
                    yc = _slice_measurements(y, w * m, (w + 1) * m)
                    recon = reconstruct(phi.weights[w * m:(w + 1) * m], psi, yc,
                                        cfg.circuit, geom)
                    labels.append(classify(recon, library))
                label = vote(labels)
                raster_est, raster_time = raster_baseline(truth, min(m, geom.n), acq)
                raster_label = classify(raster_est, library)
                rows.append({
                    "object": spec.label, "trial": trial, "m": m,
                    "label": label, "correct": int(label == spec.label),
                    "raster_label": raster_label,
                    "raster_correct": int(raster_label == spec.label),
                    "fps": frame_rate(m, acq),
                })
    summary = {}
    for m in cfg.m_values:
        sel = [r for r in rows if r["m"] == m]
        summary[str(m)] = {
            "accuracy": float(np.mean([r["correct"] for r in sel])),
            "raster_accuracy": float(np.mean([r["raster_correct"] for r in sel])),
            "fps": frame_rate(m, acq),
        }
    return rows, summary


# --- support sweep ----------------------------------------------------------

def run_support_sweep(cfg: ExperimentConfig, psi: Dictionary):
    geom = cfg.geometry
    specs = resolve_shapes(cfg)
    sigma = pilot_noise_sigma(cfg)
    acq = cfg.acquisition(sigma)
    rows = []
    for oi, spec in enumerate(specs):
        area_frac = float(np.count_nonzero(
            render_shape(spec, geom).pressure)) / geom.n
        size_class = "small" if area_frac < 0.4 else "large"
        for trial in range(cfg.trials):
            trial_rng = _rng(cfg, TAG_SUPPORT, oi, trial)
            spec_j = jittered_spec(spec, trial_rng, cfg.center_jitter, cfg.peak_jitter)
            truth = transduce(render_shape(spec_j, geom), cfg.circuit)
            for m in cfg.m_values:
                phi = _phi(cfg, m, TAG_SUPPORT, oi, trial, m)
                y = acquire(truth, phi, cfg.circuit, acq, rng=trial_rng)
                recon = reconstruct(phi, psi, y, cfg.circuit, geom)
                sm = support_accuracy(recon, truth, cfg.support_threshold)
                raster_est, _ = raster_baseline(truth, min(m, geom.n), acq)
                rm = support_accuracy(raster_est, truth, cfg.support_threshold)
                rows.append({
                    "object": spec.label, "trial": trial, "m": m,
                    "area_frac": area_frac, "size_class": size_class,
                    "accuracy": sm.accuracy, "precision": sm.precision,
                    "recall": sm.recall, "iou": sm.iou,
                    "raster_accuracy": rm.accuracy,
                })
    return rows


# --- bounce dynamics --------------------------------------------------------

def bounce_frames(cfg: ExperimentConfig, psi: Dictionary, m: int, trial: int,
                  tag: int = TAG_BOUNCE):
    """Acquire one bounce continuously and reconstruct every complete frame.

    Returns (reconstructions, bounce spec). A frame is complete when all m of
    its measurements land inside the contact window.
    """
    geom = cfg.geometry
    sigma = pilot_noise_sigma(cfg)
    acq = cfg.acquisition(sigma)
    trial_rng = _rng(cfg, tag, trial, m)
    spec = jittered_bounce(default_bounce(cfg), trial_rng, cfg.center_jitter,
                           cfg.peak_jitter)
    scene = tactile_scene(bounce_event(spec, geom), cfg.circuit)
    n_frames = int(np.floor(spec.contact_duration * acq.f_clk / m))
    if n_frames == 0:
        return [], spec
    phi = _phi(cfg, n_frames * m, tag, trial, m)
    y = acquire(scene, phi, cfg.circuit, acq, rng=trial_rng)
    recons = []
    for j in range(n_frames):
        yc = _slice_measurements(y, j * m, (j + 1) * m)
        recons.append(reconstruct(phi.weights[j * m:(j + 1) * m], psi, yc,
                                  cfg.circuit, geom))
    return recons, spec


def run_bounce(cfg: ExperimentConfig, psi: Dictionary):
    acq = cfg.acquisition(0.0)
    rows, trace_rows = [], []
    rest = cfg.circuit.rest_conductance
    for m in cfg.m_values:
        for trial in range(cfg.trials):
            recons, spec = bounce_frames(cfg, psi, m, trial)
            frames = [r.frame for r in recons]
            dp = delta_pressure(frames, rest) if len(frames) >= 2 else 0.0
            rows.append({
                "m": m, "trial": trial, "frames_in_contact": len(frames),
                "delta_pressure": dp, "fps": frame_rate(m, acq),
                "contact_duration": spec.contact_duration,
            })
            if frames:
                for j, (t, peak) in enumerate(max_pressure_trace(frames, rest)):
                    trace_rows.append({"m": m, "trial": trial, "frame": j,
                                       "t": t, "max_intensity": peak})
    return rows, trace_rows


# --- localization -----------------------------------------------------------

def run_localize(cfg: ExperimentConfig, psi: Dictionary):
    rest = cfg.circuit.rest_conductance
    rows = []
    skipped = {m: 0 for m in cfg.m_values}
    for m in cfg.m_values:
        for trial in range(cfg.trials):
            recons, spec = bounce_frames(cfg, psi, m, trial, tag=TAG_LOCALIZE)
            if not recons:
                continue
            peaks = [float(intensity(r.frame, rest).max()) for r in recons]
            gate = cfg.contact_gate * max(peaks) if peaks else 0.0
            for j, r in enumerate(recons):
                if peaks[j] < gate or peaks[j] <= 0:
                    skipped[m] += 1
                    continue
                try:
                    com = center_of_mass(r.frame, rest)
                except NoContactError:
                    skipped[m] += 1
                    continue
                err = localization_error(com, spec.contact_center)
                rows.append({"m": m, "trial": trial, "frame": j,
                             "t": r.frame.timestamp, "com_row": com[0],
                             "com_col": com[1], "error_px": err})
    summary = {}
    for m in cfg.m_values:
        errs = [r["error_px"] for r in rows if r["m"] == m]
        summary[str(m)] = {"mean_error_px": float(np.mean(errs)) if errs else None,
                           "frames": len(errs), "skipped": skipped[m]}
    return rows, summary


# --- adaptive reconstruction -------------------------------------------------

def run_adapt(cfg: ExperimentConfig, psi: Dictionary):
    """Progressive-prefix reconstruction of a static snapshot scene."""
    geom = cfg.geometry
    sigma = pilot_noise_sigma(cfg)
    acq = cfg.acquisition(sigma)
    rng = _rng(cfg, TAG_ADAPT)
    if cfg.adapt_scene == "ball":
        spec = default_bounce(cfg)
        pm = bounce_event(spec, geom)(spec.contact_duration / 2)
        truth = transduce(pm, cfg.circuit)
    else:
        by_label = {s.label: s for s in default_shape_specs(
            cfg.peak_pressure, ((geom.rows - 1) / 2, (geom.cols - 1) / 2))}
        if cfg.adapt_scene not in by_label:
            raise ValueError(f"unknown adapt scene {cfg.adapt_scene!r}")
        truth = transduce(render_shape(by_label[cfg.adapt_scene], geom), cfg.circuit)
    schedule = list(cfg.adapt_schedule)
    phi = _phi(cfg, schedule[-1], TAG_ADAPT)
    y = acquire(truth, phi, cfg.circuit, acq, rng=rng)
    recons = adaptive_reconstruct(phi, psi, y, schedule, cfg.circuit, geom)
    rows = []
    for r in recons:
        sm = support_accuracy(r.frame, truth, cfg.support_threshold)
        rows.append({"m_used": r.m_used, "residual": r.residual_norm,
                     "support_accuracy": sm.accuracy, "iou": sm.iou})
    return recons, rows, truth
