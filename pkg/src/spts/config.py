"""Experiment configuration: YAML file, strict schema, canonical hashing."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import jsonschema
import yaml

from .core import CircuitParams, DomainError, GridGeometry
from .frontend import AcquisitionConfig


class ConfigError(ValueError):
    """Invalid or unparseable experiment configuration."""


_number = {"type": "number"}
_positive = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["master_seed"],
    "properties": {
        "master_seed": {"type": "integer", "minimum": 0, "maximum": 2**32 - 1},
        "geometry": {
            "type": "object", "additionalProperties": False,
            "properties": {"rows": {"type": "integer", "minimum": 1},
                           "cols": {"type": "integer", "minimum": 1},
                           "pitch": _positive},
        },
        "circuit": {
            "type": "object", "additionalProperties": False,
            "properties": {"r_f": _positive, "v_dd": _positive, "r_off": _positive,
                           "r_min": _positive, "p0": _positive},
        },
        "acquisition": {
            "type": "object", "additionalProperties": False,
            "properties": {"f_clk": _positive,
                           "adc_bits": {"type": "integer", "minimum": 1, "maximum": 24},
                           "adc_range": _positive, "saturation": _positive,
                           "noise_rel": {"type": "number", "minimum": 0}},
        },
        "dictionary": {
            "type": "object", "additionalProperties": False,
            "properties": {"k": {"type": "integer", "minimum": 1},
                           "train_sparsity": {"type": "integer", "minimum": 1},
                           "iterations": {"type": "integer", "minimum": 0},
                           "amp_threshold": {"type": "number", "minimum": 0, "maximum": 1},
                           "coherence_threshold": {"type": "number", "minimum": 0, "maximum": 1},
                           "envelope_levels": {"type": "array", "items": _positive},
                           "corpus_jitters": {"type": "integer", "minimum": 1},
                           "blob_stride": _positive},
        },
        "scenario": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "peak_pressure": _positive,
                "shapes": {"type": "array", "items": {"type": "string"}},
                "press": {"type": "object", "additionalProperties": False,
                          "properties": {"rise": {"type": "number", "minimum": 0},
                                         "hold": {"type": "number", "minimum": 0},
                                         "release": {"type": "number", "minimum": 0}}},
                "bounce": {"type": "object", "additionalProperties": False,
                           "properties": {"contact_duration": _positive,
                                          "center": {"type": "array", "items": _number,
                                                     "minItems": 2, "maxItems": 2},
                                          "max_radius": _positive,
                                          "sigma": _positive}},
                "center_jitter": {"type": "number", "minimum": 0},
                "peak_jitter": {"type": "number", "minimum": 0},
                "library_exemplars": {"type": "integer", "minimum": 1},
            },
        },
        "sweep": {
            "type": "object", "additionalProperties": False,
            "properties": {"m_values": {"type": "array", "minItems": 1,
                                        "items": {"type": "integer", "minimum": 1}},
                           "trials": {"type": "integer", "minimum": 1},
                           "overcomplete": {"type": "boolean"}},
        },
        "adapt": {
            "type": "object", "additionalProperties": False,
            "properties": {"schedule": {"type": "array", "minItems": 1,
                                        "items": {"type": "integer", "minimum": 1}},
                           "scene": {"type": "string"}},
        },
        "vote_window": {"type": "integer", "minimum": 1},
        "support_threshold": {"type": "number", "minimum": 0, "maximum": 1},
        "contact_gate": {"type": "number", "minimum": 0, "maximum": 1},
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully-resolved experiment parameters; a pure function of the config file."""

    master_seed: int
    geometry: GridGeometry
    circuit: CircuitParams
    f_clk: float = 70000.0
    adc_bits: int = 12
    adc_range: float = 10.0
    saturation: float = 10.0
    noise_rel: float = 0.01
    dict_k: int = 100
    dict_sparsity: int = 30
    dict_iterations: int = 30
    amp_threshold: float = 0.1
    coherence_threshold: float = 0.95
    envelope_levels: tuple = (0.5, 1.0)
    corpus_jitters: int = 3
    blob_stride: float = 1.0
    peak_pressure: float = 5e4
    shapes: tuple = ()  # empty -> all 17 defaults
    press_rise: float = 0.05
    press_hold: float = 0.1
    press_release: float = 0.05
    bounce_duration: float = 0.008
    bounce_center: tuple = (4.5, 4.5)
    bounce_max_radius: float = 4.0
    bounce_sigma: float = 1.5
    center_jitter: float = 0.5
    peak_jitter: float = 0.1
    library_exemplars: int = 8
    m_values: tuple = (13, 20, 25, 50, 100)
    trials: int = 10
    overcomplete: bool = False
    adapt_schedule: tuple = tuple(range(2, 16)) + (20, 40, 100)
    adapt_scene: str = "T"
    vote_window: int = 20
    support_threshold: float = 0.3
    contact_gate: float = 0.2
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        limit = self.geometry.n
        if not self.overcomplete:
            for m in self.m_values:
                if m > limit:
                    raise ConfigError(
                        f"sweep M={m} exceeds N={limit}; set sweep.overcomplete to allow")

    def acquisition(self, noise_sigma: float = 0.0) -> AcquisitionConfig:
        return AcquisitionConfig(self.f_clk, self.adc_bits, self.adc_range,
                                 noise_sigma, self.saturation)


def _from_mapping(doc: dict) -> ExperimentConfig:
    geo = doc.get("geometry", {})
    geometry = GridGeometry(geo.get("rows", 10), geo.get("cols", 10),
                            geo.get("pitch", 0.015))
    cir = doc.get("circuit", {})
    circuit = CircuitParams(cir.get("r_f", 4700.0), cir.get("v_dd", 3.3),
                            cir.get("r_off", 1e6), cir.get("r_min", 1e3),
                            cir.get("p0", 1e4))
    acq = doc.get("acquisition", {})
    dic = doc.get("dictionary", {})
    sce = doc.get("scenario", {})
    press = sce.get("press", {})
    bounce = sce.get("bounce", {})
    sweep = doc.get("sweep", {})
    adapt = doc.get("adapt", {})
    # attribute defaults only; built on the reference 10x10 grid so the
    # sweep bound check cannot fire here
    defaults = ExperimentConfig(0, GridGeometry(10, 10), CircuitParams())
    return ExperimentConfig(
        master_seed=doc["master_seed"],
        geometry=geometry,
        circuit=circuit,
        f_clk=acq.get("f_clk", defaults.f_clk),
        adc_bits=acq.get("adc_bits", defaults.adc_bits),
        adc_range=acq.get("adc_range", defaults.adc_range),
        saturation=acq.get("saturation", defaults.saturation),
        noise_rel=acq.get("noise_rel", defaults.noise_rel),
        dict_k=dic.get("k", defaults.dict_k),
        dict_sparsity=dic.get("train_sparsity", defaults.dict_sparsity),
        dict_iterations=dic.get("iterations", defaults.dict_iterations),
        amp_threshold=dic.get("amp_threshold", defaults.amp_threshold),
        coherence_threshold=dic.get("coherence_threshold", defaults.coherence_threshold),
        envelope_levels=tuple(dic.get("envelope_levels", defaults.envelope_levels)),
        corpus_jitters=dic.get("corpus_jitters", defaults.corpus_jitters),
        blob_stride=dic.get("blob_stride", defaults.blob_stride),
        peak_pressure=sce.get("peak_pressure", defaults.peak_pressure),
        shapes=tuple(sce.get("shapes", ())),
        press_rise=press.get("rise", defaults.press_rise),
        press_hold=press.get("hold", defaults.press_hold),
        press_release=press.get("release", defaults.press_release),
        bounce_duration=bounce.get("contact_duration", defaults.bounce_duration),
        bounce_center=tuple(bounce.get("center", defaults.bounce_center)),
        bounce_max_radius=bounce.get("max_radius", defaults.bounce_max_radius),
        bounce_sigma=bounce.get("sigma", defaults.bounce_sigma),
        center_jitter=sce.get("center_jitter", defaults.center_jitter),
        peak_jitter=sce.get("peak_jitter", defaults.peak_jitter),
        library_exemplars=sce.get("library_exemplars", defaults.library_exemplars),
        m_values=tuple(sweep.get("m_values", defaults.m_values)),
        trials=sweep.get("trials", defaults.trials),
        overcomplete=sweep.get("overcomplete", False),
        adapt_schedule=tuple(adapt.get("schedule", defaults.adapt_schedule)),
        adapt_scene=adapt.get("scene", defaults.adapt_scene),
        vote_window=doc.get("vote_window", defaults.vote_window),
        support_threshold=doc.get("support_threshold", defaults.support_threshold),
        contact_gate=doc.get("contact_gate", defaults.contact_gate),
        raw=doc,
    )


def load_config(path) -> ExperimentConfig:
    """Parse and validate a YAML experiment config; unknown keys are errors."""
    try:
        with open(path) as f:
            doc = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config schema violation: {exc.message}") from exc
    try:
        return _from_mapping(doc)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def config_hash(cfg: ExperimentConfig) -> str:
    """Stable hash of the raw config mapping, for run manifests."""
    canon = json.dumps(cfg.raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()
