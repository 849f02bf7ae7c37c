"""Run configuration: JSON config file loading and section builders."""

from __future__ import annotations

import dataclasses
import json
import logging
import os

from .annotator import AnnotatorConfig
from .errors import ValidationError
from .fitting import FitConfig
from .simulator import NoiseConfig

logger = logging.getLogger("orientkit")


def setup_logging():
    level = os.environ.get("ORIENTKIT_LOG", "INFO").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        level = "INFO"
    logging.basicConfig(level=getattr(logging, level), format="%(levelname)s %(name)s: %(message)s")


def load_config_file(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValidationError(f"config file {path} must hold a JSON object")
    return obj


def _build(cls, section: dict, overrides: dict):
    """Construct a config dataclass from a file section plus CLI overrides."""
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(section) - known
    if unknown:
        raise ValidationError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    merged = dict(section)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    if cls is FitConfig:
        for key in ("alpha_candidates", "sigma_grid"):
            if key in merged:
                merged[key] = tuple(merged[key])
    return cls(**merged)


def fit_config(file_cfg: dict, **overrides) -> FitConfig:
    return _build(FitConfig, file_cfg.get("fit", {}), overrides)


def annotator_config(file_cfg: dict, fit: FitConfig, **overrides) -> AnnotatorConfig:
    section = dict(file_cfg.get("annotator", {}))
    section.pop("fit", None)
    cfg = _build(AnnotatorConfig, section, overrides)
    return dataclasses.replace(cfg, fit=fit)


def noise_config(file_cfg: dict, **overrides) -> NoiseConfig:
    return _build(NoiseConfig, file_cfg.get("noise", {}), overrides)
