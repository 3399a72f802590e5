"""Pipeline configuration as a single versioned JSON document."""

from __future__ import annotations

import copy
import json
import os

from .errors import ValidationError
from .geometry import AxonGrowthParams, GridLayout
from .model import ModelParams, PerceptGrid
from .pipeline import PipelineConfig
from .vision import EncoderConfig, PreprocessMode

SCHEMA_VERSION = 1


def config_to_doc(cfg: PipelineConfig) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "array": cfg.layout.to_dict(),
        "bundle": cfg.bundle.to_dict(),
        "model": cfg.model.to_dict(),
        "preprocess": {"mode": cfg.preprocess.mode},
        "encoder": {
            "source_fov_deg": list(cfg.encoder.source_fov_deg),
            "sample_radius_frac": cfg.encoder.sample_radius_frac,
            "out_of_frame_value": cfg.encoder.out_of_frame_value,
        },
        "grid": cfg.grid.to_dict(),
    }
    if cfg.preprocess.mask_path is not None:
        doc["preprocess"]["mask_path"] = cfg.preprocess.mask_path
    return doc


def config_from_doc(doc: dict, base_dir: str = ".") -> PipelineConfig:
    if not isinstance(doc, dict):
        raise ValidationError("config document must be a JSON object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {version}")

    pre_doc = doc.get("preprocess", {})
    mode = pre_doc.get("mode", "none")
    mask = None
    mask_path = pre_doc.get("mask_path")
    if mode == "mask":
        if mask_path is None:
            raise ValidationError("preprocess mode 'mask' requires mask_path")
        from .images import load_gray  # deferred: keeps config importable without PIL use

        resolved = mask_path if os.path.isabs(mask_path) else os.path.join(base_dir, mask_path)
        try:
            mask = load_gray(resolved)
        except OSError as exc:
            raise ValidationError(f"cannot read mask {resolved}: {exc}") from exc

    enc_doc = doc.get("encoder", {})
    try:
        encoder = EncoderConfig(
            source_fov_deg=tuple(float(v) for v in enc_doc.get("source_fov_deg", (64.0, 48.0))),
            sample_radius_frac=float(enc_doc.get("sample_radius_frac", 0.5)),
            out_of_frame_value=float(enc_doc.get("out_of_frame_value", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad encoder document: {exc}") from exc

    return PipelineConfig(
        layout=GridLayout.from_dict(doc.get("array", {})) if doc.get("array") else GridLayout(),
        bundle=AxonGrowthParams.from_dict(doc.get("bundle", {})),
        model=ModelParams.from_dict(doc.get("model", {})),
        preprocess=PreprocessMode(mode=mode, mask=mask, mask_path=mask_path),
        encoder=encoder,
        grid=PerceptGrid.from_dict(doc.get("grid", {})),
    )


def load_config(path: str, overrides=()) -> PipelineConfig:
    """Load a config JSON file and apply dotted-path overrides."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    doc = apply_overrides(doc, overrides)
    return config_from_doc(doc, base_dir=os.path.dirname(os.path.abspath(path)))


def apply_overrides(doc: dict, overrides) -> dict:
    """Apply repeatable "dotted.path=value" overrides to a config document.

    Values parse as JSON when possible, else as strings. Intermediate
    objects are created as needed.
    """
    doc = copy.deepcopy(doc)
    for item in overrides:
        if "=" not in item:
            raise ValidationError(f"override {item!r} is not key=value")
        path, raw = item.split("=", 1)
        keys = [k for k in path.strip().split(".") if k]
        if not keys:
            raise ValidationError(f"override {item!r} has an empty key path")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = doc
        for k in keys[:-1]:
            nxt = node.get(k)
            if not isinstance(nxt, dict):
                nxt = {}
                node[k] = nxt
            node = nxt
        node[keys[-1]] = value
    return doc


def default_doc() -> dict:
    return config_to_doc(PipelineConfig())
