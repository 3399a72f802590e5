"""End-to-end orchestration: frame in, percept out.

A pipeline state snapshot holds the built electrode array, fiber bundle,
and sensitivity map for one config generation. Frame processing is pure
against a snapshot; config updates produce a new snapshot and rebuild only
the stages whose inputs changed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ValidationError
from .geometry import (
    AxonBundle,
    AxonGrowthParams,
    ElectrodeArray,
    GridLayout,
    build_bundle,
    build_grid_array,
)
from .model import (
    AXONMAP,
    ModelParams,
    PerceptGrid,
    SensitivityMap,
    build_sensitivity_map,
    render_percept,
)
from .vision import EncoderConfig, Frame, GazeTransform, PreprocessMode, encode_frame, preprocess


@dataclass(frozen=True)
class PipelineConfig:
    layout: GridLayout = GridLayout()
    bundle: AxonGrowthParams = AxonGrowthParams()
    model: ModelParams = ModelParams()
    preprocess: PreprocessMode = PreprocessMode()
    encoder: EncoderConfig = EncoderConfig()
    grid: PerceptGrid = PerceptGrid()


@dataclass(frozen=True)
class FrameReport:
    percept: Frame
    stimulus: np.ndarray
    preprocess_us: float
    encode_us: float
    render_us: float
    generation: int


@dataclass(frozen=True)
class PipelineState:
    config: PipelineConfig
    array: ElectrodeArray
    bundle: AxonBundle | None
    smap: SensitivityMap
    generation: int = 0


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except ValidationError as exc:
        raise ValidationError(f"{name}: {exc}") from exc


def build_pipeline(cfg: PipelineConfig) -> PipelineState:
    """Construct array, bundle (axon-map only), and sensitivity map."""
    array = _stage(
        "array",
        lambda: build_grid_array(
            cfg.layout.rows,
            cfg.layout.cols,
            cfg.layout.pitch_um,
            cfg.layout.rotation_deg,
            cfg.layout.center_um,
        ),
    )
    bundle = None
    if cfg.model.kind == AXONMAP:
        bundle = _stage("bundle", lambda: build_bundle(cfg.bundle))
    smap = _stage(
        "sensitivity_map",
        lambda: build_sensitivity_map(array, bundle, cfg.model, cfg.grid),
    )
    return PipelineState(config=cfg, array=array, bundle=bundle, smap=smap)


def process_frame(
    state: PipelineState, f: Frame, gaze: GazeTransform = GazeTransform()
) -> FrameReport:
    """Run preprocess -> encode -> render against one config snapshot."""
    t0 = time.perf_counter()
    pre = preprocess(f, state.config.preprocess)
    t1 = time.perf_counter()
    stim = encode_frame(pre, state.array, state.config.encoder, gaze)
    t2 = time.perf_counter()
    percept = render_percept(state.smap, stim)
    t3 = time.perf_counter()
    return FrameReport(
        percept=percept,
        stimulus=stim,
        preprocess_us=(t1 - t0) * 1e6,
        encode_us=(t2 - t1) * 1e6,
        render_us=(t3 - t2) * 1e6,
        generation=state.generation,
    )


def update_config(state: PipelineState, cfg: PipelineConfig) -> PipelineState:
    """New snapshot for cfg, rebuilding only stages whose inputs changed.

    On validation failure the old state is untouched (the exception
    propagates before any snapshot is replaced).
    """
    old = state.config
    geometry_changed = cfg.layout != old.layout
    needs_bundle = cfg.model.kind == AXONMAP
    bundle_changed = needs_bundle and (
        state.bundle is None or cfg.bundle != old.bundle
    )
    map_changed = (
        geometry_changed
        or bundle_changed
        or cfg.model != old.model
        or cfg.grid != old.grid
    )

    array = state.array
    if geometry_changed:
        array = _stage(
            "array",
            lambda: build_grid_array(
                cfg.layout.rows,
                cfg.layout.cols,
                cfg.layout.pitch_um,
                cfg.layout.rotation_deg,
                cfg.layout.center_um,
            ),
        )
    bundle = state.bundle if needs_bundle else None
    if bundle_changed:
        bundle = _stage("bundle", lambda: build_bundle(cfg.bundle))
    smap = state.smap
    if map_changed:
        smap = _stage(
            "sensitivity_map",
            lambda: build_sensitivity_map(array, bundle, cfg.model, cfg.grid),
        )
    return PipelineState(
        config=cfg,
        array=array,
        bundle=bundle,
        smap=smap,
        generation=state.generation + 1,
    )
