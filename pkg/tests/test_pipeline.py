import math

import numpy as np
import pytest

from spvsim.config import apply_overrides, config_from_doc, config_to_doc
from spvsim.errors import ValidationError
from spvsim.geometry import GridLayout
from spvsim.model import AXONMAP, ModelParams, PerceptGrid
from spvsim.pipeline import (
    PipelineConfig,
    build_pipeline,
    process_frame,
    update_config,
)
from spvsim.vision import EncoderConfig, Frame, GazeTransform, PreprocessMode


def small_axonmap_config(**model_kwargs):
    from dataclasses import replace

    from spvsim.geometry import AxonGrowthParams

    return PipelineConfig(
        bundle=AxonGrowthParams(n_axons=64, step_um=100.0),
        model=ModelParams(kind=AXONMAP, **model_kwargs),
        grid=PerceptGrid(48, 30),
    )


@pytest.fixture(scope="module")
def scoreboard_state():
    return build_pipeline(PipelineConfig(grid=PerceptGrid(48, 30)))


class TestBuildPipeline:
    def test_scoreboard_has_no_bundle(self, scoreboard_state):
        assert scoreboard_state.bundle is None
        assert scoreboard_state.generation == 0

    def test_same_config_bitwise_identical_maps(self):
        cfg = small_axonmap_config()
        s1, s2 = build_pipeline(cfg), build_pipeline(cfg)
        assert np.array_equal(s1.smap.matrix.data, s2.smap.matrix.data)
        assert np.array_equal(s1.smap.matrix.indices, s2.smap.matrix.indices)
        assert np.array_equal(s1.smap.matrix.indptr, s2.smap.matrix.indptr)

    def test_entry_counts_match_dense_threshold_oracle(self):
        cfg = PipelineConfig(model=ModelParams(eps=1e-3), grid=PerceptGrid(96, 60))
        state = build_pipeline(cfg)
        px = cfg.grid.pixel_centers_um()
        count = 0
        for e in state.array.electrodes:
            d2 = (px[:, 0] - e.x_um) ** 2 + (px[:, 1] - e.y_um) ** 2
            count += int((np.exp(-d2 / (2 * cfg.model.rho_um**2)) > cfg.model.eps).sum())
        assert state.smap.n_entries == count

    def test_invalid_config_attributes_stage(self):
        with pytest.raises(ValidationError, match="array"):
            build_pipeline(PipelineConfig(layout=GridLayout(rows=6, cols=10, pitch_um=0.5)))


class TestProcessFrame:
    def test_black_frame_black_percept(self, scoreboard_state):
        report = process_frame(scoreboard_state, Frame(np.zeros((48, 64))))
        assert not report.percept.data.any()
        assert not report.stimulus.any()
        assert report.generation == 0
        assert report.preprocess_us >= 0

    def test_mask_all_zeros_blacks_out(self):
        cfg = PipelineConfig(
            preprocess=PreprocessMode("mask", mask=Frame(np.zeros((48, 64)))),
            grid=PerceptGrid(48, 30),
        )
        state = build_pipeline(cfg)
        report = process_frame(state, Frame(np.ones((48, 64))))
        assert not report.percept.data.any()

    def test_white_frame_single_electrode_gaussian_footprint(self):
        cfg = PipelineConfig(
            layout=GridLayout(rows=1, cols=1, pitch_um=575.0),
            model=ModelParams(eps=0.0),
            grid=PerceptGrid(33, 21),
        )
        state = build_pipeline(cfg)
        report = process_frame(state, Frame(np.ones((48, 64))))
        assert np.allclose(report.stimulus, 1.0)
        px = cfg.grid.pixel_centers_um()
        expected = np.exp(
            -(px[:, 0] ** 2 + px[:, 1] ** 2) / (2 * cfg.model.rho_um**2)
        ).reshape(21, 33)
        assert np.abs(report.percept.data - expected).max() <= 1e-9


class TestUpdateConfig:
    def test_preprocess_change_keeps_map(self, scoreboard_state):
        from dataclasses import replace

        cfg2 = replace(scoreboard_state.config, preprocess=PreprocessMode("edges"))
        state2 = update_config(scoreboard_state, cfg2)
        assert state2.smap is scoreboard_state.smap
        assert state2.generation == scoreboard_state.generation + 1

    def test_rho_change_rebuilds_map(self, scoreboard_state):
        from dataclasses import replace

        cfg2 = replace(scoreboard_state.config, model=ModelParams(rho_um=200.0))
        state2 = update_config(scoreboard_state, cfg2)
        assert state2.smap is not scoreboard_state.smap
        assert not np.array_equal(
            state2.smap.matrix.data, scoreboard_state.smap.matrix.data
        )

    def test_incremental_equals_fresh_build(self):
        cfg_a = PipelineConfig(grid=PerceptGrid(48, 30))
        cfg_b = small_axonmap_config(rho_um=250.0)
        incremental = update_config(build_pipeline(cfg_a), cfg_b)
        fresh = build_pipeline(cfg_b)
        rng = np.random.default_rng(2)
        for _ in range(3):
            probe = Frame(rng.uniform(0, 1, (48, 64)))
            gaze = GazeTransform(1.5, -2.0, 10.0)
            p1 = process_frame(incremental, probe, gaze).percept.data
            p2 = process_frame(fresh, probe, gaze).percept.data
            assert np.abs(p1 - p2).max() <= 1e-12

    def test_invalid_update_leaves_state_usable(self, scoreboard_state):
        from dataclasses import replace

        with pytest.raises(ValidationError):
            update_config(
                scoreboard_state,
                replace(scoreboard_state.config, model=ModelParams(rho_um=-1.0)),
            )
        # old snapshot still processes frames
        report = process_frame(scoreboard_state, Frame(np.zeros((48, 64))))
        assert report.generation == scoreboard_state.generation


class TestConfigDocument:
    def test_round_trip(self):
        cfg = small_axonmap_config(rho_um=222.0, eps=0.01)
        doc = config_to_doc(cfg)
        assert doc["schema_version"] == 1
        again = config_from_doc(doc)
        assert again == cfg

    def test_overrides_dotted_paths(self):
        doc = config_to_doc(PipelineConfig())
        doc = apply_overrides(doc, ["model.rho_um=150", "array.rows=4", "preprocess.mode=edges"])
        cfg = config_from_doc(doc)
        assert cfg.model.rho_um == 150.0
        assert cfg.layout.rows == 4
        assert cfg.preprocess.mode == "edges"

    def test_bad_override_rejected(self):
        with pytest.raises(ValidationError):
            apply_overrides({}, ["model.rho_um"])

    def test_bad_schema_version(self):
        doc = config_to_doc(PipelineConfig())
        doc["schema_version"] = 99
        with pytest.raises(ValidationError):
            config_from_doc(doc)

    def test_mask_mode_requires_path(self):
        doc = config_to_doc(PipelineConfig())
        doc["preprocess"]["mode"] = "mask"
        with pytest.raises(ValidationError):
            config_from_doc(doc)

    def test_mask_loaded_from_file(self, tmp_path):
        from spvsim.images import save_gray

        mask = Frame(np.ones((30, 40)))
        save_gray(mask, str(tmp_path / "mask.png"))
        doc = config_to_doc(PipelineConfig())
        doc["preprocess"] = {"mode": "mask", "mask_path": "mask.png"}
        cfg = config_from_doc(doc, base_dir=str(tmp_path))
        assert cfg.preprocess.mask.data.shape == (30, 40)
