"""Real-time simulated prosthetic vision: turn video frames into
predictions of what a retinal-implant wearer would perceive."""

__version__ = "0.1.0"

from .errors import ValidationError
from .geometry import (
    AxonBundle,
    AxonGrowthParams,
    ElectrodeArray,
    ElectrodeSpec,
    GridLayout,
    build_bundle,
    build_grid_array,
    retina_to_visual_field,
    visual_field_to_retina,
)
from .model import (
    AXONMAP,
    SCOREBOARD,
    ModelParams,
    PerceptGrid,
    SensitivityMap,
    build_sensitivity_map,
    export_spvm,
    import_spvm,
    render_percept,
)
from .pipeline import (
    FrameReport,
    PipelineConfig,
    PipelineState,
    build_pipeline,
    process_frame,
    update_config,
)
from .vision import (
    EncoderConfig,
    Frame,
    GazeTransform,
    PreprocessMode,
    encode_frame,
    preprocess,
)

__all__ = [
    "AXONMAP",
    "SCOREBOARD",
    "AxonBundle",
    "AxonGrowthParams",
    "ElectrodeArray",
    "ElectrodeSpec",
    "EncoderConfig",
    "Frame",
    "FrameReport",
    "GazeTransform",
    "GridLayout",
    "ModelParams",
    "PerceptGrid",
    "PipelineConfig",
    "PipelineState",
    "PreprocessMode",
    "SensitivityMap",
    "ValidationError",
    "build_bundle",
    "build_grid_array",
    "build_pipeline",
    "build_sensitivity_map",
    "encode_frame",
    "export_spvm",
    "import_spvm",
    "preprocess",
    "process_frame",
    "render_percept",
    "retina_to_visual_field",
    "update_config",
    "visual_field_to_retina",
]
