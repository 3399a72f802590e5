"""Scene preprocessing and scene-to-stimulus encoding.

Everything between the camera frame and the electrode amplitude vector:
edge enhancement, contrast stretching, external-mask gating, and the
gaze-aware receptive-field sampler that turns a frame into a stimulus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geometry import UM_PER_DEG, ElectrodeArray, retina_to_visual_field


class Frame:
    """Row-major grayscale raster with values in [0, 1]."""

    def __init__(self, data):
        arr = np.asarray(data, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"frame must be 2D and non-empty, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValidationError("frame contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValidationError(
                f"frame values must lie in [0, 1], got [{arr.min()}, {arr.max()}]"
            )
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self.data = arr

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @classmethod
    def zeros(cls, width: int, height: int) -> "Frame":
        return cls(np.zeros((height, width)))

    @classmethod
    def full(cls, width: int, height: int, value: float) -> "Frame":
        return cls(np.full((height, width), float(value)))


@dataclass(frozen=True)
class GazeTransform:
    """Visual-angle offset plus in-plane rotation standing in for head motion."""

    dx_deg: float = 0.0
    dy_deg: float = 0.0
    rot_deg: float = 0.0

    def __post_init__(self):
        for v in (self.dx_deg, self.dy_deg, self.rot_deg):
            if not math.isfinite(v):
                raise ValidationError("gaze transform must be finite")


@dataclass(frozen=True)
class PreprocessMode:
    """Preprocessing selector; mask mode carries an externally supplied mask.

    mask_path records where the mask was loaded from, for config
    serialization only.
    """

    mode: str = "none"  # none | edges | contrast | mask
    mask: Frame | None = None
    mask_path: str | None = None

    def __post_init__(self):
        if self.mode not in ("none", "edges", "contrast", "mask"):
            raise ValidationError(f"unknown preprocess mode {self.mode!r}")
        if self.mode == "mask" and self.mask is None:
            raise ValidationError("mask mode requires a mask frame")


@dataclass(frozen=True)
class EncoderConfig:
    """Receptive-field sampling parameters for frame-to-stimulus encoding."""

    source_fov_deg: tuple[float, float] = (64.0, 48.0)
    sample_radius_frac: float = 0.5
    out_of_frame_value: float = 0.0

    def __post_init__(self):
        if self.source_fov_deg[0] <= 0 or self.source_fov_deg[1] <= 0:
            raise ValidationError("source_fov_deg extents must be > 0")
        if not (0.0 < self.sample_radius_frac <= 2.0):
            raise ValidationError(
                f"sample_radius_frac must be in (0, 2], got {self.sample_radius_frac}"
            )
        if not (0.0 <= self.out_of_frame_value <= 1.0):
            raise ValidationError("out_of_frame_value must be in [0, 1]")


_SOBEL_NORM = 4.0 * math.sqrt(2.0)


def edge_enhance(f: Frame) -> Frame:
    """Sobel gradient magnitude with replicate-padded borders, scaled to [0, 1].

    Computed as explicit column/row differences so uniform regions cancel
    exactly to zero.
    """
    a = np.pad(f.data, 1, mode="edge")
    dx = a[:, 2:] - a[:, :-2]  # (h+2, w)
    gx = dx[:-2, :] + 2.0 * dx[1:-1, :] + dx[2:, :]
    dy = a[2:, :] - a[:-2, :]  # (h, w+2)
    gy = dy[:, :-2] + 2.0 * dy[:, 1:-1] + dy[:, 2:]
    mag = np.sqrt(gx * gx + gy * gy) / _SOBEL_NORM
    return Frame(np.clip(mag, 0.0, 1.0))


def contrast_stretch(f: Frame) -> Frame:
    """Linear stretch mapping the 2nd/98th percentiles to 0/1, clamped.

    Degenerate frames (p2 == p98) pass through unchanged.
    """
    p2, p98 = np.percentile(f.data, [2.0, 98.0])
    if p98 <= p2:
        return f
    return Frame(np.clip((f.data - p2) / (p98 - p2), 0.0, 1.0))


def apply_mask(f: Frame, mask: Frame) -> Frame:
    """Keep f where mask > 0.5, zero elsewhere."""
    if mask.data.shape != f.data.shape:
        raise ValidationError(
            f"mask shape {mask.data.shape} != frame shape {f.data.shape}"
        )
    return Frame(np.where(mask.data > 0.5, f.data, 0.0))


def preprocess(f: Frame, mode: PreprocessMode) -> Frame:
    """Dispatch to the selected preprocessing operation; 'none' is identity."""
    if mode.mode == "none":
        return f
    if mode.mode == "edges":
        return edge_enhance(f)
    if mode.mode == "contrast":
        return contrast_stretch(f)
    return apply_mask(f, mode.mask)


def _electrode_scene_positions_deg(array: ElectrodeArray, gaze: GazeTransform):
    """Scene-frame visual positions of every electrode under a gaze transform."""
    vx, vy = retina_to_visual_field(array.positions[:, 0], array.positions[:, 1])
    th = math.radians(gaze.rot_deg)
    cos_t, sin_t = math.cos(th), math.sin(th)
    ux = cos_t * vx - sin_t * vy + gaze.dx_deg
    uy = sin_t * vx + cos_t * vy + gaze.dy_deg
    return ux, uy


def encode_frame(
    f: Frame,
    array: ElectrodeArray,
    cfg: EncoderConfig,
    gaze: GazeTransform = GazeTransform(),
) -> np.ndarray:
    """Sample a frame into per-electrode amplitudes in [0, 1].

    Each electrode averages luminance over the pixels whose centers fall
    inside its receptive disc (radius = sample_radius_frac x array pitch);
    pixels outside the frame contribute cfg.out_of_frame_value. An empty
    disc falls back to the single nearest pixel.
    """
    fov_x, fov_y = cfg.source_fov_deg
    deg_per_px_x = fov_x / f.width
    deg_per_px_y = fov_y / f.height
    radius_deg = cfg.sample_radius_frac * array.pitch_um() / UM_PER_DEG

    ux, uy = _electrode_scene_positions_deg(array, gaze)
    # fractional pixel coordinates of each electrode center (pixel centers
    # at integer coordinates)
    px = (ux + fov_x / 2.0) / deg_per_px_x - 0.5
    py = (fov_y / 2.0 - uy) / deg_per_px_y - 0.5

    rx = radius_deg / deg_per_px_x
    ry = radius_deg / deg_per_px_y
    amplitudes = np.empty(len(array), dtype=float)
    for i in range(len(array)):
        c0 = int(math.floor(px[i] - rx))
        c1 = int(math.ceil(px[i] + rx))
        r0 = int(math.floor(py[i] - ry))
        r1 = int(math.ceil(py[i] + ry))
        cols = np.arange(c0, c1 + 1)
        rows = np.arange(r0, r1 + 1)
        dx = (cols - px[i]) * deg_per_px_x
        dy = (rows - py[i]) * deg_per_px_y
        inside = (dy[:, None] ** 2 + dx[None, :] ** 2) <= radius_deg**2
        if not inside.any():
            r_n = int(round(py[i]))
            c_n = int(round(px[i]))
            if 0 <= r_n < f.height and 0 <= c_n < f.width:
                amplitudes[i] = f.data[r_n, c_n]
            else:
                amplitudes[i] = cfg.out_of_frame_value
            continue
        rr, cc = np.nonzero(inside)
        rr = rows[rr]
        cc = cols[cc]
        in_frame = (rr >= 0) & (rr < f.height) & (cc >= 0) & (cc < f.width)
        total = f.data[rr[in_frame], cc[in_frame]].sum()
        total += cfg.out_of_frame_value * (len(rr) - in_frame.sum())
        amplitudes[i] = total / len(rr)
    return np.clip(amplitudes, 0.0, 1.0)
