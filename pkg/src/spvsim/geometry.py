"""Retinal coordinate systems, electrode array layouts, and nerve-fiber
bundle geometry.

Conventions (right eye):
  * Visual field coordinates are degrees of visual angle; +x points
    nasal-to-temporal right, +y is superior.
  * Retinal coordinates are microns on the retinal surface. The mapping is
    linear at UM_PER_DEG microns per degree with a vertical flip (superior
    visual field lands on the inferior retina).
  * The optic disc sits nasally at OD_CENTER_UM; all fiber trajectories
    emanate from it and arc around the macula without crossing the
    horizontal raphe.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

# Linear retinal magnification, microns of retina per degree of visual angle.
UM_PER_DEG = 280.0

# Optic disc center, microns (~15 deg nasal, 2 deg superior, right eye).
OD_CENTER_UM = (4200.0, 560.0)


def visual_field_to_retina(x_deg, y_deg):
    """Map visual-field degrees to retinal microns.

    Vertical axis inverts: the superior visual field projects onto the
    inferior retina. Accepts scalars or numpy arrays.
    """
    return UM_PER_DEG * np.asarray(x_deg, dtype=float), -UM_PER_DEG * np.asarray(
        y_deg, dtype=float
    )


def retina_to_visual_field(x_um, y_um):
    """Exact inverse of :func:`visual_field_to_retina`."""
    return np.asarray(x_um, dtype=float) / UM_PER_DEG, -np.asarray(
        y_um, dtype=float
    ) / UM_PER_DEG


@dataclass(frozen=True)
class ElectrodeSpec:
    """A single disc electrode at a retinal position."""

    name: str
    x_um: float
    y_um: float
    radius_um: float

    def __post_init__(self):
        if not (math.isfinite(self.x_um) and math.isfinite(self.y_um)):
            raise ValidationError(f"electrode {self.name!r}: non-finite center")
        if not self.radius_um > 0:
            raise ValidationError(
                f"electrode {self.name!r}: radius_um must be > 0, got {self.radius_um}"
            )


@dataclass(frozen=True)
class GridLayout:
    """Descriptor of a rectangular electrode lattice."""

    rows: int = 6
    cols: int = 10
    pitch_um: float = 575.0
    rotation_deg: float = 0.0
    center_um: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValidationError(f"grid needs rows, cols >= 1, got {self.rows}x{self.cols}")
        if not self.pitch_um > 0:
            raise ValidationError(f"pitch_um must be > 0, got {self.pitch_um}")

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "pitch_um": self.pitch_um,
            "rotation_deg": self.rotation_deg,
            "center_um": list(self.center_um),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridLayout":
        try:
            return cls(
                rows=int(d["rows"]),
                cols=int(d["cols"]),
                pitch_um=float(d["pitch_um"]),
                rotation_deg=float(d.get("rotation_deg", 0.0)),
                center_um=tuple(float(v) for v in d.get("center_um", (0.0, 0.0))),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad grid layout document: {exc}") from exc


class ElectrodeArray:
    """Ordered electrode collection; order defines stimulus indexing."""

    def __init__(self, electrodes, layout: GridLayout | None = None):
        electrodes = tuple(electrodes)
        if not electrodes:
            raise ValidationError("electrode array must be non-empty")
        names = [e.name for e in electrodes]
        if len(set(names)) != len(names):
            raise ValidationError("electrode names must be unique")
        pos = np.array([[e.x_um, e.y_um] for e in electrodes], dtype=float)
        if len(electrodes) > 1:
            d2 = np.sum((pos[:, None, :] - pos[None, :, :]) ** 2, axis=-1)
            np.fill_diagonal(d2, np.inf)
            if d2.min() < 1.0:
                raise ValidationError("electrodes closer than 1 um")
        self.electrodes = electrodes
        self.layout = layout
        self.positions = pos
        self.positions.setflags(write=False)

    def __len__(self):
        return len(self.electrodes)

    def pitch_um(self) -> float:
        """Characteristic electrode spacing, used to size receptive fields."""
        if self.layout is not None:
            return self.layout.pitch_um
        if len(self.electrodes) == 1:
            return 4.0 * self.electrodes[0].radius_um
        d2 = np.sum(
            (self.positions[:, None, :] - self.positions[None, :, :]) ** 2, axis=-1
        )
        np.fill_diagonal(d2, np.inf)
        return float(np.sqrt(d2.min(axis=1).max()))


def build_grid_array(
    rows: int,
    cols: int,
    pitch_um: float,
    rotation_deg: float = 0.0,
    center_um: tuple[float, float] = (0.0, 0.0),
) -> ElectrodeArray:
    """Rectangular lattice of rows x cols electrodes, rotated about its center.

    Electrodes are named "R{r}C{c}" in row-major order; row 0 is the top
    (superior) row before rotation. Radius defaults to pitch/4.
    """
    layout = GridLayout(rows, cols, pitch_um, rotation_deg, tuple(center_um))
    r_idx, c_idx = np.mgrid[0:rows, 0:cols]
    x = (c_idx - (cols - 1) / 2.0) * pitch_um
    y = ((rows - 1) / 2.0 - r_idx) * pitch_um
    th = math.radians(rotation_deg)
    cos_t, sin_t = math.cos(th), math.sin(th)
    xr = cos_t * x - sin_t * y + center_um[0]
    yr = sin_t * x + cos_t * y + center_um[1]
    radius = pitch_um / 4.0
    electrodes = [
        ElectrodeSpec(f"R{r}C{c}", xr[r, c], yr[r, c], radius)
        for r in range(rows)
        for c in range(cols)
    ]
    return ElectrodeArray(electrodes, layout=layout)


@dataclass(frozen=True)
class AxonGrowthParams:
    """Parameters of the arcuate fiber-trajectory family.

    phi(r) = phi0 + sign_adj(phi0) * b_deg * ((r - r0) / 1000)^c, sampled at
    radii r0, r0+step, ..., r_max around the optic disc, with
    sign_adj(phi0) = sin(phi0): superior fibers (phi0 in (0, 180)) bend
    counterclockwise, inferior ones clockwise, and fibers near the
    horizontal run straight, so bundles arc around the macula and
    asymptotically approach (never cross) the raphe. b_deg must keep the
    total bend below ~57 deg or fibers from opposite sides would fold onto
    each other; growth stops before a fiber would cross its raphe line on
    the temporal side of the disc.
    """

    r0_um: float = 300.0
    r_max_um: float = 9000.0
    step_um: float = 50.0
    b_deg: float = 2.0
    c: float = 1.5
    n_axons: int = 500
    od_center_um: tuple[float, float] = OD_CENTER_UM

    def __post_init__(self):
        if not self.r0_um > 0:
            raise ValidationError(f"r0_um must be > 0, got {self.r0_um}")
        if not self.r0_um < self.r_max_um:
            raise ValidationError("need r0_um < r_max_um")
        if not self.step_um > 0:
            raise ValidationError(f"step_um must be > 0, got {self.step_um}")
        if self.b_deg < 0:
            raise ValidationError(f"b_deg must be >= 0, got {self.b_deg}")
        if not self.c > 0:
            raise ValidationError(f"c must be > 0, got {self.c}")
        if self.n_axons < 16:
            raise ValidationError(f"n_axons must be >= 16, got {self.n_axons}")

    def to_dict(self) -> dict:
        return {
            "r0_um": self.r0_um,
            "r_max_um": self.r_max_um,
            "step_um": self.step_um,
            "b_deg": self.b_deg,
            "c": self.c,
            "n_axons": self.n_axons,
            "od_center_um": list(self.od_center_um),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AxonGrowthParams":
        try:
            kwargs = {
                k: float(d[k])
                for k in ("r0_um", "r_max_um", "step_um", "b_deg", "c")
                if k in d
            }
            if "n_axons" in d:
                kwargs["n_axons"] = int(d["n_axons"])
            if "od_center_um" in d:
                kwargs["od_center_um"] = tuple(float(v) for v in d["od_center_um"])
            return cls(**kwargs)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad bundle params document: {exc}") from exc


@dataclass(frozen=True)
class AxonTrajectory:
    """One fiber polyline, ordered from the optic disc outward."""

    phi0_deg: float
    points: np.ndarray  # (n, 2) retinal microns
    cum_len_um: np.ndarray  # (n,) cumulative chord length, starts at 0

    def __len__(self):
        return len(self.points)


def _sign_adj(phi0_deg: float) -> float:
    """Signed bend modulation: positive (ccw) superior, negative (cw)
    inferior, tapering to zero at the horizontal so nasal and raphe-adjacent
    fibers run straight."""
    return math.sin(math.radians(phi0_deg))


def grow_axon(
    phi0_deg: float, params: AxonGrowthParams, od_center_um=None
) -> AxonTrajectory:
    """Grow one fiber trajectory from the optic disc.

    The polyline is truncated before it would cross the raphe: superior
    fibers stop before y < 0 on the temporal side of the disc; inferior
    fibers stop before y > 2*od_y (the mirror image across the horizontal
    through the disc).
    """
    if not (-180.0 < phi0_deg <= 180.0):
        raise ValidationError(f"phi0_deg must be in (-180, 180], got {phi0_deg}")
    od = np.asarray(od_center_um if od_center_um is not None else params.od_center_um)
    r = np.arange(params.r0_um, params.r_max_um + 0.5 * params.step_um, params.step_um)
    sign = _sign_adj(phi0_deg)
    phi = phi0_deg + sign * params.b_deg * ((r - params.r0_um) / 1000.0) ** params.c
    phi_rad = np.radians(phi)
    pts = od + np.stack([r * np.cos(phi_rad), r * np.sin(phi_rad)], axis=1)

    temporal = pts[:, 0] < od[0]
    if sign > 0:
        crossed = temporal & (pts[:, 1] < 0.0)
    elif sign < 0:
        crossed = temporal & (pts[:, 1] > 2.0 * od[1])
    else:
        crossed = np.zeros(len(pts), dtype=bool)
    if crossed.any():
        pts = pts[: int(np.argmax(crossed))]
    if len(pts) < 2:
        raise ValidationError(
            f"trajectory phi0={phi0_deg} degenerates to fewer than 2 points"
        )
    chords = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(chords)])
    pts.setflags(write=False)
    cum.setflags(write=False)
    return AxonTrajectory(phi0_deg=phi0_deg, points=pts, cum_len_um=cum)


class AxonBundle:
    """Deterministic set of fiber trajectories around one optic disc.

    Flattened point/arc-length arrays are cached for vectorized
    nearest-sample queries.
    """

    def __init__(self, trajectories, params: AxonGrowthParams):
        self.trajectories = list(trajectories)
        self.params = params
        self.od_center_um = tuple(params.od_center_um)
        self.all_points = np.concatenate([t.points for t in self.trajectories])
        self.traj_index = np.concatenate(
            [np.full(len(t), i, dtype=np.int32) for i, t in enumerate(self.trajectories)]
        )
        self.point_index = np.concatenate(
            [np.arange(len(t), dtype=np.int32) for t in self.trajectories]
        )

    def __len__(self):
        return len(self.trajectories)


def build_bundle(params: AxonGrowthParams) -> AxonBundle:
    """Grow n_axons trajectories with phi0 uniformly spaced in (-180, 180]."""
    n = params.n_axons
    phi0s = -180.0 + 360.0 * np.arange(1, n + 1) / n
    return AxonBundle([grow_axon(p, params) for p in phi0s], params)


def soma_attach_batch(points: np.ndarray, bundle: AxonBundle):
    """Nearest bundle sample for each query point.

    Returns (traj_idx, pt_idx) integer arrays. Ties resolve to the lowest
    trajectory index, then the lowest point index (first occurrence in the
    flattened disc-ordered arrays).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    sx = bundle.all_points[:, 0]
    sy = bundle.all_points[:, 1]
    out = np.empty(len(pts), dtype=np.int64)
    chunk = 128
    for lo in range(0, len(pts), chunk):
        p = pts[lo : lo + chunk]
        # exact squared distance so ties match a brute-force scan; argmin
        # picks the first (lowest) flattened index
        d2 = (p[:, 0:1] - sx[None, :]) ** 2 + (p[:, 1:2] - sy[None, :]) ** 2
        out[lo : lo + chunk] = np.argmin(d2, axis=1)
    return bundle.traj_index[out], bundle.point_index[out]


def soma_attach(p, bundle: AxonBundle) -> tuple[int, int]:
    """Indices (trajectory, point) of the bundle sample nearest to p."""
    ti, pi = soma_attach_batch(np.asarray(p, dtype=float)[None, :], bundle)
    return int(ti[0]), int(pi[0])


def layout_to_json(layout: GridLayout) -> str:
    return json.dumps(layout.to_dict(), indent=2)


def layout_from_json(text: str) -> GridLayout:
    return GridLayout.from_dict(json.loads(text))


def bundle_params_to_json(params: AxonGrowthParams) -> str:
    return json.dumps(params.to_dict(), indent=2)


def bundle_params_from_json(text: str) -> AxonGrowthParams:
    return AxonGrowthParams.from_dict(json.loads(text))
