"""Phosphene models: stimulus -> predicted percept.

Two models share one render path. The scoreboard baseline gives each
electrode an isotropic Gaussian footprint; the axon-map model spreads
activation along the nerve-fiber trajectory passing each pixel's retinal
location, with a Gaussian falloff in arc length. Both are precomputed into
a sparse per-pixel sensitivity map so rendering is a single sparse
matrix-vector product.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import ValidationError
from .geometry import AxonBundle, ElectrodeArray, ElectrodeSpec, soma_attach, soma_attach_batch, visual_field_to_retina
from .vision import Frame

SCOREBOARD = "scoreboard"
AXONMAP = "axonmap"

SPVM_MAGIC = b"SPVM"
SPVM_VERSION = 1


@dataclass(frozen=True)
class ModelParams:
    """Spread/decay parameters of the percept model."""

    kind: str = SCOREBOARD
    rho_um: float = 300.0
    lambda_um: float = 1000.0
    eps: float = 1e-3
    clamp: float = 1.0

    def __post_init__(self):
        if self.kind not in (SCOREBOARD, AXONMAP):
            raise ValidationError(f"unknown model kind {self.kind!r}")
        if not self.rho_um > 0:
            raise ValidationError(f"rho_um must be > 0, got {self.rho_um}")
        if not self.lambda_um > 0:
            raise ValidationError(f"lambda_um must be > 0, got {self.lambda_um}")
        if not (0.0 <= self.eps < 1.0):
            raise ValidationError(f"eps must be in [0, 1), got {self.eps}")
        # percepts are frames, so saturation cannot exceed the frame range
        if not (0.0 < self.clamp <= 1.0):
            raise ValidationError(f"clamp must be in (0, 1], got {self.clamp}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "rho_um": self.rho_um,
            "lambda_um": self.lambda_um,
            "eps": self.eps,
            "clamp": self.clamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        try:
            return cls(
                kind=str(d.get("kind", SCOREBOARD)),
                rho_um=float(d.get("rho_um", 300.0)),
                lambda_um=float(d.get("lambda_um", 1000.0)),
                eps=float(d.get("eps", 1e-3)),
                clamp=float(d.get("clamp", 1.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad model params document: {exc}") from exc


@dataclass(frozen=True)
class PerceptGrid:
    """Output raster geometry: pixel counts plus visual-field extent."""

    width: int = 96
    height: int = 60
    fov_deg: tuple[float, float] = (18.0, 11.0)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"grid must be >= 1x1, got {self.width}x{self.height}")
        if self.fov_deg[0] <= 0 or self.fov_deg[1] <= 0:
            raise ValidationError("grid fov extents must be > 0")

    @property
    def n_pixels(self) -> int:
        return self.width * self.height

    def pixel_centers_deg(self):
        """Visual-field coordinates of pixel centers, row-major (row 0 on top)."""
        fx, fy = self.fov_deg
        x = (np.arange(self.width) + 0.5) / self.width * fx - fx / 2.0
        y = fy / 2.0 - (np.arange(self.height) + 0.5) / self.height * fy
        xx, yy = np.meshgrid(x, y)
        return xx.ravel(), yy.ravel()

    def pixel_centers_um(self):
        """Retinal coordinates of pixel centers as an (n_pixels, 2) array."""
        xd, yd = self.pixel_centers_deg()
        xu, yu = visual_field_to_retina(xd, yd)
        return np.stack([xu, yu], axis=1)

    def to_dict(self) -> dict:
        return {"width": self.width, "height": self.height, "fov_deg": list(self.fov_deg)}

    @classmethod
    def from_dict(cls, d: dict) -> "PerceptGrid":
        try:
            return cls(
                width=int(d.get("width", 96)),
                height=int(d.get("height", 60)),
                fov_deg=tuple(float(v) for v in d.get("fov_deg", (18.0, 11.0))),
            )
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad grid document: {exc}") from exc


def as_stimulus(amplitudes, n_electrodes: int) -> np.ndarray:
    """Validate an amplitude vector against an array size."""
    stim = np.asarray(amplitudes, dtype=float)
    if stim.shape != (n_electrodes,):
        raise ValidationError(
            f"stimulus length {stim.shape} != electrode count {n_electrodes}"
        )
    if not np.isfinite(stim).all() or stim.min() < 0.0 or stim.max() > 1.0:
        raise ValidationError("stimulus amplitudes must be finite and in [0, 1]")
    return stim


def scoreboard_weight(e: ElectrodeSpec, x_um: float, y_um: float, rho_um: float) -> float:
    """Isotropic Gaussian footprint: exp(-d^2 / (2 rho^2))."""
    if not rho_um > 0:
        raise ValidationError("rho_um must be > 0")
    d2 = (x_um - e.x_um) ** 2 + (y_um - e.y_um) ** 2
    return float(np.exp(-d2 / (2.0 * rho_um**2)))


def axonmap_weight(
    e: ElectrodeSpec,
    x_um: float,
    y_um: float,
    bundle: AxonBundle,
    rho_um: float,
    lambda_um: float,
) -> float:
    """Fiber-mediated weight: max over upstream samples of the pixel's fiber.

    The pixel attaches to its nearest fiber sample (the soma); activation
    from the electrode reaches the soma through any sample s between the
    soma and the optic disc, attenuated spatially (rho) at s and along the
    remaining arc length (lambda).
    """
    if not (rho_um > 0 and lambda_um > 0):
        raise ValidationError("rho_um and lambda_um must be > 0")
    ti, si = soma_attach((x_um, y_um), bundle)
    traj = bundle.trajectories[ti]
    pts = traj.points[: si + 1]
    arc = traj.cum_len_um[si] - traj.cum_len_um[: si + 1]
    d2 = (pts[:, 0] - e.x_um) ** 2 + (pts[:, 1] - e.y_um) ** 2
    w = np.exp(-d2 / (2.0 * rho_um**2)) * np.exp(-(arc**2) / (2.0 * lambda_um**2))
    return float(w.max())


class SensitivityMap:
    """Per-pixel sparse electrode weights over a percept grid.

    Stored as a CSR matrix (n_pixels x n_electrodes) with sorted column
    indices so the per-pixel reduction order is fixed.
    """

    def __init__(
        self,
        grid: PerceptGrid,
        array_size: int,
        matrix: sparse.csr_matrix,
        clamp: float = 1.0,
    ):
        if matrix.shape != (grid.n_pixels, array_size):
            raise ValidationError(
                f"matrix shape {matrix.shape} inconsistent with grid/array"
            )
        matrix.sort_indices()
        self.grid = grid
        self.array_size = array_size
        self.matrix = matrix
        self.clamp = clamp

    @property
    def n_entries(self) -> int:
        return self.matrix.nnz

    def pixel_entries(self, pixel: int):
        """Sparse (electrode index, weight) list for one row-major pixel."""
        lo, hi = self.matrix.indptr[pixel], self.matrix.indptr[pixel + 1]
        return list(zip(self.matrix.indices[lo:hi].tolist(), self.matrix.data[lo:hi].tolist()))


def _scoreboard_weights_dense(
    array: ElectrodeArray, grid: PerceptGrid, rho_um: float
) -> np.ndarray:
    px = grid.pixel_centers_um()
    centers = array.positions
    d2 = (px[:, 0:1] - centers[None, :, 0]) ** 2 + (px[:, 1:2] - centers[None, :, 1]) ** 2
    return np.exp(-d2 / (2.0 * rho_um**2))


def _axonmap_weights_dense(
    array: ElectrodeArray,
    bundle: AxonBundle,
    grid: PerceptGrid,
    rho_um: float,
    lambda_um: float,
) -> np.ndarray:
    px = grid.pixel_centers_um()
    ti, si = soma_attach_batch(px, bundle)
    centers = array.positions
    n_e = len(array)
    out = np.zeros((len(px), n_e))
    inv_2rho2 = 1.0 / (2.0 * rho_um**2)
    inv_2lam2 = 1.0 / (2.0 * lambda_um**2)
    # group pixels by trajectory; one vectorized max-reduction per fiber
    order = np.argsort(ti, kind="stable")
    bounds = np.searchsorted(ti[order], np.arange(len(bundle) + 1))
    for t in range(len(bundle)):
        sel = order[bounds[t] : bounds[t + 1]]
        if len(sel) == 0:
            continue
        traj = bundle.trajectories[t]
        pts = traj.points
        cum = traj.cum_len_um
        d2 = (pts[:, 0][:, None] - centers[:, 0][None, :]) ** 2 + (
            pts[:, 1][:, None] - centers[:, 1][None, :]
        ) ** 2
        g = np.exp(-d2 * inv_2rho2)  # (n_samples, n_e)
        s_star = si[sel]  # (k,)
        # decay from each soma to every upstream sample, zero past the soma
        gap = s_star[:, None] >= np.arange(len(pts))[None, :]
        decay = np.exp(-((cum[s_star][:, None] - cum[None, :]) ** 2) * inv_2lam2)
        decay = np.where(gap, decay, 0.0)
        out[sel] = np.max(decay[:, :, None] * g[None, :, :], axis=1)
    return out


def build_sensitivity_map(
    array: ElectrodeArray,
    bundle: AxonBundle | None,
    params: ModelParams,
    grid: PerceptGrid,
) -> SensitivityMap:
    """Precompute per-pixel electrode weights, keeping only weights > eps."""
    if params.kind == AXONMAP and bundle is None:
        raise ValidationError("axonmap model requires an axon bundle")
    if params.kind == SCOREBOARD:
        dense = _scoreboard_weights_dense(array, grid, params.rho_um)
    else:
        dense = _axonmap_weights_dense(
            array, bundle, grid, params.rho_um, params.lambda_um
        )
    dense[dense <= params.eps] = 0.0
    mat = sparse.csr_matrix(dense)
    mat.sort_indices()
    return SensitivityMap(grid, len(array), mat, clamp=params.clamp)


def render_percept(smap: SensitivityMap, stimulus) -> Frame:
    """Brightness per pixel: clamp(sum_e stim[e] * weight[e])."""
    stim = as_stimulus(stimulus, smap.array_size)
    intensity = smap.matrix @ stim
    np.minimum(intensity, smap.clamp, out=intensity)
    return Frame(intensity.reshape(smap.grid.height, smap.grid.width))


def export_spvm(smap: SensitivityMap) -> bytes:
    """Serialize to the little-endian SPVM binary format."""
    out = bytearray()
    out += SPVM_MAGIC
    out += struct.pack(
        "<IIII", SPVM_VERSION, smap.grid.width, smap.grid.height, smap.array_size
    )
    indptr = smap.matrix.indptr
    indices = smap.matrix.indices.astype(np.uint16)
    data = smap.matrix.data.astype(np.float32)
    for p in range(smap.grid.n_pixels):
        lo, hi = indptr[p], indptr[p + 1]
        n = hi - lo
        if n > 0xFFFF:
            raise ValidationError(f"pixel {p} has {n} entries, exceeds u16")
        out += struct.pack("<H", n)
        if n:
            rec = np.empty(n, dtype=[("e", "<u2"), ("w", "<f4")])
            rec["e"] = indices[lo:hi]
            rec["w"] = data[lo:hi]
            out += rec.tobytes()
    return bytes(out)


def import_spvm(blob: bytes, fov_deg=(18.0, 11.0), clamp: float = 1.0) -> SensitivityMap:
    """Parse an SPVM blob back into a SensitivityMap.

    The binary format carries no fov or clamp; callers supply them (the
    pipeline does so from its config).
    """
    if blob[:4] != SPVM_MAGIC:
        raise ValidationError("not an SPVM blob (bad magic)")
    version, width, height, n_e = struct.unpack_from("<IIII", blob, 4)
    if version != SPVM_VERSION:
        raise ValidationError(f"unsupported SPVM version {version}")
    grid = PerceptGrid(width=width, height=height, fov_deg=tuple(fov_deg))
    off = 20
    counts = np.empty(grid.n_pixels, dtype=np.int64)
    idx_parts = []
    w_parts = []
    for p in range(grid.n_pixels):
        (n,) = struct.unpack_from("<H", blob, off)
        off += 2
        counts[p] = n
        if n:
            rec = np.frombuffer(blob, dtype=[("e", "<u2"), ("w", "<f4")], count=n, offset=off)
            off += 6 * n
            idx_parts.append(rec["e"].astype(np.int32))
            w_parts.append(rec["w"].astype(np.float64))
    if off != len(blob):
        raise ValidationError("trailing bytes in SPVM blob")
    indices = np.concatenate(idx_parts) if idx_parts else np.empty(0, dtype=np.int32)
    data = np.concatenate(w_parts) if w_parts else np.empty(0)
    if len(indices) and indices.max() >= n_e:
        raise ValidationError("electrode index out of range in SPVM blob")
    indptr = np.concatenate([[0], np.cumsum(counts)])
    mat = sparse.csr_matrix((data, indices, indptr), shape=(grid.n_pixels, n_e))
    return SensitivityMap(grid, n_e, mat, clamp=clamp)
