"""Synthetic test scenes: moving bar, checkerboard, doorway silhouette."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .vision import Frame

SCENES = ("bar", "checker", "door")


def bar_frame(t: float, width: int = 640, height: int = 480) -> Frame:
    """Bright vertical bar sweeping left-to-right with period 4 s."""
    data = np.zeros((height, width))
    bar_w = max(2, width // 16)
    x0 = int(((t % 4.0) / 4.0) * (width - bar_w))
    data[:, x0 : x0 + bar_w] = 1.0
    return Frame(data)


def checker_frame(t: float, width: int = 640, height: int = 480) -> Frame:
    """Checkerboard whose phase flips every second."""
    cell = max(4, width // 16)
    yy, xx = np.mgrid[0:height, 0:width]
    phase = int(t) % 2
    data = (((xx // cell) + (yy // cell) + phase) % 2).astype(float)
    return Frame(data)


def door_frame(t: float, width: int = 640, height: int = 480) -> Frame:
    """Bright doorway silhouette drifting slowly sideways."""
    data = np.full((height, width), 0.15)
    door_w = width // 6
    door_h = int(height * 0.7)
    drift = int(np.sin(t * 0.5) * width / 8)
    x0 = (width - door_w) // 2 + drift
    x0 = max(0, min(width - door_w, x0))
    y0 = height - door_h
    data[y0:, x0 : x0 + door_w] = 0.95
    return Frame(data)


def scene_frame(name: str, t: float, width: int = 640, height: int = 480) -> Frame:
    if name == "bar":
        return bar_frame(t, width, height)
    if name == "checker":
        return checker_frame(t, width, height)
    if name == "door":
        return door_frame(t, width, height)
    raise ValidationError(f"unknown scene {name!r}")
