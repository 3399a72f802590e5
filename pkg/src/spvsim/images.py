"""Image and raw-video I/O.

Images are 8-bit grayscale PNG or PGM (P5). Video streams are headerless
8-bit grayscale frames with a JSON sidecar at <path>.json holding
{"width": w, "height": h, "fps": f}.
"""

from __future__ import annotations

import json
import os

import numpy as np
from PIL import Image

from .errors import ValidationError
from .vision import Frame


def load_gray(path: str) -> Frame:
    """Read an image file as a grayscale frame in [0, 1]."""
    with Image.open(path) as img:
        data = np.asarray(img.convert("L"), dtype=float) / 255.0
    return Frame(data)


def save_gray(frame: Frame, path: str) -> None:
    """Write a frame as an 8-bit grayscale image (format from extension)."""
    data = np.round(frame.data * 255.0).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path)


def frame_to_bytes(frame: Frame) -> bytes:
    return np.round(frame.data * 255.0).astype(np.uint8).tobytes()


def frame_from_bytes(buf: bytes, width: int, height: int) -> Frame:
    if len(buf) != width * height:
        raise ValidationError(
            f"payload length {len(buf)} != {width}x{height}"
        )
    data = np.frombuffer(buf, dtype=np.uint8).reshape(height, width) / 255.0
    return Frame(data)


def sidecar_path(path: str) -> str:
    return path + ".json"


class RawVideoReader:
    """Iterates frames of a headerless raw grayscale stream."""

    def __init__(self, path: str):
        sc = sidecar_path(path)
        if not os.path.exists(sc):
            raise ValidationError(f"missing video sidecar {sc}")
        try:
            with open(sc) as fh:
                meta = json.load(fh)
            self.width = int(meta["width"])
            self.height = int(meta["height"])
            self.fps = float(meta.get("fps", 30.0))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad video sidecar {sc}: {exc}") from exc
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"bad video dimensions in {sc}")
        self._path = path

    def __iter__(self):
        frame_bytes = self.width * self.height
        with open(self._path, "rb") as fh:
            while True:
                buf = fh.read(frame_bytes)
                if not buf:
                    return
                if len(buf) < frame_bytes:
                    raise ValidationError("truncated final video frame")
                yield frame_from_bytes(buf, self.width, self.height)


class RawVideoWriter:
    """Writes a headerless raw grayscale stream plus its JSON sidecar."""

    def __init__(self, path: str, width: int, height: int, fps: float = 30.0):
        self.width = width
        self.height = height
        with open(sidecar_path(path), "w") as fh:
            json.dump({"width": width, "height": height, "fps": fps}, fh)
        self._fh = open(path, "wb")

    def write(self, frame: Frame) -> None:
        if (frame.width, frame.height) != (self.width, self.height):
            raise ValidationError("frame dimensions do not match stream header")
        self._fh.write(frame_to_bytes(frame))

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
