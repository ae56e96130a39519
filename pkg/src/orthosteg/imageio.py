"""Lossless image I/O and 64x64 / 8x8 tiling."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

MACRO = 64
SUB = 8
LOSSLESS_SUFFIXES = {".png": "PNG", ".bmp": "BMP"}


class ImageFormatError(ValueError):
    pass


class DimensionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """Channel-planar uint8 samples, shape ``(channels, height, width)``."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim == 2:
            s = s[None]
        if s.ndim != 3 or s.shape[0] not in (1, 3):
            raise ValueError(f"expected (C, H, W) with C in (1, 3), got shape {s.shape}")
        if s.dtype != np.uint8:
            if not np.issubdtype(s.dtype, np.integer) or s.min(initial=0) < 0 or s.max(initial=0) > 255:
                raise ValueError("samples must be integers in [0, 255]")
            s = s.astype(np.uint8)
        object.__setattr__(self, "samples", np.ascontiguousarray(s))

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def height(self) -> int:
        return self.samples.shape[1]

    @property
    def width(self) -> int:
        return self.samples.shape[2]

    @classmethod
    def from_interleaved(cls, arr) -> "ImageBuffer":
        arr = np.asarray(arr)
        if arr.ndim == 3:
            arr = np.moveaxis(arr, -1, 0)
        return cls(arr)

    def interleaved(self) -> np.ndarray:
        if self.channels == 1:
            return self.samples[0]
        return np.moveaxis(self.samples, 0, -1)

    def copy(self) -> "ImageBuffer":
        return ImageBuffer(self.samples.copy())

    def __eq__(self, other):
        return isinstance(other, ImageBuffer) and np.array_equal(self.samples, other.samples)


def check_dimensions(buf: ImageBuffer) -> None:
    if buf.width % MACRO or buf.height % MACRO or buf.width == 0 or buf.height == 0:
        raise DimensionError(
            f"image is {buf.width}x{buf.height}; width and height must be positive multiples of {MACRO}"
        )


def load_image(path) -> ImageBuffer:
    path = Path(path)
    with Image.open(path) as im:
        if im.format not in ("PNG", "BMP"):
            raise ImageFormatError(f"{path}: unsupported format {im.format}; use 8-bit PNG or BMP")
        mode = im.mode
        if mode in ("RGBA", "LA", "PA") or "transparency" in im.info:
            raise ImageFormatError(f"{path}: alpha channels are not supported")
        if mode in ("I", "I;16", "I;16B", "I;16L", "F", "RGB;16", "I;16N"):
            raise ImageFormatError(f"{path}: only 8-bit samples are supported (mode {mode})")
        if mode == "P":
            im = im.convert("RGB")
        elif mode == "1":
            im = im.convert("L")
        elif mode not in ("L", "RGB"):
            raise ImageFormatError(f"{path}: unsupported mode {mode}")
        buf = ImageBuffer.from_interleaved(np.array(im))
    if buf.width % MACRO or buf.height % MACRO:
        warnings.warn(
            f"{path}: {buf.width}x{buf.height} is not a multiple of {MACRO}; embedding will refuse it",
            stacklevel=2,
        )
    return buf


def save_image(buf: ImageBuffer, path) -> None:
    path = Path(path)
    fmt = LOSSLESS_SUFFIXES.get(path.suffix.lower())
    if fmt is None:
        raise ImageFormatError(f"{path}: only lossless .png or .bmp output is allowed")
    Image.fromarray(buf.interleaved()).save(path, format=fmt)


@dataclass(frozen=True)
class TilingIndex:
    height: int
    width: int

    @property
    def macro_rows(self) -> int:
        return self.height // MACRO

    @property
    def macro_cols(self) -> int:
        return self.width // MACRO

    @property
    def macroblocks(self) -> int:
        return self.macro_rows * self.macro_cols

    def macroblock_rect(self, k: int):
        """Pixel rectangle ``(row0, col0, row1, col1)`` of macroblock ``k`` (1-based, row-major)."""
        if not 1 <= k <= self.macroblocks:
            raise IndexError(f"macroblock {k} out of range 1..{self.macroblocks}")
        r, c = divmod(k - 1, self.macro_cols)
        return (r * MACRO, c * MACRO, (r + 1) * MACRO, (c + 1) * MACRO)

    def subblock_rect(self, k: int, j: int):
        """Rectangle of sub-block ``j`` (1-based, row-major within macroblock ``k``)."""
        if not 1 <= j <= 64:
            raise IndexError(f"sub-block {j} out of range 1..64")
        r0, c0, _, _ = self.macroblock_rect(k)
        r, c = divmod(j - 1, MACRO // SUB)
        return (r0 + r * SUB, c0 + c * SUB, r0 + (r + 1) * SUB, c0 + (c + 1) * SUB)

    def subblock_origins(self, k: int, order) -> np.ndarray:
        """Top-left pixel of each sub-block of macroblock ``k`` listed in ``order`` (1-based)."""
        order = np.asarray(order, dtype=np.int64) - 1
        r0, c0, _, _ = self.macroblock_rect(k)
        return np.stack([r0 + (order // 8) * SUB, c0 + (order % 8) * SUB], axis=1)


def tile(buf: ImageBuffer) -> TilingIndex:
    check_dimensions(buf)
    return TilingIndex(buf.height, buf.width)
