"""Steganography in quantized 8x8 orthogonal-moment coefficients."""

from .basis import BasisId, BasisParams, KernelMatrix, build_kernel, gram_deviation, recurrence_residual
from .chaos import BetaParams, chaotic_positions
from .codec import (
    CapacityError,
    EmbedReport,
    FramingError,
    StegoConfig,
    capacity,
    embed,
    embed_payload,
    extract,
    extract_payload,
    frame_message,
    unframe,
)
from .imageio import ImageBuffer, load_image, save_image, tile
from .keyschedule import expand_key, permute, unpermute
from .metrics import MetricsReport, analyze

__all__ = [
    "BasisId", "BasisParams", "KernelMatrix", "build_kernel", "gram_deviation", "recurrence_residual",
    "BetaParams", "chaotic_positions",
    "CapacityError", "EmbedReport", "FramingError", "StegoConfig", "capacity", "embed", "embed_payload",
    "extract", "extract_payload", "frame_message", "unframe",
    "ImageBuffer", "load_image", "save_image", "tile",
    "expand_key", "permute", "unpermute",
    "MetricsReport", "analyze",
]
