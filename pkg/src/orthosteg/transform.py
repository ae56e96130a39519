"""8x8 separable moment transforms, quantization and scan orders."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import KernelMatrix

BASE_QUANT = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.float64,
)

# Row-major flat index of the coefficient at each zigzag position (JPEG order).
ZIGZAG = np.array(
    [
        0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5,
        12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6, 7, 14, 21, 28,
        35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
        58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
    ],
    dtype=np.int64,
)
ZIGZAG_INV = np.argsort(ZIGZAG)

# Hilbert traversal of the 8x8 sub-block grid: 1-based row-major cell numbers,
# starting at (row 0, col 0) and ending at (row 0, col 7).
HILBERT = np.array(
    [
        1, 9, 10, 2, 3, 4, 12, 11, 19, 20, 28, 27, 26, 18, 17, 25,
        33, 34, 42, 41, 49, 57, 58, 50, 51, 59, 60, 52, 44, 43, 35, 36,
        37, 38, 46, 45, 53, 61, 62, 54, 55, 63, 64, 56, 48, 47, 39, 40,
        32, 24, 23, 31, 30, 29, 21, 22, 14, 13, 5, 6, 7, 15, 16, 8,
    ],
    dtype=np.int64,
)


def round_half_away(x):
    """Round to nearest integer, ties away from zero."""
    x = np.asarray(x, dtype=np.float64)
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def _as_matrix(K) -> np.ndarray:
    if isinstance(K, KernelMatrix):
        return np.asarray(K.entries)
    K = np.asarray(K, dtype=np.float64)
    if K.shape != (8, 8):
        raise ValueError(f"kernel must be 8x8, got {K.shape}")
    return K


def forward_moments(block, Kx, Ky) -> np.ndarray:
    """Moments ``A @ B @ C.T`` with ``A[m, i] = K_m(i)`` (rows) and ``C`` for columns.

    ``block`` may carry leading batch dimensions.
    """
    A, C = _as_matrix(Kx), _as_matrix(Ky)
    B = np.asarray(block, dtype=np.float64)
    if B.shape[-2:] != (8, 8):
        raise ValueError(f"block must be 8x8, got {B.shape}")
    return A @ B @ C.T


def inverse_moments(coeffs, Kx, Ky) -> np.ndarray:
    A, C = _as_matrix(Kx), _as_matrix(Ky)
    M = np.asarray(coeffs, dtype=np.float64)
    if M.shape[-2:] != (8, 8):
        raise ValueError(f"coefficients must be 8x8, got {M.shape}")
    return A.T @ M @ C


@dataclass(frozen=True, eq=False)
class QuantTable:
    entries: np.ndarray
    mu: float

    def __post_init__(self):
        self.entries.setflags(write=False)


def chi(mu: float) -> float:
    return (100.0 - mu) / 50.0


def quant_table(mu: float) -> QuantTable:
    mu = float(mu)
    if not 50.0 < mu < 100.0:
        raise ValueError(f"quality factor mu must lie in (50, 100), got {mu}")
    return QuantTable(entries=chi(mu) * BASE_QUANT, mu=mu)


def _qentries(qt) -> np.ndarray:
    return np.asarray(qt.entries if isinstance(qt, QuantTable) else qt, dtype=np.float64)


def quantize(coeffs, qt) -> np.ndarray:
    return round_half_away(np.asarray(coeffs, dtype=np.float64) / _qentries(qt)).astype(np.int64)


def dequantize(qb, qt) -> np.ndarray:
    return np.asarray(qb, dtype=np.float64) * _qentries(qt)


def zigzag(qb) -> np.ndarray:
    """Serialize an 8x8 block (or a batch of them) into 64-vectors, DC first."""
    M = np.asarray(qb)
    if M.shape[-2:] != (8, 8):
        raise ValueError(f"block must be 8x8, got {M.shape}")
    return M.reshape(M.shape[:-2] + (64,))[..., ZIGZAG]


def inverse_zigzag(v) -> np.ndarray:
    v = np.asarray(v)
    if v.shape[-1] != 64:
        raise ValueError(f"zigzag vector must have 64 entries, got {v.shape}")
    return v[..., ZIGZAG_INV].reshape(v.shape[:-1] + (8, 8))


def hilbert_order() -> np.ndarray:
    """Visiting order of the 64 sub-blocks of a macroblock (1-based, row-major cells)."""
    return HILBERT.copy()
