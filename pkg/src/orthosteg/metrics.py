"""Cover/stego quality measures: MSE, PSNR, UIQI, IF and RE."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .imageio import ImageBuffer

RE_FLOOR = 1e-12


class UndefinedMetric(ValueError):
    pass


def _pair(C, S):
    c = np.asarray(C.samples if isinstance(C, ImageBuffer) else C, dtype=np.float64)
    s = np.asarray(S.samples if isinstance(S, ImageBuffer) else S, dtype=np.float64)
    if c.shape != s.shape:
        raise ValueError(f"shape mismatch: {c.shape} vs {s.shape}")
    if c.size == 0:
        raise ValueError("empty images")
    return c, s


def mse(C, S) -> float:
    c, s = _pair(C, S)
    return float(np.mean((c - s) ** 2))


def peak(C, S) -> float:
    c, s = _pair(C, S)
    return float(max(c.max(), s.max()))


def psnr(C, S, peak_value: float | None = None) -> float:
    """``10 log10(Xi^2 / MSE)`` with ``Xi`` the largest sample of either image unless overridden."""
    e = mse(C, S)
    if e == 0:
        return math.inf
    xi = peak(C, S) if peak_value is None else float(peak_value)
    if xi <= 0:
        return -math.inf
    return 10.0 * math.log10(xi * xi / e)


def uiqi(C, S) -> float:
    """Global universal image quality index over all samples."""
    c, s = _pair(C, S)
    n = c.size
    if n < 2:
        raise UndefinedMetric("UIQI needs at least two samples")
    mc, ms = c.mean(), s.mean()
    vc = np.sum((c - mc) ** 2) / (n - 1)
    vs = np.sum((s - ms) ** 2) / (n - 1)
    cov = np.sum((c - mc) * (s - ms)) / (n - 1)
    den = (vc + vs) * (mc * mc + ms * ms)
    if den == 0:
        raise UndefinedMetric("UIQI undefined: constant images")
    return float(4.0 * cov * mc * ms / den)


def image_fidelity(C, S) -> float:
    c, s = _pair(C, S)
    energy = np.sum(c * c)
    if energy == 0:
        raise UndefinedMetric("image fidelity undefined for an all-zero cover")
    return float(1.0 - np.sum((c - s) ** 2) / energy)


def histogram(img) -> np.ndarray:
    """Normalized 256-bin intensity histogram pooled over channels."""
    a = np.asarray(img.samples if isinstance(img, ImageBuffer) else img)
    if a.size == 0:
        raise ValueError("empty image")
    a = a.astype(np.int64).ravel()
    if a.min() < 0 or a.max() > 255:
        raise ValueError("samples must lie in [0, 255]")
    counts = np.bincount(a, minlength=256).astype(np.float64)
    return counts / counts.sum()


def relative_entropy_hist(pc, ps) -> float:
    pc = np.asarray(pc, dtype=np.float64)
    ps = np.maximum(np.asarray(ps, dtype=np.float64), RE_FLOOR)
    on = pc > 0
    return float(np.sum(pc[on] * np.abs(np.log(pc[on] / ps[on]))))


def relative_entropy(C, S) -> float:
    _pair(C, S)
    return relative_entropy_hist(histogram(C), histogram(S))


@dataclass
class MetricsReport:
    mse: float
    psnr_db: float
    uiqi: float
    image_fidelity: float
    relative_entropy: float
    Xi: int

    def to_text(self) -> str:
        return "\n".join(f"{k}: {v}" for k, v in asdict(self).items())


def analyze(C, S, peak_value: float | None = None) -> MetricsReport:
    try:
        q = uiqi(C, S)
    except UndefinedMetric:
        q = math.nan
    try:
        fid = image_fidelity(C, S)
    except UndefinedMetric:
        fid = math.nan
    return MetricsReport(
        mse=mse(C, S),
        psnr_db=psnr(C, S, peak_value),
        uiqi=q,
        image_fidelity=fid,
        relative_entropy=relative_entropy(C, S),
        Xi=int(peak(C, S) if peak_value is None else peak_value),
    )
