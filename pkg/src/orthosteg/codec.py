"""Embedding and extraction pipelines, payload framing and capacity."""

from __future__ import annotations

import functools
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .basis import BasisId, BasisParams, build_kernel, pair_label
from .chaos import BetaParams, chaotic_positions
from .imageio import ImageBuffer, check_dimensions, tile
from .keyschedule import PERM_TABLE, expand_key, mask_bytes, parse_key
from .transform import hilbert_order, quant_table

HEADER_BITS = 32
BITS_PER_BLOCK = 8
MAX_REFINE = 64
# Gray-level margins tried, in order, for blocks whose bits do not survive
# pixel clipping: the cover block is squeezed into [d, 255 - d] and re-embedded.
HEADROOM_LEVELS = (1, 2, 3, 4, 6, 8, 12, 16, 24, 32)


class CapacityError(ValueError):
    pass


class FramingError(ValueError):
    pass


@dataclass(frozen=True)
class StegoConfig:
    key: bytes
    basis_x: BasisId = BasisId.DCT
    basis_y: BasisId = BasisId.DCT
    basis_params: BasisParams = field(default_factory=BasisParams)
    mu: float = 75.0
    beta: BetaParams = field(default_factory=BetaParams)
    framing: str = "header32"
    process_all_blocks: bool = False
    refine_max_iters: int = 16
    headroom_levels: tuple = HEADROOM_LEVELS
    backend: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "key", parse_key(self.key))
        object.__setattr__(self, "basis_x", BasisId.parse(self.basis_x))
        object.__setattr__(self, "basis_y", BasisId.parse(self.basis_y))
        if not 50.0 < float(self.mu) < 100.0:
            raise ValueError(f"mu must lie in (50, 100), got {self.mu}")
        if self.framing not in ("header32", "raw"):
            raise ValueError("framing must be 'header32' or 'raw'")
        if not 0 <= int(self.refine_max_iters) <= MAX_REFINE:
            raise ValueError(f"refine_max_iters must lie in 0..{MAX_REFINE}")
        levels = tuple(int(d) for d in self.headroom_levels)
        if any(not 0 < d < 128 for d in levels):
            raise ValueError("headroom levels must lie in 1..127")
        object.__setattr__(self, "headroom_levels", levels)

    @property
    def pair(self) -> str:
        return pair_label(self.basis_x, self.basis_y)


@dataclass
class EmbedReport:
    bits_embedded: int
    blocks_touched: int
    capacity_bits: int
    refinement_iterations: dict = field(default_factory=dict)
    headroom: dict = field(default_factory=dict)
    # (channel, macroblock, hilbert sub-block cell, first bit, end bit)
    unstable_blocks: list = field(default_factory=list)

    @property
    def unstable_bits(self) -> int:
        return sum(end - start for *_, start, end in self.unstable_blocks)

    def to_text(self) -> str:
        hist = ",".join(f"{k}:{v}" for k, v in sorted(self.refinement_iterations.items()))
        lines = [
            f"bits_embedded: {self.bits_embedded}",
            f"capacity_bits: {self.capacity_bits}",
            f"blocks_touched: {self.blocks_touched}",
            f"refinement_iterations: {hist}",
            f"headroom: {','.join(f'{k}:{v}' for k, v in sorted(self.headroom.items()))}",
            f"unstable_blocks: {len(self.unstable_blocks)}",
        ]
        for ch, k, h, start, end in self.unstable_blocks:
            lines.append(f"  unstable: channel={ch} macroblock={k} subblock={h} bits={start}..{end - 1}")
        return "\n".join(lines)


def capacity(img) -> int:
    """8 bits per 8x8 sub-block over all channels."""
    if isinstance(img, ImageBuffer):
        check_dimensions(img)
        h, w, c = img.height, img.width, img.channels
    else:
        w, h, c = img
        if w % 64 or h % 64 or w <= 0 or h <= 0:
            raise ValueError(f"{w}x{h}: width and height must be positive multiples of 64")
    return (w // 8) * (h // 8) * BITS_PER_BLOCK * c


def lsb_replace(x: int, b: int) -> int:
    if x < 0:
        raise ValueError("lsb_replace needs a non-negative integer")
    return (int(x) & ~1) | (int(b) & 1)


def lsb_read(x: int) -> int:
    if x < 0:
        raise ValueError("lsb_read needs a non-negative integer")
    return int(x) & 1


def bytes_to_bits(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))


def bits_to_bytes(bits) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 8:
        raise FramingError(f"{bits.size} bits do not form whole bytes")
    return np.packbits(bits).tobytes()


def frame_message(payload: bytes) -> np.ndarray:
    """32-bit big-endian bit count followed by the payload bits."""
    n = 8 * len(payload)
    if n >= 1 << HEADER_BITS:
        raise FramingError("payload too large for a 32-bit header")
    header = np.array([(n >> (HEADER_BITS - 1 - i)) & 1 for i in range(HEADER_BITS)], dtype=np.uint8)
    return np.concatenate([header, bytes_to_bits(payload)])


def header_value(bits) -> int:
    bits = np.asarray(bits, dtype=np.int64)
    if bits.size < HEADER_BITS:
        raise FramingError("fewer than 32 bits: no header")
    return int(sum(int(b) << (HEADER_BITS - 1 - i) for i, b in enumerate(bits[:HEADER_BITS])))


def unframe(bits) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8)
    n = header_value(bits)
    if HEADER_BITS + n > bits.size:
        raise FramingError(f"header announces {n} bits but only {bits.size - HEADER_BITS} follow")
    return bits_to_bytes(bits[HEADER_BITS:HEADER_BITS + n])


@functools.lru_cache(maxsize=64)
def _kernel(basis: BasisId, params: BasisParams) -> np.ndarray:
    return np.asarray(build_kernel(basis, params).entries)


@functools.lru_cache(maxsize=16)
def _key_bits(key: bytes) -> np.ndarray:
    bits = expand_key(key)
    bits.setflags(write=False)
    return bits


@functools.lru_cache(maxsize=64)
def _macro_order(n: int, beta: BetaParams) -> tuple:
    return tuple(chaotic_positions(range(1, n + 1), beta))


@dataclass(frozen=True)
class Schedule:
    """Every sub-block in visiting order; row ``t`` is visited with counter ``t mod 2560 + 1``."""

    channel: np.ndarray
    macroblock: np.ndarray
    subblock: np.ndarray
    row: np.ndarray
    col: np.ndarray

    def __len__(self):
        return self.channel.size


def schedule(channels: int, height: int, width: int, beta: BetaParams) -> Schedule:
    """Channel by channel, macroblocks in chaotic order, sub-blocks in Hilbert order."""
    tiles = tile(ImageBuffer(np.zeros((channels, height, width), dtype=np.uint8)))
    order = _macro_order(tiles.macroblocks, beta)
    hil = hilbert_order()
    ch, mb, sb, rows, cols = [], [], [], [], []
    for c in range(channels):
        for k in order:
            origins = tiles.subblock_origins(k, hil)
            ch.append(np.full(64, c))
            mb.append(np.full(64, k))
            sb.append(hil)
            rows.append(origins[:, 0])
            cols.append(origins[:, 1])
    cat = lambda parts: np.concatenate(parts).astype(np.int64)  # noqa: E731
    return Schedule(cat(ch), cat(mb), cat(sb), cat(rows), cat(cols))


def _pixel_index(sched: Schedule, n: int):
    ar = np.arange(8)
    return (
        sched.channel[:n, None, None],
        sched.row[:n, None, None] + ar[None, :, None],
        sched.col[:n, None, None] + ar[None, None, :],
    )


def _setup(img: ImageBuffer, cfg: StegoConfig):
    check_dimensions(img)
    sched = schedule(img.channels, img.height, img.width, cfg.beta)
    A = _kernel(cfg.basis_x, cfg.basis_params)
    C = _kernel(cfg.basis_y, cfg.basis_params)
    Q = quant_table(cfg.mu).entries
    return sched, A, C, Q


def _perms(cfg: StegoConfig, n: int) -> np.ndarray:
    return PERM_TABLE[mask_bytes(_key_bits(cfg.key), n)]


def message_bits(payload: bytes, cfg: StegoConfig) -> np.ndarray:
    return frame_message(payload) if cfg.framing == "header32" else bytes_to_bits(payload)


def embed(cover: ImageBuffer, bits, cfg: StegoConfig) -> tuple[ImageBuffer, EmbedReport]:
    """Hide ``bits`` (already framed) in ``cover``; returns the stego image and a report."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if np.any(bits > 1):
        raise ValueError("message bits must be 0 or 1")
    sched, A, C, Q = _setup(cover, cfg)
    cap = len(sched) * BITS_PER_BLOCK
    L = bits.size
    if L > cap:
        raise CapacityError(f"capacity exceeded: need {L}, have {cap}")
    touched = -(-L // BITS_PER_BLOCK)
    n = len(sched) if cfg.process_all_blocks else touched

    padded = np.zeros(n * BITS_PER_BLOCK, dtype=np.uint8)
    padded[:L] = bits
    nbits = np.clip(L - BITS_PER_BLOCK * np.arange(n), 0, BITS_PER_BLOCK)

    idx = _pixel_index(sched, n)
    stego = cover.samples.copy()
    blocks = stego[idx].astype(np.float64)
    perms, block_bits = _perms(cfg, n), padded.reshape(n, 8)
    out, iters, bad = kernels.embed_blocks(
        blocks, A, C, Q, perms, block_bits, nbits, cfg.refine_max_iters, cfg.backend
    )
    margin = np.zeros(n, dtype=np.int64)
    for d in cfg.headroom_levels:
        retry = np.flatnonzero(bad > 0)
        if not retry.size:
            break
        squeezed = np.floor(d + blocks[retry] * ((255.0 - 2 * d) / 255.0) + 0.5)
        o, i, b = kernels.embed_blocks(
            squeezed, A, C, Q, perms[retry], block_bits[retry], nbits[retry],
            cfg.refine_max_iters, cfg.backend,
        )
        better = b < bad[retry]
        sel = retry[better]
        out[sel], iters[sel], bad[sel], margin[sel] = o[better], i[better], b[better], d
    stego[idx] = out

    carrying = nbits > 0
    unstable = [
        (int(sched.channel[t]), int(sched.macroblock[t]), int(sched.subblock[t]),
         int(8 * t), int(8 * t + nbits[t]))
        for t in np.flatnonzero(carrying & (bad > 0))
    ]
    report = EmbedReport(
        bits_embedded=L,
        blocks_touched=touched,
        capacity_bits=cap,
        refinement_iterations=dict(Counter(int(i) for i in iters[carrying])),
        headroom=dict(Counter(int(d) for d in margin[margin > 0])),
        unstable_blocks=unstable,
    )
    return ImageBuffer(stego), report


def _read(stego: ImageBuffer, cfg: StegoConfig, sched, A, C, Q, n_bits: int) -> np.ndarray:
    n = -(-n_bits // BITS_PER_BLOCK)
    got = kernels.extract_blocks(stego.samples[_pixel_index(sched, n)], A, C, Q, _perms(cfg, n), cfg.backend)
    return got.reshape(-1)[:n_bits]


def extract(stego: ImageBuffer, cfg: StegoConfig, length: int | None = None) -> np.ndarray:
    """Recover message bits; in header32 mode the result includes the header."""
    sched, A, C, Q = _setup(stego, cfg)
    cap = len(sched) * BITS_PER_BLOCK
    if cfg.framing == "header32":
        n = header_value(_read(stego, cfg, sched, A, C, Q, HEADER_BITS))
        if HEADER_BITS + n > cap:
            raise FramingError(
                f"header announces {n} payload bits but capacity is {cap - HEADER_BITS}: "
                "wrong key or parameters, or the image carries no message"
            )
        return _read(stego, cfg, sched, A, C, Q, HEADER_BITS + n)
    if length is None:
        raise ValueError("raw framing needs an explicit message length")
    if not 0 <= length <= cap:
        raise CapacityError(f"capacity exceeded: need {length}, have {cap}")
    return _read(stego, cfg, sched, A, C, Q, int(length))


def embed_payload(cover: ImageBuffer, payload: bytes, cfg: StegoConfig):
    return embed(cover, message_bits(payload, cfg), cfg)


def extract_payload(stego: ImageBuffer, cfg: StegoConfig, length: int | None = None) -> bytes:
    bits = extract(stego, cfg, length)
    return unframe(bits) if cfg.framing == "header32" else bits_to_bytes(bits[: bits.size - bits.size % 8])


def bit_error_rate(sent, received) -> float:
    sent = np.asarray(sent, dtype=np.uint8)
    received = np.asarray(received, dtype=np.uint8)
    if sent.size != received.size:
        raise ValueError("bit sequences differ in length")
    return float(np.mean(sent != received)) if sent.size else 0.0
