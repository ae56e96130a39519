"""2560-bit key expansion and the mask-driven coefficient permutation."""

from __future__ import annotations

import secrets

import numpy as np

EXPANSION_BITS = 2560

SBOX = bytes(
    [
        0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
        0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
        0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
        0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
        0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
        0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
        0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
        0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
        0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
        0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
        0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
        0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
        0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
        0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
        0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
        0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
    ]
)
assert SBOX[0x00] == 0x63


def parse_key(key) -> bytes:
    """Accept 16 raw bytes or 32 hex characters."""
    if isinstance(key, str):
        text = key.strip().lower()
        if text.startswith("0x"):
            text = text[2:]
        if len(text) != 32:
            raise ValueError("key must be 32 hex characters (128 bits)")
        try:
            return bytes.fromhex(text)
        except ValueError:
            raise ValueError("key must be 32 hex characters (128 bits)") from None
    key = bytes(key)
    if len(key) != 16:
        raise ValueError("key must be exactly 16 bytes")
    return key


def generate_key() -> bytes:
    return secrets.token_bytes(16)


def rot_word(word):
    return tuple(word[1:]) + (word[0],)


def sub_word(word):
    return tuple(SBOX[b] for b in word)


def rcon(j: int):
    r = 1
    for _ in range(j - 1):
        r <<= 1
        if r & 0x100:
            r ^= 0x11B
    return (r, 0, 0, 0)


def _schedule_words(key: bytes) -> list[tuple]:
    w = [tuple(key[4 * i:4 * i + 4]) for i in range(4)]
    for i in range(4, 44):
        t = w[i - 1]
        if i % 4 == 0:
            t = tuple(a ^ b for a, b in zip(sub_word(rot_word(t)), rcon(i // 4)))
        w.append(tuple(a ^ b for a, b in zip(w[i - 4], t)))
    return w


def expansion_bytes(key) -> bytes:
    """The 320 bytes behind the expansion: two schedule passes of words 4..43."""
    kappa = parse_key(key)
    out = bytearray()
    for _ in range(2):
        w = _schedule_words(kappa)
        out.extend(b for word in w[4:] for b in word)
        kappa = bytes(b for word in w[40:44] for b in word)
    return bytes(out)


def expand_key(key) -> np.ndarray:
    """2560-bit expansion as a uint8 array of 0/1, MSB first within each byte."""
    return np.unpackbits(np.frombuffer(expansion_bytes(key), dtype=np.uint8))


def mask_at(P, sigma: int) -> np.ndarray:
    """Bits P[8(sigma-1)+1 .. 8 sigma] (1-based), wrapping modulo 2560."""
    P = np.asarray(P)
    if P.shape != (EXPANSION_BITS,):
        raise ValueError("key expansion must hold 2560 bits")
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    idx = (8 * (sigma - 1) + np.arange(8)) % EXPANSION_BITS
    return P[idx].astype(np.uint8)


def mask_bytes(P, n_blocks: int, start: int = 0) -> np.ndarray:
    """Mask bytes for visited sub-blocks ``start .. start+n_blocks-1``.

    Sub-block ``t`` (0-based) uses counter ``sigma = t mod 2560 + 1``.
    """
    sig = (np.arange(start, start + n_blocks) % EXPANSION_BITS)[:, None]
    idx = (8 * sig + np.arange(8)[None, :]) % EXPANSION_BITS
    bits = np.asarray(P, dtype=np.uint8)[idx]
    return np.packbits(bits, axis=1)[:, 0]


def _order(mask) -> np.ndarray:
    m = np.asarray(mask).astype(bool)
    return np.concatenate([np.flatnonzero(m), np.flatnonzero(~m)])


def permute(v, mask):
    """Values under 1-bits first, then values under 0-bits, each in original order."""
    arr = np.asarray(v)
    if arr.shape[-1] != 8 or np.asarray(mask).shape != (8,):
        raise ValueError("permute needs 8 values and an 8-bit mask")
    out = arr[..., _order(mask)]
    return out if isinstance(v, np.ndarray) else out.tolist()


def unpermute(v, mask):
    arr = np.asarray(v)
    if arr.shape[-1] != 8 or np.asarray(mask).shape != (8,):
        raise ValueError("unpermute needs 8 values and an 8-bit mask")
    out = np.empty_like(arr)
    out[..., _order(mask)] = arr
    return out if isinstance(v, np.ndarray) else out.tolist()


def permutation_table() -> np.ndarray:
    """Row ``b`` gives the gather order of ``permute`` for mask byte ``b`` (MSB = first bit)."""
    table = np.empty((256, 8), dtype=np.int64)
    for b in range(256):
        table[b] = _order(np.unpackbits(np.array([b], dtype=np.uint8)))
    return table


PERM_TABLE = permutation_table()
