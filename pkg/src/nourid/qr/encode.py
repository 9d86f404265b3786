"""QR Model 2 symbol construction (byte mode, versions 1-40).

The pipeline: bit-pack the payload, split into ECC blocks, append
Reed-Solomon codewords, interleave, place into the module matrix, then
pick the mask with the lowest penalty score across the 8 standard masks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import PayloadTooLarge
from .gf256 import rs_encode
from .tables import (
    ALIGNMENT_POSITIONS,
    ECC_BLOCKS,
    ECC_LEVELS,
    byte_mode_capacity,
    format_bits,
    version_bits,
)

MASK_FUNCS = (
    lambda r, c: (r + c) % 2 == 0,
    lambda r, c: r % 2 == 0,
    lambda r, c: c % 3 == 0,
    lambda r, c: (r + c) % 3 == 0,
    lambda r, c: (r // 2 + c // 3) % 2 == 0,
    lambda r, c: (r * c) % 2 + (r * c) % 3 == 0,
    lambda r, c: ((r * c) % 2 + (r * c) % 3) % 2 == 0,
    lambda r, c: ((r + c) % 2 + (r * c) % 3) % 2 == 0,
)


@dataclass(frozen=True)
class QrSymbol:
    """A finished symbol plus the bookkeeping tests and renderers need."""

    version: int
    ecc_level: str
    mask_id: int
    modules: np.ndarray  # bool matrix, True = dark
    data_coords: tuple[tuple[int, int], ...]  # module positions in placement order
    payload: bytes

    @property
    def side(self) -> int:
        return 17 + 4 * self.version


def smallest_version(n_bytes: int, ecc_level: str) -> int:
    if ecc_level not in ECC_LEVELS:
        raise ValueError(f"unknown ECC level {ecc_level!r}")
    for version in range(1, 41):
        if byte_mode_capacity(version, ecc_level) >= n_bytes:
            return version
    raise PayloadTooLarge(
        f"payload of {n_bytes} bytes exceeds version 40 capacity at level {ecc_level}"
    )


def _bit_stream(payload: bytes, version: int, level: str) -> list[int]:
    """Byte-mode codeword stream: mode, count, data, terminator, padding."""
    count_bits = 8 if version <= 9 else 16
    bits: list[int] = []

    def put(value: int, n: int):
        for i in range(n - 1, -1, -1):
            bits.append((value >> i) & 1)

    put(0b0100, 4)
    put(len(payload), count_bits)
    for b in payload:
        put(b, 8)

    capacity_bits = 8 * sum(n * size for n, size in ECC_BLOCKS[(version, level)][1])
    put(0, min(4, capacity_bits - len(bits)))
    if len(bits) % 8:
        put(0, 8 - len(bits) % 8)

    codewords = [
        sum(bit << (7 - i) for i, bit in enumerate(bits[p : p + 8]))
        for p in range(0, len(bits), 8)
    ]
    pad = (0xEC, 0x11)
    i = 0
    while len(codewords) < capacity_bits // 8:
        codewords.append(pad[i % 2])
        i += 1
    return codewords


def _interleave(codewords: list[int], version: int, level: str) -> bytes:
    """Split into blocks, RS-encode each, interleave data then ECC."""
    ec_per_block, groups = ECC_BLOCKS[(version, level)]
    blocks: list[list[int]] = []
    pos = 0
    for n_blocks, size in groups:
        for _ in range(n_blocks):
            blocks.append(codewords[pos : pos + size])
            pos += size
    ecc = [rs_encode(block, ec_per_block) for block in blocks]

    out: list[int] = []
    for i in range(max(len(b) for b in blocks)):
        for block in blocks:
            if i < len(block):
                out.append(block[i])
    for i in range(ec_per_block):
        for e in ecc:
            out.append(e[i])
    return bytes(out)


@lru_cache(maxsize=None)
def _function_layout(version: int):
    """Base matrix with function patterns and the reservation mask.

    Format and version areas are reserved here and written per-mask later.
    Returns (modules int8 array, reserved bool array, placement coords).
    """
    side = 17 + 4 * version
    modules = np.zeros((side, side), dtype=np.int8)
    reserved = np.zeros((side, side), dtype=bool)

    def finder(r0: int, c0: int):
        for dr in range(-1, 8):
            for dc in range(-1, 8):
                r, c = r0 + dr, c0 + dc
                if not (0 <= r < side and 0 <= c < side):
                    continue
                in_ring = 0 <= dr <= 6 and 0 <= dc <= 6 and (
                    dr in (0, 6) or dc in (0, 6) or (2 <= dr <= 4 and 2 <= dc <= 4)
                )
                modules[r, c] = 1 if in_ring else 0
                reserved[r, c] = True

    finder(0, 0)
    finder(0, side - 7)
    finder(side - 7, 0)

    for r in ALIGNMENT_POSITIONS[version]:
        for c in ALIGNMENT_POSITIONS[version]:
            in_finder = (r <= 8 and c <= 8) or (r <= 8 and c >= side - 9) or (
                r >= side - 9 and c <= 8
            )
            if in_finder:
                continue
            for dr in range(-2, 3):
                for dc in range(-2, 3):
                    dark = max(abs(dr), abs(dc)) != 1
                    modules[r + dr, c + dc] = 1 if dark else 0
                    reserved[r + dr, c + dc] = True

    for i in range(8, side - 8):
        bit = 1 if i % 2 == 0 else 0
        if not reserved[6, i]:
            modules[6, i] = bit
            reserved[6, i] = True
        if not reserved[i, 6]:
            modules[i, 6] = bit
            reserved[i, 6] = True

    # format information areas (two copies) and the fixed dark module
    for i in range(9):
        if i != 6:
            reserved[8, i] = True
            reserved[i, 8] = True
    for i in range(8):
        reserved[8, side - 1 - i] = True
        reserved[side - 1 - i, 8] = True
    modules[side - 8, 8] = 1
    reserved[side - 8, 8] = True

    if version >= 7:
        for i in range(18):
            reserved[side - 11 + i % 3, i // 3] = True
            reserved[i // 3, side - 11 + i % 3] = True

    coords: list[tuple[int, int]] = []
    col = side - 1
    upward = True
    while col > 0:
        if col == 6:
            col -= 1
        rows = range(side - 1, -1, -1) if upward else range(side)
        for row in rows:
            for c in (col, col - 1):
                if not reserved[row, c]:
                    coords.append((row, c))
        upward = not upward
        col -= 2
    return modules, reserved, tuple(coords)


def _place_format(modules: np.ndarray, level: str, mask_id: int):
    side = modules.shape[0]
    bits = format_bits(level, mask_id)
    for i in range(15):
        bit = (bits >> i) & 1
        if i < 6:
            modules[i, 8] = bit
        elif i < 8:
            modules[i + 1, 8] = bit
        else:
            modules[side - 15 + i, 8] = bit
        if i < 8:
            modules[8, side - 1 - i] = bit
        elif i < 9:
            modules[8, 15 - i] = bit
        else:
            modules[8, 14 - i] = bit


def _place_version(modules: np.ndarray, version: int):
    side = modules.shape[0]
    bits = version_bits(version)
    for i in range(18):
        bit = (bits >> i) & 1
        modules[side - 11 + i % 3, i // 3] = bit
        modules[i // 3, side - 11 + i % 3] = bit


def _run_penalty(lines: np.ndarray) -> int:
    """Rule 1: runs of 5+ equal modules score 3 + (length - 5)."""
    score = 0
    for line in lines:
        run = 1
        for i in range(1, len(line)):
            if line[i] == line[i - 1]:
                run += 1
            else:
                if run >= 5:
                    score += 3 + run - 5
                run = 1
        if run >= 5:
            score += 3 + run - 5
    return score


_FINDER_SEQ = (1, 0, 1, 1, 1, 0, 1)


def _finder_penalty(lines: np.ndarray) -> int:
    """Rule 3: 1:1:3:1:1 pattern flanked by 4 light modules scores 40."""
    count = 0
    for line in lines:
        n = len(line)
        for i in range(n - 6):
            if tuple(line[i : i + 7]) != _FINDER_SEQ:
                continue
            before = i >= 4 and not line[i - 4 : i].any()
            after = i + 11 <= n and not line[i + 7 : i + 11].any()
            if before or after:
                count += 1
    return count * 40


def _penalty(modules: np.ndarray) -> int:
    m = modules.astype(np.int8)
    score = _run_penalty(m) + _run_penalty(m.T)
    blocks = (m[:-1, :-1] == m[1:, :-1]) & (m[:-1, :-1] == m[:-1, 1:]) & (m[:-1, :-1] == m[1:, 1:])
    score += 3 * int(blocks.sum())
    score += _finder_penalty(m) + _finder_penalty(m.T)
    dark_pct = 100.0 * m.sum() / m.size
    score += 10 * int(abs(dark_pct - 50) // 5)
    return score


def encode_qr(payload: bytes, ecc_level: str = "H") -> QrSymbol:
    """Encode payload bytes at the smallest version that fits.

    Mask selection follows the standard penalty rules; ties resolve to the
    lowest mask id so output is deterministic.
    """
    if isinstance(payload, str):
        payload = payload.encode("utf-8")
    version = smallest_version(len(payload), ecc_level)
    codewords = _bit_stream(payload, version, ecc_level)
    final = _interleave(codewords, version, ecc_level)

    base, _, coords = _function_layout(version)
    data_bits = np.zeros(len(coords), dtype=np.int8)
    for i in range(len(final) * 8):
        if (final[i // 8] >> (7 - i % 8)) & 1:
            data_bits[i] = 1

    best = None
    for mask_id, mask_fn in enumerate(MASK_FUNCS):
        m = base.copy()
        for bit, (r, c) in zip(data_bits, coords):
            m[r, c] = bit ^ (1 if mask_fn(r, c) else 0)
        _place_format(m, ecc_level, mask_id)
        if version >= 7:
            _place_version(m, version)
        score = _penalty(m)
        if best is None or score < best[0]:
            best = (score, mask_id, m)

    _, mask_id, matrix = best
    return QrSymbol(
        version=version,
        ecc_level=ecc_level,
        mask_id=mask_id,
        modules=matrix.astype(bool),
        data_coords=coords,
        payload=bytes(payload),
    )
