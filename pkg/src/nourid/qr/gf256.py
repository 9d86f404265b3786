"""GF(256) arithmetic and Reed-Solomon codeword generation.

Field built on the QR polynomial x^8 + x^4 + x^3 + x^2 + 1 (0x11d) with
generator element 2. Exp table is doubled so products of two log values
index without an explicit mod 255.
"""

from __future__ import annotations

from functools import lru_cache

_PRIMITIVE = 0x11D

EXP = [0] * 512
LOG = [0] * 256

_x = 1
for _i in range(255):
    EXP[_i] = _x
    LOG[_x] = _i
    _x <<= 1
    if _x & 0x100:
        _x ^= _PRIMITIVE
for _i in range(255, 512):
    EXP[_i] = EXP[_i - 255]


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return EXP[LOG[a] + LOG[b]]


def poly_mul(p: list[int], q: list[int]) -> list[int]:
    out = [0] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        if pi == 0:
            continue
        for j, qj in enumerate(q):
            if qj:
                out[i + j] ^= EXP[LOG[pi] + LOG[qj]]
    return out


@lru_cache(maxsize=None)
def generator_poly(n_ecc: int) -> tuple[int, ...]:
    """Product of (x - alpha^i) for i in 0..n_ecc-1, highest degree first."""
    g = [1]
    for i in range(n_ecc):
        g = poly_mul(g, [1, EXP[i]])
    return tuple(g)


def rs_encode(data: bytes | list[int], n_ecc: int) -> bytes:
    """Reed-Solomon ECC codewords for one block (remainder of division)."""
    gen = generator_poly(n_ecc)
    rem = [0] * n_ecc
    for byte in data:
        factor = byte ^ rem[0]
        rem = rem[1:] + [0]
        if factor:
            lf = LOG[factor]
            for i in range(n_ecc):
                g = gen[i + 1]
                if g:
                    rem[i] ^= EXP[lf + LOG[g]]
    return bytes(rem)
