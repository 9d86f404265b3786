"""Model 2 symbol constants: ECC block structure, alignment grid, format bits.

Block table entries are (ec_codewords_per_block, ((n_blocks, data_codewords), ...)).
Every entry satisfies sum(data) + ec*blocks == TOTAL_CODEWORDS[version]; the
test suite re-derives the totals from matrix geometry as an independent check.
"""

from __future__ import annotations

TOTAL_CODEWORDS = {
    1: 26, 2: 44, 3: 70, 4: 100, 5: 134, 6: 172, 7: 196, 8: 242, 9: 292,
    10: 346, 11: 404, 12: 466, 13: 532, 14: 581, 15: 655, 16: 733, 17: 815,
    18: 901, 19: 991, 20: 1085, 21: 1156, 22: 1258, 23: 1364, 24: 1474,
    25: 1588, 26: 1706, 27: 1828, 28: 1921, 29: 2051, 30: 2185, 31: 2323,
    32: 2465, 33: 2611, 34: 2761, 35: 2876, 36: 3034, 37: 3196, 38: 3362,
    39: 3532, 40: 3706,
}

# fmt: off
ECC_BLOCKS = {
    (1, "L"): (7, ((1, 19),)),   (1, "M"): (10, ((1, 16),)),
    (1, "Q"): (13, ((1, 13),)),  (1, "H"): (17, ((1, 9),)),
    (2, "L"): (10, ((1, 34),)),  (2, "M"): (16, ((1, 28),)),
    (2, "Q"): (22, ((1, 22),)),  (2, "H"): (28, ((1, 16),)),
    (3, "L"): (15, ((1, 55),)),  (3, "M"): (26, ((1, 44),)),
    (3, "Q"): (18, ((2, 17),)),  (3, "H"): (22, ((2, 13),)),
    (4, "L"): (20, ((1, 80),)),  (4, "M"): (18, ((2, 32),)),
    (4, "Q"): (26, ((2, 24),)),  (4, "H"): (16, ((4, 9),)),
    (5, "L"): (26, ((1, 108),)), (5, "M"): (24, ((2, 43),)),
    (5, "Q"): (18, ((2, 15), (2, 16))), (5, "H"): (22, ((2, 11), (2, 12))),
    (6, "L"): (18, ((2, 68),)),  (6, "M"): (16, ((4, 27),)),
    (6, "Q"): (24, ((4, 19),)),  (6, "H"): (28, ((4, 15),)),
    (7, "L"): (20, ((2, 78),)),  (7, "M"): (18, ((4, 31),)),
    (7, "Q"): (18, ((2, 14), (4, 15))), (7, "H"): (26, ((4, 13), (1, 14))),
    (8, "L"): (24, ((2, 97),)),  (8, "M"): (22, ((2, 38), (2, 39))),
    (8, "Q"): (22, ((4, 18), (2, 19))), (8, "H"): (26, ((4, 14), (2, 15))),
    (9, "L"): (30, ((2, 116),)), (9, "M"): (22, ((3, 36), (2, 37))),
    (9, "Q"): (20, ((4, 16), (4, 17))), (9, "H"): (24, ((4, 12), (4, 13))),
    (10, "L"): (18, ((2, 68), (2, 69))), (10, "M"): (26, ((4, 43), (1, 44))),
    (10, "Q"): (24, ((6, 19), (2, 20))), (10, "H"): (28, ((6, 15), (2, 16))),
    (11, "L"): (20, ((4, 81),)), (11, "M"): (30, ((1, 50), (4, 51))),
    (11, "Q"): (28, ((4, 22), (4, 23))), (11, "H"): (24, ((3, 12), (8, 13))),
    (12, "L"): (24, ((2, 92), (2, 93))), (12, "M"): (22, ((6, 36), (2, 37))),
    (12, "Q"): (26, ((4, 20), (6, 21))), (12, "H"): (28, ((7, 14), (4, 15))),
    (13, "L"): (26, ((4, 107),)), (13, "M"): (22, ((8, 37), (1, 38))),
    (13, "Q"): (24, ((8, 20), (4, 21))), (13, "H"): (22, ((12, 11), (4, 12))),
    (14, "L"): (30, ((3, 115), (1, 116))), (14, "M"): (24, ((4, 40), (5, 41))),
    (14, "Q"): (20, ((11, 16), (5, 17))), (14, "H"): (24, ((11, 12), (5, 13))),
    (15, "L"): (22, ((5, 87), (1, 88))), (15, "M"): (24, ((5, 41), (5, 42))),
    (15, "Q"): (30, ((5, 24), (7, 25))), (15, "H"): (24, ((11, 12), (7, 13))),
    (16, "L"): (24, ((5, 98), (1, 99))), (16, "M"): (28, ((7, 45), (3, 46))),
    (16, "Q"): (24, ((15, 19), (2, 20))), (16, "H"): (30, ((3, 15), (13, 16))),
    (17, "L"): (28, ((1, 107), (5, 108))), (17, "M"): (28, ((10, 46), (1, 47))),
    (17, "Q"): (28, ((1, 22), (15, 23))), (17, "H"): (28, ((2, 14), (17, 15))),
    (18, "L"): (30, ((5, 120), (1, 121))), (18, "M"): (26, ((9, 43), (4, 44))),
    (18, "Q"): (28, ((17, 22), (1, 23))), (18, "H"): (28, ((2, 14), (19, 15))),
    (19, "L"): (28, ((3, 113), (4, 114))), (19, "M"): (26, ((3, 44), (11, 45))),
    (19, "Q"): (26, ((17, 21), (4, 22))), (19, "H"): (26, ((9, 13), (16, 14))),
    (20, "L"): (28, ((3, 107), (5, 108))), (20, "M"): (26, ((3, 41), (13, 42))),
    (20, "Q"): (30, ((15, 24), (5, 25))), (20, "H"): (28, ((15, 15), (10, 16))),
    (21, "L"): (28, ((4, 116), (4, 117))), (21, "M"): (26, ((17, 42),)),
    (21, "Q"): (28, ((17, 22), (6, 23))), (21, "H"): (30, ((19, 16), (6, 17))),
    (22, "L"): (28, ((2, 111), (7, 112))), (22, "M"): (28, ((17, 46),)),
    (22, "Q"): (30, ((7, 24), (16, 25))), (22, "H"): (24, ((34, 13),)),
    (23, "L"): (30, ((4, 121), (5, 122))), (23, "M"): (28, ((4, 47), (14, 48))),
    (23, "Q"): (30, ((11, 24), (14, 25))), (23, "H"): (30, ((16, 15), (14, 16))),
    (24, "L"): (30, ((6, 117), (4, 118))), (24, "M"): (28, ((6, 45), (14, 46))),
    (24, "Q"): (30, ((11, 24), (16, 25))), (24, "H"): (30, ((30, 16), (2, 17))),
    (25, "L"): (26, ((8, 106), (4, 107))), (25, "M"): (28, ((8, 47), (13, 48))),
    (25, "Q"): (30, ((7, 24), (22, 25))), (25, "H"): (30, ((22, 15), (13, 16))),
    (26, "L"): (28, ((10, 114), (2, 115))), (26, "M"): (28, ((19, 46), (4, 47))),
    (26, "Q"): (28, ((28, 22), (6, 23))), (26, "H"): (30, ((33, 16), (4, 17))),
    (27, "L"): (30, ((8, 122), (4, 123))), (27, "M"): (28, ((22, 45), (3, 46))),
    (27, "Q"): (30, ((8, 23), (26, 24))), (27, "H"): (30, ((12, 15), (28, 16))),
    (28, "L"): (30, ((3, 117), (10, 118))), (28, "M"): (28, ((3, 45), (23, 46))),
    (28, "Q"): (30, ((4, 24), (31, 25))), (28, "H"): (30, ((11, 15), (31, 16))),
    (29, "L"): (30, ((7, 116), (7, 117))), (29, "M"): (28, ((21, 45), (7, 46))),
    (29, "Q"): (30, ((1, 23), (37, 24))), (29, "H"): (30, ((19, 15), (26, 16))),
    (30, "L"): (30, ((5, 115), (10, 116))), (30, "M"): (28, ((19, 47), (10, 48))),
    (30, "Q"): (30, ((15, 24), (25, 25))), (30, "H"): (30, ((23, 15), (25, 16))),
    (31, "L"): (30, ((13, 115), (3, 116))), (31, "M"): (28, ((2, 46), (29, 47))),
    (31, "Q"): (30, ((42, 24), (1, 25))), (31, "H"): (30, ((23, 15), (28, 16))),
    (32, "L"): (30, ((17, 115),)), (32, "M"): (28, ((10, 46), (23, 47))),
    (32, "Q"): (30, ((10, 24), (35, 25))), (32, "H"): (30, ((19, 15), (35, 16))),
    (33, "L"): (30, ((17, 115), (1, 116))), (33, "M"): (28, ((14, 46), (21, 47))),
    (33, "Q"): (30, ((29, 24), (19, 25))), (33, "H"): (30, ((11, 15), (46, 16))),
    (34, "L"): (30, ((13, 115), (6, 116))), (34, "M"): (28, ((14, 46), (23, 47))),
    (34, "Q"): (30, ((44, 24), (7, 25))), (34, "H"): (30, ((59, 16), (1, 17))),
    (35, "L"): (30, ((12, 121), (7, 122))), (35, "M"): (28, ((12, 47), (26, 48))),
    (35, "Q"): (30, ((39, 24), (14, 25))), (35, "H"): (30, ((22, 15), (41, 16))),
    (36, "L"): (30, ((6, 121), (14, 122))), (36, "M"): (28, ((6, 47), (34, 48))),
    (36, "Q"): (30, ((46, 24), (10, 25))), (36, "H"): (30, ((2, 15), (64, 16))),
    (37, "L"): (30, ((17, 122), (4, 123))), (37, "M"): (28, ((29, 46), (14, 47))),
    (37, "Q"): (30, ((49, 24), (10, 25))), (37, "H"): (30, ((24, 15), (46, 16))),
    (38, "L"): (30, ((4, 122), (18, 123))), (38, "M"): (28, ((13, 46), (32, 47))),
    (38, "Q"): (30, ((48, 24), (14, 25))), (38, "H"): (30, ((42, 15), (32, 16))),
    (39, "L"): (30, ((20, 117), (4, 118))), (39, "M"): (28, ((40, 47), (7, 48))),
    (39, "Q"): (30, ((43, 24), (22, 25))), (39, "H"): (30, ((10, 15), (67, 16))),
    (40, "L"): (30, ((19, 118), (6, 119))), (40, "M"): (28, ((18, 47), (31, 48))),
    (40, "Q"): (30, ((34, 24), (34, 25))), (40, "H"): (30, ((20, 15), (61, 16))),
}

ALIGNMENT_POSITIONS = {
    1: (), 2: (6, 18), 3: (6, 22), 4: (6, 26), 5: (6, 30), 6: (6, 34),
    7: (6, 22, 38), 8: (6, 24, 42), 9: (6, 26, 46), 10: (6, 28, 50),
    11: (6, 30, 54), 12: (6, 32, 58), 13: (6, 34, 62), 14: (6, 26, 46, 66),
    15: (6, 26, 48, 70), 16: (6, 26, 50, 74), 17: (6, 30, 54, 78),
    18: (6, 30, 56, 82), 19: (6, 30, 58, 86), 20: (6, 34, 62, 90),
    21: (6, 28, 50, 72, 94), 22: (6, 26, 50, 74, 98), 23: (6, 30, 54, 78, 102),
    24: (6, 28, 54, 80, 106), 25: (6, 32, 58, 84, 110), 26: (6, 30, 58, 86, 114),
    27: (6, 34, 62, 90, 118), 28: (6, 26, 50, 74, 98, 122),
    29: (6, 30, 54, 78, 102, 126), 30: (6, 26, 52, 78, 104, 130),
    31: (6, 30, 56, 82, 108, 134), 32: (6, 34, 60, 86, 112, 138),
    33: (6, 30, 58, 86, 114, 142), 34: (6, 34, 62, 90, 118, 146),
    35: (6, 30, 54, 78, 102, 126, 150), 36: (6, 24, 50, 76, 102, 128, 154),
    37: (6, 28, 54, 80, 106, 132, 158), 38: (6, 32, 58, 84, 110, 136, 162),
    39: (6, 26, 54, 82, 110, 138, 166), 40: (6, 30, 58, 86, 114, 142, 170),
}
# fmt: on

ECC_LEVELS = ("L", "M", "Q", "H")

# 2-bit level indicator inside the format information
ECC_LEVEL_BITS = {"L": 0b01, "M": 0b00, "Q": 0b11, "H": 0b10}

_FORMAT_GEN = 0b10100110111  # BCH(15,5)
_FORMAT_MASK = 0b101010000010010
_VERSION_GEN = 0b1111100100101  # BCH(18,6)


def data_codewords(version: int, level: str) -> int:
    ec, blocks = ECC_BLOCKS[(version, level)]
    return sum(n * size for n, size in blocks)


def byte_mode_capacity(version: int, level: str) -> int:
    """Maximum payload bytes in byte mode (mode + count indicator deducted)."""
    bits = data_codewords(version, level) * 8
    count_bits = 8 if version <= 9 else 16
    return (bits - 4 - count_bits) // 8


def _bch_remainder(value: int, generator: int, total_bits: int, data_bits: int) -> int:
    rem = value << (total_bits - data_bits)
    gen_degree = generator.bit_length() - 1
    for shift in range(total_bits - 1, gen_degree - 1, -1):
        if rem & (1 << shift):
            rem ^= generator << (shift - gen_degree)
    return rem


def format_bits(level: str, mask_id: int) -> int:
    """15-bit format information word, BCH-protected and masked."""
    data = (ECC_LEVEL_BITS[level] << 3) | mask_id
    rem = _bch_remainder(data, _FORMAT_GEN, 15, 5)
    return ((data << 10) | rem) ^ _FORMAT_MASK


def version_bits(version: int) -> int:
    """18-bit version information word (versions 7 and up)."""
    rem = _bch_remainder(version, _VERSION_GEN, 18, 6)
    return (version << 12) | rem
