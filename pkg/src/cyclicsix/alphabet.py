"""Vertex and face type alphabets, wildcard characters and their match sets.

Concrete classes are stored as small integers whose order follows the ASCII
order of the characters that print them, so comparing index tuples is the
same as comparing encoded strings.  Match sets are bitmasks over those
indices.
"""

from __future__ import annotations

from enum import Enum

# index -> printed character
VERTEX_CLASSES = "456otuvw"
FACE_CLASSES = "HOPQtx"

V4, V5, V6, VO, VT, VU, VV, VW = range(8)
FH, FO, FP, FQ, FT, FX = range(6)

ALL_VERTICES = (1 << len(VERTEX_CLASSES)) - 1
ALL_FACES = (1 << len(FACE_CLASSES)) - 1

THREE_VERTICES = (1 << VO) | (1 << VT)
TRIANGLE_RELAYS = (1 << VV) | (1 << VU) | (1 << VW)
FOUR_VERTICES = (1 << V4) | TRIANGLE_RELAYS
TRIANGLES = (1 << FT) | (1 << FO) | (1 << FX)

# degree bucket of each concrete vertex class (6 stands for ">= 6")
VERTEX_DEGREE = {V4: 4, V5: 5, V6: 6, VO: 3, VT: 3, VU: 4, VV: 4, VW: 4}
FACE_SIZE = {FH: 6, FO: 3, FP: 5, FQ: 4, FT: 3, FX: 3}
SIZE_CLASS = {4: FQ, 5: FP, 6: FH}


class Semantics(str, Enum):
    """How the vertex pattern character ``4`` is read."""

    INCLUSIVE4 = "inclusive4"  # '4' is any 4-vertex, including v/u/w
    STRICT4 = "strict4"  # '4' is a plain 4-vertex only

    def __str__(self) -> str:
        return self.value


def _bits(*indices: int) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


_VERTEX_CHARS = {
    "t": _bits(VT),
    "o": _bits(VO),
    "v": _bits(VV),
    "u": _bits(VU),
    "w": _bits(VW),
    "5": _bits(V5),
    "6": _bits(V6),
    "3": THREE_VERTICES,
    "x": ALL_VERTICES & ~THREE_VERTICES,
    "+": _bits(V5, V6),
    "*": ALL_VERTICES,
}

FACE_CHARS = {
    "t": _bits(FT),
    "O": _bits(FO),
    "x": _bits(FX),
    "Q": _bits(FQ),
    "P": _bits(FP),
    "H": _bits(FH),
    "3": _bits(FT, FO),
    "T": TRIANGLES,
    "F": _bits(FQ, FP, FH),
    "*": ALL_FACES,
}

VERTEX_PATTERN_CHARS = "tovuw4563x+*"
FACE_PATTERN_CHARS = "tOxQPH3TF*"


def vertex_mask(char: str, semantics: Semantics = Semantics.INCLUSIVE4) -> int:
    """Match set of a vertex pattern character as a bitmask."""
    if char == "4":
        if Semantics(semantics) is Semantics.STRICT4:
            return _bits(V4)
        return FOUR_VERTICES
    try:
        return _VERTEX_CHARS[char]
    except KeyError:
        raise ValueError(f"not a vertex pattern character: {char!r}") from None


def face_mask(char: str) -> int:
    """Match set of a face pattern character as a bitmask."""
    try:
        return FACE_CHARS[char]
    except KeyError:
        raise ValueError(f"not a face pattern character: {char!r}") from None


def members(mask: int, alphabet: str) -> str:
    """Characters of the concrete classes contained in ``mask``."""
    return "".join(c for i, c in enumerate(alphabet) if mask >> i & 1)


def vertex_class(char: str) -> int:
    """Concrete vertex class printed as ``char`` ('4' is the plain 4-vertex)."""
    i = VERTEX_CLASSES.find(char)
    if i < 0 or len(char) != 1:
        raise ValueError(f"not a concrete vertex class: {char!r}")
    return i


def face_class(char: str) -> int:
    i = FACE_CLASSES.find(char)
    if i < 0 or len(char) != 1:
        raise ValueError(f"not a concrete face class: {char!r}")
    return i
