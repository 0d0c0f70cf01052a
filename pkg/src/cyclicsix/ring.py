"""Ring descriptors: the vertex and adjacent-face types around one 5- or 6-face."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .alphabet import (
    FACE_CLASSES,
    FACE_SIZE,
    FH,
    FO,
    FT,
    FX,
    TRIANGLES,
    VERTEX_CLASSES,
    VO,
    VT,
    VU,
    VV,
    VW,
)

RING_PREFIX = {5: "P", 6: "H"}
RING_SIZE = {"P": 5, "H": 6}


class Violation(NamedTuple):
    constraint: str
    position: int

    def __str__(self) -> str:
        return f"{self.constraint} at slot {self.position}"


@dataclass(frozen=True, order=True)
class RingDescriptor:
    """Concrete classes around a face; ``ftypes[i]`` lies across edge v_i v_{i+1}."""

    vtypes: tuple[int, ...]
    ftypes: tuple[int, ...]

    def __post_init__(self):
        if len(self.vtypes) != len(self.ftypes) or len(self.vtypes) not in RING_PREFIX:
            raise ValueError(f"ring must have 5 or 6 slots, got {len(self.vtypes)}")

    @property
    def size(self) -> int:
        return len(self.vtypes)

    def encode(self) -> str:
        body = "".join(VERTEX_CLASSES[v] + FACE_CLASSES[f] for v, f in zip(self.vtypes, self.ftypes))
        return f"{RING_PREFIX[self.size]}:{body}"

    __str__ = encode

    @classmethod
    def decode(cls, text: str) -> "RingDescriptor":
        """Parse a fully padded concrete encoding such as ``H:tHoQ4P5H6Hux``."""
        text = text.strip()
        if len(text) < 2 or text[1] != ":" or text[0] not in RING_SIZE:
            raise ValueError(f"ring descriptor must start with 'P:' or 'H:': {text!r}")
        d = RING_SIZE[text[0]]
        body = text[2:]
        if len(body) != 2 * d:
            raise ValueError(f"ring descriptor {text!r} needs exactly {2 * d} body characters")
        vs, fs = [], []
        for i, ch in enumerate(body):
            alphabet = VERTEX_CLASSES if i % 2 == 0 else FACE_CLASSES
            k = alphabet.find(ch)
            if k < 0:
                kind = "vertex" if i % 2 == 0 else "face"
                raise ValueError(f"illegal concrete {kind} class {ch!r} at position {i + 2} of {text!r}")
            (vs if i % 2 == 0 else fs).append(k)
        return cls(tuple(vs), tuple(fs))

    def images(self, reflect: bool = True) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        return symmetry_images(self.vtypes, self.ftypes, reflect)

    def rotated(self, r: int) -> "RingDescriptor":
        d = self.size
        return RingDescriptor(
            tuple(self.vtypes[(j + r) % d] for j in range(d)),
            tuple(self.ftypes[(j + r) % d] for j in range(d)),
        )

    def reflected(self) -> "RingDescriptor":
        d = self.size
        return RingDescriptor(
            tuple(self.vtypes[-j % d] for j in range(d)),
            tuple(self.ftypes[(-j - 1) % d] for j in range(d)),
        )


def symmetry_permutations(d: int, reflect: bool = True) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Index maps (vertex source, face source) for every rotation and reflection.

    Image slot j takes its vertex from ``vsrc[j]`` and its face from ``fsrc[j]``.
    Reflection reverses the vertex order and shifts faces so each face stays on
    its edge.
    """
    perms = []
    for r in range(d):
        perms.append((tuple((j + r) % d for j in range(d)), tuple((j + r) % d for j in range(d))))
    if reflect:
        for r in range(d):
            perms.append((tuple((r - j) % d for j in range(d)), tuple((r - j - 1) % d for j in range(d))))
    return perms


_PERMS = {(d, refl): symmetry_permutations(d, refl) for d in (5, 6) for refl in (True, False)}


def symmetry_images(vs, fs, reflect: bool = True):
    return [
        (tuple(vs[i] for i in vsrc), tuple(fs[i] for i in fsrc))
        for vsrc, fsrc in _PERMS[len(vs), reflect]
    ]


def canonical_key(vs, fs, reflect: bool = True) -> tuple[int, ...]:
    """Least slot-code tuple over the symmetry group (slot code = 6*vertex + face)."""
    best = None
    for vsrc, fsrc in _PERMS[len(vs), reflect]:
        key = tuple(6 * vs[a] + fs[b] for a, b in zip(vsrc, fsrc))
        if best is None or key < best:
            best = key
    return best


def key_to_ring(key: tuple[int, ...]) -> RingDescriptor:
    return RingDescriptor(tuple(c // 6 for c in key), tuple(c % 6 for c in key))


def canonical_ring(ring: RingDescriptor, reflect: bool = True) -> RingDescriptor:
    return key_to_ring(canonical_key(ring.vtypes, ring.ftypes, reflect))


def canonical_form(ring: RingDescriptor, reflect: bool = True) -> str:
    """Lexicographically least encoding of ``ring`` over rotations (and reflections)."""
    return canonical_ring(ring, reflect).encode()


# -- consistency ---------------------------------------------------------

def vertex_violation(fprev: int | None, v: int, fnext: int | None) -> str | None:
    """Constraint broken by vertex class ``v`` between the two given faces.

    Either face may be ``None`` when it is not known; constraints that need the
    unknown face are then skipped.
    """
    known = [f for f in (fprev, fnext) if f is not None]
    if v in (VV, VU, VW):
        # the off-face triangle shares an edge with each flanking face
        if any(f != FH for f in known):
            return "C2"
        return None
    if v in (VO, VT):
        tri = [f for f in known if TRIANGLES >> f & 1]
        if len(known) == 2 and tri:
            if len(tri) == 2 or FH not in known:
                return "C3"
        for f in tri:
            if v == VT and f != FX:
                return "C4"
            if v == VO and f not in (FT, FO):
                return "C5"
    return None


def facial_degree_ok(d: int, fprev: int, v: int, fnext: int) -> bool:
    """A 3-vertex needs incident face sizes summing to at least 15."""
    if v in (VO, VT):
        return d + FACE_SIZE[fprev] + FACE_SIZE[fnext] >= 15
    return True


def consistency_check(ring: RingDescriptor, facial_degree: bool = False) -> Violation | None:
    """First structural constraint the ring breaks, or ``None`` when consistent.

    C1  a 5-face has no 3-face neighbours
    C2  v/u/w vertices are flanked by two 6-faces
    C3  a 3-vertex touches at most one 3-face, and then its other face is a 6-face
    C4  a t-vertex next to a 3-face sees an x tip (its off-face neighbour)
    C5  an o-vertex next to a 3-face sees a t or O tip
    C6  4-, 5- and 6-vertices put no constraint on adjacent 3-face tips
    C7  (opt-in) minimum facial degree 9 for 3-vertices
    """
    d = ring.size
    vs, fs = ring.vtypes, ring.ftypes
    if d == 5:
        for i, f in enumerate(fs):
            if TRIANGLES >> f & 1:
                return Violation("C1", i)
    for i in range(d):
        bad = vertex_violation(fs[i - 1], vs[i], fs[i])
        if bad:
            return Violation(bad, i)
    if facial_degree:
        for i in range(d):
            if not facial_degree_ok(d, fs[i - 1], vs[i], fs[i]):
                return Violation("C7", i)
    return None
