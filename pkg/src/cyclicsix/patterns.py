"""The configuration-string DSL: parsing, wildcard matching, closure and symmetry."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

from .alphabet import (
    FACE_CHARS,
    FACE_CLASSES,
    FACE_PATTERN_CHARS,
    VERTEX_CLASSES,
    VERTEX_PATTERN_CHARS,
    Semantics,
    face_mask,
    vertex_mask,
)
from .ring import RING_SIZE, RingDescriptor, symmetry_permutations


class PatternError(ValueError):
    """Malformed configuration or rule string; ``position`` indexes the full text."""

    def __init__(self, message: str, text: str, position: int | None = None):
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}: {text!r}")
        self.text = text
        self.position = position


@dataclass(frozen=True, order=True)
class FacePattern:
    """A P: or H: pattern; vertex slot i is followed by the face across v_i v_{i+1}."""

    kind: str
    vchars: str
    fchars: str

    def __post_init__(self):
        k = RING_SIZE.get(self.kind)
        if k is None or len(self.vchars) != k or len(self.fchars) != k:
            raise ValueError(f"bad {self.kind!r} pattern shape")

    @property
    def size(self) -> int:
        return len(self.vchars)

    def text(self) -> str:
        return f"{self.kind}:" + "".join(v + f for v, f in zip(self.vchars, self.fchars))

    __str__ = text

    def short_text(self) -> str:
        """Encoding with trailing stars dropped."""
        return self.text().rstrip("*")

    def with_vertex(self, i: int, char: str) -> "FacePattern":
        vs = self.vchars[:i] + char + self.vchars[i + 1:]
        return FacePattern(self.kind, vs, self.fchars)

    def images(self, reflect: bool = True) -> list["FacePattern"]:
        out = []
        for vsrc, fsrc in symmetry_permutations(self.size, reflect):
            out.append(FacePattern(
                self.kind,
                "".join(self.vchars[i] for i in vsrc),
                "".join(self.fchars[i] for i in fsrc),
            ))
        return out

    def canonical(self, reflect: bool = True) -> "FacePattern":
        """Symmetry image with the least encoding."""
        return min(self.images(reflect), key=FacePattern.text)


@dataclass(frozen=True, order=True)
class TRulePattern:
    """Linear window v1 f1 v2 f2 v3 f3 v4 along a 6-face; f2 is the receiving 3-face."""

    vchars: str
    fchars: str

    def __post_init__(self):
        if len(self.vchars) != 4 or len(self.fchars) != 3:
            raise ValueError("T pattern needs 4 vertex and 3 face slots")

    def window(self) -> str:
        return "".join(a + b for a, b in zip(self.vchars, self.fchars + " ")).rstrip()

    def text(self) -> str:
        return "T:" + self.window()

    __str__ = text


def parse_pattern(text: str) -> FacePattern | TRulePattern:
    """Parse ``P:``/``H:``/``T:`` strings; P/H bodies are padded with ``*``."""
    raw = text
    text = text.strip()
    if len(text) < 2 or text[1] != ":" or text[0] not in "PHT":
        raise PatternError("unknown prefix (expected 'P:', 'H:' or 'T:')", raw, 0)
    kind, body = text[0], text[2:]
    for i, ch in enumerate(body):
        legal = VERTEX_PATTERN_CHARS if i % 2 == 0 else FACE_PATTERN_CHARS
        if ch not in legal:
            what = "vertex" if i % 2 == 0 else "face"
            raise PatternError(f"illegal {what} character {ch!r}", raw, i + 2)
    if kind == "T":
        if len(body) != 7:
            raise PatternError(f"T pattern body must have exactly 7 characters, got {len(body)}", raw)
        return TRulePattern(body[0::2], body[1::2])
    k = RING_SIZE[kind]
    if len(body) > 2 * k:
        raise PatternError(f"{kind} pattern body longer than {2 * k} characters", raw, 2 + 2 * k)
    body = body.ljust(2 * k, "*")
    return FacePattern(kind, body[0::2], body[1::2])


def parse_face_pattern(text: str) -> FacePattern:
    pat = parse_pattern(text)
    if not isinstance(pat, FacePattern):
        raise PatternError("expected a P: or H: pattern", text, 0)
    return pat


def char_matches(pattern_char: str, concrete, alphabet: str = "vertex",
                 semantics: Semantics = Semantics.INCLUSIVE4) -> bool:
    """Whether a concrete class (index or printed char) lies in the char's match set."""
    if alphabet == "vertex":
        if isinstance(concrete, str):
            concrete = VERTEX_CLASSES.index(concrete)
        return bool(vertex_mask(pattern_char, semantics) >> concrete & 1)
    if alphabet == "face":
        if isinstance(concrete, str):
            concrete = FACE_CLASSES.index(concrete)
        return bool(face_mask(pattern_char) >> concrete & 1)
    raise ValueError(f"alphabet must be 'vertex' or 'face', not {alphabet!r}")


_CLOSURE = {"v": "vuw", "u": "uw"}


def closure_expand(config: FacePattern) -> set[FacePattern]:
    """All variants obtained by replacing v with u or w, and u with w, slot by slot."""
    choices = [_CLOSURE.get(c, c) for c in config.vchars]
    return {FacePattern(config.kind, "".join(vs), config.fchars) for vs in product(*choices)}


# -- compiled matching ---------------------------------------------------

@lru_cache(maxsize=None)
def pattern_masks(pattern: FacePattern, semantics: Semantics = Semantics.INCLUSIVE4):
    vm = tuple(vertex_mask(c, semantics) for c in pattern.vchars)
    fm = tuple(face_mask(c) for c in pattern.fchars)
    return vm, fm


@lru_cache(maxsize=None)
def compiled_images(pattern: FacePattern, semantics: Semantics = Semantics.INCLUSIVE4,
                    reflect: bool = True) -> tuple[tuple[tuple[int, int], ...], ...]:
    """Constraints the pattern puts on ring positions, one tuple per symmetry image.

    Each constraint is ``(seq, mask)`` where ``seq`` is 2*i for vertex i and
    2*i+1 for face i, sorted by ``seq``.  Wildcard-only slots are dropped and
    duplicate images removed.  A ring matches iff every constraint of some
    image holds.
    """
    vm, fm = pattern_masks(pattern, semantics)
    full_v, full_f = vertex_mask("*"), FACE_CHARS["*"]
    seen = set()
    out = []
    for vsrc, fsrc in symmetry_permutations(pattern.size, reflect):
        # image slot j reads ring vertex vsrc[j]; pattern slot j constrains it
        cons = []
        for j in range(pattern.size):
            if vm[j] != full_v:
                cons.append((2 * vsrc[j], vm[j]))
            if fm[j] != full_f:
                cons.append((2 * fsrc[j] + 1, fm[j]))
        cons = tuple(sorted(cons))
        if cons not in seen:
            seen.add(cons)
            out.append(cons)
    return tuple(out)


def match_ring(config: FacePattern, ring: RingDescriptor,
               semantics: Semantics = Semantics.INCLUSIVE4, reflect: bool = True) -> bool:
    """True iff some rotation (or reflection) of ``ring`` satisfies every slot of ``config``."""
    if config.size != ring.size:
        return False
    seq = []
    for v, f in zip(ring.vtypes, ring.ftypes):
        seq.append(v)
        seq.append(f)
    for cons in compiled_images(config, semantics, reflect):
        if all(mask >> seq[pos] & 1 for pos, mask in cons):
            return True
    return False


def match_partial(config: FacePattern, vmasks, fmasks,
                  semantics: Semantics = Semantics.INCLUSIVE4, reflect: bool = True) -> bool:
    """Definite match on a partially known ring.

    Each slot holds the set of classes still possible.  The pattern matches
    only if every possibility satisfies it, so unknown slots are matched by
    ``*`` alone.
    """
    if config.size != len(vmasks):
        return False
    seq = []
    for v, f in zip(vmasks, fmasks):
        seq.append(v)
        seq.append(f)
    for cons in compiled_images(config, semantics, reflect):
        if all(seq[pos] & ~mask == 0 for pos, mask in cons):
            return True
    return False
