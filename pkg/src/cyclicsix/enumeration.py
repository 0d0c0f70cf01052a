"""Finite local neighbourhoods: face rings, triangle contexts and vertex stars.

Rings are concrete.  Triangle contexts and vertex stars describe the faces
around them as *partial* rings whose slots hold bitmasks of the classes
still possible; a reducible configuration excludes such a descriptor only
when it matches every completion.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator

from .alphabet import (
    ALL_FACES,
    ALL_VERTICES,
    FACE_CLASSES,
    FH,
    FO,
    FP,
    FQ,
    FT,
    FX,
    SIZE_CLASS,
    TRIANGLE_RELAYS,
    TRIANGLES,
    V4,
    V5,
    V6,
    VERTEX_CLASSES,
    VO,
    VT,
    VU,
    VV,
    VW,
    Semantics,
)
from .patterns import FacePattern, closure_expand, compiled_images, match_partial
from .ring import RingDescriptor, canonical_key, facial_degree_ok, vertex_violation


def expand_exclusions(exclusions: Iterable[FacePattern]) -> tuple[FacePattern, ...]:
    seen = set()
    for config in exclusions:
        seen |= closure_expand(config)
    return tuple(sorted(seen))


# -- face rings ----------------------------------------------------------

def _allowed_tables(d: int, facial_degree: bool):
    nv, nf = len(VERTEX_CLASSES), len(FACE_CLASSES)
    left = [[vertex_violation(fp, v, None) is None for v in range(nv)] for fp in range(nf)]
    full = [[[vertex_violation(fp, v, fn) is None and (not facial_degree or facial_degree_ok(d, fp, v, fn))
              for fn in range(nf)] for v in range(nv)] for fp in range(nf)]
    return left, full


def ring_partitions(d: int, depth: int = 4) -> list[tuple[int, ...]]:
    """Slot prefixes (v0, f0, v1, ...) splitting the ring space into work units, in order."""
    faces = [f for f in range(len(FACE_CLASSES)) if d == 6 or not TRIANGLES >> f & 1]
    verts = range(len(VERTEX_CLASSES))
    return list(product(*[verts if k % 2 == 0 else faces for k in range(depth)]))


def enumerate_rings(d: int, exclusions: Iterable[FacePattern] = (),
                    semantics: Semantics = Semantics.INCLUSIVE4, reflect: bool = True,
                    facial_degree: bool = False, partition: tuple[int, ...] | None = None
                    ) -> Iterator[RingDescriptor]:
    """Canonical consistent d-rings not matched by any exclusion, in lexicographic order.

    Slots are filled v0 f0 v1 f1 ... by depth-first search.  Consistency,
    exclusion and symmetry-orderliness are tested as soon as the slots they
    read are filled.  Each yielded ring is its own canonical image, so the
    search order is the order of canonical encodings.  ``partition`` fixes
    the first slots to one value of :func:`ring_partitions`.
    """
    if d not in (5, 6):
        raise ValueError("rings have size 5 or 6")
    configs = expand_exclusions(exclusions)
    for prefix in ring_partitions(d, 2) if partition is None else [partition]:
        yield from _rings_with_prefix(d, prefix, configs, Semantics(semantics), reflect, facial_degree)


def _exclusion_checks(d: int, configs, semantics, reflect):
    """Compiled exclusion images bucketed by the last sequence slot they read."""
    checks = [[] for _ in range(2 * d)]
    for config in configs:
        if config.size != d:
            continue
        for cons in compiled_images(config, semantics, reflect):
            if not cons:
                return None  # matches every ring
            checks[cons[-1][0]].append(cons)
    return checks


def _rings_with_prefix(d, prefix, configs, semantics, reflect, facial_degree):
    checks = _exclusion_checks(d, configs, semantics, reflect)
    if checks is None:
        return
    left, full = _allowed_tables(d, facial_degree)
    faces = [f for f in range(len(FACE_CLASSES)) if d == 6 or not TRIANGLES >> f & 1]
    v0, f0 = prefix[0], prefix[1]
    if f0 not in faces:
        return
    fixed = len(prefix)
    verts = range(len(VERTEX_CLASSES))
    seq = [0] * (2 * d)
    vs = [0] * d
    fs = [0] * d
    out = []
    last = 2 * d - 1

    def excluded(k):
        for cons in checks[k]:
            for pos, mask in cons:
                if not mask >> seq[pos] & 1:
                    break
            else:
                return True
        return False

    def extend(k):
        i = k >> 1
        if k & 1 == 0:
            fp = fs[i - 1]
            for v in verts if k >= fixed else (prefix[k],):
                if v < v0 or not left[fp][v]:
                    continue
                # reflected image starting at v_i begins (v_i, f_{i-1})
                if reflect and v == v0 and fp < f0:
                    continue
                vs[i] = v
                seq[k] = v
                if checks[k] and excluded(k):
                    continue
                extend(k + 1)
        else:
            v = vs[i]
            for f in faces if k >= fixed else (prefix[k],):
                if f not in faces:
                    continue
                if not full[fs[i - 1]][v][f]:
                    continue
                if v == v0 and f < f0:
                    continue
                fs[i] = f
                seq[k] = f
                if k == last:
                    if not full[f][v0][f0] or (reflect and f < f0):
                        continue
                    if checks[k] and excluded(k):
                        continue
                    key = tuple(6 * a + b for a, b in zip(vs, fs))
                    if canonical_key(vs, fs, reflect) == key:
                        out.append(RingDescriptor(tuple(vs), tuple(fs)))
                    continue
                if checks[k] and excluded(k):
                    continue
                extend(k + 1)

    vs[0], fs[0] = v0, f0
    seq[0], seq[1] = v0, f0
    if checks[0] and excluded(0):
        return
    if checks[1] and excluded(1):
        return
    # vertex 0 is checked against f_{d-1} at the last slot; here only its right side
    if vertex_violation(None, v0, f0) is not None:
        return
    extend(2)
    yield from out


# -- partial rings -------------------------------------------------------

UNKNOWN_V = ALL_VERTICES
UNKNOWN_F = ALL_FACES
VUW = TRIANGLE_RELAYS
DEGREE_MASK = {3: (1 << VO) | (1 << VT), 4: (1 << V4) | VUW, 5: 1 << V5, 6: 1 << V6}


@dataclass(frozen=True)
class PartialRing:
    """A face of size 5 or 6 with slots given as class bitmasks."""

    vmasks: tuple[int, ...]
    fmasks: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.vmasks)

    def encode(self) -> str:
        body = []
        for vm, fm in zip(self.vmasks, self.fmasks):
            body.append(_mask_text(vm, VERTEX_CLASSES, UNKNOWN_V))
            body.append(_mask_text(fm, FACE_CLASSES, UNKNOWN_F))
        return ("P:" if self.size == 5 else "H:") + "".join(body)

    __str__ = encode


def _mask_text(mask, alphabet, full):
    if mask == full:
        return "?"
    chars = [c for i, c in enumerate(alphabet) if mask >> i & 1]
    return chars[0] if len(chars) == 1 else "[" + "".join(chars) + "]"


def partial_ring(d: int, known_v: dict[int, int], known_f: dict[int, int]) -> PartialRing:
    """Partial d-ring from known slot masks, with vertex masks pruned by C1-C5."""
    vm = [known_v.get(i, UNKNOWN_V) for i in range(d)]
    fm = [known_f.get(i, UNKNOWN_F) for i in range(d)]
    if d == 5:
        fm = [m & ~TRIANGLES for m in fm]
    for i in range(d):
        keep = 0
        for v in range(len(VERTEX_CLASSES)):
            if not vm[i] >> v & 1:
                continue
            if any(vertex_violation(a, v, b) is None
                   for a in _bits(fm[i - 1]) for b in _bits(fm[i])):
                keep |= 1 << v
        vm[i] = keep
    return PartialRing(tuple(vm), tuple(fm))


def _bits(mask):
    return [i for i in range(8) if mask >> i & 1]


def excluded_partial(rings: Iterable[PartialRing], configs, semantics, reflect=True) -> FacePattern | None:
    """First configuration that surely occurs on one of ``rings``."""
    for ring in rings:
        for config in configs:
            if config.size == ring.size and match_partial(config, ring.vmasks, ring.fmasks, semantics, reflect):
                return config
    return None


# -- triangle contexts ---------------------------------------------------

@dataclass(frozen=True, order=True)
class Corner:
    """One vertex of a 3-face whose three neighbouring faces are 6-faces.

    degree 3: ``far`` is the degree bucket of the neighbour off the triangle.
    degree 4: ``opposite`` is the size of the face g opposite the triangle;
    when g is a 3-face, ``prev``/``next`` are the degree buckets of its other
    two vertices (on the preceding and following hexagon).
    """

    degree: int
    far: int = 0
    opposite: int = 0
    prev: int = 0
    next: int = 0

    def mirrored(self) -> "Corner":
        return Corner(self.degree, self.far, self.opposite, self.next, self.prev)

    def code(self) -> str:
        if self.degree == 3:
            return f"3({self.far})"
        if self.degree == 4:
            if self.opposite == 3:
                return f"4(T{self.prev}{self.next})"
            return "4(" + FACE_CLASSES[SIZE_CLASS[self.opposite]] + ")"
        return str(self.degree)


CORNER_OPTIONS = (
    [Corner(3, far=b) for b in (3, 4, 5, 6)]
    + [Corner(4, opposite=3, prev=x, next=y) for x in (3, 4, 5, 6) for y in (3, 4, 5, 6)]
    + [Corner(4, opposite=s) for s in (4, 5, 6)]
    + [Corner(5), Corner(6)]
)


@dataclass(frozen=True, order=True)
class TriangleContext:
    """A 3-face A0 A1 A2 with hexagon H_i across edge A_i A_{i+1}."""

    corners: tuple[Corner, Corner, Corner]

    def encode(self) -> str:
        return "tri:" + ",".join(c.code() for c in self.corners)

    __str__ = encode

    def images(self):
        cs = self.corners
        out = []
        for r in range(3):
            out.append(tuple(cs[(j + r) % 3] for j in range(3)))
            out.append(tuple(cs[(r - j) % 3].mirrored() for j in range(3)))
        return out

    def canonical(self) -> "TriangleContext":
        return TriangleContext(min(self.images()))

    # classes of triangle vertices and tips as seen from a hexagon
    def vertex_class(self, i: int, toward: int) -> int:
        """Class of A_i relative to the hexagon on edge A_i A_toward."""
        c = self.corners[i]
        if c.degree == 3:
            other = 3 - i - toward
            return VO if self.corners[other].degree == 3 else VT
        return {4: V4, 5: V5, 6: V6}[c.degree]

    def tip_class(self, i: int) -> int:
        """Class of the triangle seen from the hexagon opposite A_i."""
        c = self.corners[i]
        if c.degree == 3:
            return FO if c.far == 3 else FT
        return FX

    def hexagon(self, i: int) -> PartialRing:
        """H_i as slots (outer, A_i, A_{i+1}, outer, ?, ?)."""
        j = (i + 1) % 3
        a, b = self.corners[i], self.corners[j]
        v1, f1 = _outer_next(a)
        f3, v4 = _outer_prev(b)
        return partial_ring(6, {
            0: v1,
            1: 1 << self.vertex_class(i, j),
            2: 1 << self.vertex_class(j, i),
            3: v4,
        }, {
            0: f1,
            1: 1 << self.tip_class(3 - i - j),
            2: f3,
        })

    def t_window(self, i: int) -> tuple[int, ...]:
        h = self.hexagon(i)
        return (h.vmasks[0], h.fmasks[0], h.vmasks[1], h.fmasks[1], h.vmasks[2], h.fmasks[2], h.vmasks[3])

    def relay_class(self, i: int) -> int:
        """v/u/w class of a 4-vertex A_i relative to its opposite face."""
        threes = sum(self.corners[k].degree == 3 for k in range(3) if k != i)
        return (VV, VU, VW)[threes]

    def opposite_face(self, i: int) -> PartialRing | None:
        """Partial ring of the 5- or 6-face opposite a 4-vertex A_i: (x, A_i, y, ...)."""
        c = self.corners[i]
        if c.degree != 4 or c.opposite not in (5, 6):
            return None
        return partial_ring(c.opposite, {1: 1 << self.relay_class(i)}, {0: 1 << FH, 1: 1 << FH})

    def rings(self) -> list[PartialRing]:
        out = [self.hexagon(i) for i in range(3)]
        out.extend(r for r in (self.opposite_face(i) for i in range(3)) if r is not None)
        return out


def _bucket_vertex(bucket: int) -> int:
    return DEGREE_MASK[bucket]


def _outer_next(c: Corner) -> tuple[int, int]:
    """(v1, f1) of the hexagon following corner ``c``."""
    if c.degree == 3:
        return _bucket_vertex(c.far), 1 << FH
    if c.degree == 4:
        if c.opposite == 3:
            # g = (A, x, y); y is on the following hexagon, its off-face neighbour is x
            return _tri_vertex(c.next, c.prev), _tri_tip(c.prev)
        return UNKNOWN_V, 1 << SIZE_CLASS[c.opposite]
    return UNKNOWN_V, UNKNOWN_F


def _outer_prev(c: Corner) -> tuple[int, int]:
    """(f3, v4) of the hexagon preceding corner ``c``."""
    if c.degree == 3:
        return 1 << FH, _bucket_vertex(c.far)
    if c.degree == 4:
        if c.opposite == 3:
            return _tri_tip(c.next), _tri_vertex(c.prev, c.next)
        return 1 << SIZE_CLASS[c.opposite], UNKNOWN_V
    return UNKNOWN_F, UNKNOWN_V


def _tri_vertex(bucket: int, other: int) -> int:
    """Class of a vertex of the opposite triangle g relative to its hexagon."""
    if bucket == 3:
        return 1 << (VO if other == 3 else VT)
    if bucket == 4:
        return 1 << V4  # its only off-face triangle would touch g
    return 1 << (V5 if bucket == 5 else V6)


def _tri_tip(bucket: int) -> int:
    if bucket == 3:
        return (1 << FT) | (1 << FO)
    return 1 << FX


def enumerate_triangle_contexts(exclusions: Iterable[FacePattern] = (),
                                semantics: Semantics = Semantics.INCLUSIVE4,
                                reflect: bool = True) -> Iterator[TriangleContext]:
    """Canonical triangle contexts whose surrounding faces surely avoid every exclusion."""
    configs = expand_exclusions(exclusions)
    seen = set()
    for corners in product(CORNER_OPTIONS, repeat=3):
        ctx = TriangleContext(corners)
        if ctx.corners != min(ctx.images()):
            continue
        if ctx in seen:
            continue
        seen.add(ctx)
        if excluded_partial(ctx.rings(), configs, semantics, reflect):
            continue
        yield ctx


# -- vertex stars --------------------------------------------------------

@dataclass(frozen=True, order=True)
class Neighbour:
    """A neighbour N_j of a 3-vertex, lying on faces F_{j-1} and F_j.

    For a 3-vertex on an incident 3-face, ``extra`` is the degree bucket of
    its remaining neighbour (it decides the triangle's t/O class).  For a
    4-vertex, ``extra`` is 0 (plain on both faces), 1 (v/u/w relative to
    F_{j-1}) or 2 (v/u/w relative to F_j).
    """

    degree: int
    extra: int = 0

    def mirrored(self) -> "Neighbour":
        if self.degree == 4 and self.extra:
            return Neighbour(4, 3 - self.extra)
        return self

    def code(self) -> str:
        if self.degree == 3 and self.extra:
            return f"3({self.extra})"
        if self.degree == 4 and self.extra:
            return "4(<)" if self.extra == 1 else "4(>)"
        return str(self.degree)


@dataclass(frozen=True, order=True)
class VertexStar:
    """A 3-vertex c with neighbours N_j and faces F_j between N_j and N_{j+1}."""

    sizes: tuple[int, int, int]
    neighbours: tuple[Neighbour, Neighbour, Neighbour]
    degree: int = 3

    def encode(self) -> str:
        return "star3:" + "".join(n.code() + FACE_CLASSES[SIZE_CLASS[s]] if s > 3 else n.code() + "T"
                                  for n, s in zip(self.neighbours, self.sizes))

    __str__ = encode

    def images(self):
        ns, ss = self.neighbours, self.sizes
        out = []
        for r in range(3):
            out.append((tuple(ss[(j + r) % 3] for j in range(3)), tuple(ns[(j + r) % 3] for j in range(3))))
            out.append((tuple(ss[(r - j - 1) % 3] for j in range(3)),
                        tuple(ns[(r - j) % 3].mirrored() for j in range(3))))
        return out

    def is_canonical(self) -> bool:
        return (self.sizes, self.neighbours) == min(self.images())

    def centre_class(self, j: int) -> int:
        """Class of the centre relative to F_j (off-face neighbour N_{j+2})."""
        return VO if self.neighbours[(j + 2) % 3].degree == 3 else VT

    def seen_class(self, k: int, tip: int) -> int:
        """Mask of face F_k seen across an edge at the centre; ``tip`` is its far vertex."""
        s = self.sizes[k]
        if s > 3:
            return 1 << SIZE_CLASS[s]
        n = self.neighbours[tip]
        if n.degree == 3:
            return 1 << (FO if n.extra == 3 else FT)
        return 1 << FX

    def neighbour_class(self, j: int, face: int) -> int:
        """Mask of N_j relative to the incident face F_face (face is j-1 or j)."""
        n = self.neighbours[j]
        prev_face, next_face = (j - 1) % 3, j
        other = prev_face if face == next_face else next_face
        if n.degree == 3:
            if self.sizes[other] == 3:
                # the off-face neighbour is the far vertex of that triangle
                far = (j - 1) % 3 if other == prev_face else (j + 1) % 3
                return 1 << (VO if self.neighbours[far].degree == 3 else VT)
            return DEGREE_MASK[3]
        if n.degree == 4:
            toward = 1 if face == prev_face else 2
            return VUW if n.extra == toward else 1 << V4
        return DEGREE_MASK[n.degree]

    def face_ring(self, j: int) -> PartialRing | None:
        """Partial ring of F_j as (N_j, centre, N_{j+1}, ...) when F_j has size 5 or 6."""
        s = self.sizes[j]
        if s < 5:
            return None
        k = (j + 1) % 3
        return partial_ring(s, {
            0: self.neighbour_class(j, j),
            1: 1 << self.centre_class(j),
            2: self.neighbour_class(k, j),
        }, {
            0: self.seen_class((j - 1) % 3, (j - 1) % 3),
            1: self.seen_class(k, (k + 1) % 3),
        })

    def rings(self) -> list[PartialRing]:
        return [r for r in (self.face_ring(j) for j in range(3)) if r is not None]


@dataclass(frozen=True, order=True)
class DegreeProfile:
    d: int
    t: int
    q: int
    p: int


def _star_sizes():
    for sizes in product((3, 4, 5, 6), repeat=3):
        tri = [j for j, s in enumerate(sizes) if s == 3]
        if len(tri) > 1:
            continue
        if tri and any(s != 6 for j, s in enumerate(sizes) if j != tri[0]):
            continue
        if sum(sizes) < 15:  # facial degree of a 3-vertex is sum(sizes) - 6
            continue
        yield sizes


def _neighbour_options(j: int, sizes) -> list[Neighbour]:
    prev_face, next_face = (j - 1) % 3, j
    on_triangle = sizes[prev_face] == 3 or sizes[next_face] == 3
    opts = [Neighbour(3, e) for e in ((3, 4) if on_triangle else (0,))]
    opts.append(Neighbour(4, 0))
    if not on_triangle:
        # v/u/w toward F_{j-1} needs its off triangle to abut F_j, a 6-face, and vice versa
        if sizes[next_face] == 6:
            opts.append(Neighbour(4, 1))
        if sizes[prev_face] == 6:
            opts.append(Neighbour(4, 2))
    opts += [Neighbour(5), Neighbour(6)]
    return opts


def enumerate_vertex_stars(d: int = 3, exclusions: Iterable[FacePattern] = (),
                           semantics: Semantics = Semantics.INCLUSIVE4, reflect: bool = True,
                           dmax: int = 20):
    """Degree-3 stars with full rule-window data, or degree profiles for d >= 5."""
    if d == 4:
        raise ValueError("4-vertices only relay charge; there is nothing to enumerate")
    if d < 3:
        raise ValueError("minimum degree is 3")
    if d >= 5:
        yield from degree_profiles(d)
        return
    configs = expand_exclusions(exclusions)
    for sizes in _star_sizes():
        for ns in product(*(_neighbour_options(j, sizes) for j in range(3))):
            star = VertexStar(sizes, ns)
            if not star.is_canonical():
                continue
            if excluded_partial(star.rings(), configs, semantics, reflect):
                continue
            yield star


def degree_profiles(d: int) -> Iterator[DegreeProfile]:
    """(t, q, p) counts of incident 3-, 4- and >=5-faces with t <= p."""
    for t in range(d + 1):
        for q in range(d - t + 1):
            p = d - t - q
            if t <= p:
                yield DegreeProfile(d, t, q, p)
