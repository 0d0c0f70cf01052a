"""Independent reference implementations used as test oracles.

Everything here works on plain strings with the wildcard tables written out
by hand, so it shares no code with the package's bitmask machinery.
"""

import random
import re

VERTEX_SETS = {
    "3": "to", "x": "vuw456", "+": "56", "*": "tovuw456",
    "t": "t", "o": "o", "v": "v", "u": "u", "w": "w", "5": "5", "6": "6",
}
FACE_SETS = {
    "3": "tO", "T": "tOx", "F": "QPH", "*": "tOxQPH",
    "t": "t", "O": "O", "x": "x", "Q": "Q", "P": "P", "H": "H",
}
TRIANGLE = "tOx"
VERTEX_CHARS = "456otuvw"
FACE_CHARS = "HOPQtx"


def vertex_set(ch, strict=False):
    if ch == "4":
        return "4" if strict else "4vuw"
    return VERTEX_SETS[ch]


def split(text):
    """'H:abcd..' -> (prefix, vertex list, face list)."""
    kind, body = text.split(":")
    return kind, list(body[0::2]), list(body[1::2])


def join(kind, vs, fs):
    return kind + ":" + "".join(v + f for v, f in zip(vs, fs))


def images(text, reflect=True):
    kind, vs, fs = split(text)
    d = len(vs)
    out = []
    for r in range(d):
        out.append(join(kind, vs[r:] + vs[:r], fs[r:] + fs[:r]))
    if reflect:
        # walk the other way round: vertex v_{-j}, then the edge to v_{-j-1}
        rv = [vs[(-j) % d] for j in range(d)]
        rf = [fs[(-j - 1) % d] for j in range(d)]
        for r in range(d):
            out.append(join(kind, rv[r:] + rv[:r], rf[r:] + rf[:r]))
    return out


def canonical(text, reflect=True):
    return min(images(text, reflect))


def pattern_regex(pattern, strict=False):
    kind, vs, fs = split(pattern)
    parts = []
    for v, f in zip(vs, fs):
        parts.append("[" + vertex_set(v, strict) + "]")
        parts.append("[" + FACE_SETS[f] + "]")
    return re.compile(re.escape(kind + ":") + "".join(parts))


def pad(pattern):
    kind, body = pattern.split(":")
    n = 10 if kind == "P" else 12
    return kind + ":" + body + "*" * (n - len(body))


def matches(pattern, ring, strict=False, reflect=True):
    rx = pattern_regex(pad(pattern), strict)
    return any(rx.fullmatch(img) for img in images(ring, reflect))


def consistent(ring):
    """C1-C5 written out directly on the string."""
    kind, vs, fs = split(ring)
    d = len(vs)
    if d == 5 and any(f in TRIANGLE for f in fs):
        return False
    for i, v in enumerate(vs):
        around = (fs[i - 1], fs[i])
        if v in "vuw" and around != ("H", "H"):
            return False
        if v in "to":
            tris = [f for f in around if f in TRIANGLE]
            if len(tris) > 1:
                return False
            if tris and "H" not in around:
                return False
            if v == "t" and any(f in "tO" for f in tris):
                return False
            if v == "o" and "x" in tris:
                return False
    return True


def random_ring(rng: random.Random, d=None):
    """A random consistent ring: faces first, then a vertex class each vertex allows."""
    d = d or rng.choice((5, 6))
    faces = "HPQ" if d == 5 else FACE_CHARS
    while True:
        fs = [rng.choice(faces) for _ in range(d)]
        vs = []
        for i in range(d):
            ok = []
            for v in VERTEX_CHARS:
                trial = ["4"] * d
                trial[i] = v
                probe = [fs[i - 1], fs[i]]
                if _vertex_ok(v, probe):
                    ok.append(v)
            vs.append(rng.choice(ok))
        ring = join("P" if d == 5 else "H", vs, fs)
        if consistent(ring):
            return ring


def _vertex_ok(v, around):
    if v in "vuw":
        return around == ["H", "H"]
    if v in "to":
        tris = [f for f in around if f in TRIANGLE]
        if len(tris) > 1 or (tris and "H" not in around):
            return False
        if v == "t":
            return not any(f in "tO" for f in tris)
        return "x" not in tris
    return True


def random_pattern(rng: random.Random, kind, density=0.5):
    n = 5 if kind == "P" else 6
    vchars = "tovuw4563x+*"
    fchars = "tOxQPH3TF*"
    body = []
    for _ in range(n):
        body.append(rng.choice(vchars) if rng.random() < density else "*")
        body.append(rng.choice(fchars) if rng.random() < density else "*")
    return kind + ":" + "".join(body)


# -- naive rule scanner ----------------------------------------------------

RULE_LINE = re.compile(r"^([TPH]):(\S+) (-?\d+)/60$")


def read_rules(text):
    rules = []
    for line in text.splitlines():
        m = RULE_LINE.match(line.strip())
        if m:
            rules.append((m.group(1), m.group(2), int(m.group(3))))
    return rules


def window_matches(chars, window, strict=False):
    for i, (c, w) in enumerate(zip(chars, window)):
        allowed = vertex_set(c, strict) if i % 2 == 0 else FACE_SETS[c]
        if w not in allowed:
            return False
    return True


def scan_face(ring, rules, strict=False):
    """(outflow, inflow, relayed) of a face by brute force over every rule and both directions."""
    kind, vs, fs = split(ring)
    d = len(vs)
    out = inflow = relayed = 0
    for i in range(d):
        window = [vs[i - 1], fs[i - 1], vs[i], fs[i], vs[(i + 1) % d]]
        hits = {(body, amt) for k, body, amt in rules if k == kind
                for w in (window, window[::-1]) if window_matches(body[:5], w, strict)}
        assert len(hits) <= 1, (ring, i, hits)
        for _, amt in hits:
            if amt > 0:
                out += amt
                if vs[i] in "uw":
                    relayed += amt
            else:
                inflow -= amt
    if d == 6:
        for i in range(6):
            if fs[i] not in TRIANGLE:
                continue
            window = [vs[i - 1], fs[i - 1], vs[i], fs[i], vs[(i + 1) % 6], fs[(i + 1) % 6], vs[(i + 2) % 6]]
            hits = {(body, amt) for k, body, amt in rules if k == "T"
                    for w in (window, window[::-1]) if window_matches(body, w, strict)}
            assert len(hits) <= 1, (ring, i, hits)
            for _, amt in hits:
                if amt > 0:
                    out += amt
                else:
                    inflow -= amt
    return out, inflow, relayed


# -- brute-force 5-ring space ------------------------------------------------

def brute_force_rings5(reflect=True):
    """Canonical encodings of every consistent 5-ring, by filtering the full product.

    Slot codes are 6*vertex + face over the ASCII-ordered alphabets, so the
    least code tuple over the ten symmetry images is the least string.
    """
    import numpy as np

    V, F = VERTEX_CHARS, FACE_CHARS
    codes = np.arange(48)
    vch = np.array([V[c // 6] for c in codes])
    fch = np.array([F[c % 6] for c in codes])
    # vertex i is constrained by faces i-1 and i; check every (f_prev, code) pair
    ok_pair = np.zeros((6, 48), dtype=bool)
    for fp in range(6):
        for c in range(48):
            ok_pair[fp, c] = (F[fp] not in TRIANGLE and fch[c] not in TRIANGLE
                              and _vertex_ok(vch[c], [F[fp], fch[c]]))
    # a slot holding a 3-face already breaks C1, so the product is taken over the rest
    slot_codes = np.array([c for c in codes if fch[c] not in TRIANGLE], dtype=np.int16)
    rest = np.stack(np.meshgrid(*[slot_codes] * 4, indexing="ij"), axis=-1).reshape(-1, 4)
    raw = 0
    found = set()
    for first in slot_codes:
        # one chunk per value of slot 0 keeps memory small
        grid = np.concatenate([np.full((len(rest), 1), first, dtype=np.int16), rest], axis=1)
        good = np.ones(len(grid), dtype=bool)
        for i in range(5):
            good &= ok_pair[grid[:, i - 1] % 6, grid[:, i]]
        rings = grid[good]
        raw += len(rings)
        vs, fs = rings // 6, rings % 6
        best = None
        for r in range(5):
            imgs = [np.roll(vs, -r, axis=1) * 6 + np.roll(fs, -r, axis=1)]
            if reflect:
                rv = vs[:, [(-j) % 5 for j in range(5)]]
                rf = fs[:, [(-j - 1) % 5 for j in range(5)]]
                imgs.append(np.roll(rv, -r, axis=1) * 6 + np.roll(rf, -r, axis=1))
            for img in imgs:
                best = img if best is None else _lexmin(best, img)
        found.update(map(tuple, np.unique(best, axis=0).tolist()))
    return raw, sorted(
        "P:" + "".join(V[c // 6] + F[c % 6] for c in row) for row in found
    )


def _lexmin(a, b):
    import numpy as np

    out = a.copy()
    undecided = np.ones(len(a), dtype=bool)
    take_b = np.zeros(len(a), dtype=bool)
    for col in range(a.shape[1]):
        lt = undecided & (b[:, col] < a[:, col])
        gt = undecided & (b[:, col] > a[:, col])
        take_b |= lt
        undecided &= ~(lt | gt)
    out[take_b] = b[take_b]
    return out
