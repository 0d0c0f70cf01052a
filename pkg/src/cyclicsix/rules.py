"""Discharging rules: the rule table, window matching, transfers and the overlap audit."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from importlib import resources
from itertools import product
from pathlib import Path

import numpy as np

from .alphabet import (
    ALL_FACES,
    ALL_VERTICES,
    FACE_CLASSES,
    FH,
    TRIANGLES,
    TRIANGLE_RELAYS,
    VERTEX_CLASSES,
    Semantics,
    face_mask,
    vertex_mask,
)
from .patterns import FacePattern, PatternError, TRulePattern, parse_pattern
from .ring import RingDescriptor, vertex_violation

TABLE_COLUMNS = {"T": 3, "P": 4, "H": 4}
TABLE_NAMES = {"T": "T-rules", "P": "P-rules", "H": "H-rules"}
EXPECTED_COUNTS = {"T": 39, "P": 28, "H": 36}

_LINE = re.compile(r"^(\S+) (-?\d+)/(\d+)$")


class RuleFileError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<rules>"):
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.line = line


class AmbiguousRule(Exception):
    """Two distinct rules of one kind fire on the same placement."""

    def __init__(self, rules, window: str):
        names = ", ".join(r.text for r in rules)
        super().__init__(f"rules {names} all apply to {window}")
        self.rules = tuple(rules)
        self.window = window


class IndeterminateWindow(Exception):
    """A partially known window neither surely matches nor surely misses a rule."""


@dataclass(frozen=True)
class Rule:
    kind: str
    pattern: FacePattern | TRulePattern
    amount: int  # sixtieths of a unit; negative means the face receives
    source: tuple[str, int, int] = ("", 0, 0)

    @property
    def text(self) -> str:
        if self.kind == "T":
            return self.pattern.text()
        return f"{self.kind}:" + window_chars(self.pattern)

    def line(self) -> str:
        return f"{self.text} {self.amount}/60"

    def __str__(self) -> str:
        return self.line()


def window_chars(pattern: FacePattern) -> str:
    """The five-character window v1 f1 v2 f2 v3 of a P/H rule."""
    return pattern.vchars[0] + pattern.fchars[0] + pattern.vchars[1] + pattern.fchars[1] + pattern.vchars[2]


@dataclass(frozen=True)
class Transfer:
    """A positive charge movement; relayed transfers pass through ``relay``."""

    payer: str
    payee: str
    amount: int
    rule: Rule
    relay: str | None = None

    def legs(self) -> list[tuple[str, str, int]]:
        if self.relay is None:
            return [(self.payer, self.payee, self.amount)]
        return [(self.payer, self.relay, self.amount), (self.relay, self.payee, self.amount)]

    def as_dict(self) -> dict:
        return {
            "payer": self.payer,
            "payee": self.payee,
            "amount": self.amount,
            "rule": self.rule.text,
            "relay": self.relay,
        }


class RuleTable:
    """Ordered rules with source coordinates; immutable after construction."""

    def __init__(self, rules, name: str = "rules"):
        self.rules: tuple[Rule, ...] = tuple(rules)
        self.name = name
        self._matchers = {}

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def of_kind(self, kind: str) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if r.kind == kind)

    def counts(self) -> dict[str, int]:
        return {k: len(self.of_kind(k)) for k in "TPH"}

    def serialize(self) -> str:
        """Canonical text: one rule per line, grouped T, P, H in table order."""
        lines = []
        for kind in "TPH":
            lines.extend(r.line() for r in self.of_kind(kind))
        return "\n".join(lines) + "\n"

    def content_hash(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()[:16]

    def matcher(self, semantics: Semantics = Semantics.INCLUSIVE4) -> "RuleMatcher":
        semantics = Semantics(semantics)
        if semantics not in self._matchers:
            self._matchers[semantics] = RuleMatcher(self, semantics)
        return self._matchers[semantics]


def _parse_rule(pattern_text: str, amount: int, source, src_name: str, lineno) -> Rule:
    try:
        pat = parse_pattern(pattern_text)
    except PatternError as exc:
        raise RuleFileError(str(exc), lineno, src_name) from None
    if isinstance(pat, TRulePattern):
        if face_mask(pat.fchars[1]) & ~TRIANGLES:
            raise RuleFileError(f"T-rule {pattern_text} can send to a non-3-face", lineno, src_name)
        return Rule("T", pat, amount, source)
    if any(c != "*" for c in pat.vchars[3:] + pat.fchars[2:]):
        raise RuleFileError(f"{pattern_text}: P/H rules describe only v1 f1 v2 f2 v3", lineno, src_name)
    return Rule(pat.kind, pat, amount, source)


def parse_rules(text: str, source: str = "<rules>", table_coordinates: bool = False) -> RuleTable:
    """Parse rule-file text; ``table_coordinates`` numbers rules by table row/column."""
    rules = []
    seen = {}
    position = {"T": 0, "P": 0, "H": 0}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _LINE.match(line)
        if not m:
            raise RuleFileError(f"malformed rule line {raw!r} (expected '<pattern> <n>/60')", lineno, source)
        pattern_text, num, den = m.groups()
        if den != "60":
            raise RuleFileError(f"denominator must be 60, got {den}", lineno, source)
        kind = pattern_text[:1]
        if kind in position and table_coordinates:
            i = position[kind]
            cols = TABLE_COLUMNS[kind]
            coord = (TABLE_NAMES[kind], i // cols + 1, i % cols + 1)
        else:
            coord = (source, lineno, 1)
        rule = _parse_rule(pattern_text, int(num), coord, source, lineno)
        if kind in position:
            position[kind] += 1
        if rule.text in seen:
            raise RuleFileError(f"duplicate rule {rule.text} (first on line {seen[rule.text]})", lineno, source)
        seen[rule.text] = lineno
        rules.append(rule)
    return RuleTable(rules, name=source)


def default_rules_text() -> str:
    return resources.files("cyclicsix").joinpath("data/rules.txt").read_text()


_DEFAULT = None


def load_rules(path: str | Path | None = None) -> RuleTable:
    """Load a rule file, or the embedded table when ``path`` is None."""
    global _DEFAULT
    if path is None:
        if _DEFAULT is None:
            _DEFAULT = parse_rules(default_rules_text(), "embedded", table_coordinates=True)
        return _DEFAULT
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise RuleFileError(f"cannot read: {exc.strerror}", None, str(path)) from None
    return parse_rules(text, str(path))


def initial_charge(k: int) -> int:
    """Initial charge of a k-vertex or k-face, in sixtieths."""
    if k < 3:
        raise ValueError(f"elements have size at least 3, got {k}")
    return 60 * (k - 4)


# -- matching ------------------------------------------------------------

def _oriented(masks):
    return tuple(masks), tuple(reversed(masks))


class RuleMatcher:
    """Rule lookups on windows of class bitmasks for one matching semantics.

    A window is a tuple of masks alternating vertex, face, vertex, ...; a
    concrete window has one bit per slot.  Rules are tried read forward and
    backward; one rule matching both ways fires once.
    """

    def __init__(self, table: RuleTable, semantics: Semantics):
        self.table = table
        self.semantics = semantics
        self._compiled = {}
        for kind in "TPH":
            entries = []
            for rule in table.of_kind(kind):
                masks = rule_window_masks(rule, semantics)
                for orient in set(_oriented(masks)):
                    entries.append((rule, orient))
            self._compiled[kind] = entries
        self._cache = {}

    def lookup(self, kind: str, window: tuple[int, ...]) -> Rule | None:
        key = (kind, window)
        try:
            return self._cache[key]
        except KeyError:
            pass
        hits = []
        for rule, masks in self._compiled[kind]:
            status = True
            for w, m in zip(window, masks):
                if w & m == 0:
                    status = False
                    break
                if w & ~m:
                    status = None
            if status is None:
                raise IndeterminateWindow(f"{kind}-window {render_window(window)} is not decided by {rule.text}")
            if status and rule not in hits:
                hits.append(rule)
        if len(hits) > 1:
            raise AmbiguousRule(hits, f"{kind}:{render_window(window)}")
        result = hits[0] if hits else None
        self._cache[key] = result
        return result


def rule_window_masks(rule: Rule, semantics: Semantics) -> tuple[int, ...]:
    pat = rule.pattern
    if rule.kind == "T":
        vs, fs = pat.vchars, pat.fchars
        chars = [vs[0], fs[0], vs[1], fs[1], vs[2], fs[2], vs[3]]
    else:
        chars = list(window_chars(pat))
    return tuple(
        vertex_mask(c, semantics) if i % 2 == 0 else face_mask(c)
        for i, c in enumerate(chars)
    )


def render_window(window: tuple[int, ...]) -> str:
    """Print a window of masks; non-singleton slots print as {..}."""
    out = []
    for i, m in enumerate(window):
        alphabet = VERTEX_CLASSES if i % 2 == 0 else FACE_CLASSES
        full = ALL_VERTICES if i % 2 == 0 else ALL_FACES
        chars = [c for j, c in enumerate(alphabet) if m >> j & 1]
        if m == full:
            out.append("?")
        elif len(chars) == 1:
            out.append(chars[0])
        else:
            out.append("{" + "".join(chars) + "}")
    return "".join(out)


def t_window(ring: RingDescriptor, edge: int) -> tuple[int, ...]:
    vs, fs, d = ring.vtypes, ring.ftypes, ring.size
    return (
        1 << vs[(edge - 1) % d], 1 << fs[(edge - 1) % d],
        1 << vs[edge], 1 << fs[edge],
        1 << vs[(edge + 1) % d], 1 << fs[(edge + 1) % d],
        1 << vs[(edge + 2) % d],
    )


def pv_window(ring: RingDescriptor, vertex: int) -> tuple[int, ...]:
    vs, fs, d = ring.vtypes, ring.ftypes, ring.size
    return (
        1 << vs[(vertex - 1) % d], 1 << fs[(vertex - 1) % d],
        1 << vs[vertex], 1 << fs[vertex],
        1 << vs[(vertex + 1) % d],
    )


def match_t_rule(ring: RingDescriptor, edge_index: int, matcher: RuleMatcher):
    """T-rule the 6-face ``ring`` applies across edge ``edge_index``, as (rule, amount)."""
    if ring.size != 6:
        raise ValueError("T-rules are sent by 6-faces only")
    if not TRIANGLES >> ring.ftypes[edge_index] & 1:
        raise ValueError(f"face across edge {edge_index} of {ring} is not a 3-face")
    rule = matcher.lookup("T", t_window(ring, edge_index))
    return None if rule is None else (rule, rule.amount)


def match_pv_rule(ring: RingDescriptor, vertex_index: int, matcher: RuleMatcher):
    """P- or H-rule between ``ring`` and its vertex ``vertex_index``, as (rule, amount)."""
    kind = "P" if ring.size == 5 else "H"
    rule = matcher.lookup(kind, pv_window(ring, vertex_index))
    return None if rule is None else (rule, rule.amount)


def ring_ids(face: str, d: int):
    """Element ids for a ring scenario: the face, its vertices and its neighbours."""
    return {
        "face": face,
        "vertices": [f"{face}.v{i}" for i in range(d)],
        "edges": [f"{face}.e{i}" for i in range(d)],
        "relays": [f"{face}.v{i}.tri" for i in range(d)],
    }


def apply_rules(ring: RingDescriptor, matcher: RuleMatcher, face: str = "F") -> list[Transfer]:
    """Every transfer between the face and its vertices and adjacent 3-faces."""
    ids = ring_ids(face, ring.size)
    out = []
    for i in range(ring.size):
        hit = match_pv_rule(ring, i, matcher)
        if hit is None:
            continue
        rule, amount = hit
        if amount > 0:
            if TRIANGLE_RELAYS >> ring.vtypes[i] & 1:
                out.append(Transfer(face, ids["relays"][i], amount, rule, relay=ids["vertices"][i]))
            else:
                out.append(Transfer(face, ids["vertices"][i], amount, rule))
        elif amount < 0:
            out.append(Transfer(ids["vertices"][i], face, -amount, rule))
    if ring.size == 6:
        for i in range(6):
            if TRIANGLES >> ring.ftypes[i] & 1:
                hit = match_t_rule(ring, i, matcher)
                if hit is None:
                    continue
                rule, amount = hit
                if amount > 0:
                    out.append(Transfer(face, ids["edges"][i], amount, rule))
                elif amount < 0:
                    out.append(Transfer(ids["edges"][i], face, -amount, rule))
    return out


def balances(transfers) -> dict[str, int]:
    """Net credit per element over all legs of ``transfers``."""
    net = {}
    for t in transfers:
        for payer, payee, amount in t.legs():
            net[payer] = net.get(payer, 0) - amount
            net[payee] = net.get(payee, 0) + amount
    return net


# -- overlap audit -------------------------------------------------------

@dataclass(frozen=True)
class Conflict:
    first: Rule
    second: Rule
    window: str

    def __str__(self) -> str:
        return f"{self.first.text} / {self.second.text} on {self.window}"


def consistent_windows(kind: str) -> np.ndarray:
    """All concrete windows a consistent face can present to a rule of ``kind``.

    T windows have a 3-face in the middle face slot; P windows come from a
    5-face and so carry no 3-faces at all.
    """
    faces = range(len(FACE_CLASSES))
    verts = range(len(VERTEX_CLASSES))
    rows = []
    if kind == "T":
        tri = [f for f in faces if TRIANGLES >> f & 1]
        for v1, f1, v2, f2, v3, f3, v4 in product(verts, faces, verts, tri, verts, faces, verts):
            if (vertex_violation(None, v1, f1) or vertex_violation(f1, v2, f2)
                    or vertex_violation(f2, v3, f3) or vertex_violation(f3, v4, None)):
                continue
            rows.append((v1, f1, v2, f2, v3, f3, v4))
    else:
        if kind == "P":
            faces = [f for f in faces if not TRIANGLES >> f & 1]
        for v1, f1, v2, f2, v3 in product(verts, faces, verts, faces, verts):
            if vertex_violation(None, v1, f1) or vertex_violation(f1, v2, f2) or vertex_violation(f2, v3, None):
                continue
            rows.append((v1, f1, v2, f2, v3))
    return np.array(rows, dtype=np.int64)


def overlap_audit(table: RuleTable, semantics: Semantics = Semantics.INCLUSIVE4) -> list[Conflict]:
    """Every consistent concrete window on which two distinct rules of one kind fire."""
    conflicts = []
    for kind in "TPH":
        rules = table.of_kind(kind)
        if len(rules) < 2:
            continue
        windows = consistent_windows(kind)
        hit = np.zeros((len(windows), len(rules)), dtype=bool)
        for j, rule in enumerate(rules):
            for masks in set(_oriented(rule_window_masks(rule, semantics))):
                ok = np.ones(len(windows), dtype=bool)
                for slot, m in enumerate(masks):
                    ok &= (m >> windows[:, slot]) & 1 == 1
                hit[:, j] |= ok
        for row in np.flatnonzero(hit.sum(axis=1) > 1):
            window = f"{kind}:" + render_window(tuple(1 << int(c) for c in windows[row]))
            idx = np.flatnonzero(hit[row])
            for a in range(len(idx)):
                for b in range(a + 1, len(idx)):
                    conflicts.append(Conflict(rules[idx[a]], rules[idx[b]], window))
    return conflicts
