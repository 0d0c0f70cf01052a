"""Reducible-configuration sets: file format, closure and integrity checks."""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

from .alphabet import Semantics
from .patterns import FacePattern, PatternError, closure_expand, parse_pattern

PROVENANCES = ("paper-text", "paper-figure-transcription", "user")
COMPLETE_COUNT = 193

# hypotheses of the 3-face and 3-vertex charge lemmas
TRIANGLE_EXCLUSIONS = ("H:o3o", "H:3T4T", "H:o34Q")
VERTEX_EXCLUSIONS = ("H:o3o",)


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<configs>"):
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.line = line
        self.source = source


class DuplicateConfigWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ConfigEntry:
    pattern: FacePattern
    provenance: str = "user"

    def line(self) -> str:
        return f"{self.pattern.text()}  # {self.provenance}"


@dataclass(frozen=True)
class ConfigSet:
    """Configurations with provenance; ``patterns`` is the closure under v->u->w."""

    entries: tuple[ConfigEntry, ...] = ()
    source: str = "<configs>"
    duplicates: tuple[str, ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @cached_property
    def patterns(self) -> tuple[FacePattern, ...]:
        out = set()
        for e in self.entries:
            out |= closure_expand(e.pattern)
        return tuple(sorted(out))

    @property
    def pre_closure_count(self) -> int:
        return len(self.entries)

    @property
    def post_closure_count(self) -> int:
        return len(self.canonical_forms())

    def canonical_forms(self, reflect: bool = True) -> frozenset[str]:
        return frozenset(p.canonical(reflect).text() for p in self.patterns)

    def serialize(self) -> str:
        return "".join(e.line() + "\n" for e in self.entries)

    def content_hash(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()[:16]

    def count_report(self) -> str:
        return (f"{self.pre_closure_count} configurations "
                f"({self.post_closure_count} after u/v/w closure)")


def _closure_keys(pattern: FacePattern, reflect: bool = True) -> frozenset[str]:
    return frozenset(p.canonical(reflect).text() for p in closure_expand(pattern))


def parse_configs(text: str, source: str = "<configs>", strict: bool = False,
                  complete: bool = False, provenance: str = "user") -> ConfigSet:
    """Parse a configuration file.

    Each line holds one pattern with an optional ``  # provenance`` suffix.
    A configuration implied by another one up to symmetry and the u/v/w
    closure is dropped with a warning (an error when ``strict``).
    """
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body, _, comment = raw.partition("#")
        body = body.strip()
        if not body:
            continue
        tag = comment.strip() or provenance
        if tag not in PROVENANCES:
            raise ConfigError(f"unknown provenance {tag!r}", lineno, source)
        try:
            pat = parse_pattern(body)
        except PatternError as exc:
            raise ConfigError(str(exc), lineno, source) from None
        if not isinstance(pat, FacePattern):
            raise ConfigError(f"{body} is a rule pattern, not a configuration", lineno, source)
        entries.append((lineno, ConfigEntry(pat, tag)))

    keys = [_closure_keys(e.pattern) for _, e in entries]
    kept, dropped = [], []
    for i, (lineno, entry) in enumerate(entries):
        cover = None
        for j, other in enumerate(keys):
            if j != i and keys[i] <= other and (keys[i] != other or j < i):
                cover = entries[j][1].pattern.short_text()
                break
        if cover is None:
            kept.append(entry)
            continue
        msg = f"{entry.pattern.short_text()} is implied by {cover} after closure"
        if strict:
            raise ConfigError("duplicate configuration: " + msg, lineno, source)
        warnings.warn(f"{source}:{lineno}: {msg}; dropped", DuplicateConfigWarning, stacklevel=2)
        dropped.append(entry.pattern.text())

    if complete and len(entries) != COMPLETE_COUNT:
        raise ConfigError(f"completeness asserted but the file lists {len(entries)} configurations, "
                          f"expected {COMPLETE_COUNT}", None, source)
    return ConfigSet(tuple(kept), source, tuple(dropped))


def default_configs_text() -> str:
    return resources.files("cyclicsix").joinpath("data/configs_default.txt").read_text()


def load_configs(path: str | Path | None = None, strict: bool = False, complete: bool = False) -> ConfigSet:
    """Load a configuration file; ``None`` gives the shipped paper-text subset."""
    if path is None:
        return parse_configs(default_configs_text(), "<paper-text>", strict, complete)
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read: {exc.strerror}", None, str(p)) from None
    return parse_configs(text, str(p), strict, complete)


def config_set(patterns, provenance: str = "user", source: str = "<inline>") -> ConfigSet:
    """ConfigSet from pattern strings or FacePatterns, without duplicate checks."""
    entries = []
    for p in patterns:
        pat = parse_pattern(p) if isinstance(p, str) else p
        entries.append(ConfigEntry(pat, provenance))
    return ConfigSet(tuple(entries), source)


def diff_configs(a: ConfigSet, b: ConfigSet, reflect: bool = True) -> tuple[list[str], list[str]]:
    """(added, removed) canonical patterns going from ``a`` to ``b``, after closure."""
    ka, kb = a.canonical_forms(reflect), b.canonical_forms(reflect)
    return sorted(kb - ka), sorted(ka - kb)


def matched_configs(configs: ConfigSet, ring, semantics: Semantics = Semantics.INCLUSIVE4,
                    reflect: bool = True) -> list[FacePattern]:
    from .patterns import match_ring
    return [p for p in configs.patterns if p.size == ring.size and match_ring(p, ring, semantics, reflect)]
