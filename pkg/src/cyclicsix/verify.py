"""Charge accounting on local descriptors and the three charge checks."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

from .alphabet import (
    FACE_CLASSES,
    FH,
    FP,
    FQ,
    TRIANGLE_RELAYS,
    TRIANGLES,
    V5,
    V6,
    VERTEX_CLASSES,
    Semantics,
)
from .configs import (
    TRIANGLE_EXCLUSIONS,
    VERTEX_EXCLUSIONS,
    ConfigSet,
    config_set,
    load_configs,
)
from .enumeration import (
    TriangleContext,
    VertexStar,
    degree_profiles,
    enumerate_rings,
    enumerate_triangle_contexts,
    enumerate_vertex_stars,
    ring_partitions,
)
from .patterns import match_ring
from .ring import RingDescriptor, consistency_check, vertex_violation
from .rules import (
    RuleMatcher,
    RuleTable,
    Transfer,
    apply_rules,
    initial_charge,
    load_rules,
    pv_window,
    render_window,
    t_window,
)

SCHEMA = "cyclicsix.report/1"
CONSTRAINTS = "C1-C6"


@dataclass
class ChargeBreakdown:
    """Transfers into and out of one element; amounts in 1/60 units."""

    element: str
    initial: int
    inflows: list[Transfer] = field(default_factory=list)
    outflows: list[Transfer] = field(default_factory=list)

    @property
    def inflow(self) -> int:
        return sum(t.amount for t in self.inflows)

    @property
    def outflow(self) -> int:
        return sum(t.amount for t in self.outflows)

    @property
    def net(self) -> int:
        return self.inflow - self.outflow

    @property
    def final(self) -> int:
        return self.initial + self.net

    def as_dict(self) -> dict:
        return {
            "descriptor": self.element,
            "initial": self.initial,
            "net": self.net,
            "final": self.final,
            "transfers": [t.as_dict() for t in self.inflows + self.outflows],
        }


def breakdown_for(element: str, initial: int, transfers, me: str) -> ChargeBreakdown:
    """Split transfers into those paid to ``me`` and those paid by it."""
    out = ChargeBreakdown(element, initial)
    for t in transfers:
        if t.payee == me:
            out.inflows.append(t)
        elif t.payer == me:
            out.outflows.append(t)
    return out


def net_charge_of_face(ring: RingDescriptor, matcher: RuleMatcher) -> ChargeBreakdown:
    """Everything the face sends and receives under the rules, relays counted as outflow."""
    return breakdown_for(ring.encode(), initial_charge(ring.size), apply_rules(ring, matcher, "F"), "F")


@dataclass
class VerificationReport:
    lemma: str
    parameters: dict
    rules_hash: str
    configs_hash: str
    checked_count: int = 0
    violation_count: int = 0
    violations: list[dict] = field(default_factory=list)
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return self.violation_count == 0

    def as_dict(self) -> dict:
        # elapsed time is left out so reports are byte-stable across runs
        return {
            "schema": SCHEMA,
            "lemma": self.lemma,
            "parameters": self.parameters,
            "versions": {"rules": self.rules_hash, "configs": self.configs_hash},
            "checked_count": self.checked_count,
            "violation_count": self.violation_count,
            "violations_listed": len(self.violations),
            "violations": self.violations,
            "details": self.details,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def render_text(self) -> str:
        lines = [f"{self.lemma}: {'verified' if self.ok else 'VIOLATIONS'}"]
        for k in sorted(self.parameters):
            lines.append(f"  {k}: {self.parameters[k]}")
        lines.append(f"  rules {self.rules_hash}  configs {self.configs_hash}")
        lines.append(f"  checked {self.checked_count}, violations {self.violation_count}")
        for row in self.details.get("profiles", []):
            mark = "ok" if row["ok"] else "FAIL"
            lines.append(f"  d={row['d']} t={row['t']} q={row['q']} p={row['p']}: "
                         f"max outflow {row['max_outflow']}, bound {row['bound']}, capacity {row['capacity']} {mark}")
        for note in self.details.get("certificate", []):
            lines.append(f"  {note}")
        if len(self.violations) < self.violation_count:
            lines.append(f"  (listing the first {len(self.violations)})")
        for v in self.violations:
            lines.append(f"  {v['descriptor']}  net {v['net']:+d}  final {v['final']:+d}")
            for t in v["transfers"]:
                via = f" via {t['relay']}" if t["relay"] else ""
                lines.append(f"    {t['payer']} -> {t['payee']}{via}: {t['amount']}  [{t['rule']}]")
        return "\n".join(lines) + "\n"


def _semantics(semantics) -> Semantics:
    return Semantics(semantics)


# -- 5- and 6-faces ------------------------------------------------------

class FaceScorer:
    """Net face charge on concrete rings with per-window memoisation."""

    def __init__(self, matcher: RuleMatcher):
        self.matcher = matcher
        self._cache = {"P": {}, "H": {}, "T": {}}

    def amount(self, kind, window, cache):
        a = cache.get(window)
        if a is None:
            rule = self.matcher.lookup(kind, tuple(1 << x for x in window))
            a = cache[window] = 0 if rule is None else rule.amount
        return a

    def outflow(self, vs, fs) -> int:
        """Charge sent minus charge received by the face."""
        d = len(vs)
        kind = "P" if d == 5 else "H"
        pv, tc = self._cache[kind], self._cache["T"]
        total = 0
        for i in range(d):
            j = (i + 1) % d
            total += self.amount(kind, (vs[i - 1], fs[i - 1], vs[i], fs[i], vs[j]), pv)
        if d == 6:
            for i in range(6):
                if TRIANGLES >> fs[i] & 1:
                    j, k = (i + 1) % 6, (i + 2) % 6
                    total += self.amount("T", (vs[i - 1], fs[i - 1], vs[i], fs[i], vs[j], fs[j], vs[k]), tc)
        return total


_WORKER = {}


def _init_face_worker(d, table, patterns, semantics, reflect, limit):
    matcher = table.matcher(semantics)
    _WORKER.update(d=d, matcher=matcher, scorer=FaceScorer(matcher), patterns=patterns,
                   semantics=semantics, reflect=reflect, limit=limit)


def _face_partition(prefix):
    w = _WORKER
    d, scorer, limit = w["d"], w["scorer"], w["limit"]
    cap = 60 * (d - 4)
    checked = bad = 0
    listed = []
    for ring in enumerate_rings(d, w["patterns"], w["semantics"], w["reflect"], partition=prefix):
        checked += 1
        if scorer.outflow(ring.vtypes, ring.ftypes) > cap:
            bad += 1
            if limit is None or len(listed) < limit:
                listed.append(net_charge_of_face(ring, w["matcher"]).as_dict())
    return checked, bad, listed


def verify_faces(d: int, rules: RuleTable | None = None, configs: ConfigSet | None = None,
                 semantics=Semantics.INCLUSIVE4, reflect: bool = True, jobs: int = 1,
                 max_violations: int | None = None, progress=None) -> VerificationReport:
    """Check that every ring not excluded by ``configs`` sends out at most 60(d-4) net.

    The ring space is cut into slot-prefix partitions; results are merged in
    partition order, which is canonical order, so any ``jobs`` gives the same
    report.  ``max_violations`` caps the listed violations, not the count.
    """
    if d not in (5, 6):
        raise ValueError("face size must be 5 or 6")
    start = time.perf_counter()
    rules = rules or load_rules()
    configs = configs if configs is not None else load_configs()
    semantics = _semantics(semantics)
    init = (d, rules, configs.patterns, semantics, reflect, max_violations)
    partitions = ring_partitions(d)
    if jobs > 1:
        with ProcessPoolExecutor(jobs, initializer=_init_face_worker, initargs=init) as pool:
            parts = pool.map(_face_partition, partitions, chunksize=8)
            parts = list(_tick(parts, len(partitions), progress))
    else:
        _init_face_worker(*init)
        parts = list(_tick(map(_face_partition, partitions), len(partitions), progress))
    report = VerificationReport(
        f"faces-{d}",
        _parameters(semantics, reflect, configs, size=d, max_violations=max_violations),
        rules.content_hash(), configs.content_hash(),
    )
    for checked, bad, listed in parts:
        report.checked_count += checked
        report.violation_count += bad
        if max_violations is None or len(report.violations) < max_violations:
            report.violations.extend(listed)
    if max_violations is not None:
        del report.violations[max_violations:]
    report.elapsed = time.perf_counter() - start
    return report


def _tick(parts, total, progress):
    for i, part in enumerate(parts, 1):
        if progress is not None:
            progress(i, total)
        yield part


def _parameters(semantics, reflect, configs: ConfigSet, **extra) -> dict:
    out = {
        "semantics": semantics.value,
        "reflection": reflect,
        "constraints": CONSTRAINTS,
        "exclusions": configs.source,
        "exclusion_count": configs.pre_closure_count,
        "exclusion_closure_count": configs.post_closure_count,
    }
    out.update(extra)
    return out


# -- 3-faces -------------------------------------------------------------

def triangle_breakdown(ctx: TriangleContext, matcher: RuleMatcher) -> ChargeBreakdown:
    """Charge reaching the 3-face from its hexagons and through 4-vertex relays."""
    transfers = []
    for i in range(3):
        rule = matcher.lookup("T", ctx.t_window(i))
        if rule is not None:
            _signed(transfers, f"H{i}", "T", rule)
    for i in range(3):
        g = ctx.opposite_face(i)
        if g is None:
            continue
        rule = matcher.lookup("P" if g.size == 5 else "H",
                              (g.vmasks[0], g.fmasks[0], g.vmasks[1], g.fmasks[1], g.vmasks[2]))
        if rule is not None and rule.amount > 0:
            transfers.append(Transfer(f"g{i}", "T", rule.amount, rule, relay=f"A{i}"))
    return breakdown_for(ctx.encode(), initial_charge(3), transfers, "T")


def _signed(out, face, target, rule):
    if rule.amount > 0:
        out.append(Transfer(face, target, rule.amount, rule))
    elif rule.amount < 0:
        out.append(Transfer(target, face, -rule.amount, rule))


def verify_triangles(rules: RuleTable | None = None, exclusions: ConfigSet | None = None,
                     semantics=Semantics.INCLUSIVE4, reflect: bool = True,
                     max_violations: int | None = None) -> VerificationReport:
    """Every 3-face surrounded by 6-faces ends with non-negative charge."""
    start = time.perf_counter()
    rules = rules or load_rules()
    if exclusions is None:
        exclusions = config_set(TRIANGLE_EXCLUSIONS, "paper-text", "<3-face hypotheses>")
    semantics = _semantics(semantics)
    matcher = rules.matcher(semantics)
    report = VerificationReport("triangles", _parameters(semantics, reflect, exclusions),
                                rules.content_hash(), exclusions.content_hash())
    worst = None
    for ctx in enumerate_triangle_contexts(exclusions.patterns, semantics, reflect):
        report.checked_count += 1
        b = triangle_breakdown(ctx, matcher)
        worst = b.net if worst is None else min(worst, b.net)
        if b.final < 0:
            report.violation_count += 1
            if max_violations is None or len(report.violations) < max_violations:
                report.violations.append(b.as_dict())
    report.details["min_inflow"] = worst
    report.elapsed = time.perf_counter() - start
    return report


# -- vertices ------------------------------------------------------------

def star_breakdown(star: VertexStar, matcher: RuleMatcher) -> ChargeBreakdown:
    transfers = []
    for j in range(3):
        ring = star.face_ring(j)
        if ring is None:
            continue
        kind = "P" if ring.size == 5 else "H"
        rule = matcher.lookup(kind, (ring.vmasks[0], ring.fmasks[0], ring.vmasks[1], ring.fmasks[1], ring.vmasks[2]))
        if rule is not None:
            _signed(transfers, f"F{j}", "c", rule)
    return breakdown_for(star.encode(), initial_charge(3), transfers, "c")


KINDS = "TQPH"
_KIND_MASK = {"T": TRIANGLES, "Q": 1 << FQ, "P": 1 << FP, "H": 1 << FH}


def slot_sends(matcher: RuleMatcher, degree: int) -> dict[tuple[str, str, str], int]:
    """Worst charge a ``degree``-vertex sends to one incident 5/6-face.

    Keyed by (previous face kind, face kind, next face kind); the worst case is
    taken over every concrete class of the two neighbours on that face and
    every 3-face class, using the rules themselves.
    """
    centre = V5 if degree == 5 else V6
    out = {}
    for a, s, b in product(KINDS, "PH", KINDS):
        best = None
        for v1, f1, f2, v3 in product(range(len(VERTEX_CLASSES)), _bits(_KIND_MASK[a]),
                                      _bits(_KIND_MASK[b]), range(len(VERTEX_CLASSES))):
            if vertex_violation(None, v1, f1) or vertex_violation(f2, v3, None):
                continue
            rule = matcher.lookup(s, (1 << v1, 1 << f1, 1 << centre, 1 << f2, 1 << v3))
            send = 0 if rule is None else -rule.amount
            best = send if best is None else max(best, send)
        out[a, s, b] = best
    return out


def _bits(mask):
    return [i for i in range(len(FACE_CLASSES)) if mask >> i & 1]


def max_profile_outflow(d: int, sends: dict) -> dict[tuple[int, int, int], int]:
    """Exact worst outflow per (t, q, p) over cyclic face-kind sequences around a d-vertex.

    A 3-face must sit between two 6-faces.
    """
    def ok(x, y):
        return not ((x == "T" and y != "H") or (y == "T" and x != "H"))

    def value(prev, cur, nxt):
        return sends[prev, cur, nxt] if cur in "PH" else 0

    best = {}
    for k0, k1 in product(KINDS, repeat=2):
        if not ok(k0, k1):
            continue
        # state: (k_{j-1}, k_j, t, q) -> best sum of sends for faces 1..j-1
        states = {(k0, k1, (k0 == "T") + (k1 == "T"), (k0 == "Q") + (k1 == "Q")): 0}
        for _ in range(2, d):
            nxt_states = {}
            for (a, b, t, q), val in states.items():
                for c in KINDS:
                    if not ok(b, c):
                        continue
                    key = (b, c, t + (c == "T"), q + (c == "Q"))
                    v = val + value(a, b, c)
                    if nxt_states.get(key, -1) < v:
                        nxt_states[key] = v
            states = nxt_states
        for (a, b, t, q), val in states.items():
            if not ok(b, k0):
                continue
            total = val + value(a, b, k0) + value(b, k0, k1)
            prof = (t, q, d - t - q)
            if best.get(prof, -1) < total:
                best[prof] = total
    return best


def profile_bound(d: int, t: int, q: int, p: int) -> int:
    """Outflow bound of the degree argument: 12 per face, 28 per 3-face above degree 5."""
    return (12 if d == 5 else 28) * t + 12 * q + 12 * p


def verify_vertices(rules: RuleTable | None = None, dmax: int = 20, exclusions: ConfigSet | None = None,
                    semantics=Semantics.INCLUSIVE4, reflect: bool = True,
                    max_violations: int | None = None) -> VerificationReport:
    """3-vertices receive at least 60; vertices of degree 5..dmax send at most 60(d-4)."""
    if dmax < 6:
        raise ValueError("dmax must be at least 6")
    start = time.perf_counter()
    rules = rules or load_rules()
    if exclusions is None:
        exclusions = config_set(VERTEX_EXCLUSIONS, "paper-text", "<3-vertex hypotheses>")
    semantics = _semantics(semantics)
    matcher = rules.matcher(semantics)
    report = VerificationReport("vertices", _parameters(semantics, reflect, exclusions, dmax=dmax),
                                rules.content_hash(), exclusions.content_hash())

    def violation(entry):
        report.violation_count += 1
        if max_violations is None or len(report.violations) < max_violations:
            report.violations.append(entry)

    # (a) 3-vertices
    stars = 0
    worst = None
    for star in enumerate_vertex_stars(3, exclusions.patterns, semantics, reflect):
        stars += 1
        b = star_breakdown(star, matcher)
        worst = b.net if worst is None else min(worst, b.net)
        if b.final < 0:
            violation(b.as_dict())
    report.details["stars"] = stars
    report.details["min_star_inflow"] = worst

    # (b), (c) vertices of degree 5..dmax, profile level
    rows = []
    sends = {5: slot_sends(matcher, 5), 6: slot_sends(matcher, 6)}
    for d in range(5, dmax + 1):
        worst_by_profile = max_profile_outflow(d, sends[min(d, 6)])
        for prof in degree_profiles(d):
            mx = worst_by_profile.get((prof.t, prof.q, prof.p))
            if mx is None:
                continue  # t <= p but no cyclic arrangement puts every 3-face between 6-faces
            cap = initial_charge(d)
            bound = profile_bound(d, prof.t, prof.q, prof.p)
            row = {"d": d, "t": prof.t, "q": prof.q, "p": prof.p, "max_outflow": mx,
                   "bound": bound, "capacity": cap, "ok": mx <= bound <= cap}
            rows.append(row)
            if not row["ok"]:
                violation({"descriptor": f"profile(d={d},t={prof.t},q={prof.q},p={prof.p})",
                           "initial": cap, "net": -mx, "final": cap - mx, "transfers": []})
    report.details["profiles"] = rows
    report.details["slot_sends"] = {f"{a}{s}{b}": v for (a, s, b), v in sorted(sends[6].items())}

    # (d) the closed-form inequality over the whole integer profile space
    bad = [(d, p.t, p.q, p.p) for d in range(6, dmax + 1) for p in degree_profiles(d)
           if profile_bound(d, p.t, p.q, p.p) > initial_charge(d)]
    for d, t, q, p in bad:
        violation({"descriptor": f"bound(d={d},t={t},q={q},p={p})", "initial": initial_charge(d),
                   "net": -profile_bound(d, t, q, p), "final": initial_charge(d) - profile_bound(d, t, q, p),
                   "transfers": []})
    report.details["certificate"] = [
        f"28t+12q+12p <= 60(d-4) on all {sum(1 for d in range(6, dmax + 1) for _ in degree_profiles(d))} "
        f"profiles with 6 <= d <= {dmax}, t <= p",
        "for every d >= 6: 28t+12q+12p <= 20t+12q+20p <= 20d <= 60(d-4) since t <= p",
    ]
    report.checked_count = stars + len(rows)
    report.elapsed = time.perf_counter() - start
    return report


# -- explain -------------------------------------------------------------

@dataclass
class Explanation:
    descriptor: str
    breakdown: ChargeBreakdown
    trace: list[dict]
    matched: list[str]
    check: str

    def as_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "descriptor": self.descriptor,
            "check": self.check,
            "breakdown": self.breakdown.as_dict(),
            "trace": self.trace,
            "matched_configs": self.matched,
        }

    def render_text(self) -> str:
        b = self.breakdown
        lines = [self.descriptor,
                 f"  initial {b.initial}, in {b.inflow}, out {b.outflow}, final {b.final}  {self.check}"]
        for row in self.trace:
            rule = row["rule"] or "-"
            lines.append(f"  {row['slot']:<6} {row['window']:<24} {rule:<12} {row['amount']:+d}")
        lines.append("  matched configurations: " + (", ".join(self.matched) if self.matched else "none"))
        return "\n".join(lines) + "\n"


def explain(descriptor: str, rules: RuleTable | None = None, configs: ConfigSet | None = None,
            semantics=Semantics.INCLUSIVE4, reflect: bool = True) -> Explanation:
    """Per-slot rule trace and configuration matches for a ring, 3-face or 3-vertex descriptor."""
    rules = rules or load_rules()
    semantics = _semantics(semantics)
    matcher = rules.matcher(semantics)
    if descriptor.startswith(("tri:", "star3:")):
        return _explain_local(descriptor, matcher, configs, semantics, reflect)
    ring = RingDescriptor.decode(descriptor)
    bad = consistency_check(ring)
    if bad is not None:
        raise ValueError(f"{descriptor} is inconsistent: {bad}")
    configs = configs if configs is not None else load_configs()
    d = ring.size
    kind = "P" if d == 5 else "H"
    trace = []
    for i in range(d):
        w = pv_window(ring, i)
        rule = matcher.lookup(kind, w)
        trace.append({"slot": f"v{i}", "window": render_window(w),
                      "rule": rule.text if rule else None, "amount": rule.amount if rule else 0})
    if d == 6:
        for i in range(6):
            if TRIANGLES >> ring.ftypes[i] & 1:
                w = t_window(ring, i)
                rule = matcher.lookup("T", w)
                trace.append({"slot": f"e{i}", "window": render_window(w),
                              "rule": rule.text if rule else None, "amount": rule.amount if rule else 0})
    b = net_charge_of_face(ring, matcher)
    matched = sorted(p.text() for p in configs.patterns if p.size == d and match_ring(p, ring, semantics, reflect))
    check = f"outflow {-b.net} {'<=' if b.final >= 0 else '>'} {60 * (d - 4)}"
    return Explanation(ring.encode(), b, trace, matched, check)


def _explain_local(descriptor, matcher, configs, semantics, reflect):
    if descriptor.startswith("tri:"):
        found = next((c for c in enumerate_triangle_contexts(semantics=semantics, reflect=reflect)
                      if c.encode() == descriptor), None)
    else:
        found = next((s for s in enumerate_vertex_stars(3, semantics=semantics, reflect=reflect)
                      if s.encode() == descriptor), None)
    if found is None:
        raise ValueError(f"{descriptor} is not a canonical consistent descriptor")
    if configs is None:
        configs = config_set(TRIANGLE_EXCLUSIONS if descriptor.startswith("tri:") else VERTEX_EXCLUSIONS,
                             "paper-text")
    from .enumeration import excluded_partial
    trace = []
    if isinstance(found, TriangleContext):
        b = triangle_breakdown(found, matcher)
        for i in range(3):
            w = found.t_window(i)
            rule = matcher.lookup("T", w)
            trace.append({"slot": f"H{i}", "window": render_window(w),
                          "rule": rule.text if rule else None, "amount": rule.amount if rule else 0})
    else:
        b = star_breakdown(found, matcher)
        for j in range(3):
            ring = found.face_ring(j)
            if ring is None:
                continue
            w = (ring.vmasks[0], ring.fmasks[0], ring.vmasks[1], ring.fmasks[1], ring.vmasks[2])
            rule = matcher.lookup("P" if ring.size == 5 else "H", w)
            trace.append({"slot": f"F{j}", "window": render_window(w),
                          "rule": rule.text if rule else None, "amount": rule.amount if rule else 0})
    matched = []
    for p in configs.patterns:
        if excluded_partial(found.rings(), [p], semantics, reflect):
            matched.append(p.text())
    check = f"inflow {b.net} {'>=' if b.final >= 0 else '<'} 60"
    return Explanation(descriptor, b, trace, sorted(matched), check)


# -- semantics audit -----------------------------------------------------

def semantics_diff(table: RuleTable | None = None) -> list[tuple[str, str, str | None, str | None]]:
    """Concrete windows whose matching rule depends on the reading of pattern '4'.

    Rows are (kind, window, inclusive rule, strict rule).
    """
    from .rules import consistent_windows
    table = table or load_rules()
    inc = table.matcher(Semantics.INCLUSIVE4)
    strict = table.matcher(Semantics.STRICT4)
    rows = []
    for kind in "TPH":
        # only windows with a v/u/w vertex can be read differently
        for w in consistent_windows(kind):
            if not any(TRIANGLE_RELAYS >> int(w[i]) & 1 for i in range(0, len(w), 2)):
                continue
            masks = tuple(1 << int(x) for x in w)
            a, b = inc.lookup(kind, masks), strict.lookup(kind, masks)
            if a != b:
                rows.append((kind, render_window(masks), a.text if a else None, b.text if b else None))
    return rows


def report_diff(a: VerificationReport, b: VerificationReport) -> tuple[list[str], list[str]]:
    """Violation descriptors only in ``b`` and only in ``a``."""
    da = {v["descriptor"] for v in a.violations}
    db = {v["descriptor"] for v in b.violations}
    return sorted(db - da), sorted(da - db)
