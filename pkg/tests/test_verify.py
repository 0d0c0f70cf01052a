import hashlib
import json
from pathlib import Path

import pytest

import oracle
from cyclicsix.alphabet import Semantics
from cyclicsix.configs import config_set
from cyclicsix.enumeration import Corner, TriangleContext, enumerate_rings
from cyclicsix.ring import RingDescriptor
from cyclicsix.verify import (
    SCHEMA,
    FaceScorer,
    explain,
    max_profile_outflow,
    net_charge_of_face,
    profile_bound,
    report_diff,
    semantics_diff,
    slot_sends,
    triangle_breakdown,
    verify_faces,
    verify_triangles,
    verify_vertices,
)

GOLDEN = json.loads((Path(__file__).parent / "golden" / "reports.json").read_text())


def ring(text):
    return RingDescriptor.decode(text)


def digest(report):
    return hashlib.sha256("\n".join(v["descriptor"] for v in report.violations).encode()).hexdigest()


def test_6_vertex_between_triangles_feeds_the_face(matcher):
    b = net_charge_of_face(ring("H:4x6x4H4H4H4H"), matcher)
    (t,) = [t for t in b.inflows if t.payer == "F.v1"]
    assert t.amount == 40 and t.rule.text == "H:*T6T*"


def test_ring_without_rules_nets_zero(matcher):
    b = net_charge_of_face(ring("H:4Q4Q4Q4Q4Q4Q"), matcher)
    assert b.net == 0 and b.final == 120


def test_breakdown_against_naive_scanner(matcher, rules_text, rng):
    rules = oracle.read_rules(rules_text)
    scorer = FaceScorer(matcher)
    for _ in range(500):
        text = oracle.random_ring(rng)
        r = ring(text)
        b = net_charge_of_face(r, matcher)
        out, inflow, relayed = oracle.scan_face(text, rules)
        assert (b.outflow, b.inflow) == (out, inflow), text
        assert sum(t.amount for t in b.outflows if t.relay) == relayed
        assert scorer.outflow(r.vtypes, r.ftypes) == out - inflow


def test_breakdown_against_naive_scanner_strict(rules_text, table, rng):
    rules = oracle.read_rules(rules_text)
    m = table.matcher(Semantics.STRICT4)
    for _ in range(200):
        text = oracle.random_ring(rng, 6)
        b = net_charge_of_face(ring(text), m)
        assert (b.outflow, b.inflow) == oracle.scan_face(text, rules, strict=True)[:2]


def test_breakdown_net_matches_transfers(matcher, rng):
    for _ in range(100):
        b = net_charge_of_face(ring(oracle.random_ring(rng)), matcher)
        assert b.net == sum(t.amount for t in b.inflows) - sum(t.amount for t in b.outflows)


@pytest.fixture(scope="module")
def faces5():
    return verify_faces(5)


def test_faces5_golden(faces5):
    g = GOLDEN["faces5_default"]
    assert (faces5.checked_count, faces5.violation_count) == (g["checked"], g["violations"])
    assert digest(faces5) == g["sha256"]


def test_faces5_without_configs_golden():
    r = verify_faces(5, configs=config_set([]))
    g = GOLDEN["faces5_empty"]
    assert (r.checked_count, r.violation_count, digest(r)) == (g["checked"], g["violations"], g["sha256"])


def test_faces5_violations_really_exceed(faces5):
    for v in faces5.violations[:200]:
        assert v["final"] < 0
        out, inflow, _ = oracle.scan_face(v["descriptor"], oracle.read_rules(_rules_text()))
        assert out - inflow > 60


def _rules_text():
    from cyclicsix.rules import default_rules_text
    return default_rules_text()


def test_violation_list_cap_keeps_the_count(faces5):
    capped = verify_faces(5, max_violations=7)
    assert capped.violation_count == faces5.violation_count
    assert capped.violations == faces5.violations[:7]


def test_faces_monotone_in_configs():
    a = verify_faces(5, configs=config_set([]))
    b = verify_faces(5, configs=config_set(["P:v*3P3"]))
    c = verify_faces(5, configs=config_set(["P:v*3P3", "P:3Q3H"]))
    sa, sb, sc = ({v["descriptor"] for v in r.violations} for r in (a, b, c))
    assert sc <= sb <= sa
    assert len(sc) < len(sa)
    added, removed = report_diff(a, c)
    assert added == [] and len(removed) == len(sa - sc)


def test_6_faces_starve_without_configs():
    from cyclicsix.verify import _face_partition, _init_face_worker
    from cyclicsix.rules import load_rules

    _init_face_worker(6, load_rules(), (), Semantics.INCLUSIVE4, True, None)
    checked, bad, listed = _face_partition((3, 0, 3, 1))
    assert checked > 0 and bad > 0 and len(listed) == bad


def test_report_schema(faces5):
    d = json.loads(faces5.to_json())
    assert d["schema"] == SCHEMA
    assert set(d) >= {"lemma", "parameters", "checked_count", "violations", "versions"}
    assert set(d["versions"]) == {"rules", "configs"}
    v = d["violations"][0]
    assert set(v) >= {"descriptor", "net", "transfers"}
    assert "elapsed" not in d


def test_triangles_default_run_is_clean():
    r = verify_triangles()
    assert r.ok and r.checked_count > 0
    assert r.details["min_inflow"] == 60


def test_triangles_without_exclusions_golden():
    r = verify_triangles(exclusions=config_set([]))
    g = GOLDEN["triangles_empty"]
    assert (r.checked_count, r.violation_count, digest(r)) == (g["checked"], g["violations"], g["sha256"])
    golden = (Path(__file__).parent / "golden" / "triangles_empty.txt").read_text().splitlines()
    assert [f"{v['descriptor']} {v['net']}" for v in r.violations] == golden
    assert "tri:3(3),3(3),3(3)" in {v["descriptor"] for v in r.violations}


def test_triangle_with_three_4_vertices(matcher):
    # three T:*H4O4H*-free hexagon windows of the form (?, H, 4, x, 4, H, ?)
    ctx = TriangleContext(tuple(Corner(4, opposite=6) for _ in range(3)))
    b = triangle_breakdown(ctx, matcher)
    assert [t.amount for t in b.inflows if not t.relay] == [20, 20, 20]
    assert b.final == 0


def test_relay_from_opposite_face(matcher):
    # A0 is a 4-vertex with both triangle partners of degree 3: w relative to its 6-face
    ctx = TriangleContext((Corner(4, opposite=6), Corner(3, far=5), Corner(3, far=5)))
    b = triangle_breakdown(ctx, matcher)
    relays = [t for t in b.inflows if t.relay]
    assert [(t.amount, t.rule.text) for t in relays] == [(20, "H:**w**")]


def test_vertices_verified():
    r = verify_vertices()
    assert r.ok
    assert r.details["min_star_inflow"] == 60
    rows = {(x["d"], x["t"], x["q"], x["p"]): x for x in r.details["profiles"]}
    assert rows[5, 0, 0, 5]["max_outflow"] == 60 == rows[5, 0, 0, 5]["capacity"]
    assert rows[6, 2, 0, 4]["bound"] == 104


def test_slot_sends_reproduce_the_degree_argument(matcher):
    s5, s6 = slot_sends(matcher, 5), slot_sends(matcher, 6)
    assert s5["Q", "P", "Q"] == 12 and s5["H", "H", "H"] == 12
    assert s5["T", "H", "T"] == 24 and s6["T", "H", "T"] == 40
    assert s5["T", "H", "Q"] == 24 and s5["T", "H", "P"] == 18


def test_profile_dp_against_brute_force(matcher):
    from itertools import product

    sends = slot_sends(matcher, 6)
    for d in (5, 6, 7):
        best = {}
        for seq in product("TQPH", repeat=d):
            if any(seq[i] == "T" and (seq[i - 1] != "H" or seq[(i + 1) % d] != "H") for i in range(d)):
                continue
            total = sum(sends[seq[i - 1], seq[i], seq[(i + 1) % d]] for i in range(d) if seq[i] in "PH")
            prof = (seq.count("T"), seq.count("Q"), d - seq.count("T") - seq.count("Q"))
            best[prof] = max(best.get(prof, 0), total)
        assert max_profile_outflow(d, sends) == best


def test_profile_bound_formula():
    assert profile_bound(5, 0, 0, 5) == 60
    assert profile_bound(6, 2, 0, 4) == 104


def test_dmax_must_cover_degree_6():
    with pytest.raises(ValueError):
        verify_vertices(dmax=5)


def test_explain_lists_matched_config():
    ex = explain("H:oOoH4H4H4H4H")
    assert "H:o3o*********" in ex.matched


def test_explain_reproduces_breakdown(matcher, rng):
    for _ in range(50):
        text = oracle.random_ring(rng)
        ex = explain(text)
        b = net_charge_of_face(ring(text), matcher)
        assert ex.breakdown.as_dict() == b.as_dict()
        # signed rule amounts: positive leaves the face, negative enters it
        assert sum(row["amount"] for row in ex.trace) == -b.net


def test_explain_on_a_violation(faces5):
    v = faces5.violations[0]
    ex = explain(v["descriptor"])
    assert ex.breakdown.final == v["final"] < 0
    assert ">" in ex.check


def test_explain_triangle_and_star():
    ex = explain("tri:3(3),3(3),3(3)")
    assert ex.breakdown.final == -60
    assert ex.matched == ["H:o3o*********"]
    ex = explain("star3:6H6H6H")
    assert ex.breakdown.final >= 0


def test_explain_rejects_inconsistent_ring():
    with pytest.raises(ValueError, match="C2"):
        explain("H:4HwQ4H4H4H4H")


def test_semantics_diff_only_through_relay_vertices(table):
    rows = semantics_diff(table)
    assert rows
    for kind, window, inclusive, strict in rows:
        # only the inclusive reading can add a match, through a '4' slot showing v, u or w
        assert inclusive is not None and strict is None
        body = inclusive.split(":")[1]
        assert any(c == "4" and w in "vuw" for c, w in zip(body, window)) or any(
            c == "4" and w in "vuw" for c, w in zip(body, window[::-1]))
