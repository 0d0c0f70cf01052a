"""cyclicsix command line: rule audit, charge checks and debugging aids.

Exit status: 0 verified, 1 violations found, 2 usage or data error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

from .alphabet import Semantics, face_mask, vertex_mask
from .configs import (
    TRIANGLE_EXCLUSIONS,
    VERTEX_EXCLUSIONS,
    ConfigError,
    config_set,
    load_configs,
)
from .patterns import FacePattern, PatternError, match_ring, parse_pattern
from .ring import RingDescriptor, consistency_check
from .rules import AmbiguousRule, IndeterminateWindow, RuleFileError, load_rules, overlap_audit
from .verify import explain, verify_faces, verify_triangles, verify_vertices

EXIT_OK, EXIT_VIOLATIONS, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rules", metavar="PATH", help="rule file (default: embedded table)")
    common.add_argument("--configs", metavar="PATH", help="reducible-configuration file")
    common.add_argument("--semantics", choices=[s.value for s in Semantics], default="inclusive4",
                        help="reading of pattern '4' (default: inclusive4)")
    common.add_argument("--no-reflection", dest="reflect", action="store_false",
                        help="match up to rotation only")
    common.add_argument("--dmax", type=int, default=20, metavar="N", help="largest vertex degree checked")
    common.add_argument("--format", choices=["text", "json"], default="text")
    common.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes")
    common.add_argument("--complete", action="store_true",
                        help="assert the configuration file lists all 193 configurations")
    common.add_argument("--max-violations", type=int, default=1000, metavar="N",
                        help="violations listed in a report, 0 for all (default 1000)")

    parser = argparse.ArgumentParser(prog="cyclicsix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    sub.add_parser("check-rules", parents=[common], help="load the rules and run the overlap audit")
    sub.add_parser("verify-vertices", parents=[common], help="charge of vertices")
    sub.add_parser("verify-triangles", parents=[common], help="charge of 3-faces")
    faces = sub.add_parser("verify-faces", parents=[common], help="charge of 5- and 6-faces")
    faces.add_argument("--size", type=int, choices=[5, 6], required=True)
    m = sub.add_parser("match", parents=[common], help="match a pattern against a ring")
    m.add_argument("pattern")
    m.add_argument("descriptor")
    e = sub.add_parser("explain", parents=[common], help="rule trace for one descriptor")
    e.add_argument("descriptor")
    sub.add_parser("dump-rules", parents=[common], help="print the rule table")
    sub.add_parser("dump-configs", parents=[common], help="print the configuration set")
    return parser


def _emit(args, text: str, data) -> None:
    if args.format == "json":
        sys.stdout.write(json.dumps(data, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)


def _limit(args):
    if args.max_violations < 0:
        raise UsageError("--max-violations must be non-negative")
    return None if args.max_violations == 0 else args.max_violations


def _configs(args, default=None):
    if args.configs is None and default is not None:
        return config_set(default, "paper-text", "<hypotheses>")
    return load_configs(args.configs, complete=args.complete)


def _report(args, report) -> int:
    if args.format == "json":
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(report.render_text())
    print(f"elapsed {report.elapsed:.1f}s", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_VIOLATIONS


def cmd_check_rules(args, rules) -> int:
    counts = rules.counts()
    conflicts = overlap_audit(rules, Semantics(args.semantics))
    head = (f"{len(rules)} rules ({counts['T']} T / {counts['P']} P / {counts['H']} H), "
            f"overlap audit: {'clean' if not conflicts else f'{len(conflicts)} conflicts'}\n")
    text = head + "".join(f"  {c}\n" for c in conflicts)
    _emit(args, text, {
        "rules": len(rules), "counts": counts, "hash": rules.content_hash(), "semantics": args.semantics,
        "conflicts": [{"first": c.first.text, "second": c.second.text, "window": c.window} for c in conflicts],
    })
    return EXIT_OK if not conflicts else EXIT_VIOLATIONS


def cmd_match(args, rules) -> int:
    try:
        pattern = parse_pattern(args.pattern)
    except PatternError as exc:
        raise UsageError(str(exc)) from None
    ring = RingDescriptor.decode(args.descriptor)
    semantics = Semantics(args.semantics)
    if isinstance(pattern, FacePattern):
        if pattern.size != ring.size:
            raise UsageError(f"{pattern.kind}-pattern cannot describe a {ring.size}-face")
        hit = match_ring(pattern, ring, semantics, args.reflect)
        where = None
    else:
        if ring.size != 6:
            raise UsageError("T-patterns describe 6-faces")
        where = _t_edges(pattern, ring, semantics, args.reflect)
        hit = bool(where)
    text = f"{pattern.text()} {'matches' if hit else 'does not match'} {ring.encode()}"
    text += f" at edges {','.join(map(str, where))}\n" if where else "\n"
    _emit(args, text, {"pattern": pattern.text(), "descriptor": ring.encode(), "match": hit, "edges": where})
    return EXIT_OK if hit else EXIT_VIOLATIONS


def _t_edges(pattern, ring, semantics, reflect):
    chars = [pattern.vchars[0], pattern.fchars[0], pattern.vchars[1], pattern.fchars[1],
             pattern.vchars[2], pattern.fchars[2], pattern.vchars[3]]
    masks = [vertex_mask(c, semantics) if i % 2 == 0 else face_mask(c) for i, c in enumerate(chars)]
    orients = [masks, masks[::-1]] if reflect else [masks]
    edges = []
    vs, fs = ring.vtypes, ring.ftypes
    for e in range(6):
        window = [vs[(e - 1) % 6], fs[(e - 1) % 6], vs[e], fs[e], vs[(e + 1) % 6], fs[(e + 1) % 6], vs[(e + 2) % 6]]
        if any(all(m >> w & 1 for m, w in zip(o, window)) for o in orients):
            edges.append(e)
    return edges


def cmd_explain(args, rules) -> int:
    configs = load_configs(args.configs, complete=args.complete) if args.configs else None
    ex = explain(args.descriptor, rules, configs, Semantics(args.semantics), args.reflect)
    _emit(args, ex.render_text(), ex.as_dict())
    return EXIT_OK if ex.breakdown.final >= 0 else EXIT_VIOLATIONS


def cmd_dump_rules(args, rules) -> int:
    _emit(args, rules.serialize(), {
        "hash": rules.content_hash(),
        "rules": [{"kind": r.kind, "pattern": r.text, "amount": r.amount, "source": list(r.source)}
                  for r in rules],
    })
    return EXIT_OK


def cmd_dump_configs(args, rules) -> int:
    configs = load_configs(args.configs, complete=args.complete)
    print(configs.count_report(), file=sys.stderr)
    _emit(args, configs.serialize(), {
        "hash": configs.content_hash(),
        "pre_closure_count": configs.pre_closure_count,
        "post_closure_count": configs.post_closure_count,
        "configs": [{"pattern": e.pattern.text(), "provenance": e.provenance} for e in configs],
        "closure": [p.text() for p in configs.patterns],
    })
    return EXIT_OK


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        if args.jobs < 1:
            raise UsageError("--jobs must be positive")
        if args.dmax < 6:
            raise UsageError("--dmax must be at least 6")
        rules = load_rules(args.rules)
        semantics = Semantics(args.semantics)
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda msg, *a, **k: print(f"warning: {msg}", file=sys.stderr)
            if args.command == "check-rules":
                return cmd_check_rules(args, rules)
            if args.command == "verify-faces":
                return _report(args, verify_faces(args.size, rules, _configs(args), semantics, args.reflect,
                                                  args.jobs, _limit(args)))
            if args.command == "verify-triangles":
                return _report(args, verify_triangles(rules, _configs(args, TRIANGLE_EXCLUSIONS), semantics,
                                                      args.reflect, _limit(args)))
            if args.command == "verify-vertices":
                return _report(args, verify_vertices(rules, args.dmax, _configs(args, VERTEX_EXCLUSIONS),
                                                     semantics, args.reflect, _limit(args)))
            if args.command == "match":
                return cmd_match(args, rules)
            if args.command == "explain":
                return cmd_explain(args, rules)
            if args.command == "dump-rules":
                return cmd_dump_rules(args, rules)
            return cmd_dump_configs(args, rules)
    except (UsageError, RuleFileError, ConfigError, PatternError, ValueError) as exc:
        print(f"cyclicsix: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (AmbiguousRule, IndeterminateWindow) as exc:
        print(f"cyclicsix: rule table error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
