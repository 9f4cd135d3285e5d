"""Command-line interface.

Exit codes: 0 every requested check holds, 1 some check fails, 2 input
error (unreadable, malformed or inconsistent document), 3 a resource bound
was exceeded.  ``FILE`` may also be ``fixture:NAME`` for a bundled example.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .cfsm import check_system_termination_aware, reachable, synthesize_system
from .dot import export_graph
from .errors import BoundExceeded, IntegrityError, ParseError, PomrealError, resolve_bound
from .language import format_word, language
from .pomset import is_complete, is_msc, is_well_formed, project
from .report import CHECK_ORDER, profile_from_flags, run_checks, write_report
from .specio import fixture_names, load_fixture, parse_spec

log = logging.getLogger("pomreal")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BOUND = 0, 1, 2, 3


def _load(spec: str):
    if spec.startswith("fixture:"):
        return load_fixture(spec.split(":", 1)[1])
    return parse_spec(spec)


def _names(text: str | None) -> list[str]:
    if not text:
        return []
    return [t.strip() for t in text.split(",") if t.strip()]


def cmd_validate(args) -> int:
    doc = _load(args.file)
    print(f"{doc.path}: {len(doc.family)} pomsets, participants {', '.join(doc.participants) or '-'}, "
          f"messages {', '.join(doc.messages) or '-'}")
    bad = 0
    for name, r in list(doc.family.members) + list(doc.references.items()):
        wf = is_well_formed(r)
        tag = "reference " if name in doc.references and name not in doc.family.names else ""
        line = f"  {tag}{name}: {len(r)} events, "
        if wf:
            line += f"well-formed, {'complete' if is_complete(r) else 'incomplete'}"
            line += ", MSC" if is_msc(r) else ""
        else:
            line += f"NOT well-formed (item {wf.item}: {wf.reason}; {', '.join(wf.events)})"
            bad += not tag
        print(line)
    return EXIT_FAIL if bad and args.strict else EXIT_OK


def cmd_project(args) -> int:
    doc = _load(args.file)
    r = project(doc.pomset(args.pomset), args.participant)
    if args.dot:
        sys.stdout.write(export_graph(r, "dot", name=f"{args.pomset}_{args.participant}"))
    else:
        print(r.describe())
    return EXIT_OK


def cmd_lang(args) -> int:
    doc = _load(args.file)
    fam = doc.family.subset(_names(args.pomsets)) if args.pomsets else doc.family
    L = language(fam, args.bound, count_words=not args.count)
    if args.count:
        print(L.count())
        return EXIT_OK
    if args.project:
        L = L.project(args.project)
    for w in sorted(L.words(args.bound), key=lambda w: (len(w), w)):
        print(format_word(w))
    return EXIT_OK


def cmd_check(args) -> int:
    doc = _load(args.file)
    flags = {
        "well_formed": args.well_formed, "msc": args.msc, "ccp2": args.ccp2, "ccp3": args.ccp3,
        "terminating": _names(args.terminating), "oracle_cc2": args.oracle_cc2, "oracle_cc3": args.oracle_cc3,
        "oracle_terminating": _names(args.oracle_terminating), "synthesize": args.synthesize,
        "deadlocks": args.deadlocks, "system_terminating": _names(args.system_terminating),
    }
    profile = profile_from_flags(flags)
    if args.all:
        profile = {k: True for k in CHECK_ORDER}
        for k in ("terminating", "oracle_terminating", "system_terminating"):
            profile[k] = list(doc.participants)
    if not profile:
        profile = args.profile  # None selects the document's default profile
    elif args.profile:
        log.warning("explicit check flags given; ignoring --profile %s", args.profile)
    report = run_checks(doc, profile, args.bound, args.report_dir, parallel=args.parallel)
    sys.stdout.write(report.render(args.format, args.verbose))
    if args.report_dir:
        write_report(report, args.report_dir, args.verbose)
    return report.exit_code


def cmd_synthesize(args) -> int:
    doc = _load(args.file)
    L = language(doc.family, args.bound)
    S = synthesize_system(L, doc.participants)
    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    for a in S.participants:
        m = S[a]
        print(f"{a}: {len(m.states)} states, {len(m.accepting)} accepting, {len(m.transitions)} transitions")
        if out is not None:
            body = {
                "owner": a,
                "states": [[str(l) for l in q] for q in m.states],
                "initial": [],
                "accepting": [[str(l) for l in q] for q in m.states if q in m.accepting],
                "transitions": [[[str(l) for l in q], str(l), [str(x) for x in q2]] for q, l, q2 in m.transitions],
            }
            (out / f"{a}.json").write_text(json.dumps(body, indent=2) + "\n", encoding="utf-8")
            if args.dot:
                export_graph(m, "dot", out / f"{a}.dot")
        elif args.dot:
            sys.stdout.write(export_graph(m, "dot"))
    return EXIT_OK


def cmd_simulate(args) -> int:
    doc = _load(args.file)
    L = language(doc.family, args.bound)
    S = synthesize_system(L, doc.participants)
    g = reachable(S, args.bound)
    print(f"{len(g)} configurations, {len(g.edges)} transitions, {len(g.accepting)} accepting, "
          f"{len(g.deadlocks)} deadlocks")
    status = EXIT_OK
    if args.deadlocks and g.deadlocks:
        status = EXIT_FAIL
        for k in sorted(g.deadlocks)[: args.limit]:
            print(f"  deadlock {g.nodes[k].describe()} after {format_word(g.trace_to(k))}")
    if args.system_terminating:
        v = check_system_termination_aware(S, _names(args.system_terminating), args.bound, g)
        print(f"termination awareness: {'holds' if v.holds else 'fails'}")
        if not v.holds:
            print(f"  {v.witness.describe()}")
            status = EXIT_FAIL
    if args.dot:
        export_graph(g, "dot", args.dot)
    return status


def cmd_fixtures(args) -> int:
    if args.name:
        doc = load_fixture(args.name)
        from .specio import dumps

        sys.stdout.write(dumps(doc))
    else:
        for name in fixture_names():
            print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pomreal", description="Realisability and termination checks for pomset families.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="show witnesses and counters in detail")
    sub = p.add_subparsers(dest="command", required=True)

    def with_file(sp):
        sp.add_argument("file", help="specification file (JSON) or fixture:NAME")
        sp.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
        sp.add_argument("--bound", type=int, default=None,
                        help="resource bound for enumerations (default: $POMREAL_BOUND or 1000000)")
        return sp

    sp = with_file(sub.add_parser("validate", help="parse a document and classify its pomsets"))
    sp.add_argument("--strict", action="store_true", help="exit 1 if a family member is not well-formed")
    sp.set_defaults(func=cmd_validate)

    sp = with_file(sub.add_parser("project", help="project one pomset on one participant"))
    sp.add_argument("--pomset", required=True)
    sp.add_argument("--participant", required=True)
    sp.add_argument("--dot", action="store_true", help="print DOT instead of text")
    sp.set_defaults(func=cmd_project)

    sp = with_file(sub.add_parser("lang", help="print the language of the family"))
    sp.add_argument("--pomsets", help="comma-separated subset of members")
    sp.add_argument("--project", metavar="PARTICIPANT", help="print the projected language instead")
    sp.add_argument("--count", action="store_true", help="only print the number of words")
    sp.set_defaults(func=cmd_lang)

    sp = with_file(sub.add_parser("check", help="run realisability and termination checks"))
    sp.add_argument("--well-formed", action="store_true")
    sp.add_argument("--msc", action="store_true")
    sp.add_argument("--ccp2", action="store_true")
    sp.add_argument("--ccp3", action="store_true")
    sp.add_argument("--terminating", metavar="A,B,..", help="pomset-level termination for these participants")
    sp.add_argument("--oracle-cc2", action="store_true")
    sp.add_argument("--oracle-cc3", action="store_true")
    sp.add_argument("--oracle-terminating", metavar="A,B,..")
    sp.add_argument("--synthesize", action="store_true")
    sp.add_argument("--deadlocks", action="store_true")
    sp.add_argument("--system-terminating", metavar="A,B,..")
    sp.add_argument("--all", action="store_true", help="every check, termination for all participants")
    sp.add_argument("--profile", help="named profile from the document")
    sp.add_argument("--format", choices=("text", "json", "tsv"), default="text")
    sp.add_argument("--report-dir", help="write report files and witness diagrams here")
    sp.add_argument("--parallel", action="store_true", help="run independent checks concurrently")
    sp.set_defaults(func=cmd_check)

    sp = with_file(sub.add_parser("synthesize", help="build the prefix-tree machines of the language"))
    sp.add_argument("--out", help="directory for one JSON (and DOT) file per machine")
    sp.add_argument("--dot", action="store_true")
    sp.set_defaults(func=cmd_synthesize)

    sp = with_file(sub.add_parser("simulate", help="explore the synthesized system"))
    sp.add_argument("--deadlocks", action="store_true", help="exit 1 if a deadlock is reachable")
    sp.add_argument("--system-terminating", metavar="A,B,..")
    sp.add_argument("--limit", type=int, default=5, help="deadlocks to print")
    sp.add_argument("--dot", metavar="PATH", help="write the configuration graph as DOT")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fixtures", help="list bundled example documents, or print one")
    sp.add_argument("name", nargs="?")
    sp.set_defaults(func=cmd_fixtures)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "bound", None) is not None and args.bound <= 0:
        parser.error("--bound must be positive")
    try:
        if hasattr(args, "bound"):
            args.bound = resolve_bound(args.bound)
        return args.func(args)
    except BoundExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except (ParseError, IntegrityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PomrealError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
