"""Running check profiles and rendering the results.

A :class:`Report` renders as JSON, as an aligned text table, or as TSV;
all three list the same statuses.  When a report directory is given, every
failing check whose witness is a pomset or a word also gets a PNG diagram.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, is_dataclass
from pathlib import Path
from typing import Any, Callable, Mapping

from .cfsm import SystemUnaware, check_system_termination_aware, reachable, synthesize_system
from .closure import ClosureWitness, check_ccp2, check_ccp3
from .errors import BoundExceeded, resolve_bound
from .language import (UnawareWitness, check_cc2, check_cc3, check_language_terminating, format_word,
                       language)
from .pomset import CommLabel, Pomset, is_msc, is_well_formed
from .specio import SpecDocument
from .termination import TerminationWitness, check_pomset_terminating
from .verdict import Verdict

HOLDS, FAILS, BOUND = "holds", "fails", "bound-exceeded"
EXIT_CODES = {HOLDS: 0, FAILS: 1, BOUND: 3}
CHECK_ORDER = ("well_formed", "msc", "ccp2", "ccp3", "terminating", "oracle_cc2", "oracle_cc3",
               "oracle_terminating", "synthesize", "deadlocks", "system_terminating")
DEFAULT_PROFILE = {"well_formed": True, "ccp2": True, "ccp3": True}


@dataclass
class CheckResult:
    name: str
    status: str
    summary: str = ""
    witness: Any = None
    stats: dict = field(default_factory=dict)
    seconds: float = 0.0
    figure: str | None = None


@dataclass
class Report:
    source: str
    profile: dict
    results: list[CheckResult]

    @property
    def status(self) -> str:
        statuses = {r.status for r in self.results}
        if BOUND in statuses:
            return BOUND
        return FAILS if FAILS in statuses else HOLDS

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def __getitem__(self, name: str) -> CheckResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "status": self.status,
            "profile": self.profile,
            "checks": [
                {"name": r.name, "status": r.status, "summary": r.summary, "witness": r.witness,
                 "stats": r.stats, "seconds": round(r.seconds, 4), "figure": r.figure}
                for r in self.results
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self, verbose: bool = False) -> str:
        rows = [("check", "status", "time", "detail")]
        for r in self.results:
            rows.append((r.name, r.status, f"{r.seconds:.3f}s", r.summary))
        widths = [max(len(row[k]) for row in rows) for k in range(3)]
        lines = [f"report for {self.source}"]
        for row in rows:
            lines.append("  ".join(c.ljust(w) for c, w in zip(row[:3], widths)) + "  " + row[3])
        if verbose:
            for r in self.results:
                if r.witness is not None:
                    lines.append(f"-- {r.name} witness")
                    lines.append(json.dumps(r.witness, indent=2))
                if r.stats:
                    lines.append(f"-- {r.name} stats: " + ", ".join(f"{k}={v}" for k, v in r.stats.items()))
                if r.figure:
                    lines.append(f"-- {r.name} figure: {r.figure}")
        lines.append(f"overall: {self.status}")
        return "\n".join(lines) + "\n"

    def to_tsv(self) -> str:
        lines = ["check\tstatus\tseconds\tdetail"]
        for r in self.results:
            lines.append(f"{r.name}\t{r.status}\t{r.seconds:.4f}\t{r.summary}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str = "text", verbose: bool = False) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "tsv":
            return self.to_tsv()
        return self.to_text(verbose)


# ---------------------------------------------------------------------------
# witness rendering
# ---------------------------------------------------------------------------


def pomset_struct(r: Pomset) -> dict:
    return {"events": {e: str(l) for e, l in zip(r.ids, r.labels)},
            "order": [list(p) for p in r.hasse_pairs()]}


def witness_struct(w) -> Any:
    if w is None:
        return None
    if isinstance(w, tuple) and all(isinstance(x, CommLabel) for x in w):
        return {"word": [str(l) for l in w]}
    if isinstance(w, ClosureWitness):
        return {"sources": dict(w.sources), "pomset": pomset_struct(w.pomset),
                "matching": [list(p) for p in w.matching]}
    if isinstance(w, TerminationWitness):
        return {"participant": w.participant, "r": w.r_id, "r_prime": w.r2_id,
                "injection": dict(w.injection), "blocking_label": str(w.blocking_label),
                "blocking_event": w.blocking_event}
    if isinstance(w, UnawareWitness):
        return {"participant": w.participant, "word": [str(l) for l in w.word],
                "longer": [str(l) for l in w.longer], "blocking_label": str(w.blocking_label)}
    if isinstance(w, SystemUnaware):
        return {"participant": w.participant, "configuration": w.configuration.describe(),
                "pending": str(w.pending), "trace": [str(l) for l in w.trace]}
    if is_dataclass(w):
        return json.loads(json.dumps(asdict(w), default=str))
    return str(w)


def witness_summary(w) -> str:
    if isinstance(w, tuple) and all(isinstance(x, CommLabel) for x in w):
        return format_word(w)
    if hasattr(w, "describe"):
        return w.describe()
    return str(w)


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------


def _participants(value, doc: SpecDocument) -> list[str]:
    if value is True:
        return list(doc.participants)
    return [str(a) for a in value]


def resolve_profile(doc: SpecDocument, profile=None) -> dict:
    if profile is None:
        return dict(doc.profiles.get("default", DEFAULT_PROFILE))
    if isinstance(profile, str):
        if profile not in doc.profiles:
            raise KeyError(f"document has no profile named {profile!r}")
        return dict(doc.profiles[profile])
    return dict(profile)


class _Lazy:
    """Shared language/system/graph, computed on first use."""

    def __init__(self, doc: SpecDocument, bound: int):
        self.doc, self.bound = doc, bound
        self._lang = self._sys = self._graph = None

    @property
    def lang(self):
        if self._lang is None:
            self._lang = language(self.doc.family, self.bound)
        return self._lang

    @property
    def system(self):
        if self._sys is None:
            self._sys = synthesize_system(self.lang, self.doc.participants)
        return self._sys

    @property
    def graph(self):
        if self._graph is None:
            self._graph = reachable(self.system, self.bound)
        return self._graph


def _structural(doc: SpecDocument, test: Callable, what: str) -> Verdict:
    for name, r in doc.family.members:
        res = test(r)
        if not res:
            detail = f"{name}: {what}"
            if hasattr(res, "item") and res.item:
                detail += f" (item {res.item}: {res.reason}; events {', '.join(res.events)})"
            return Verdict(False, detail)
    return Verdict(True)


def _check_fns(doc: SpecDocument, profile: dict, lazy: _Lazy, bound: int, parallel: bool) -> dict:
    R = doc.family
    fns: dict[str, Callable[[], Verdict]] = {
        "well_formed": lambda: _structural(doc, is_well_formed, "not well-formed"),
        "msc": lambda: _structural(doc, is_msc, "not a message sequence chart"),
        "ccp2": lambda: check_ccp2(R, bound, parallel=parallel),
        "ccp3": lambda: check_ccp3(R, bound, parallel=parallel),
        "terminating": lambda: check_pomset_terminating(R, _participants(profile["terminating"], doc), bound),
        "oracle_cc2": lambda: check_cc2(lazy.lang, doc.participants, bound),
        "oracle_cc3": lambda: check_cc3(lazy.lang, doc.participants, bound),
        "oracle_terminating": lambda: check_language_terminating(
            lazy.lang, _participants(profile["oracle_terminating"], doc)),
        "synthesize": lambda: Verdict(True, stats={
            a: len(lazy.system[a].states) for a in lazy.system.participants}),
        "deadlocks": lambda: (Verdict(True, stats={"configurations": len(lazy.graph)})
                              if not lazy.graph.deadlocks else
                              Verdict(False, lazy.graph.trace_to(min(lazy.graph.deadlocks)),
                                      stats={"configurations": len(lazy.graph),
                                             "deadlocks": len(lazy.graph.deadlocks)})),
        "system_terminating": lambda: check_system_termination_aware(
            lazy.system, _participants(profile["system_terminating"], doc), bound, lazy.graph),
    }
    return {name: fns[name] for name in CHECK_ORDER if profile.get(name)}


def _figure(name: str, witness, report_dir: Path | None) -> str | None:
    if report_dir is None or witness is None:
        return None
    from .plotting import plot_pomset, plot_word

    target = report_dir / f"{name}.png"
    if isinstance(witness, ClosureWitness):
        plot_pomset(witness.pomset, target, f"{name}: undominated closure pomset")
    elif isinstance(witness, tuple) and witness and all(isinstance(x, CommLabel) for x in witness):
        plot_word(witness, target, f"{name}: witness word")
    elif isinstance(witness, (UnawareWitness, SystemUnaware)):
        trace = witness.longer if isinstance(witness, UnawareWitness) else witness.trace
        if not trace:
            return None
        plot_word(trace, target, f"{name}: {witness.participant} may wait for {getattr(witness, 'blocking_label', getattr(witness, 'pending', ''))}")
    else:
        return None
    return str(target)


def run_checks(doc: SpecDocument, profile=None, bound=None, report_dir=None, parallel: bool = False) -> Report:
    """Run the checks selected by ``profile`` (a dict, a profile name, or None for the default)."""
    prof = resolve_profile(doc, profile)
    limit = resolve_bound(prof.get("bound") if bound is None else bound)
    out_dir = Path(report_dir) if report_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    lazy = _Lazy(doc, limit)
    fns = _check_fns(doc, prof, lazy, limit, parallel)

    def run(item) -> CheckResult:
        name, fn = item
        t0 = time.perf_counter()
        try:
            v = fn()
        except BoundExceeded as exc:
            return CheckResult(name, BOUND, str(exc), seconds=time.perf_counter() - t0)
        dt = time.perf_counter() - t0
        if v.holds:
            return CheckResult(name, HOLDS, "", None, dict(v.stats), dt)
        return CheckResult(name, FAILS, witness_summary(v.witness), witness_struct(v.witness), dict(v.stats), dt,
                           _figure(name, v.witness, out_dir))

    if parallel and len(fns) > 1:
        # checks share the lazily built language and system; build them once, up front
        try:
            if any(k in fns for k in ("deadlocks", "system_terminating")):
                _ = lazy.graph
            elif any(k in fns for k in ("oracle_cc2", "oracle_cc3", "oracle_terminating", "synthesize")):
                _ = lazy.lang
        except BoundExceeded:
            pass  # reported by the individual checks
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(run, fns.items()))
    else:
        results = [run(item) for item in fns.items()]
    source = str(doc.path) if doc.path is not None else "<memory>"
    return Report(source, prof, results)


def write_report(report: Report, report_dir, verbose: bool = False) -> list[Path]:
    """Write ``report.json``, ``report.txt`` and ``report.tsv`` into ``report_dir``."""
    d = Path(report_dir)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for fmt, ext in (("json", "json"), ("text", "txt"), ("tsv", "tsv")):
        p = d / f"report.{ext}"
        p.write_text(report.render(fmt, verbose), encoding="utf-8")
        paths.append(p)
    return paths


def profile_from_flags(flags: Mapping[str, Any]) -> dict:
    return {k: v for k, v in flags.items() if k in CHECK_ORDER and v not in (None, False, [], "")}
