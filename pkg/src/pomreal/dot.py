"""Graphviz (DOT) export for pomsets, machines and configuration graphs.

Output is deterministic: nodes and edges are emitted in a fixed sorted
order, so files can be diffed and checked in as golden outputs.  Pomsets are
drawn as Hasse diagrams (only immediate-predecessor arrows), one cluster per
participant.
"""

from __future__ import annotations

from pathlib import Path

from .cfsm import CFSM, CommSystem, ConfigurationGraph, _state_str
from .errors import UnsupportedFormat
from .pomset import Pomset

FORMATS = ("dot", "gv")


def _q(text) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def pomset_dot(r: Pomset, name: str = "pomset") -> str:
    lines = [f"digraph {_q(name)} {{", "  rankdir=TB;", "  node [shape=box, fontname=\"Helvetica\"];"]
    by_subject: dict[str, list[int]] = {}
    for i, l in enumerate(r.labels):
        by_subject.setdefault(l.subject, []).append(i)
    for a in sorted(by_subject):
        lines.append(f"  subgraph {_q('cluster_' + a)} {{")
        lines.append(f"    label={_q(a)};")
        for i in sorted(by_subject[a], key=lambda i: r.ids[i]):
            lines.append(f"    {_q(r.ids[i])} [label={_q(r.labels[i])}];")
        lines.append("  }")
    for a, b in r.hasse_pairs():
        la, lb = r.label_of(a), r.label_of(b)
        style = "" if la.subject == lb.subject else " [style=dashed]"
        lines.append(f"  {_q(a)} -> {_q(b)}{style};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def cfsm_dot(m: CFSM) -> str:
    ids = {q: f"q{k}" for k, q in enumerate(m.states)}
    lines = [f"digraph {_q('cfsm_' + m.owner)} {{", "  rankdir=LR;", "  node [shape=circle];"]
    for q in m.states:
        attrs = [f"label={_q(_state_str(q))}"]
        if q in m.accepting:
            attrs.append("shape=doublecircle")
        if q == m.initial:
            attrs.append("style=bold")
        lines.append(f"  {ids[q]} [{', '.join(attrs)}];")
    for q, l, q2 in sorted(m.transitions, key=lambda t: (ids[t[0]], t[1], ids[t[2]])):
        lines.append(f"  {ids[q]} -> {ids[q2]} [label={_q(l)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_dot(g: ConfigurationGraph) -> str:
    lines = ["digraph \"configurations\" {", "  node [shape=box, fontsize=10];"]
    for k, s in enumerate(g.nodes):
        attrs = [f"label={_q(s.describe())}"]
        if k in g.accepting:
            attrs.append("peripheries=2")
        if k in g.deadlocks:
            attrs.append("color=red")
        if k == 0:
            attrs.append("style=bold")
        lines.append(f"  c{k} [{', '.join(attrs)}];")
    for k, l, j in sorted(g.edges, key=lambda e: (e[0], e[1], e[2])):
        lines.append(f"  c{k} -> c{j} [label={_q(l)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_dot(obj, name: str | None = None) -> str:
    if isinstance(obj, Pomset):
        return pomset_dot(obj, name or "pomset")
    if isinstance(obj, CFSM):
        return cfsm_dot(obj)
    if isinstance(obj, ConfigurationGraph):
        return graph_dot(obj)
    if isinstance(obj, CommSystem):
        return "".join(cfsm_dot(obj[a]) for a in obj.participants)
    raise TypeError(f"cannot export {type(obj).__name__} as a graph")


def export_graph(obj, fmt: str = "dot", path=None, name: str | None = None) -> str:
    """Render ``obj`` in ``fmt`` (DOT only) and write it to ``path`` when given."""
    if fmt.lower() not in FORMATS:
        raise UnsupportedFormat(f"unsupported graph format {fmt!r}; expected one of {', '.join(FORMATS)}")
    text = to_dot(obj, name)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
