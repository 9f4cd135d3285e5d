from __future__ import annotations

import re

import pytest

from pomreal import CFSM, CommSystem, lab, language, reachable, synthesize_system
from pomreal.dot import export_graph
from pomreal.errors import UnsupportedFormat
from pomreal.pomset import Pomset


def nodes(text):
    return [n for n in re.findall(r'^\s+("[^"]+"|\w+) \[', text, re.M) if n != "node"]


def edges(text):
    return re.findall(r"^\s+\S+ -> \S+", text, re.M)


def test_implied_scenario_hasse(fixture_doc):
    r = fixture_doc("implied_scenario").family["r_a"]
    text = export_graph(r, name="r_a")
    assert text.startswith('digraph "r_a" {')
    assert len(nodes(text)) == 8
    assert len(edges(text)) == 8
    assert text.count("style=dashed") == 4  # the four message arrows
    assert text.count("subgraph") == 4


def test_two_state_cfsm():
    m = CFSM("A", (0, 1), 0, frozenset([1]), ((0, lab("AB!x"), 1),))
    text = export_graph(m)
    assert len(nodes(text)) == 2
    assert len(edges(text)) == 1
    assert "doublecircle" in text and 'label="AB!x"' in text


def test_empty_pomset_header_only():
    text = export_graph(Pomset.empty())
    assert nodes(text) == [] and edges(text) == []
    assert text.splitlines()[0].startswith("digraph")
    assert text.rstrip().endswith("}")


def test_deterministic_and_written(fixture_doc, tmp_path):
    r = fixture_doc("uncoordinated_choice").family["r_a"]
    out = tmp_path / "r.dot"
    text = export_graph(r, "dot", out)
    assert out.read_text() == text == export_graph(r)


def test_configuration_graph(fixture_doc):
    S = synthesize_system(language(fixture_doc("uncoordinated_choice").family))
    g = reachable(S)
    text = export_graph(g)
    assert len(nodes(text)) == len(g)
    assert len(edges(text)) == len(g.edges)
    assert text.count("color=red") == len(g.deadlocks)


def test_system_exports_each_machine(fixture_doc):
    S = synthesize_system(language(fixture_doc("single_message").family))
    assert export_graph(S).count("digraph") == len(S.participants)
    assert isinstance(S, CommSystem)


def test_quoting():
    r = Pomset.build({'we"ird': "alice->bob!hi"})
    text = export_graph(r)
    assert '\\"' in text


def test_unsupported_format(fixture_doc):
    with pytest.raises(UnsupportedFormat):
        export_graph(fixture_doc("implied_scenario").family["r_a"], "png")
    with pytest.raises(TypeError):
        export_graph(42)
