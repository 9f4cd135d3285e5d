from __future__ import annotations

import random

import pytest

import oracles as O
from pomreal import (PomsetFamily, check_language_terminating, check_pomset_terminating, language,
                     termination_unaware, validate_pomset)
from pomreal.termination import TerminationWitness, verify_witness


def test_optional_tail_agrees_with_language(fixture_doc):
    R = fixture_doc("optional_tail").family
    L = language(R)
    for a in "ABC":
        assert check_pomset_terminating(R, [a]).holds == check_language_terminating(L, [a]).holds
    assert check_pomset_terminating(R, ["A"]).holds
    assert str(termination_unaware(R, "B").blocking_label) == "AB?y"
    assert str(termination_unaware(R, "C").blocking_label) == "BC?z"


def test_literal_reading_misses_optional_receiver(fixture_doc):
    """C does nothing in one member, so the minimal-element reading finds no injection source."""
    R = fixture_doc("optional_tail").family
    assert termination_unaware(R, "C", literal=True) is None
    assert termination_unaware(R, "C") is not None
    assert not check_language_terminating(language(R), ["C"]).holds


def test_early_stop_witness(fixture_doc):
    R = fixture_doc("early_stop").family
    w = termination_unaware(R, "B")
    assert isinstance(w, TerminationWitness)
    assert str(w.blocking_label) == "AB?w"
    assert verify_witness(R, w)
    assert "AB?w" in w.describe()


def test_witnesses_verify(fixture_doc):
    for name in ("optional_tail", "uncoordinated_choice", "early_stop"):
        R = fixture_doc(name).family
        for a in R.participants:
            w = termination_unaware(R, a)
            if w is not None:
                assert verify_witness(R, w)


def test_tampered_witness_rejected(fixture_doc):
    R = fixture_doc("early_stop").family
    w = termination_unaware(R, "B")
    bad = TerminationWitness(w.participant, w.r_id, w.r2_id, w.injection, w.blocking_label, w.injection[0][1]) \
        if w.injection else None
    if bad is not None:
        assert not verify_witness(R, bad)
    swapped = TerminationWitness(w.participant, w.r2_id, w.r_id, w.injection, w.blocking_label, w.blocking_event)
    assert not verify_witness(R, swapped)


def test_single_member_is_terminating():
    r = validate_pomset({"o": "AB!x", "i": "AB?x"}, [("o", "i")])
    assert check_pomset_terminating(PomsetFamily.of([r]), ["A", "B"]).holds


def test_optional_input_is_detected():
    short = validate_pomset({"o": "AB!x", "i": "AB?x"}, [("o", "i")])
    long = validate_pomset({"o": "AB!x", "i": "AB?x", "o2": "AB!y", "i2": "AB?y"},
                           [("o", "i"), ("o2", "i2"), ("o", "o2"), ("i", "i2")])
    R = PomsetFamily.of({"short": short, "long": long})
    v = check_pomset_terminating(R, ["B"])
    assert not v.holds
    assert (v.witness.r_id, v.witness.r2_id) == ("short", "long")
    assert str(v.witness.blocking_label) == "AB?y"
    # A only sends, so it always knows whether more is to come
    assert check_pomset_terminating(R, ["A"]).holds


def test_empty_participant_set():
    assert check_pomset_terminating(PomsetFamily.of({}), []).holds


@pytest.mark.slow
def test_implies_language_termination_on_random_families():
    rng = random.Random(99)
    checked = 0
    for _ in range(300):
        fam = O.random_family(rng, max_events=6)
        if not fam:
            continue
        R = PomsetFamily.of(fam)
        E = O.lang(fam)
        for a in R.participants:
            if check_pomset_terminating(R, [a]).holds:
                assert not O.termination_unaware(E, a)
            w = termination_unaware(R, a)
            if w is not None:
                assert verify_witness(R, w)
        checked += 1
    assert checked > 200
