from __future__ import annotations

import itertools
import random
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from conftest import BIG
from pomreal import (Language, PomsetFamily, check_cc2, check_cc3, check_language_terminating,
                     count_linear_extensions, count_preceding, feasible_words, format_word, lab, language,
                     linearizations, parse_word, project_word, validate_pomset, word_complete, word_well_formed)
from pomreal.errors import BoundExceeded
from pomreal.language import find_word_with_projection


def strs(words) -> set:
    return {tuple(map(str, w)) for w in words}


def permutation_count(r) -> int:
    """Linear extensions by filtering all n! permutations."""
    below = O.strict_below(r)
    n = len(r)
    total = 0
    for perm in itertools.permutations(range(n)):
        pos = {e: k for k, e in enumerate(perm)}
        if all(pos[i] < pos[j] for j in range(n) for i in below[j]):
            total += 1
    return total


def distinct_word_count(r) -> int:
    """Distinct linearization words via a subset construction over ideal sets."""
    below = O.strict_below(r)
    n = len(r)
    pred = [sum(1 << i for i in below[j]) for j in range(n)]
    labels = [str(l) for l in r.labels]
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def count(states: frozenset) -> int:
        total = 1 if full in states else 0
        nxt: dict = {}
        for m in states:
            for i in range(n):
                if not m >> i & 1 and pred[i] & m == pred[i]:
                    nxt.setdefault(labels[i], set()).add(m | 1 << i)
        return total + sum(count(frozenset(v)) for v in nxt.values())

    return count(frozenset([0]))


# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------


def test_word_parse_and_format():
    w = parse_word("AB!x; AB?x  BC!y")
    assert len(w) == 3 and w[2] == lab("BC!y")
    assert format_word(w) == "AB!x AB?x BC!y"
    assert format_word(()) == "ε"
    assert parse_word(format_word(w)) == w


def test_word_well_formed_and_complete():
    assert word_well_formed(parse_word("AB!x AB?x AB!x"))
    assert not word_complete(parse_word("AB!x AB?x AB!x"))
    assert word_complete(parse_word("AB!x AB!x AB?x AB?x"))
    assert not word_well_formed(parse_word("AB?x AB!x"))
    assert not word_well_formed(parse_word("AB!x AB?y"))
    assert word_complete(())


def test_project_word_and_count_preceding():
    w = parse_word("AB!x BC!y AB?x AB!x")
    assert project_word(w, "A") == parse_word("AB!x AB!x")
    assert project_word(w, "B") == parse_word("BC!y AB?x")
    assert count_preceding(w, 3, lab("AB!x")) == 1
    assert count_preceding(w, 4, lab("AB!x")) == 2


# ---------------------------------------------------------------------------
# the Language container
# ---------------------------------------------------------------------------


def test_language_set_operations():
    a = Language.from_words([parse_word("AB!x AB?x"), parse_word("AB!x")])
    b = Language.from_words([parse_word("AB!x AB?x")])
    assert len(a) == 2 and len(b) == 1
    assert b.issubset(a) and not a.issubset(b)
    assert a.union(b) == a
    assert parse_word("AB!x") in a and parse_word("AB?x") not in a
    assert a.has_prefix(parse_word("AB!x")) and not a.has_prefix(parse_word("AB?x"))
    assert a.prefix_closure().count() == 3
    assert () in a.prefix_closure()
    assert a.max_length() == 2
    assert a.participants() == {"A", "B"}
    assert a.alphabet == {lab("AB!x"), lab("AB?x")}
    assert a.project("B") == Language.from_words([(), (lab("AB?x"),)])


def test_empty_language():
    e = Language.empty()
    assert len(e) == 0 and not e
    assert e == Language.from_words([])
    assert e.issubset(Language.from_words([()]))
    assert Language.from_words([()]) != e
    assert () not in e


def test_language_equality_is_structural():
    words = [parse_word("AB!x AB?x BA!y"), parse_word("BA!y AB!x AB?x"), parse_word("AB!x BA!y AB?x")]
    l1 = Language.from_words(words)
    l2 = Language.from_words(reversed(words))
    assert l1 == l2 and hash(l1) == hash(l2)
    assert strs(l1) == strs(words)


def test_words_bound():
    L = language(PomsetFamily.of([validate_pomset({f"e{k}": f"AB!{m}" for k, m in enumerate("abcdef")})]))
    assert L.count() == 720
    with pytest.raises(BoundExceeded):
        L.words(100)


# ---------------------------------------------------------------------------
# linearizations
# ---------------------------------------------------------------------------


def test_thread_linearizations_brute_force(fixture_doc):
    """Each 8-event thread of the two-thread example has 36 linear extensions."""
    doc = fixture_doc("parallel_threads")
    for name in ("thread_l", "thread_r"):
        r = doc.references[name]
        assert len(r) == 8
        assert permutation_count(r) == 36
        assert sum(1 for _ in O.linear_extensions(r)) == 36
        assert count_linear_extensions(r) == 36
        assert linearizations(r).count() == 36


def test_linearizations_match_oracle(fixture_doc):
    for name in ("implied_scenario", "optional_tail", "uncoordinated_choice", "early_stop"):
        for r in fixture_doc(name).family:
            assert strs(linearizations(r)) == O.lin_words(r)
            assert count_linear_extensions(r) == permutation_count(r)


def test_implied_scenario_language(fixture_doc):
    R = fixture_doc("implied_scenario").family
    L = language(R)
    assert L.count() == 332
    assert strs(L) == O.lang(R)


def test_parallel_threads_language_size(fixture_doc):
    """Distinct words of the two-thread pomset, counted by an independent subset construction."""
    r = fixture_doc("parallel_threads").family["r"]
    L = language(fixture_doc("parallel_threads").family, BIG)
    assert L.count() == 10_828_388
    assert distinct_word_count(r) == 10_828_388


def test_split_crossing_language_size(fixture_doc):
    doc = fixture_doc("split_crossing")
    L = language(doc.family, BIG)
    assert L.count() == 12_500_414
    whole = PomsetFamily.of({"crossed": doc.references["crossed"], "paired": doc.family["paired"]})
    assert language(whole, BIG).count() == 12_500_414


def test_language_bound(fixture_doc):
    with pytest.raises(BoundExceeded):
        language(fixture_doc("parallel_threads").family, 1000)
    L = language(fixture_doc("parallel_threads").family, 1000, count_words=False)
    assert L.count() > 1000


# ---------------------------------------------------------------------------
# closure conditions
# ---------------------------------------------------------------------------


def test_implied_scenario_implied_words(fixture_doc):
    doc = fixture_doc("implied_scenario")
    L = language(doc.family)
    v = check_cc2(L, exhaustive=True)
    assert not v.holds
    assert len(v.counterexamples) == 298
    assert strs(v.counterexamples) == O.cc2_violations(strs(L), doc.participants)
    assert feasible_words(L).count() == 630
    assert all(word_complete(w) and w not in L for w in v.counterexamples)


def test_cc2_witness_prefers_few_messages_in_flight(fixture_doc):
    L = language(fixture_doc("implied_scenario").family)
    w = check_cc2(L).witness
    inflight = peak = 0
    for l in w:
        inflight += 1 if l.is_output else -1
        peak = max(peak, inflight)
    assert peak == 1


def test_uncoordinated_choice_cc3_violations(fixture_doc):
    doc = fixture_doc("uncoordinated_choice")
    L = language(doc.family)
    assert check_cc2(L).holds
    v = check_cc3(L, exhaustive=True)
    assert not v.holds
    assert len(v.counterexamples) == 17
    assert strs(v.counterexamples) == O.cc3_violations(strs(L), doc.participants)
    assert v.witness in v.counterexamples


def test_realisable_fixtures_pass_both(fixture_doc):
    for name in ("optional_tail", "single_message", "early_stop"):
        L = language(fixture_doc(name).family)
        assert check_cc2(L).holds and check_cc3(L).holds


def test_cc_on_empty_language():
    # some participant has no projection to match, so nothing is feasible
    assert check_cc2(Language.empty(), ["A", "B"]).holds
    assert check_cc3(Language.empty(), ["A", "B"]).holds
    # with no participants at all every word is vacuously feasible, the empty word included
    v = check_cc2(Language.empty(), [])
    assert not v.holds and v.witness == ()


def test_feasible_words_include_the_language(fixture_doc):
    L = language(fixture_doc("early_stop").family)
    assert L.issubset(feasible_words(L))


@pytest.mark.slow
def test_oracles_agree_on_random_families():
    rng = random.Random(11)
    checked = failures = 0
    while checked < 150:
        fam = O.random_family(rng)
        if not fam:
            continue
        R = PomsetFamily.of(fam)
        L = language(R)
        if L.count() > 300:
            continue
        checked += 1
        E = O.lang(fam)
        assert strs(L) == E
        v2 = check_cc2(L, R.participants, exhaustive=True)
        bad2 = O.cc2_violations(E, R.participants)
        assert v2.holds == (not bad2)
        assert strs(v2.counterexamples) == bad2 or v2.holds
        v3 = check_cc3(L, R.participants, exhaustive=True)
        bad3 = O.cc3_violations(E, R.participants)
        assert v3.holds == (not bad3)
        assert strs(v3.counterexamples) == bad3 or v3.holds
        failures += (not v2.holds) + (not v3.holds)
        for a in R.participants:
            assert check_language_terminating(L, [a]).holds == (not O.termination_unaware(E, a))
    assert failures > 0


# ---------------------------------------------------------------------------
# termination
# ---------------------------------------------------------------------------


def test_optional_tail_language_termination(fixture_doc):
    L = language(fixture_doc("optional_tail").family)
    assert check_language_terminating(L, ["A"]).holds
    for a, blocking in (("B", "AB?y"), ("C", "BC?z")):
        v = check_language_terminating(L, [a])
        assert not v.holds
        w = v.witness
        assert w.participant == a and str(w.blocking_label) == blocking
        assert w.word in L and w.longer in L
        u, u2 = project_word(w.word, a), project_word(w.longer, a)
        assert u2[: len(u)] == u and u2[len(u)] == w.blocking_label


def test_empty_projection_is_terminating():
    L = Language.from_words([parse_word("AB!x AB?x")])
    assert check_language_terminating(L, ["C"]).holds


def test_find_word_with_projection(fixture_doc):
    L = language(fixture_doc("optional_tail").family)
    w = find_word_with_projection(L, "B", parse_word("AB?x"))
    assert w is not None and project_word(w, "B") == parse_word("AB?x")
    assert find_word_with_projection(L, "B", parse_word("AB?z")) is None


# ---------------------------------------------------------------------------
# the automaton behaves like a set of words
# ---------------------------------------------------------------------------

ALPHABET = [lab(t) for t in ("AB!x", "AB?x", "BA!y", "BA?y", "CA!x")]
word_sets = st.sets(st.lists(st.sampled_from(ALPHABET), max_size=5).map(tuple), max_size=12)


@settings(max_examples=150, deadline=None)
@given(word_sets, word_sets)
def test_language_matches_python_sets(xs, ys):
    a, b = Language.from_words(xs), Language.from_words(ys)
    assert a.words() == xs and a.count() == len(xs)
    assert a.union(b).words() == xs | ys
    assert a.issubset(b) == (xs <= ys)
    assert (a == b) == (xs == ys)
    assert a.prefix_closure().words() == {w[:k] for w in xs for k in range(len(w) + 1)}
    for p in ("A", "B", "C"):
        assert a.project(p).words() == {project_word(w, p) for w in xs}
    for w in ys:
        assert (w in a) == (w in xs)
        assert a.has_prefix(w) == any(v[: len(w)] == w for v in xs)
    assert a.max_length() == max((len(w) for w in xs), default=0) or not xs
