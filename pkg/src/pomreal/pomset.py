"""Labelled pomsets over communication actions.

A :class:`Pomset` stores one concrete lposet (event ids, labels, order
edges).  Equality and hashing go through a canonical form, so two pomsets
compare equal exactly when they are label-preserving order isomorphic.
Events are addressed by position internally and by id at the API surface.
"""

from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .errors import (
    AmbiguousMatch,
    BoundExceeded,
    CycleError,
    DanglingEdge,
    DuplicateId,
    IntegrityError,
    LabelError,
    resolve_bound,
)
from .iso import canonical_form, canonical_order


class Direction(str, enum.Enum):
    OUT = "!"
    IN = "?"

    def __str__(self):
        return self.value


_COMPACT = re.compile(r"^(\w)(\w)([!?])(.+)$")
_ARROW = re.compile(r"^(.+?)->(.+?)([!?])([^!?]+)$")


@dataclass(frozen=True, order=True)
class CommLabel:
    """One communication action ``sender receiver (!|?) message``."""

    sender: str
    receiver: str
    direction: Direction
    message: str

    def __post_init__(self):
        if not self.sender or not self.receiver:
            raise LabelError("participant names must be non-empty")
        if not self.message:
            raise LabelError("message type must be non-empty")
        if self.sender == self.receiver:
            raise LabelError(f"self-channel {self.sender}{self.receiver} is not allowed")
        if not isinstance(self.direction, Direction):
            object.__setattr__(self, "direction", Direction(self.direction))

    @classmethod
    def parse(cls, text: str) -> "CommLabel":
        """Parse ``"AB!x"`` (one-letter participants) or ``"alice->bob?m"``."""
        text = text.strip()
        m = _ARROW.match(text) or _COMPACT.match(text)
        if m is None:
            raise LabelError(f"cannot parse communication label {text!r}")
        return cls(m.group(1), m.group(2), Direction(m.group(3)), m.group(4))

    @property
    def subject(self) -> str:
        return self.sender if self.direction is Direction.OUT else self.receiver

    @property
    def channel(self) -> tuple[str, str]:
        return (self.sender, self.receiver)

    @property
    def is_output(self) -> bool:
        return self.direction is Direction.OUT

    @property
    def is_input(self) -> bool:
        return self.direction is Direction.IN

    def dual(self) -> "CommLabel":
        other = Direction.IN if self.is_output else Direction.OUT
        return CommLabel(self.sender, self.receiver, other, self.message)

    def __str__(self):
        if len(self.sender) == 1 and len(self.receiver) == 1:
            return f"{self.sender}{self.receiver}{self.direction.value}{self.message}"
        return f"{self.sender}->{self.receiver}{self.direction.value}{self.message}"

    def __repr__(self):
        return f"CommLabel({str(self)!r})"


def lab(text: str) -> CommLabel:
    """Shorthand for :meth:`CommLabel.parse`."""
    return CommLabel.parse(text)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass
class SearchStats:
    """Instrumentation counters shared by the backtracking searches."""

    branch_points: int = 0
    nodes: int = 0

    def merge(self, other: "SearchStats"):
        self.branch_points += other.branch_points
        self.nodes += other.nodes


@dataclass(frozen=True, eq=False)
class Pomset:
    """A concrete lposet standing for its isomorphism class.

    Build instances with :func:`validate_pomset` (or :meth:`Pomset.build`);
    the constructor assumes ``edges`` is acyclic over valid indices.
    """

    ids: tuple[str, ...]
    labels: tuple[CommLabel, ...]
    edges: frozenset = field(default_factory=frozenset)

    @classmethod
    def build(cls, events, edges=()) -> "Pomset":
        return validate_pomset(events, edges)

    @classmethod
    def empty(cls) -> "Pomset":
        return cls((), (), frozenset())

    def __len__(self):
        return len(self.ids)

    @cached_property
    def index(self) -> dict[str, int]:
        return {e: i for i, e in enumerate(self.ids)}

    @cached_property
    def below(self) -> tuple[int, ...]:
        """Strict-predecessor bitmask of every event (transitive closure)."""
        n = len(self.ids)
        preds = [0] * n
        for i, j in self.edges:
            preds[j] |= 1 << i
        order = _topological(n, preds)
        closure = [0] * n
        for j in order:
            acc = preds[j]
            for i in _bits(preds[j]):
                acc |= closure[i]
            closure[j] = acc
        return tuple(closure)

    @cached_property
    def above(self) -> tuple[int, ...]:
        succ = [0] * len(self.ids)
        for j, preds in enumerate(self.below):
            for i in _bits(preds):
                succ[i] |= 1 << j
        return tuple(succ)

    @cached_property
    def cover_below(self) -> tuple[int, ...]:
        """Immediate-predecessor bitmask of every event (Hasse diagram)."""
        below = self.below
        out = []
        for j in range(len(self.ids)):
            indirect = 0
            for k in _bits(below[j]):
                indirect |= below[k]
            out.append(below[j] & ~indirect)
        return tuple(out)

    @cached_property
    def cover_above(self) -> tuple[int, ...]:
        succ = [0] * len(self.ids)
        for j, preds in enumerate(self.cover_below):
            for i in _bits(preds):
                succ[i] |= 1 << j
        return tuple(succ)

    @cached_property
    def canonical(self) -> tuple:
        return canonical_form(self.labels, self.below)

    @cached_property
    def full_mask(self) -> int:
        return (1 << len(self.ids)) - 1

    @cached_property
    def label_counts(self) -> tuple:
        return tuple(sorted(Counter(self.labels).items()))

    @cached_property
    def order_size(self) -> int:
        return sum(bin(m).count("1") for m in self.below)

    def __eq__(self, other):
        if not isinstance(other, Pomset):
            return NotImplemented
        if len(self) != len(other) or self.label_counts != other.label_counts:
            return False
        return self.canonical == other.canonical

    def __hash__(self):
        return hash(self.canonical)

    def lt(self, i: int, j: int) -> bool:
        return bool(self.below[j] >> i & 1)

    def leq(self, e: str, f: str) -> bool:
        """``e <= f`` in the reflexive order, addressed by event id."""
        i, j = self.index[e], self.index[f]
        return i == j or self.lt(i, j)

    def label_of(self, event_id: str) -> CommLabel:
        return self.labels[self.index[event_id]]

    def subjects(self) -> frozenset[str]:
        return frozenset(l.subject for l in self.labels)

    def participants(self) -> frozenset[str]:
        return frozenset(p for l in self.labels for p in l.channel)

    def restrict(self, mask: int) -> "Pomset":
        """Sub-lposet on the events in ``mask`` with the induced order."""
        keep = [i for i in range(len(self.ids)) if mask >> i & 1]
        pos = {i: k for k, i in enumerate(keep)}
        covers = self.cover_below_in(mask)
        edges = frozenset((pos[i], pos[j]) for j in keep for i in _bits(covers[j]))
        return Pomset(tuple(self.ids[i] for i in keep), tuple(self.labels[i] for i in keep), edges)

    def cover_below_in(self, mask: int) -> dict[int, int]:
        below = self.below
        out = {}
        for j in _bits(mask):
            mine = below[j] & mask
            indirect = 0
            for k in _bits(mine):
                indirect |= below[k]
            out[j] = mine & ~indirect
        return out

    def hasse_pairs(self) -> list[tuple[str, str]]:
        return sorted(
            (self.ids[i], self.ids[j]) for j in range(len(self.ids)) for i in _bits(self.cover_below[j])
        )

    def linear_order(self) -> list[int]:
        """One linear extension (stable w.r.t. event positions)."""
        return _topological(len(self.ids), list(self.below))

    def canonical_ids(self) -> list[str]:
        order, _ = canonical_order(self.labels, self.below)
        return [self.ids[i] for i in order]

    def renamed(self, mapping) -> "Pomset":
        return Pomset(tuple(mapping(e) for e in self.ids), self.labels, self.edges)

    def describe(self) -> str:
        events = ", ".join(f"{e}:{l}" for e, l in zip(self.ids, self.labels))
        arrows = ", ".join(f"{a}<{b}" for a, b in self.hasse_pairs())
        return f"{{{events}}} [{arrows}]"

    def __repr__(self):
        return f"Pomset({self.describe()})"


def _topological(n: int, preds) -> list[int]:
    remaining = list(preds)
    done = 0
    order = []
    while len(order) < n:
        progressed = False
        for j in range(n):
            if not done >> j & 1 and remaining[j] & ~done == 0:
                order.append(j)
                done |= 1 << j
                progressed = True
        if not progressed:
            raise _cycle_error(n, preds, done)
    return order


def _cycle_error(n, preds, done):
    # follow predecessors inside the unresolved part until a vertex repeats
    start = next(j for j in range(n) if not done >> j & 1)
    path, seen = [start], {start: 0}
    v = start
    while True:
        v = next(i for i in _bits(preds[v]) if not done >> i & 1)
        if v in seen:
            cyc = path[seen[v]:] + [v]
            return CycleError(list(reversed(cyc)))
        seen[v] = len(path)
        path.append(v)


def validate_pomset(raw_events, raw_edges=()) -> Pomset:
    """Build a :class:`Pomset` from ``{id: label}`` (or ``(id, label)`` pairs) and id edges."""
    items = raw_events.items() if isinstance(raw_events, Mapping) else raw_events
    ids: list[str] = []
    labels: list[CommLabel] = []
    seen = set()
    for eid, label in items:
        if eid in seen:
            raise DuplicateId(eid)
        seen.add(eid)
        if isinstance(label, str):
            label = CommLabel.parse(label)
        ids.append(eid)
        labels.append(label)
    index = {e: i for i, e in enumerate(ids)}
    edges = set()
    for edge in raw_edges:
        a, b = edge
        for end in (a, b):
            if end not in index:
                raise DanglingEdge(edge, end)
        if a == b:
            raise CycleError([a, a])
        edges.add((index[a], index[b]))
    preds = [0] * len(ids)
    for i, j in edges:
        preds[j] |= 1 << i
    try:
        _topological(len(ids), preds)
    except CycleError as exc:
        raise CycleError([ids[i] for i in exc.cycle]) from None
    return Pomset(tuple(ids), tuple(labels), frozenset(edges))


def hasse(r: Pomset) -> frozenset[tuple[str, str]]:
    """Immediate-predecessor pairs of ``r``."""
    return frozenset(r.hasse_pairs())


# ---------------------------------------------------------------------------
# matching and well-formedness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Matching:
    """Partial injective map from output events to their matching inputs."""

    pairs: tuple[tuple[str, str], ...] = ()

    def as_dict(self) -> dict[str, str]:
        return dict(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def __contains__(self, pair):
        return tuple(pair) in self.pairs


def _dual_covers(r: Pomset, i: int, upward: bool) -> list[int]:
    want = r.labels[i].dual()
    mask = r.cover_above[i] if upward else r.cover_below[i]
    return [j for j in _bits(mask) if r.labels[j] == want]


def matching_of(r: Pomset) -> Matching:
    pairs = []
    for i, l in enumerate(r.labels):
        if l.is_output:
            succ = _dual_covers(r, i, upward=True)
            if len(succ) > 1:
                raise AmbiguousMatch(
                    f"output {r.ids[i]} ({l}) has {len(succ)} matching immediate successors",
                    [r.ids[i]] + [r.ids[j] for j in succ],
                )
            if succ:
                pairs.append((r.ids[i], r.ids[succ[0]]))
        else:
            pred = _dual_covers(r, i, upward=False)
            if len(pred) != 1:
                raise AmbiguousMatch(
                    f"input {r.ids[i]} ({l}) has {len(pred)} matching immediate predecessors",
                    [r.ids[i]] + [r.ids[j] for j in pred],
                )
    return Matching(tuple(sorted(pairs)))


@dataclass(frozen=True)
class WellFormedness:
    ok: bool
    item: int | None = None
    events: tuple[str, ...] = ()
    reason: str = ""

    def __bool__(self):
        return self.ok


def is_well_formed(r: Pomset) -> WellFormedness:
    """Check the four matching conditions; report the first violated one."""
    n = len(r)
    match: dict[int, int] = {}
    for i, l in enumerate(r.labels):
        if l.is_output:
            succ = _dual_covers(r, i, upward=True)
            if len(succ) > 1:
                return WellFormedness(False, 1, tuple(r.ids[k] for k in [i] + succ),
                                      f"output {l} has several matching immediate successors")
            if succ:
                match[i] = succ[0]
    for i, l in enumerate(r.labels):
        if l.is_input:
            pred = _dual_covers(r, i, upward=False)
            if len(pred) != 1:
                return WellFormedness(False, 2, tuple(r.ids[k] for k in [i] + pred),
                                      f"input {l} has {len(pred)} matching immediate predecessors")
    for j in range(n):
        for i in _bits(r.cover_below[j]):
            if r.labels[i].subject != r.labels[j].subject and match.get(i) != j:
                return WellFormedness(False, 3, (r.ids[i], r.ids[j]),
                                      "cross-participant immediate predecessor is not a matching pair")
    for i in match:
        for k in match:
            if i != k and r.labels[i] == r.labels[k] and r.lt(i, k) and r.lt(match[k], match[i]):
                return WellFormedness(False, 4, (r.ids[i], r.ids[k], r.ids[match[i]], r.ids[match[k]]),
                                      "ordered outputs are matched by inputs in the opposite order")
    return WellFormedness(True)


def is_complete(r: Pomset) -> bool:
    return all(_dual_covers(r, i, upward=True) for i, l in enumerate(r.labels) if l.is_output)


def is_msc(r: Pomset) -> bool:
    if not is_well_formed(r) or not is_complete(r):
        return False
    for a in r.subjects():
        p = project(r, a)
        n = len(p)
        if any(bin(p.below[i] | p.above[i]).count("1") != n - 1 for i in range(n)):
            return False
    return True


# ---------------------------------------------------------------------------
# projection, prefixes, permissiveness
# ---------------------------------------------------------------------------


def subject_mask(r: Pomset, participant: str) -> int:
    mask = 0
    for i, l in enumerate(r.labels):
        if l.subject == participant:
            mask |= 1 << i
    return mask


def project(r: Pomset, participant: str) -> Pomset:
    return r.restrict(subject_mask(r, participant))


def ideals(r: Pomset, bound=None) -> list[int]:
    """All order ideals (downward-closed event sets) of ``r`` as bitmasks."""
    limit = resolve_bound(bound)
    below = r.below
    n = len(r)
    found = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for m in frontier:
            for i in range(n):
                if not m >> i & 1 and below[i] & ~m == 0:
                    m2 = m | 1 << i
                    if m2 not in found:
                        found.add(m2)
                        if len(found) > limit:
                            raise BoundExceeded("number of order ideals", limit)
                        nxt.append(m2)
        frontier = nxt
    return sorted(found, key=lambda m: (bin(m).count("1"), m))


def prefixes(r: Pomset, bound=None) -> frozenset[Pomset]:
    """Prefix pomsets of ``r`` (restrictions to order ideals), up to isomorphism."""
    return frozenset(r.restrict(m) for m in ideals(r, bound))


def is_prefix(p: Pomset, r: Pomset, bound=None) -> bool:
    if len(p) > len(r):
        return False
    want = Counter(p.labels)
    if any(Counter(r.labels)[l] < c for l, c in want.items()):
        return False
    for m in ideals(r, bound):
        if bin(m).count("1") != len(p):
            continue
        if Counter(r.labels[i] for i in _bits(m)) == want and r.restrict(m) == p:
            return True
    return False


def _is_chain(r: Pomset, events: list[int]) -> bool:
    return all(i == j or r.lt(i, j) or r.lt(j, i) for i in events for j in events)


def less_permissive(r: Pomset, r2: Pomset, stats: SearchStats | None = None) -> bool:
    """``r ⊑ r2``: same labelled events, and ``r`` orders at least what ``r2`` orders.

    Searches a label-preserving bijection ``psi`` from ``r2``'s events onto
    ``r``'s with ``e <= f`` in ``r2`` implying ``psi(e) <= psi(f)`` in ``r``.
    Label classes that are chains in ``r2`` are mapped rank by rank without
    branching; ``stats.branch_points`` counts genuine choice points.
    """
    if len(r) != len(r2) or r.label_counts != r2.label_counts or r.order_size < r2.order_size:
        return False
    n = len(r)
    classes_r: dict[CommLabel, list[int]] = {}
    classes_2: dict[CommLabel, list[int]] = {}
    for i, l in enumerate(r.labels):
        classes_r.setdefault(l, []).append(i)
    for i, l in enumerate(r2.labels):
        classes_2.setdefault(l, []).append(i)

    forced: dict[int, int] = {}
    for l, evs2 in classes_2.items():
        if len(evs2) > 1 and _is_chain(r2, evs2):
            evs = classes_r[l]
            if not _is_chain(r, evs):
                return False
            by_rank2 = sorted(evs2, key=lambda i: bin(r2.below[i]).count("1"))
            by_rank = sorted(evs, key=lambda i: bin(r.below[i]).count("1"))
            forced.update(zip(by_rank2, by_rank))
        elif len(evs2) == 1:
            forced[evs2[0]] = classes_r[l][0]

    order = r2.linear_order()
    psi = [-1] * n
    used = 0
    local = stats if stats is not None else SearchStats()

    def consistent(e: int, img: int) -> bool:
        for f in _bits(r2.below[e]):
            if not r.lt(psi[f], img):
                return False
        return True

    def go(k: int) -> bool:
        nonlocal used
        local.nodes += 1
        if k == n:
            return True
        e = order[k]
        if e in forced:
            cands = [forced[e]] if not used >> forced[e] & 1 else []
        else:
            cands = [i for i in classes_r[r2.labels[e]] if not used >> i & 1]
            if len(cands) > 1:
                local.branch_points += 1
        for img in cands:
            if consistent(e, img):
                psi[e] = img
                used |= 1 << img
                if go(k + 1):
                    return True
                used &= ~(1 << img)
                psi[e] = -1
        return False

    return go(0)


def concurrently_repeats(r: Pomset) -> frozenset[CommLabel]:
    out = set()
    n = len(r)
    for i in range(n):
        for j in range(i + 1, n):
            if r.labels[i] == r.labels[j] and not r.lt(i, j) and not r.lt(j, i):
                out.add(r.labels[i])
    return frozenset(out)


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PomsetFamily:
    """A finite, named set of pomsets over a declared participant/message universe."""

    members: tuple[tuple[str, Pomset], ...]
    participants: tuple[str, ...]
    messages: tuple[str, ...]

    @classmethod
    def of(cls, pomsets, participants: Iterable[str] | None = None,
           messages: Iterable[str] | None = None) -> "PomsetFamily":
        if isinstance(pomsets, Mapping):
            members = tuple(pomsets.items())
        else:
            members = tuple((f"r{k}", p) for k, p in enumerate(pomsets))
        names = [n for n, _ in members]
        if len(set(names)) != len(names):
            raise IntegrityError("duplicate pomset names in family")
        used_p = sorted({p for _, r in members for p in r.participants()})
        used_m = sorted({l.message for _, r in members for l in r.labels})
        parts = tuple(sorted(participants)) if participants is not None else tuple(used_p)
        msgs = tuple(sorted(messages)) if messages is not None else tuple(used_m)
        for name, r in members:
            for eid, l in zip(r.ids, r.labels):
                for p in l.channel:
                    if p not in parts:
                        raise IntegrityError(f"pomset {name!r}, event {eid!r}: undeclared participant {p!r}", p)
                if l.message not in msgs:
                    raise IntegrityError(f"pomset {name!r}, event {eid!r}: undeclared message {l.message!r}",
                                         l.message)
        return cls(members, parts, msgs)

    @property
    def pomsets(self) -> tuple[Pomset, ...]:
        return tuple(r for _, r in self.members)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.members)

    def __getitem__(self, name: str) -> Pomset:
        for n, r in self.members:
            if n == name:
                return r
        raise KeyError(name)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.pomsets)

    def subset(self, names: Iterable[str]) -> "PomsetFamily":
        keep = set(names)
        return PomsetFamily(tuple((n, r) for n, r in self.members if n in keep), self.participants, self.messages)
