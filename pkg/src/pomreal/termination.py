"""Pomset-level termination awareness.

Participant ``a`` is termination-unaware for ``R`` when some member's
projection on ``a`` can be embedded by a label-preserving injection ``phi``
into another member's projection (possibly the same member) so that

* the union of the image order and the target order is still acyclic,
* the image of ``phi`` is downward closed in the target, and
* some minimal event of the target outside the image is an input.

Read this way, ``a`` has observed a complete run of one member while the
other member may still deliver an input to it, which is exactly the
word-level notion.  The purely minimal-element formulation of the second
condition (``literal=True``) is kept for comparison: it rejects empty
projections outright and so misses unaware participants whose entire
behaviour is optional, such as a final receiver.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .errors import BoundExceeded, CycleError, resolve_bound
from .pomset import CommLabel, Pomset, PomsetFamily, _bits, _topological, project
from .verdict import Verdict


@dataclass(frozen=True)
class TerminationWitness:
    participant: str
    r_id: str
    r2_id: str
    injection: tuple[tuple[str, str], ...]   # (event of r's projection, event of r2's projection)
    blocking_label: CommLabel
    blocking_event: str

    def describe(self) -> str:
        phi = ", ".join(f"{a}->{b}" for a, b in self.injection) or "empty"
        return (f"{self.participant} after {self.r_id} may still receive {self.blocking_label} "
                f"({self.blocking_event}) in {self.r2_id}; phi: {phi}")


def _union_below(src: Pomset, dst: Pomset, phi: list[int]) -> list[int] | None:
    """Strict-predecessor masks on ``dst`` for ``phi(<=src) ∪ <=dst``, or None if cyclic."""
    preds = list(dst.below)
    for j, pj in enumerate(phi):
        for i in _bits(src.below[j]):
            preds[pj] |= 1 << phi[i]
    try:
        order = _topological(len(dst), preds)
    except CycleError:
        return None
    closed = [0] * len(dst)
    for v in order:
        m = preds[v]
        for u in _bits(preds[v]):
            m |= closed[u]
        closed[v] = m
    return closed


def _minimal(mask: int, below: list[int]) -> list[int]:
    return [v for v in _bits(mask) if below[v] & mask == 0]


def _conditions(src, dst, phi, below, literal: bool):
    image = 0
    for pj in phi:
        image |= 1 << pj
    full = dst.full_mask
    residual = full & ~image
    if not residual:
        return None
    if literal:
        src_min = {phi[j] for j in range(len(src)) if src.below[j] == 0}
        if not set(_minimal(full, below)) <= src_min:
            return None
    elif any(dst.below[v] & ~image for v in _bits(image)):
        return None
    for v in _minimal(residual, below):
        if dst.labels[v].is_input:
            return v
    return None


def _injections(src: Pomset, dst: Pomset, limit: int):
    classes: dict[CommLabel, list[int]] = {}
    for i, l in enumerate(dst.labels):
        classes.setdefault(l, []).append(i)
    order = src.linear_order()
    phi = [-1] * len(src)
    count = 0

    def go(k, used):
        nonlocal count
        if k == len(order):
            count += 1
            if count > limit:
                raise BoundExceeded("number of injections", limit)
            yield list(phi)
            return
        e = order[k]
        for img in classes.get(src.labels[e], ()):
            if used >> img & 1:
                continue
            # a predecessor already mapped above the new image would close a cycle
            if any(dst.below[phi[f]] >> img & 1 for f in _bits(src.below[e])):
                continue
            phi[e] = img
            yield from go(k + 1, used | 1 << img)
            phi[e] = -1

    yield from go(0, 0)


def _members(R):
    if isinstance(R, PomsetFamily):
        return list(R.members)
    return [(f"r{k}", r) for k, r in enumerate(R)]


def termination_unaware(R, a: str, bound=None, *, literal: bool = False) -> TerminationWitness | None:
    """A witness that ``a`` may stop while an input is still pending, or None."""
    limit = resolve_bound(bound)
    members = _members(R)
    projs = [(name, project(r, a)) for name, r in members]
    for name, src in projs:
        for name2, dst in projs:
            if len(src) >= len(dst):
                continue
            have = Counter(dst.labels)
            if any(have[l] < c for l, c in Counter(src.labels).items()):
                continue
            for phi in _injections(src, dst, limit):
                below = _union_below(src, dst, phi)
                if below is None:
                    continue
                v = _conditions(src, dst, phi, below, literal)
                if v is not None:
                    inj = tuple((src.ids[j], dst.ids[phi[j]]) for j in range(len(src)))
                    return TerminationWitness(a, name, name2, inj, dst.labels[v], dst.ids[v])
    return None


def verify_witness(R, w: TerminationWitness) -> bool:
    """Replay a witness: labels preserved, injective, acyclic union, downward-closed image,
    and a minimal residual event carrying the blocking input label."""
    members = dict(_members(R))
    src = project(members[w.r_id], w.participant)
    dst = project(members[w.r2_id], w.participant)
    mapping = dict(w.injection)
    if set(mapping) != set(src.ids) or len(set(mapping.values())) != len(mapping):
        return False
    phi = [dst.index[mapping[e]] for e in src.ids]
    if any(src.labels[j] != dst.labels[phi[j]] for j in range(len(src))):
        return False
    below = _union_below(src, dst, phi)
    if below is None:
        return False
    image = sum(1 << p for p in phi)
    if any(dst.below[v] & ~image for v in _bits(image)):
        return False
    v = dst.index[w.blocking_event]
    residual = dst.full_mask & ~image
    return (residual >> v & 1 == 1 and below[v] & residual == 0
            and dst.labels[v] == w.blocking_label and w.blocking_label.is_input)


def check_pomset_terminating(R, participants, bound=None, *, literal: bool = False) -> Verdict:
    """No participant of ``participants`` is termination-unaware for ``R``."""
    checked = 0
    for a in sorted(participants):
        checked += 1
        w = termination_unaware(R, a, bound, literal=literal)
        if w is not None:
            return Verdict(False, w, stats={"participants": checked})
    return Verdict(True, stats={"participants": checked})
