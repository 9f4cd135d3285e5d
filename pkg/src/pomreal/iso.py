"""Canonical forms of finite labelled posets.

Events are integers ``0..n-1``; the order is given as a list of bitmasks
``below[i]`` holding the strict predecessors of ``i`` (transitively closed).
Labels only need to be hashable and totally ordered.

The canonical form is obtained by colour refinement followed by
individualisation/backtracking; the lexicographically least edge encoding
over all leaves of the search tree is kept.  Two labelled posets are
isomorphic iff their canonical forms are equal.
"""

from __future__ import annotations

from typing import Hashable, Sequence


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _above(below: Sequence[int]) -> list[int]:
    above = [0] * len(below)
    for j, preds in enumerate(below):
        for i in _bits(preds):
            above[i] |= 1 << j
    return above


def _refine(colors: list[int], below, above) -> list[int]:
    """Refine ``colors`` until stable.  Ordering of old colours is preserved."""
    n = len(colors)
    while True:
        sigs = [
            (
                colors[v],
                tuple(sorted(colors[u] for u in _bits(below[v]))),
                tuple(sorted(colors[u] for u in _bits(above[v]))),
            )
            for v in range(n)
        ]
        ranks = {s: k for k, s in enumerate(sorted(set(sigs)))}
        new = [ranks[s] for s in sigs]
        if len(ranks) == len(set(colors)):
            return new
        colors = new


def _encode(order: list[int], below) -> tuple:
    pos = {v: k for k, v in enumerate(order)}
    return tuple(sorted((pos[u], pos[v]) for v in order for u in _bits(below[v])))


def canonical_order(labels: Sequence[Hashable], below: Sequence[int]) -> tuple[list[int], tuple]:
    """Return ``(order, edges)``: a canonical event ordering and its edge encoding."""
    n = len(labels)
    if n == 0:
        return [], ()
    above = _above(below)
    keys = sorted(set(labels))
    rank = {lab: k for k, lab in enumerate(keys)}
    colors = _refine([rank[lab] for lab in labels], below, above)

    best: list = [None, None]

    def search(colors: list[int]):
        cells: dict[int, list[int]] = {}
        for v, c in enumerate(colors):
            cells.setdefault(c, []).append(v)
        if len(cells) == n:
            order = sorted(range(n), key=colors.__getitem__)
            enc = _encode(order, below)
            if best[1] is None or enc < best[1]:
                best[0], best[1] = order, enc
            return
        target = min((c for c in cells if len(cells[c]) > 1), key=lambda c: (len(cells[c]), c))
        cell = cells[target]
        # interchangeable events: any choice yields the same encoding
        first = cell[0]
        twins = all(below[v] == below[first] and above[v] == above[first] for v in cell)
        choices = cell[:1] if twins else cell
        for v in choices:
            # colours are even-spaced so v can be placed strictly before its cell
            indiv = [2 * c + 1 for c in colors]
            indiv[v] = 2 * target
            search(_refine(indiv, below, above))

    search(colors)
    return best[0], best[1]


def canonical_form(labels: Sequence[Hashable], below: Sequence[int]) -> tuple:
    order, edges = canonical_order(labels, below)
    return tuple(labels[v] for v in order), edges
