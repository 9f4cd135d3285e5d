"""Word- and language-level notions: linearizations, feasibility, CC2, CC3, termination.

Finite languages are kept as minimal deterministic acyclic automata
(hash-consed, trimmed), which is what makes the 16-event examples
tractable: their languages run to tens of millions of words.  Membership,
prefix tests, counting, projection and equality all work on the automaton;
:meth:`Language.words` materialises the explicit set when it is small.

The closure checks search candidate words as interleavings of the
per-participant projections, tracking in-flight messages as per-channel
counts (multiset buffers), so only well-formed candidates are generated.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import BoundExceeded, resolve_bound
from .pomset import CommLabel, Pomset, PomsetFamily
from .verdict import Verdict

Word = tuple  # tuple[CommLabel, ...]


class _Builder:
    """Hash-consing node table: equal (final, children) signatures share one node."""

    def __init__(self):
        self.nodes: list[tuple[bool, tuple]] = []
        self.table: dict = {}

    def make(self, final: bool, children) -> int | None:
        kids = tuple(sorted((l, c) for l, c in children.items() if c is not None))
        if not final and not kids:
            return None
        sig = (final, kids)
        nid = self.table.get(sig)
        if nid is None:
            nid = len(self.nodes)
            self.nodes.append(sig)
            self.table[sig] = nid
        return nid


class Language:
    """A finite set of words over :class:`CommLabel`.

    Node ids are topologically sorted (children before parents), every node
    reaches an accepting node, and no two nodes have the same signature.
    """

    def __init__(self, nodes: Sequence[tuple[bool, tuple]], root: int | None):
        self._nodes = list(nodes)
        self._root = root

    # construction -------------------------------------------------------

    @classmethod
    def empty(cls) -> "Language":
        return cls([], None)

    @classmethod
    def from_words(cls, words: Iterable[Sequence[CommLabel]]) -> "Language":
        trie: dict = {}
        end = object()
        for w in words:
            node = trie
            for l in w:
                node = node.setdefault(l, {})
            node[end] = True
        b = _Builder()

        def conv(node) -> int | None:
            return b.make(end in node, {l: conv(c) for l, c in node.items() if l is not end})

        root = conv(trie) if trie else None
        return cls(b.nodes, root)

    # node access ----------------------------------------------------------

    @cached_property
    def _succ(self) -> list[dict]:
        return [dict(kids) for _, kids in self._nodes]

    def _final(self, node: int) -> bool:
        return self._nodes[node][0]

    def _edges(self, node: int) -> tuple:
        return self._nodes[node][1]

    def _step(self, node: int | None, label: CommLabel) -> int | None:
        if node is None:
            return None
        return self._succ[node].get(label)

    @property
    def states(self) -> int:
        return len(self._nodes)

    # set interface --------------------------------------------------------

    def _walk(self, word) -> int | None:
        node = self._root
        for l in word:
            node = self._step(node, l)
            if node is None:
                return None
        return node

    def __contains__(self, word) -> bool:
        node = self._walk(word)
        return node is not None and self._final(node)

    def has_prefix(self, word) -> bool:
        """True iff ``word`` is a prefix of some member."""
        return self._walk(word) is not None

    @cached_property
    def _counts(self) -> list[int]:
        counts = []
        for final, kids in self._nodes:
            counts.append(int(final) + sum(counts[c] for _, c in kids))
        return counts

    def count(self) -> int:
        return 0 if self._root is None else self._counts[self._root]

    def __len__(self):
        return self.count()

    def __bool__(self):
        return self._root is not None

    def __iter__(self):
        if self._root is None:
            return
        stack = [(self._root, ())]
        while stack:
            node, word = stack.pop()
            if self._final(node):
                yield word
            for l, c in reversed(self._edges(node)):
                stack.append((c, word + (l,)))

    def words(self, bound=None) -> frozenset:
        limit = resolve_bound(bound)
        if self.count() > limit:
            raise BoundExceeded("number of words", limit)
        return frozenset(self)

    @cached_property
    def _canonical(self) -> tuple:
        if self._root is None:
            return ()
        ids: dict[int, int] = {}
        order = []
        stack = [self._root]
        while stack:
            node = stack.pop()
            if node in ids:
                continue
            ids[node] = len(order)
            order.append(node)
            for _, c in reversed(self._edges(node)):
                if c not in ids:
                    stack.append(c)
        return tuple((self._final(n), tuple((l, ids[c]) for l, c in self._edges(n))) for n in order)

    def __eq__(self, other):
        if isinstance(other, (set, frozenset)):
            return self.count() == len(other) and all(w in self for w in other)
        if not isinstance(other, Language):
            return NotImplemented
        return self.count() == other.count() and self._canonical == other._canonical

    def __hash__(self):
        return hash(self._canonical)

    def issubset(self, other: "Language") -> bool:
        seen = set()

        def sub(n1, n2) -> bool:
            if n2 is None:
                return False
            if (n1, n2) in seen:
                return True
            if self._final(n1) and not other._final(n2):
                return False
            for l, c in self._edges(n1):
                if not sub(c, other._step(n2, l)):
                    return False
            seen.add((n1, n2))
            return True

        return self._root is None or sub(self._root, other._root)

    __le__ = issubset

    def union(self, other: "Language") -> "Language":
        b = _Builder()
        memo: dict = {}

        def go(n1, n2):
            key = (n1, n2)
            if key in memo:
                return memo[key]
            final = (n1 is not None and self._final(n1)) or (n2 is not None and other._final(n2))
            labels = set()
            if n1 is not None:
                labels.update(l for l, _ in self._edges(n1))
            if n2 is not None:
                labels.update(l for l, _ in other._edges(n2))
            nid = b.make(final, {l: go(self._step(n1, l), other._step(n2, l)) for l in labels})
            memo[key] = nid
            return nid

        if self._root is None and other._root is None:
            return Language.empty()
        return Language(b.nodes, go(self._root, other._root))

    __or__ = union

    # derived languages ----------------------------------------------------

    def prefix_closure(self) -> "Language":
        if self._root is None:
            return Language.empty()
        b = _Builder()
        new: list[int] = []
        for _, kids in self._nodes:
            new.append(b.make(True, {l: new[c] for l, c in kids}))
        return Language(b.nodes, new[self._root])

    def project(self, participant: str) -> "Language":
        """Element-wise projection onto the events whose subject is ``participant``."""
        if self._root is None:
            return Language.empty()
        suffixes: list[frozenset] = []
        for final, kids in self._nodes:
            acc = {()} if final else set()
            for l, c in kids:
                if l.subject == participant:
                    acc.update((l,) + w for w in suffixes[c])
                else:
                    acc.update(suffixes[c])
            suffixes.append(frozenset(acc))
        return Language.from_words(suffixes[self._root])

    @cached_property
    def alphabet(self) -> frozenset:
        return frozenset(l for _, kids in self._nodes for l, _ in kids)

    def participants(self) -> frozenset[str]:
        return frozenset(p for l in self.alphabet for p in l.channel)

    def max_length(self) -> int:
        depth: list[int] = []
        for _, kids in self._nodes:
            depth.append(max((depth[c] + 1 for _, c in kids), default=0))
        return 0 if self._root is None else depth[self._root]

    def __repr__(self):
        return f"<Language: {self.count()} words, {self.states} states>"


# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------


def project_word(word: Sequence[CommLabel], participant: str) -> Word:
    return tuple(l for l in word if l.subject == participant)


def _balance(word) -> Counter | None:
    pending: Counter = Counter()
    for l in word:
        key = (l.sender, l.receiver, l.message)
        if l.is_output:
            pending[key] += 1
        else:
            if pending[key] == 0:
                return None
            pending[key] -= 1
    return pending


def word_well_formed(word: Sequence[CommLabel]) -> bool:
    """No input ever outnumbers the outputs with the same channel and message."""
    return _balance(word) is not None


def word_complete(word: Sequence[CommLabel]) -> bool:
    pending = _balance(word)
    return pending is not None and not any(pending.values())


def count_preceding(word: Sequence[CommLabel], position: int, label: CommLabel) -> int:
    """Occurrences of ``label`` strictly before ``position``."""
    return sum(1 for l in word[:position] if l == label)


def parse_word(text: str) -> Word:
    """``"AB!x AB?x"`` (or ``;``-separated) to a word."""
    parts = text.replace(";", " ").replace("·", " ").split()
    return tuple(CommLabel.parse(p) for p in parts)


def format_word(word: Sequence[CommLabel]) -> str:
    return " ".join(map(str, word)) if word else "ε"


# ---------------------------------------------------------------------------
# pomset languages
# ---------------------------------------------------------------------------


def linearizations(r: Pomset, bound=None) -> Language:
    """All linearizations of ``r``, by explicit enumeration of linear extensions."""
    limit = resolve_bound(bound)
    below, labels, full, n = r.below, r.labels, r.full_mask, len(r)
    words = set()
    count = 0
    prefix: list = []

    def go(mask):
        nonlocal count
        if mask == full:
            count += 1
            if count > limit:
                raise BoundExceeded("number of linearizations", limit)
            words.add(tuple(prefix))
            return
        for i in range(n):
            if not mask >> i & 1 and below[i] & ~mask == 0:
                prefix.append(labels[i])
                go(mask | 1 << i)
                prefix.pop()

    go(0)
    return Language.from_words(words)


def count_linear_extensions(r: Pomset) -> int:
    """Number of linear extensions, by dynamic programming over order ideals."""
    below, full, n = r.below, r.full_mask, len(r)
    memo = {full: 1}

    def go(mask):
        if mask in memo:
            return memo[mask]
        total = sum(go(mask | 1 << i) for i in range(n) if not mask >> i & 1 and below[i] & ~mask == 0)
        memo[mask] = total
        return total

    return go(0)


def language(R, bound=None, count_words: bool = True) -> Language:
    """``L(R)``: the union of the linearizations of every member of ``R``.

    Built directly as an automaton whose states are sets of (member, ideal)
    pairs, so shared interleavings are never enumerated.  ``bound`` caps the
    automaton size and, unless ``count_words`` is false, the number of words.
    """
    limit = resolve_bound(bound)
    pomsets = R.pomsets if isinstance(R, PomsetFamily) else tuple(R)
    if not pomsets:
        return Language.empty()
    b = _Builder()
    memo: dict = {}
    moves_cache: dict = {}

    def moves(idx, mask):
        key = (idx, mask)
        out = moves_cache.get(key)
        if out is None:
            r = pomsets[idx]
            below = r.below
            out = tuple(
                (r.labels[i], mask | 1 << i)
                for i in range(len(r))
                if not mask >> i & 1 and below[i] & ~mask == 0
            )
            moves_cache[key] = out
        return out

    def build(state):
        nid = memo.get(state, -1)
        if nid != -1:
            return nid
        final = False
        succ: dict = {}
        for idx, mask in state:
            if mask == pomsets[idx].full_mask:
                final = True
            for l, m2 in moves(idx, mask):
                succ.setdefault(l, set()).add((idx, m2))
        nid = b.make(final, {l: build(frozenset(s)) for l, s in succ.items()})
        memo[state] = nid
        if len(memo) > limit:
            raise BoundExceeded("language automaton size", limit)
        return nid

    root = build(frozenset((i, 0) for i in range(len(pomsets))))
    lang = Language(b.nodes, root)
    if count_words and lang.count() > limit:
        raise BoundExceeded("number of words", limit)
    return lang


# ---------------------------------------------------------------------------
# feasibility search
# ---------------------------------------------------------------------------


class _Interleavings:
    """Depth-first search over interleavings of per-participant projections.

    A search state is (projection nodes, in-flight counts, node of ``L``);
    inputs are only taken when a matching message is in flight, so every
    generated word is well-formed.
    """

    def __init__(self, L: Language, participants, limit: int):
        self.L = L
        self.parts = tuple(sorted(participants))
        self.proj = [L.project(a) for a in self.parts]
        keys = sorted({(l.sender, l.receiver, l.message) for l in L.alphabet})
        self.slot = {k: i for i, k in enumerate(keys)}
        self.limit = limit
        self.explored = 0

    def start(self):
        roots = tuple(p._root for p in self.proj)
        if any(r is None for r in roots):
            return None
        return roots, (0,) * len(self.slot), self.L._root

    def moves(self, state, cap=None):
        nodes, counts, lnode = state
        inflight = sum(counts)
        out = []
        for k, (p, node) in enumerate(zip(self.proj, nodes)):
            for l, child in p._edges(node):
                s = self.slot[(l.sender, l.receiver, l.message)]
                if l.is_input:
                    if counts[s] == 0:
                        continue
                    new = counts[:s] + (counts[s] - 1,) + counts[s + 1:]
                else:
                    if cap is not None and inflight >= cap:
                        continue
                    new = counts[:s] + (counts[s] + 1,) + counts[s + 1:]
                nodes2 = nodes[:k] + (child,) + nodes[k + 1:]
                out.append((l, (nodes2, new, self.L._step(lnode, l))))
        out.sort(key=lambda t: t[0])
        return out

    def complete(self, state) -> bool:
        nodes, counts, _ = state
        return not any(counts) and all(p._final(n) for p, n in zip(self.proj, nodes))

    def tick(self):
        self.explored += 1
        if self.explored > self.limit:
            raise BoundExceeded("feasibility search states", self.limit)

    def find(self, violates, cap=None):
        """Lexicographically least word reaching a violating state, or None."""
        init = self.start()
        if init is None:
            return None
        seen = set()
        path: list = []

        def dfs(state):
            if state in seen:
                return False
            seen.add(state)
            self.tick()
            if violates(state):
                return True
            for l, nxt in self.moves(state, cap):
                path.append(l)
                if dfs(nxt):
                    return True
                path.pop()
            return False

        return tuple(path) if dfs(init) else None

    def enumerate(self, accept, bound):
        init = self.start()
        if init is None:
            return set()
        out = set()
        path: list = []

        def dfs(state):
            self.tick()
            if accept(state):
                out.add(tuple(path))
                if len(out) > bound:
                    raise BoundExceeded("number of feasible words", bound)
            for l, nxt in self.moves(state):
                path.append(l)
                dfs(nxt)
                path.pop()

        dfs(init)
        return out

    def violations(self, violates, stop: bool, bound: int) -> list:
        """Every violating word (``stop``: do not extend a word past its first violation)."""
        init = self.start()
        if init is None:
            return []
        out = []
        path: list = []

        def dfs(state):
            self.tick()
            if violates(state):
                out.append(tuple(path))
                if len(out) > bound:
                    raise BoundExceeded("number of counterexamples", bound)
                if stop:
                    return
            for l, nxt in self.moves(state):
                path.append(l)
                dfs(nxt)
                path.pop()

        dfs(init)
        return sorted(out, key=lambda w: (len(w), w))

    def least_inflight(self, violates):
        """Violating word with the smallest peak number of in-flight messages."""
        if self.find(violates) is None:
            return None
        cap = 1
        while True:
            w = self.find(violates, cap)
            if w is not None:
                return w
            cap += 1


def feasible_words(L: Language, participants=None, complete_only: bool = True, bound=None) -> Language:
    """Well-formed (and complete) words whose every projection is a projection of a word of ``L``."""
    limit = resolve_bound(bound)
    parts = L.participants() if participants is None else participants
    search = _Interleavings(L, parts, limit * 64)
    if complete_only:
        accept = search.complete
    else:
        def accept(state):
            return all(p._final(n) for p, n in zip(search.proj, state[0]))
    return Language.from_words(search.enumerate(accept, limit))


def check_cc2(L: Language, participants=None, bound=None, exhaustive: bool = False) -> Verdict:
    """Every well-formed, complete, feasible word is already in ``L``.

    The witness is an implied word outside ``L`` with the fewest messages in
    flight at any time, ties broken lexicographically.  ``exhaustive`` also
    lists every implied word in ``counterexamples``.
    """
    limit = resolve_bound(bound)
    parts = L.participants() if participants is None else participants
    search = _Interleavings(L, parts, limit)

    def violates(state):
        lnode = state[2]
        return search.complete(state) and (lnode is None or not L._final(lnode))

    return _verdict(search, violates, False, exhaustive, limit)


def check_cc3(L: Language, participants=None, bound=None, exhaustive: bool = False) -> Verdict:
    """Every well-formed word feasible for ``pref(L)`` is in ``pref(L)``.

    With ``exhaustive`` the counterexamples are the minimal violating words
    (all of whose proper prefixes lie in ``pref(L)``).
    """
    limit = resolve_bound(bound)
    parts = L.participants() if participants is None else participants
    search = _Interleavings(L, parts, limit)
    return _verdict(search, lambda state: state[2] is None, True, exhaustive, limit)


def _verdict(search: _Interleavings, violates, stop: bool, exhaustive: bool, limit: int) -> Verdict:
    w = search.least_inflight(violates)
    extra = ()
    if w is not None and exhaustive:
        extra = tuple(search.violations(violates, stop, limit))
    return Verdict(w is None, w, extra, stats={"states": search.explored})


@dataclass(frozen=True)
class UnawareWitness:
    participant: str
    word: Word
    longer: Word
    blocking_label: CommLabel


def find_word_with_projection(L: Language, participant: str, target: Sequence[CommLabel]) -> Word | None:
    """Least word ``w`` of ``L`` with ``w`` projected on ``participant`` equal to ``target``."""
    target = tuple(target)
    dead = set()
    path: list = []

    def dfs(node, pos):
        if (node, pos) in dead:
            return False
        if pos == len(target) and L._final(node):
            return True
        for l, c in L._edges(node):
            if l.subject == participant:
                if pos < len(target) and l == target[pos]:
                    path.append(l)
                    if dfs(c, pos + 1):
                        return True
                    path.pop()
            else:
                path.append(l)
                if dfs(c, pos):
                    return True
                path.pop()
        dead.add((node, pos))
        return False

    if L._root is None:
        return None
    return tuple(path) if dfs(L._root, 0) else None


def termination_unaware_word(L: Language, participant: str) -> UnawareWitness | None:
    proj = L.project(participant)
    if proj._root is None:
        return None
    stack = [(proj._root, ())]
    while stack:
        node, u = stack.pop()
        if proj._final(node):
            for l, c in proj._edges(node):
                if l.is_input:
                    longer = u + (l,)
                    node2 = c
                    while not proj._final(node2):
                        l2, node2 = proj._edges(node2)[0]
                        longer += (l2,)
                    w = find_word_with_projection(L, participant, u)
                    w2 = find_word_with_projection(L, participant, longer)
                    return UnawareWitness(participant, w, w2, l)
        for l, c in reversed(proj._edges(node)):
            stack.append((c, u + (l,)))
    return None


def check_language_terminating(L: Language, participants: Iterable[str]) -> Verdict:
    """No participant in ``participants`` is termination-unaware for ``L``."""
    for a in sorted(participants):
        w = termination_unaware_word(L, a)
        if w is not None:
            return Verdict(False, w)
    return Verdict(True)
