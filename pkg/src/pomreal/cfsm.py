"""Communicating finite-state machines over unordered (multiset) buffers.

Buffers are per-channel multisets, not FIFO queues: a receiver may consume
any message present on its channel, regardless of sending order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Mapping

from .errors import BoundExceeded, EmptyBuffer, NoTransition, ValidationError, resolve_bound
from .language import Language, _Builder
from .pomset import CommLabel
from .verdict import Verdict

State = Hashable


@dataclass(frozen=True)
class CFSM:
    owner: str
    states: tuple
    initial: State
    accepting: frozenset
    transitions: tuple  # of (state, CommLabel, state)

    def __post_init__(self):
        known = set(self.states)
        if self.initial not in known:
            raise ValidationError(f"initial state {self.initial!r} of {self.owner} is not a state")
        if not self.accepting <= known:
            raise ValidationError(f"accepting states of {self.owner} must be states")
        for q, l, q2 in self.transitions:
            if q not in known or q2 not in known:
                raise ValidationError(f"transition {q!r} -{l}-> {q2!r} of {self.owner} uses an unknown state")
            if l.subject != self.owner:
                raise ValidationError(f"machine {self.owner} has a transition on {l}, whose subject is {l.subject}")

    @cached_property
    def out(self) -> dict:
        table: dict = {q: [] for q in self.states}
        for q, l, q2 in self.transitions:
            table[q].append((l, q2))
        return table

    def targets(self, q: State, label: CommLabel) -> list:
        return [q2 for l, q2 in self.out.get(q, ()) if l == label]

    def is_acyclic(self) -> bool:
        indeg = {q: 0 for q in self.states}
        for _, _, q2 in self.transitions:
            indeg[q2] += 1
        todo = [q for q, d in indeg.items() if d == 0]
        seen = 0
        while todo:
            q = todo.pop()
            seen += 1
            for _, q2 in self.out[q]:
                indeg[q2] -= 1
                if indeg[q2] == 0:
                    todo.append(q2)
        return seen == len(self.states)


@dataclass(frozen=True)
class CommSystem:
    machines: Mapping[str, CFSM]

    def __post_init__(self):
        for a, m in self.machines.items():
            if m.owner != a:
                raise ValidationError(f"machine registered for {a!r} is owned by {m.owner!r}")

    @property
    def participants(self) -> tuple[str, ...]:
        return tuple(sorted(self.machines))

    def __getitem__(self, a: str) -> CFSM:
        return self.machines[a]


@dataclass(frozen=True)
class Configuration:
    """Local states (sorted by participant) and non-empty buffer counts.

    ``buffers`` holds ``((sender, receiver, message), count)`` entries with
    positive counts, sorted, so equal configurations compare and hash equal.
    """

    states: tuple[tuple[str, State], ...]
    buffers: tuple[tuple[tuple[str, str, str], int], ...] = ()

    def __post_init__(self):
        if any(c <= 0 for _, c in self.buffers):
            raise ValidationError("buffer counts must be positive (omit empty entries)")

    def state(self, a: str) -> State:
        for p, q in self.states:
            if p == a:
                return q
        raise KeyError(a)

    def buffer(self, sender: str, receiver: str) -> dict[str, int]:
        return {m: c for (s, r, m), c in self.buffers if (s, r) == (sender, receiver)}

    def count(self, sender: str, receiver: str, message: str) -> int:
        return dict(self.buffers).get((sender, receiver, message), 0)

    @property
    def buffers_empty(self) -> bool:
        return not self.buffers

    def describe(self) -> str:
        qs = ", ".join(f"{a}={_state_str(q)}" for a, q in self.states)
        bs = ", ".join(f"{s}{r}:{m}={c}" for (s, r, m), c in self.buffers) or "empty"
        return f"<{qs} | {bs}>"


def _state_str(q) -> str:
    if isinstance(q, tuple):
        return "." .join(map(str, q)) if q else "ε"
    return str(q)


# ---------------------------------------------------------------------------
# synthesis
# ---------------------------------------------------------------------------


def synthesize_cfsm(L: Language, a: str) -> CFSM:
    """Prefix-tree machine of ``a``: states are prefixes of ``a``'s projected words."""
    words = L.project(a).words()
    states = {()}
    for w in words:
        for k in range(1, len(w) + 1):
            states.add(w[:k])
    ordered = tuple(sorted(states, key=lambda w: (len(w), w)))
    transitions = tuple((w[:-1], w[-1], w) for w in ordered if w)
    return CFSM(a, ordered, (), frozenset(words), transitions)


def synthesize_system(L: Language, participants: Iterable[str] | None = None) -> CommSystem:
    parts = sorted(L.participants() if participants is None else participants)
    return CommSystem({a: synthesize_cfsm(L, a) for a in parts})


# ---------------------------------------------------------------------------
# semantics
# ---------------------------------------------------------------------------


def initial_configuration(S: CommSystem) -> Configuration:
    return Configuration(tuple((a, S[a].initial) for a in S.participants))


def _move(S: CommSystem, s: Configuration, label: CommLabel, target: State) -> Configuration:
    states = tuple((p, target if p == label.subject else q) for p, q in s.states)
    key = (label.sender, label.receiver, label.message)
    counts = dict(s.buffers)
    counts[key] = counts.get(key, 0) + (1 if label.is_output else -1)
    if counts[key] == 0:
        del counts[key]
    return Configuration(states, tuple(sorted(counts.items())))


def step(S: CommSystem, s: Configuration, label: CommLabel) -> Configuration:
    """Fire ``label``: outputs add the message to the channel, inputs consume one copy."""
    a = label.subject
    if a not in S.machines:
        raise NoTransition(f"no machine for {a!r}")
    targets = S[a].targets(s.state(a), label)
    if not targets:
        raise NoTransition(f"{a} cannot fire {label} from {_state_str(s.state(a))}")
    if len(targets) > 1:
        raise ValidationError(f"{a} has several {label}-transitions; use successors() instead")
    if label.is_input and s.count(label.sender, label.receiver, label.message) == 0:
        raise EmptyBuffer(f"no {label.message} on channel {label.sender}{label.receiver}")
    return _move(S, s, label, targets[0])


def successors(S: CommSystem, s: Configuration) -> list[tuple[CommLabel, Configuration]]:
    out = []
    for a, q in s.states:
        for label, q2 in S[a].out.get(q, ()):
            if label.is_input and s.count(label.sender, label.receiver, label.message) == 0:
                continue
            out.append((label, _move(S, s, label, q2)))
    out.sort(key=lambda t: t[0])
    return out


def is_accepting(S: CommSystem, s: Configuration) -> bool:
    return s.buffers_empty and all(q in S[a].accepting for a, q in s.states)


@dataclass(frozen=True)
class ConfigurationGraph:
    nodes: tuple[Configuration, ...]
    edges: tuple[tuple[int, CommLabel, int], ...]
    accepting: frozenset[int]
    deadlocks: frozenset[int]
    parents: tuple = field(default=(), repr=False)

    initial = 0

    def __len__(self):
        return len(self.nodes)

    def trace_to(self, k: int) -> tuple[CommLabel, ...]:
        """Labels of the breadth-first path from the initial configuration."""
        out = []
        while k != 0:
            k, label = self.parents[k]
            out.append(label)
        return tuple(reversed(out))


def reachable(S: CommSystem, bound=None, buffer_cap: int | None = None) -> ConfigurationGraph:
    """Breadth-first exploration from the initial configuration.

    ``bound`` caps the number of configurations; ``buffer_cap`` caps every
    channel/message count (useful for hand-written cyclic machines).
    """
    limit = resolve_bound(bound)
    s0 = initial_configuration(S)
    index = {s0: 0}
    nodes = [s0]
    parents: list = [None]
    edges = []
    queue = deque([0])
    while queue:
        k = queue.popleft()
        for label, s2 in successors(S, nodes[k]):
            if buffer_cap is not None and any(c > buffer_cap for _, c in s2.buffers):
                raise BoundExceeded("buffer occupancy", buffer_cap)
            j = index.get(s2)
            if j is None:
                j = len(nodes)
                if j >= limit:
                    raise BoundExceeded("number of configurations", limit)
                index[s2] = j
                nodes.append(s2)
                parents.append((k, label))
                queue.append(j)
            edges.append((k, label, j))
    accepting = frozenset(k for k, s in enumerate(nodes) if is_accepting(S, s))
    back: dict[int, list[int]] = {}
    for k, _, j in edges:
        back.setdefault(j, []).append(k)
    alive = set(accepting)
    todo = list(accepting)
    while todo:
        j = todo.pop()
        for k in back.get(j, ()):
            if k not in alive:
                alive.add(k)
                todo.append(k)
    deadlocks = frozenset(range(len(nodes))) - alive
    return ConfigurationGraph(tuple(nodes), tuple(edges), accepting, deadlocks, tuple(parents))


def system_language(S: CommSystem, bound=None, graph: ConfigurationGraph | None = None) -> Language:
    """Words labelling runs from the initial to an accepting configuration.

    Raises :class:`BoundExceeded` if the language is infinite (a cycle through
    configurations that can still reach acceptance).
    """
    limit = resolve_bound(bound)
    g = reachable(S, bound) if graph is None else graph
    out: dict[int, list] = {}
    for k, label, j in g.edges:
        if j not in g.deadlocks:
            out.setdefault(k, []).append((label, j))
    b = _Builder()
    memo: dict = {}
    active: set = set()

    def build(state: frozenset):
        if state in memo:
            return memo[state]
        if state in active:
            raise BoundExceeded("system language (it is infinite)", limit)
        active.add(state)
        succ: dict = {}
        for k in state:
            for label, j in out.get(k, ()):
                succ.setdefault(label, set()).add(j)
        final = any(k in g.accepting for k in state)
        nid = b.make(final, {l: build(frozenset(js)) for l, js in succ.items()})
        active.discard(state)
        memo[state] = nid
        return nid

    if 0 in g.deadlocks:
        return Language.empty()
    lang = Language(b.nodes, build(frozenset([0])))
    if lang.count() > limit:
        raise BoundExceeded("number of words", limit)
    return lang


@dataclass(frozen=True)
class SystemUnaware:
    participant: str
    configuration: Configuration
    pending: CommLabel
    trace: tuple[CommLabel, ...]

    def describe(self) -> str:
        word = " ".join(map(str, self.trace)) or "ε"
        return f"{self.participant} may still fire {self.pending} in accepting {self.configuration.describe()} after {word}"


def check_system_termination_aware(S: CommSystem, participants: Iterable[str], bound=None,
                                   graph: ConfigurationGraph | None = None) -> Verdict:
    """No participant listed sits in an accepting configuration with an input transition enabled by its machine."""
    parts = sorted(participants)
    if not parts:
        return Verdict(True)
    g = reachable(S, bound) if graph is None else graph
    for k in sorted(g.accepting):
        s = g.nodes[k]
        for a in parts:
            if a not in S.machines:
                continue
            for label, _ in S[a].out.get(s.state(a), ()):
                if label.is_input:
                    return Verdict(False, SystemUnaware(a, s, label, g.trace_to(k)),
                                   stats={"configurations": len(g)})
    return Verdict(True, stats={"configurations": len(g)})
