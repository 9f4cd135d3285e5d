from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping


@dataclass(frozen=True)
class Verdict:
    """Outcome of a closure or termination check.

    ``witness`` is set exactly when the check fails.  ``counterexamples``
    optionally lists every distinct violation found (exhaustive checks only).
    """

    holds: bool
    witness: Any = None
    counterexamples: tuple = ()
    stats: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.holds != (self.witness is None):
            raise ValueError("a verdict carries a witness iff it does not hold")

    def __bool__(self):
        return self.holds
