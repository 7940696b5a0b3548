"""Bounded explicit-state exploration of protocol networks.

For a fixed population size the configuration space is finite, so breadth
first search decides state coverability, configuration coverability and
synchronization exactly at that size.  Sweeping the population upward gives a
semi-decision procedure for the parameterised questions: it can answer YES
with a witness but never NO.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any

from .model import (
    Configuration,
    Protocol,
    StepLabel,
    check_configuration,
    initial,
    successors,
)

DEFAULT_BUDGET = 10**6

SCOVER = "scover"
CCOVER = "ccover"
SYNCHRO = "synchro"


class ResourceLimitError(RuntimeError):
    """The configurable node budget was exceeded before the search finished."""


@dataclass(frozen=True)
class Problem:
    """A parameterised verification question against a protocol."""

    kind: str
    target: Configuration | None = None

    def __post_init__(self) -> None:
        if self.kind not in (SCOVER, CCOVER, SYNCHRO):
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.kind == CCOVER and self.target is None:
            raise ValueError("ccover needs a target configuration")
        if self.kind != CCOVER and self.target is not None:
            raise ValueError(f"{self.kind} takes no target configuration")

    def holds(self, p: Protocol, c: Configuration) -> bool:
        if self.kind == SCOVER:
            return c.get(p.final) > 0
        if self.kind == CCOVER:
            assert self.target is not None
            return c.covers(self.target)
        return c.get(p.final) == c.total()


@dataclass(frozen=True)
class Witness:
    """A replayable run: start point plus a sequence of labelled steps."""

    initial: Any
    steps: tuple[tuple[Any, Any], ...]

    def final(self) -> Any:
        return self.steps[-1][1] if self.steps else self.initial


@dataclass(frozen=True)
class Verdict:
    """Outcome of a decision procedure.

    ``answer`` is ``yes``, ``no`` or ``unknown``.  A ``yes`` from a search
    carries a witness; ``explored_bound`` records the population size or
    counter cap that was exhausted; ``note`` qualifies incomplete NOs
    (``within-cap``).
    """

    answer: str
    witness: Witness | None = None
    explored_bound: int | None = None
    note: str = ""
    stats: dict = field(default_factory=dict)

    def is_yes(self) -> bool:
        return self.answer == "yes"


def reachable(p: Protocol, n: int, budget: int = DEFAULT_BUDGET) -> set[Configuration]:
    """The exact set of configurations reachable from ``n`` initial processes."""
    start = initial(p, n)
    seen: set[Configuration] = {start}
    queue: deque[Configuration] = deque([start])
    while queue:
        cur = queue.popleft()
        for _label, nxt in successors(p, cur):
            if nxt not in seen:
                if len(seen) >= budget:
                    raise ResourceLimitError(
                        f"node budget {budget} exceeded at population {n}"
                    )
                seen.add(nxt)
                queue.append(nxt)
    return seen


def _rebuild(
    parents: dict[Configuration, tuple[StepLabel, Configuration] | None],
    start: Configuration,
    end: Configuration,
) -> Witness:
    steps: list[tuple[StepLabel, Configuration]] = []
    cur = end
    while cur != start:
        entry = parents[cur]
        assert entry is not None
        label, prev = entry
        steps.append((label, cur))
        cur = prev
    steps.reverse()
    return Witness(initial=start, steps=tuple(steps))


def decide_fixed(
    p: Protocol, prob: Problem, n: int, budget: int = DEFAULT_BUDGET
) -> Verdict:
    """Decide ``prob`` exactly for initial configurations of size ``n``."""
    if n < 1:
        raise ValueError("population must be at least 1")
    if prob.target is not None:
        check_configuration(p, prob.target)
    start = initial(p, n)
    if prob.holds(p, start):
        return Verdict("yes", Witness(start, ()), explored_bound=n)
    parents: dict[Configuration, tuple[StepLabel, Configuration] | None] = {start: None}
    queue: deque[Configuration] = deque([start])
    while queue:
        cur = queue.popleft()
        for label, nxt in successors(p, cur):
            if nxt in parents:
                continue
            if len(parents) >= budget:
                raise ResourceLimitError(f"node budget {budget} exceeded at population {n}")
            parents[nxt] = (label, cur)
            if prob.holds(p, nxt):
                return Verdict("yes", _rebuild(parents, start, nxt), explored_bound=n)
            queue.append(nxt)
    return Verdict("no", explored_bound=n, stats={"visited": len(parents)})


def decide_sweep(
    p: Protocol, prob: Problem, max_n: int, budget: int = DEFAULT_BUDGET
) -> Verdict:
    """Try population sizes 1..max_n; YES at the first hit, else UNKNOWN."""
    if max_n < 1:
        raise ValueError("population bound must be at least 1")
    for n in range(1, max_n + 1):
        verdict = decide_fixed(p, prob, n, budget)
        if verdict.is_yes():
            return verdict
    return Verdict("unknown", explored_bound=max_n)


def replay(p: Protocol, witness: Witness) -> bool:
    """Check that every step of a protocol witness is a real successor step."""
    cur = witness.initial
    if not isinstance(cur, Configuration):
        return False
    if set(cur.states()) != {p.init}:
        return False
    for label, nxt in witness.steps:
        if (label, nxt) not in successors(p, cur):
            return False
        cur = nxt
    return True
