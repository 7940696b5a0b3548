"""Counter machines with non-blocking decrements, and non-blocking VAS.

The machine family covers plain counter machines (with zero tests),
test-free machines, machines extended with non-blocking decrements
(``nbdec`` always fires and clamps at zero) and the restore variant that can
jump back to the initial location from anywhere.  A non-blocking VAS pairs
each transition with a blocking update vector and a non-negative clamp
vector applied coordinatewise.

Both models get exhaustive search bounded by an inclusive per-counter cap;
a NO produced under a cap is only valid within that cap and is flagged so.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .explore import DEFAULT_BUDGET, ResourceLimitError, Verdict, Witness

NOP = "nop"
INC = "inc"
DEC = "dec"
ZEROTEST = "zerotest"
NBDEC = "nbdec"

_OP_ORDER = {NOP: 0, INC: 1, DEC: 2, ZEROTEST: 3, NBDEC: 4}


class MachineError(ValueError):
    """Structurally invalid counter machine."""


class MalformedMachineConfigError(ValueError):
    """Configuration does not fit the machine (bad location, negative value)."""


@dataclass(frozen=True)
class CounterOp:
    """A counter action: nop, inc, dec, zero test or non-blocking dec."""

    kind: str
    counter: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in _OP_ORDER:
            raise MachineError(f"unknown counter op {self.kind!r}")
        if self.kind == NOP and self.counter is not None:
            raise MachineError("nop takes no counter")
        if self.kind != NOP and not self.counter:
            raise MachineError(f"{self.kind} needs a counter")

    def sort_key(self) -> tuple[int, str]:
        return (_OP_ORDER[self.kind], self.counter or "")

    def __str__(self) -> str:
        if self.kind == NOP:
            return "nop"
        name = {INC: "inc", DEC: "dec", ZEROTEST: "zero?", NBDEC: "nbdec"}[self.kind]
        return f"{name} {self.counter}"


MachineTransition = tuple[str, CounterOp, str]


def _mt_key(t: MachineTransition) -> tuple:
    return (t[0], t[1].sort_key(), t[2])


@dataclass(frozen=True)
class MachineConfig:
    """Current location plus one value per counter (machine counter order)."""

    loc: str
    values: tuple[int, ...]


class CounterMachine:
    """Immutable counter machine over named locations and counters."""

    def __init__(
        self,
        name: str,
        locations: Iterable[str],
        counters: Iterable[str],
        init: str,
        blocking: Iterable[MachineTransition],
        nonblocking: Iterable[MachineTransition] = (),
        restore: bool = False,
    ) -> None:
        self.name = name
        self.locations: tuple[str, ...] = tuple(sorted(set(locations)))
        self.counters: tuple[str, ...] = tuple(sorted(set(counters)))
        self.init = init
        self.blocking: tuple[MachineTransition, ...] = tuple(
            sorted(set(blocking), key=_mt_key)
        )
        self.nonblocking: tuple[MachineTransition, ...] = tuple(
            sorted(set(nonblocking), key=_mt_key)
        )
        self.restore = restore

        locs = set(self.locations)
        ctrs = set(self.counters)
        if init not in locs:
            raise MachineError(f"initial location {init!r} not declared")
        for src, op, dst in self.blocking:
            if op.kind == NBDEC:
                raise MachineError("nbdec belongs to the non-blocking transition set")
            if src not in locs or dst not in locs:
                raise MachineError(f"transition {src!r} -> {dst!r} uses undeclared location")
            if op.counter is not None and op.counter not in ctrs:
                raise MachineError(f"undeclared counter {op.counter!r}")
        for src, op, dst in self.nonblocking:
            if op.kind != NBDEC:
                raise MachineError("non-blocking transitions must be nbdec")
            if src not in locs or dst not in locs:
                raise MachineError(f"transition {src!r} -> {dst!r} uses undeclared location")
            if op.counter not in ctrs:
                raise MachineError(f"undeclared counter {op.counter!r}")
        self._index = {x: i for i, x in enumerate(self.counters)}

    def _key(self) -> tuple:
        return (
            self.name, self.locations, self.counters, self.init,
            self.blocking, self.nonblocking, self.restore,
        )

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CounterMachine) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        kind = "NB-R-CM" if self.is_nbrcm else ("NB-CM" if self.is_nbcm else "CM")
        return f"CounterMachine({self.name!r}, {kind}, |L|={len(self.locations)})"

    @property
    def is_test_free(self) -> bool:
        return all(op.kind != ZEROTEST for _s, op, _d in self.blocking)

    @property
    def is_nbcm(self) -> bool:
        return self.is_test_free

    @property
    def is_nbrcm(self) -> bool:
        return self.is_test_free and self.restore

    def index(self, counter: str) -> int:
        try:
            return self._index[counter]
        except KeyError:
            raise MalformedMachineConfigError(f"unknown counter {counter!r}") from None

    def config(self, loc: str, valuation: dict[str, int] | None = None) -> MachineConfig:
        valuation = valuation or {}
        for x in valuation:
            self.index(x)
        values = tuple(valuation.get(x, 0) for x in self.counters)
        return self.check_config(MachineConfig(loc, values))

    def initial_config(self) -> MachineConfig:
        return self.config(self.init)

    def value(self, cfg: MachineConfig, counter: str) -> int:
        return cfg.values[self.index(counter)]

    def valuation(self, cfg: MachineConfig) -> dict[str, int]:
        return dict(zip(self.counters, cfg.values))

    def check_config(self, cfg: MachineConfig) -> MachineConfig:
        if cfg.loc not in set(self.locations):
            raise MalformedMachineConfigError(f"unknown location {cfg.loc!r}")
        if len(cfg.values) != len(self.counters):
            raise MalformedMachineConfigError("valuation arity mismatch")
        if any(v < 0 for v in cfg.values):
            raise MalformedMachineConfigError("counter values must be non-negative")
        return cfg


def _apply_op(m: CounterMachine, op: CounterOp, values: tuple[int, ...]) -> tuple[int, ...] | None:
    if op.kind == NOP:
        return values
    i = m.index(op.counter or "")
    v = values[i]
    if op.kind == INC:
        return values[:i] + (v + 1,) + values[i + 1:]
    if op.kind == DEC:
        if v < 1:
            return None
        return values[:i] + (v - 1,) + values[i + 1:]
    if op.kind == ZEROTEST:
        return values if v == 0 else None
    return values[:i] + (max(0, v - 1),) + values[i + 1:]


def machine_successors(
    m: CounterMachine, cfg: MachineConfig
) -> list[tuple[MachineTransition, MachineConfig]]:
    """All enabled one-step moves, restore jumps included, in a fixed order."""
    m.check_config(cfg)
    out: set[tuple[MachineTransition, MachineConfig]] = set()
    for src, op, dst in m.blocking + m.nonblocking:
        if src != cfg.loc:
            continue
        values = _apply_op(m, op, cfg.values)
        if values is not None:
            out.add(((src, op, dst), MachineConfig(dst, values)))
    if m.restore:
        restore_t = (cfg.loc, CounterOp(NOP), m.init)
        out.add((restore_t, MachineConfig(m.init, cfg.values)))
    return sorted(out, key=lambda pair: (_mt_key(pair[0]), pair[1].loc, pair[1].values))


def cover_bounded(
    m: CounterMachine,
    target_loc: str,
    cap: int,
    budget: int = DEFAULT_BUDGET,
) -> Verdict:
    """Search for the target location keeping every counter at most ``cap``.

    YES verdicts carry the run; NO means the cap-bounded space is exhausted
    and is tagged ``within-cap``.
    """
    if cap < 0:
        raise ValueError("cap must be non-negative")
    if target_loc not in set(m.locations):
        raise MachineError(f"unknown target location {target_loc!r}")
    start = m.initial_config()
    if start.loc == target_loc:
        return Verdict("yes", Witness(start, ()))
    parents: dict[MachineConfig, tuple[MachineTransition, MachineConfig] | None] = {start: None}
    queue: deque[MachineConfig] = deque([start])
    pruned = 0
    while queue:
        cur = queue.popleft()
        for trans, nxt in machine_successors(m, cur):
            if nxt in parents:
                continue
            if any(v > cap for v in nxt.values):
                pruned += 1
                continue
            if len(parents) >= budget:
                raise ResourceLimitError(f"node budget {budget} exceeded (cap {cap})")
            parents[nxt] = (trans, cur)
            if nxt.loc == target_loc:
                steps: list[tuple[MachineTransition, MachineConfig]] = []
                walk = nxt
                while walk != start:
                    entry = parents[walk]
                    assert entry is not None
                    steps.append((entry[0], walk))
                    walk = entry[1]
                steps.reverse()
                return Verdict("yes", Witness(start, tuple(steps)),
                               stats={"visited": len(parents), "pruned": pruned})
            queue.append(nxt)
    return Verdict("no", explored_bound=cap, note="within-cap",
                   stats={"visited": len(parents), "pruned": pruned})


def replay_machine(m: CounterMachine, witness: Witness) -> bool:
    """Check a machine witness step by step against the semantics."""
    cur = witness.initial
    if not isinstance(cur, MachineConfig) or cur != m.initial_config():
        return False
    for trans, nxt in witness.steps:
        if (trans, nxt) not in machine_successors(m, cur):
            return False
        cur = nxt
    return True


Vector = tuple[int, ...]
VasTransition = tuple[Vector, Vector]


class VasError(ValueError):
    """Structurally invalid vector addition system."""


@dataclass(frozen=True)
class Vas:
    """Non-blocking VAS: transitions pair a blocking part with a clamp part."""

    name: str
    dim: int
    transitions: tuple[VasTransition, ...]
    v_init: Vector
    v_target: Vector

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise VasError("dimension must be at least 1")
        for vec in (self.v_init, self.v_target):
            if len(vec) != self.dim:
                raise VasError("vector arity mismatch")
            if any(x < 0 for x in vec):
                raise VasError("init/target vectors must be non-negative")
        for t_b, t_nb in self.transitions:
            if len(t_b) != self.dim or len(t_nb) != self.dim:
                raise VasError("transition arity mismatch")
            if any(x < 0 for x in t_nb):
                raise VasError("the non-blocking part must be non-negative")


def step_strict(v: Vector, t: VasTransition) -> Vector | None:
    """Apply the blocking part (must stay non-negative), then clamp-subtract."""
    t_b, t_nb = t
    if len(v) != len(t_b):
        raise VasError("vector arity mismatch")
    moved = tuple(a + b for a, b in zip(v, t_b))
    if any(x < 0 for x in moved):
        return None
    return tuple(max(0, a - b) for a, b in zip(moved, t_nb))


def step_relaxed(v: Vector, t: VasTransition) -> Vector:
    """Clamp the combined update at zero coordinatewise; always defined."""
    t_b, t_nb = t
    if len(v) != len(t_b):
        raise VasError("vector arity mismatch")
    return tuple(max(0, a + b - c) for a, b, c in zip(v, t_b, t_nb))


def vas_cover_bounded(vas: Vas, cap: int, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Strict-step search for a vector covering the target, coordinates <= cap."""
    if cap < max(vas.v_init):
        raise ValueError("cap must cover the initial vector")
    start = vas.v_init
    if all(a >= b for a, b in zip(start, vas.v_target)):
        return Verdict("yes", Witness(start, ()))
    parents: dict[Vector, tuple[VasTransition, Vector] | None] = {start: None}
    queue: deque[Vector] = deque([start])
    pruned = 0
    while queue:
        cur = queue.popleft()
        for t in vas.transitions:
            nxt = step_strict(cur, t)
            if nxt is None or nxt in parents:
                continue
            if any(x > cap for x in nxt):
                pruned += 1
                continue
            if len(parents) >= budget:
                raise ResourceLimitError(f"node budget {budget} exceeded (cap {cap})")
            parents[nxt] = (t, cur)
            if all(a >= b for a, b in zip(nxt, vas.v_target)):
                steps: list[tuple[VasTransition, Vector]] = []
                walk = nxt
                while walk != start:
                    entry = parents[walk]
                    assert entry is not None
                    steps.append((entry[0], walk))
                    walk = entry[1]
                steps.reverse()
                return Verdict("yes", Witness(start, tuple(steps)),
                               stats={"visited": len(parents), "pruned": pruned})
            queue.append(nxt)
    return Verdict("no", explored_bound=cap, note="within-cap",
                   stats={"visited": len(parents), "pruned": pruned})
