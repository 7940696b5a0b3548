"""Generators for nested counter-bounding machines.

These procedural machines manipulate ``levels`` families of scratch
counters; level ``i`` works with the bound 2^(2^i).  The building blocks:

* ``zero_test_swap``: branches on whether a dual counter is zero, swapping the
  pair when it is (the level-0 gadget decrements twice; higher levels count
  to the bound with a double loop controlled by the level below);
* ``init_level``: raises all dual counters of a level to the level bound;
* ``reset_level``: clamps a level's counters to zero with non-blocking
  decrements, again driven by the level below;
* ``reset_chain``: alternates resets and initializations bottom-up so that,
  whatever bounded state the counters were in, everything is clean again;
* ``restore_shell``: wraps a test-free machine so that every restore jump
  passes through the reset chain, making restarts harmless.

Internals are not meant to be minimal: each builder only promises its
entry/exit contract (unique exit valuation from every admissible entry,
intermediate values staying within the per-level bounds).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .machines import (
    DEC,
    INC,
    NBDEC,
    NOP,
    CounterMachine,
    CounterOp,
    MachineConfig,
    MachineError,
    MachineTransition,
)


class LevelError(ValueError):
    """Requested level outside the configured range."""


class _Names:
    def __init__(self, taken) -> None:
        self.taken = set(taken)

    def fresh(self, base: str) -> str:
        cand = base
        i = 1
        while cand in self.taken:
            cand = f"{base}_{i}"
            i += 1
        self.taken.add(cand)
        return cand


@dataclass(frozen=True)
class LevelContext:
    """Scratch counter families for ``levels`` nesting levels plus the payload counters."""

    levels: int
    machine_counters: tuple[str, ...]
    families: tuple[tuple[tuple[str, str, str], tuple[str, str, str]], ...]

    @classmethod
    def create(cls, levels: int, machine_counters: tuple[str, ...] = ()) -> "LevelContext":
        if levels < 1:
            raise LevelError("need at least one level")
        names = _Names(machine_counters)
        families = []
        for i in range(levels):
            low = tuple(names.fresh(f"{c}_{i}") for c in ("y", "z", "s"))
            dual = tuple(names.fresh(f"{c}bar_{i}") for c in ("y", "z", "s"))
            families.append((low, dual))
        return cls(levels, tuple(machine_counters), tuple(families))

    def low(self, i: int) -> tuple[str, ...]:
        """The work counters of level ``i`` (the payload counters at the top)."""
        if i == self.levels:
            return tuple(sorted(self.machine_counters))
        return self.families[self._check(i)][0]

    def dual(self, i: int) -> tuple[str, ...]:
        """The dual counters of level ``i``; empty at the top level."""
        if i == self.levels:
            return ()
        return self.families[self._check(i)][1]

    def pair(self, i: int, dual_counter: str) -> str:
        """The work counter matching a dual counter of level ``i``."""
        idx = self.dual(i).index(dual_counter)
        return self.low(i)[idx]

    def bound(self, i: int) -> int:
        return 2 ** (2 ** i)

    def all_counters(self) -> tuple[str, ...]:
        out: list[str] = []
        for low, dual in self.families:
            out.extend(low)
            out.extend(dual)
        out.extend(sorted(self.machine_counters))
        return tuple(out)

    def _check(self, i: int) -> int:
        if not 0 <= i < self.levels:
            raise LevelError(f"level {i} outside 0..{self.levels - 1}")
        return i


@dataclass(frozen=True)
class ProceduralMachine:
    """A machine fragment with one entry and identified exits (no exit has outgoing edges)."""

    name: str
    locations: tuple[str, ...]
    counters: tuple[str, ...]
    blocking: tuple[MachineTransition, ...]
    nonblocking: tuple[MachineTransition, ...]
    entry: str
    outs: tuple[str, ...]

    def __post_init__(self) -> None:
        locs = set(self.locations)
        if self.entry not in locs or not set(self.outs) <= locs:
            raise MachineError("entry/outs must be declared locations")
        for src, _op, _dst in self.blocking + self.nonblocking:
            if src in self.outs:
                raise MachineError(f"output location {src!r} has outgoing transitions")

    def to_machine(self, restore: bool = False) -> CounterMachine:
        return CounterMachine(
            name=self.name,
            locations=self.locations,
            counters=self.counters,
            init=self.entry,
            blocking=self.blocking,
            nonblocking=self.nonblocking,
            restore=restore,
        )


class _Builder:
    """Accumulates locations and transitions under unique prefixed names."""

    def __init__(self, ctx: LevelContext) -> None:
        self.ctx = ctx
        self.locations: list[str] = []
        self.blocking: list[MachineTransition] = []
        self.nonblocking: list[MachineTransition] = []

    def loc(self, name: str) -> str:
        if name in self.locations:
            raise MachineError(f"duplicate location {name!r}")
        self.locations.append(name)
        return name

    def edge(self, src: str, op: CounterOp, dst: str) -> None:
        if op.kind == NBDEC:
            self.nonblocking.append((src, op, dst))
        else:
            self.blocking.append((src, op, dst))

    def chain(self, prefix: str, start: str, ops: list[CounterOp], end: str) -> None:
        """A straight line of operations from ``start`` to ``end``."""
        cur = start
        for i, op in enumerate(ops):
            nxt = end if i == len(ops) - 1 else self.loc(f"{prefix}c{i}")
            self.edge(cur, op, nxt)
            cur = nxt
        if not ops:
            self.edge(start, CounterOp(NOP), end)


def _emit_test_swap(b: _Builder, level: int, dual_counter: str, prefix: str) -> tuple[str, str, str]:
    """Emit a test-and-swap block; returns (entry, zero_exit, nonzero_exit)."""
    ctx = b.ctx
    if dual_counter not in ctx.dual(level):
        raise LevelError(f"{dual_counter!r} is not a dual counter of level {level}")
    work = ctx.pair(level, dual_counter)
    entry = b.loc(f"{prefix}in")
    z_exit = b.loc(f"{prefix}z")
    nz_exit = b.loc(f"{prefix}nz")

    n1 = b.loc(f"{prefix}n1")
    b.edge(entry, CounterOp(DEC, dual_counter), n1)
    b.edge(n1, CounterOp(INC, dual_counter), nz_exit)

    if level == 0:
        # Bound is 2: drain the work counter, then refill its dual.
        d1 = b.loc(f"{prefix}d1")
        d2 = b.loc(f"{prefix}d2")
        i1 = b.loc(f"{prefix}i1")
        b.edge(entry, CounterOp(DEC, work), d1)
        b.edge(d1, CounterOp(DEC, work), d2)
        b.edge(d2, CounterOp(INC, dual_counter), i1)
        b.edge(i1, CounterOp(INC, dual_counter), z_exit)
    else:
        body = [CounterOp(DEC, work), CounterOp(INC, dual_counter)]
        head = _emit_loop(b, level - 1, prefix, z_exit, body)
        # The loop re-enters at its own head, so the nonzero branch can only
        # be taken on the first visit of the entry, before any swap step.
        b.edge(entry, CounterOp(NOP), head)
    return entry, z_exit, nz_exit


def _emit_loop(
    b: _Builder,
    control: int,
    prefix: str,
    out: str,
    body: list[CounterOp],
) -> str:
    """Emit the double loop that runs ``body`` bound(control)^2 times.

    The loop transfers the control level's ``ybar``/``zbar`` pair into
    ``y``/``z``, interleaving the body, and uses two nested test-and-swap
    blocks to detect completion and restore the control counters.  Returns
    the loop head, which is also the re-entry point of the outer round.
    """
    ctx = b.ctx
    y, z, _s = ctx.low(control)
    ybar, zbar, _sbar = ctx.dual(control)

    head = b.loc(f"{prefix}a0")
    a1 = b.loc(f"{prefix}a1")
    a2 = b.loc(f"{prefix}a2")
    a3 = b.loc(f"{prefix}a3")
    a4 = b.loc(f"{prefix}a4")
    bodyend = b.loc(f"{prefix}a5")
    b.edge(head, CounterOp(DEC, ybar), a1)
    b.edge(a1, CounterOp(INC, y), a2)
    b.edge(a2, CounterOp(DEC, zbar), a3)
    b.edge(a3, CounterOp(INC, z), a4)
    b.chain(f"{prefix}b", a4, body, bodyend)

    tsz_in, tsz_z, tsz_nz = _emit_test_swap(b, control, zbar, f"{prefix}tz_")
    tsy_in, tsy_z, tsy_nz = _emit_test_swap(b, control, ybar, f"{prefix}ty_")
    b.edge(bodyend, CounterOp(NOP), tsz_in)
    b.edge(tsz_z, CounterOp(NOP), tsy_in)
    b.edge(tsz_nz, CounterOp(NOP), a2)
    b.edge(tsy_z, CounterOp(NOP), out)
    b.edge(tsy_nz, CounterOp(NOP), head)
    return head


def zero_test_swap(ctx: LevelContext, level: int, dual_counter: str) -> ProceduralMachine:
    """Zero-test a dual counter of ``level``; swap the pair when it is zero.

    Entering with the pair summing to the level bound and the levels below
    initialized, exactly one exit is reachable: the zero exit (values
    swapped) when the dual counter is zero, the nonzero exit (values kept)
    otherwise.  No other counter changes.
    """
    b = _Builder(ctx)
    entry, z_exit, nz_exit = _emit_test_swap(b, level, dual_counter, "ts_")
    return ProceduralMachine(
        name=f"test_swap_{level}_{dual_counter}",
        locations=tuple(b.locations),
        counters=ctx.all_counters(),
        blocking=tuple(b.blocking),
        nonblocking=tuple(b.nonblocking),
        entry=entry,
        outs=(z_exit, nz_exit),
    )


def _emit_init(b: _Builder, level: int, prefix: str) -> tuple[str, str]:
    ctx = b.ctx
    entry = b.loc(f"{prefix}in")
    out = b.loc(f"{prefix}out")
    duals = ctx.dual(level)
    if level == 0:
        ops = [CounterOp(INC, x) for x in duals for _ in range(2)]
        b.chain(f"{prefix}k", entry, ops, out)
    else:
        body = [CounterOp(INC, x) for x in duals]
        head = _emit_loop(b, level - 1, prefix, out, body)
        b.edge(entry, CounterOp(NOP), head)
    return entry, out


def init_level(ctx: LevelContext, level: int) -> ProceduralMachine:
    """Raise every dual counter of ``level`` from zero to the level bound."""
    if not 0 <= level < ctx.levels:
        raise LevelError(f"level {level} outside 0..{ctx.levels - 1}")
    b = _Builder(ctx)
    entry, out = _emit_init(b, level, "ic_")
    return ProceduralMachine(
        name=f"init_level_{level}",
        locations=tuple(b.locations),
        counters=ctx.all_counters(),
        blocking=tuple(b.blocking),
        nonblocking=tuple(b.nonblocking),
        entry=entry,
        outs=(out,),
    )


def _emit_reset(b: _Builder, level: int, prefix: str) -> tuple[str, str]:
    ctx = b.ctx
    entry = b.loc(f"{prefix}in")
    out = b.loc(f"{prefix}out")
    targets = list(ctx.low(level)) + list(ctx.dual(level))
    if level == 0:
        ops = []
        for low, dual in zip(ctx.low(0), ctx.dual(0)):
            ops += [CounterOp(NBDEC, low), CounterOp(NBDEC, low)]
            ops += [CounterOp(NBDEC, dual), CounterOp(NBDEC, dual)]
        b.chain(f"{prefix}k", entry, ops, out)
    else:
        body = [CounterOp(NBDEC, x) for x in targets]
        head = _emit_loop(b, level - 1, prefix, out, body)
        b.edge(entry, CounterOp(NOP), head)
    return entry, out


def reset_level(ctx: LevelContext, level: int) -> ProceduralMachine:
    """Clamp every counter of ``level`` down by the level bound (to zero when bounded)."""
    if not 0 <= level <= ctx.levels:
        raise LevelError(f"level {level} outside 0..{ctx.levels}")
    b = _Builder(ctx)
    entry, out = _emit_reset(b, level, "rs_")
    return ProceduralMachine(
        name=f"reset_level_{level}",
        locations=tuple(b.locations),
        counters=ctx.all_counters(),
        blocking=tuple(b.blocking),
        nonblocking=tuple(b.nonblocking),
        entry=entry,
        outs=(out,),
    )


def reset_chain(ctx: LevelContext) -> ProceduralMachine:
    """Reset level 0, initialize it, reset level 1, ... up to the top level.

    From any entry valuation bounded levelwise, exits with every dual
    counter at its level bound, every work counter at zero, and the payload
    counters at zero.
    """
    b = _Builder(ctx)
    entry = b.loc("ri_in")
    out = b.loc("ri_out")
    cur = entry
    for i in range(ctx.levels):
        r_in, r_out = _emit_reset(b, i, f"ri_r{i}_")
        b.edge(cur, CounterOp(NOP), r_in)
        i_in, i_out = _emit_init(b, i, f"ri_i{i}_")
        b.edge(r_out, CounterOp(NOP), i_in)
        cur = i_out
    r_in, r_out = _emit_reset(b, ctx.levels, f"ri_r{ctx.levels}_")
    b.edge(cur, CounterOp(NOP), r_in)
    b.edge(r_out, CounterOp(NOP), out)
    return ProceduralMachine(
        name="reset_chain",
        locations=tuple(b.locations),
        counters=ctx.all_counters(),
        blocking=tuple(b.blocking),
        nonblocking=tuple(b.nonblocking),
        entry=entry,
        outs=(out,),
    )


def restore_shell(m: CounterMachine, levels: int, target_loc: str) -> CounterMachine:
    """Wrap a test-free machine so that restore jumps cannot corrupt a run.

    The produced machine has restore jumps from everywhere to a fresh
    initial location that funnels through :func:`reset_chain`, so each
    (re)start sees clean counters; the target location is coverable in the
    wrapped machine iff it is in the original.
    """
    if not m.is_test_free:
        raise MachineError(f"{m.name} has zero tests")
    if levels < 1:
        raise LevelError("need at least one level")
    if target_loc not in set(m.locations):
        raise MachineError(f"unknown target location {target_loc!r}")

    ctx = LevelContext.create(levels, m.counters)
    chain = reset_chain(ctx)
    prefix = "sh_"
    k = 0
    while any(loc.startswith(prefix) for loc in m.locations):
        prefix = f"sh{k}_"
        k += 1
    renamed = {loc: prefix + loc for loc in chain.locations}
    entry = prefix + "start"

    locations = [entry] + [renamed[x] for x in chain.locations] + list(m.locations)
    blocking: list[MachineTransition] = [
        (entry, CounterOp(NOP), renamed[chain.entry]),
        (renamed[chain.outs[0]], CounterOp(NOP), m.init),
    ]
    blocking += [(renamed[s], op, renamed[d]) for s, op, d in chain.blocking]
    blocking += list(m.blocking)
    nonblocking = [(renamed[s], op, renamed[d]) for s, op, d in chain.nonblocking]
    nonblocking += list(m.nonblocking)

    return CounterMachine(
        name=f"{m.name}_shell",
        locations=locations,
        counters=ctx.all_counters(),
        init=entry,
        blocking=blocking,
        nonblocking=nonblocking,
        restore=True,
    )


def admissible_entry(ctx: LevelContext, level: int, overrides: dict[str, int] | None = None) -> dict[str, int]:
    """Valuation with levels below ``level`` initialized, everything else zero."""
    vals = {x: 0 for x in ctx.all_counters()}
    for j in range(min(level, ctx.levels)):
        for x in ctx.dual(j):
            vals[x] = ctx.bound(j)
    vals.update(overrides or {})
    return vals


def reachable_configs(
    pm: ProceduralMachine, entry_valuation: dict[str, int], budget: int = 200_000
) -> set[MachineConfig]:
    """All configurations reachable from the entry (no restore jumps).

    Specialized flat search: contract suites simulate thousands of entry
    valuations, so transitions are indexed by source location and applied
    on bare tuples.
    """
    machine = pm.to_machine(restore=False)
    start = machine.config(pm.entry, entry_valuation)
    by_src: dict[str, list[tuple[int, int, str]]] = {}
    for src, op, dst in machine.blocking + machine.nonblocking:
        kind = {NOP: 0, INC: 1, DEC: 2, NBDEC: 4}.get(op.kind, 3)
        idx = machine.index(op.counter) if op.counter is not None else -1
        by_src.setdefault(src, []).append((kind, idx, dst))

    seen: set[tuple[str, tuple[int, ...]]] = {(start.loc, start.values)}
    queue: deque[tuple[str, tuple[int, ...]]] = deque([(start.loc, start.values)])
    while queue:
        loc, values = queue.popleft()
        for kind, idx, dst in by_src.get(loc, ()):
            if kind == 0:
                nxt_values = values
            elif kind == 1:
                nxt_values = values[:idx] + (values[idx] + 1,) + values[idx + 1:]
            elif kind == 2:
                if values[idx] < 1:
                    continue
                nxt_values = values[:idx] + (values[idx] - 1,) + values[idx + 1:]
            elif kind == 4:
                nxt_values = values[:idx] + (max(0, values[idx] - 1),) + values[idx + 1:]
            else:
                if values[idx] != 0:
                    continue
                nxt_values = values
            node = (dst, nxt_values)
            if node not in seen:
                if len(seen) >= budget:
                    raise MachineError(f"budget {budget} exceeded while simulating {pm.name}")
                seen.add(node)
                queue.append(node)
    return {MachineConfig(loc, values) for loc, values in seen}


def exit_valuations(
    pm: ProceduralMachine, entry_valuation: dict[str, int], budget: int = 200_000
) -> dict[str, list[dict[str, int]]]:
    """Valuations observed at each exit location, keyed by exit name."""
    machine = pm.to_machine(restore=False)
    out: dict[str, set[tuple[int, ...]]] = {o: set() for o in pm.outs}
    for cfg in reachable_configs(pm, entry_valuation, budget):
        if cfg.loc in out:
            out[cfg.loc].add(cfg.values)
    return {
        o: [dict(zip(machine.counters, values)) for values in sorted(vals)]
        for o, vals in out.items()
    }
