"""Seeded random model generators shared by the test modules."""

from __future__ import annotations

import random

from nbrv.machines import DEC, INC, NBDEC, NOP, CounterMachine, CounterOp
from nbrv.model import Configuration, Protocol, recv, send, tau


def random_protocol(rng: random.Random, max_q: int = 5, max_m: int = 3,
                    max_t: int = 10) -> Protocol:
    nq = rng.randint(2, max_q)
    nm = rng.randint(1, max_m)
    states = [f"s{i}" for i in range(nq)]
    msgs = [f"m{i}" for i in range(nm)]
    trans = set()
    for _ in range(rng.randint(1, max_t)):
        src, dst = rng.choice(states), rng.choice(states)
        r = rng.random()
        if r < 0.25:
            trans.add((src, tau(), dst))
        elif r < 0.6:
            trans.add((src, send(rng.choice(msgs)), dst))
        else:
            trans.add((src, recv(rng.choice(msgs)), dst))
    return Protocol("rnd", states, msgs, states[0], states[-1], trans)


def random_wait_only(rng: random.Random, max_q: int = 6, max_m: int = 3,
                     max_t: int = 12) -> Protocol:
    nq = rng.randint(2, max_q)
    nm = rng.randint(1, max_m)
    states = [f"s{i}" for i in range(nq)]
    msgs = [f"m{i}" for i in range(nm)]
    waiting = {q for q in states[1:] if rng.random() < 0.5}
    trans = set()
    for _ in range(rng.randint(1, max_t)):
        src, dst = rng.choice(states), rng.choice(states)
        if src in waiting:
            trans.add((src, recv(rng.choice(msgs)), dst))
        elif rng.random() < 0.3:
            trans.add((src, tau(), dst))
        else:
            trans.add((src, send(rng.choice(msgs)), dst))
    return Protocol("rndwo", states, msgs, states[0], states[-1], trans)


def random_config(rng: random.Random, p: Protocol, max_items: int = 3) -> Configuration:
    counts: dict[str, int] = {}
    for _ in range(rng.randint(1, max_items)):
        q = rng.choice(p.states)
        counts[q] = counts.get(q, 0) + 1
    return Configuration.from_counts(counts)


def random_machine(rng: random.Random, max_loc: int = 4, max_ctr: int = 2,
                   max_t: int = 6, restore: bool = False) -> CounterMachine:
    nl = rng.randint(2, max_loc)
    nc = rng.randint(1, max_ctr)
    locs = [f"l{i}" for i in range(nl)]
    ctrs = [f"x{i}" for i in range(nc)]
    blocking, nonblocking = set(), set()
    for _ in range(rng.randint(1, max_t)):
        src, dst = rng.choice(locs), rng.choice(locs)
        r = rng.random()
        if r < 0.15:
            blocking.add((src, CounterOp(NOP), dst))
        elif r < 0.55:
            blocking.add((src, CounterOp(INC, rng.choice(ctrs)), dst))
        elif r < 0.8:
            blocking.add((src, CounterOp(DEC, rng.choice(ctrs)), dst))
        else:
            nonblocking.add((src, CounterOp(NBDEC, rng.choice(ctrs)), dst))
    return CounterMachine("rnd", locs, ctrs, locs[0], blocking, nonblocking,
                          restore=restore)
