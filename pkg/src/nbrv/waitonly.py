"""Polynomial-time coverability analysis for wait-only protocols.

A protocol is wait-only when every state either only initiates actions
(sends, internal moves) or only answers receptions.  Reachable
configurations of such protocols are abstracted by a pair ``(S, Toks)``:
states in ``S`` can host arbitrarily many processes, a token ``(q, m)``
records that the waiting state ``q`` can host a single process whose last
requested rendez-vous was ``m``.  Iterating the one-step abstract post
operator from ``({q_in}, {})`` stabilizes after polynomially many rounds and
the resulting abstraction decides configuration coverability exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .explore import Verdict
from .model import (
    Configuration,
    Protocol,
    check_configuration,
    receivable,
    receivers,
)


class NotWaitOnlyError(ValueError):
    """Some state both initiates actions and answers receptions.

    ``violations`` lists each offending state with the evidence transitions.
    """

    def __init__(self, protocol: str, violations: tuple) -> None:
        self.violations = violations
        states = ", ".join(v[0] for v in violations)
        super().__init__(f"protocol {protocol} is not wait-only (mixed states: {states})")


class AbstractionDivergenceError(RuntimeError):
    """The abstraction failed to stabilize within the guaranteed bound."""


@dataclass(frozen=True)
class WaitPartition:
    """Split of the state set into initiating (active) and answering (waiting) states."""

    active: frozenset[str]
    waiting: frozenset[str]


@dataclass(frozen=True)
class AbstractSet:
    """Abstraction ``(S, Toks)`` of a set of reachable configurations."""

    states: frozenset[str]
    tokens: frozenset[tuple[str, str]]

    def __post_init__(self) -> None:
        overlap = self.states & {q for q, _ in self.tokens}
        if overlap:
            raise ValueError(f"token states may not be unbounded states: {sorted(overlap)}")

    @property
    def token_states(self) -> frozenset[str]:
        return frozenset(q for q, _ in self.tokens)

    def sorted_states(self) -> list[str]:
        return sorted(self.states)

    def sorted_tokens(self) -> list[tuple[str, str]]:
        return sorted(self.tokens)


def partition(p: Protocol) -> WaitPartition:
    """Partition states by their outgoing actions; fail on mixed states.

    A state with an outgoing reception is waiting; everything else
    (including transition-less states) is active.  The initial state must be
    active.
    """
    waiting = {src for src, _m, _dst in p.recvs}
    violations = []
    for q in sorted(waiting):
        evidence = tuple(
            (src, str(act), dst) for src, act, dst in p.transitions
            if src == q and act.kind != "recv"
        )
        if evidence or q == p.init:
            recs = tuple(
                (src, str(act), dst) for src, act, dst in p.transitions
                if src == q and act.kind == "recv"
            )
            violations.append((q, evidence + recs))
    if violations:
        raise NotWaitOnlyError(p.name, tuple(violations))
    return WaitPartition(
        active=frozenset(set(p.states) - waiting),
        waiting=frozenset(waiting),
    )


def is_wait_only(p: Protocol) -> bool:
    try:
        partition(p)
    except NotWaitOnlyError:
        return False
    return True


def conflict_free(gamma: AbstractSet, p: Protocol, q1: str, q2: str) -> bool:
    """Can one process sit in ``q1`` and one in ``q2`` at the same time?

    True when some pair of tokens ``(q1, m1)``, ``(q2, m2)`` with distinct
    messages admits a placement order: the request that fills the later
    state must not be receivable by the occupant of the earlier one.
    """
    if q1 == q2:
        raise ValueError("conflict-freedom is about two distinct states")
    toks1 = [m for q, m in gamma.tokens if q == q1]
    toks2 = [m for q, m in gamma.tokens if q == q2]
    if not toks1 or not toks2:
        raise ValueError(f"{q1!r} and {q2!r} must both carry tokens")
    rec1 = receivable(p, q1)
    rec2 = receivable(p, q2)
    for m1 in toks1:
        for m2 in toks2:
            if m1 != m2 and (m1 not in rec2 or m2 not in rec1):
                return True
    return False


def admits(gamma: AbstractSet, c: Configuration, p: Protocol) -> bool:
    """Membership of a configuration in the concretization of ``gamma``.

    Every populated state must be unbounded, or be a token state hosting
    exactly one process and pairwise conflict-free with every other
    populated token state.
    """
    check_configuration(p, c)
    token_states = gamma.token_states
    singles: list[str] = []
    for q, n in c.items:
        if q in gamma.states:
            continue
        if q in token_states and n == 1:
            singles.append(q)
        else:
            return False
    for i, q1 in enumerate(singles):
        for q2 in singles[i + 1:]:
            if not conflict_free(gamma, p, q1, q2):
                return False
    return True


def _senders_from(p: Protocol, states: frozenset[str]) -> frozenset[str]:
    """Messages sendable from some state of ``states``."""
    return frozenset(m for src, m, _dst in p.sends if src in states)


def is_consistent(gamma: AbstractSet, p: Protocol) -> bool:
    """Check that the abstraction is self-justifying.

    (i) every token ``(q, m)`` is witnessed by a path that starts with a
    send of ``m`` from an unbounded state and continues through receptions
    whose messages are sendable from unbounded states;
    (ii) no token pair is in the shielding pattern that the rewrite rules of
    :func:`abstract_post` are guaranteed to resolve (such a pair would mean
    the abstraction undercounts a state).
    """
    sendable = _senders_from(p, gamma.states)

    for token_msg in {m for _q, m in gamma.tokens}:
        fringe = {dst for src, m, dst in p.sends if m == token_msg and src in gamma.states}
        seen = set(fringe)
        while fringe:
            nxt = set()
            for src, m, dst in p.recvs:
                if src in seen and m in sendable and dst not in seen:
                    nxt.add(dst)
            seen |= nxt
            fringe = nxt
        for q, m in gamma.tokens:
            if m == token_msg and q not in seen:
                return False

    toks = gamma.sorted_tokens()
    for t1 in toks:
        for t2 in toks:
            if t1 != t2 and _shielded(p, t1, t2):
                return False
    return True


def _shielded(p: Protocol, grown: tuple[str, str], shield: tuple[str, str]) -> bool:
    """Pattern resolved by the first promotion rule of :func:`abstract_post`.

    ``grown = (q1, m1)`` can host unboundedly many processes when the
    occupant of ``shield = (q2, m2)`` answers the ``m1`` requests: refills of
    the shield must not disturb ``q1`` (``m2`` not receivable there) and the
    answering occupant must land in a state that ignores ``m2`` (otherwise
    the landed process is tracked as a token first, and promotion happens
    one round later through the token-chain rule).
    """
    (q1, m1), (q2, m2) = grown, shield
    if m1 == m2 or m2 in receivable(p, q1):
        return False
    return any(
        src == q2 and m == m1 and m2 not in receivable(p, dst)
        for src, m, dst in p.recvs
    )


def abstract_post(gamma: AbstractSet, p: Protocol) -> AbstractSet:
    """One application of the abstract post operator.

    First a growth pass extends ``(S, Toks)`` with everything one concrete
    step can populate; then a promotion pass moves to ``S`` the token states
    that can actually host unboundedly many processes; tokens of promoted
    states are dropped.
    """
    S = set(gamma.states)
    toks = set(gamma.tokens)
    s2 = set(S)
    t2 = set(toks)
    sendable = _senders_from(p, frozenset(S))

    for src, dst in p.taus:
        if src in S:
            s2.add(dst)

    for src, m, dst in p.sends:
        if src not in S:
            continue
        rec_dst = receivable(p, dst)
        answered = any(q in S for q in receivers(p, m))
        if m not in rec_dst or answered:
            s2.add(dst)
        else:
            t2.add((dst, m))

    for src, m, dst in p.recvs:
        if m not in sendable:
            continue
        if src in S or (src, m) in toks:
            s2.add(dst)
        for q, tok_m in toks:
            if q == src and tok_m != m:
                if tok_m not in receivable(p, dst):
                    s2.add(dst)
                else:
                    t2.add((dst, tok_m))

    s3 = set(s2)
    tok_list = sorted(t2)
    for t_grown in tok_list:
        for t_shield in tok_list:
            if t_grown != t_shield and _shielded(p, t_grown, t_shield):
                s3.add(t_grown[0])

    # Token-chain promotion: the shield's occupant lands on a state that is
    # itself tracked as a token with the shield's message.
    for q1, m1 in tok_list:
        for q2, m2 in tok_list:
            if m1 == m2:
                continue
            for src, m, dst in p.recvs:
                if src == q2 and m == m1 and (dst, m2) in t2:
                    s3.add(q1)

    # Three-way rotation: a third token state absorbs both messages.  The
    # roles are fully symmetric up to renaming, so instances are considered
    # in lexicographic token order to keep the iterates deterministic.
    for a in range(len(tok_list)):
        q1, m1 = tok_list[a]
        rec1 = receivable(p, q1)
        for bb in range(a + 1, len(tok_list)):
            q2, m2 = tok_list[bb]
            if m2 == m1 or m2 in rec1:
                continue
            rec2 = receivable(p, q2)
            if m1 in rec2:
                continue
            for cc in range(bb + 1, len(tok_list)):
                q3, m3 = tok_list[cc]
                if m3 == m1 or m3 == m2:
                    continue
                rec3 = receivable(p, q3)
                if m1 in rec3 and m2 in rec3 and m3 in rec2 and m3 in rec1:
                    s3.add(q1)

    return AbstractSet(
        states=frozenset(s3),
        tokens=frozenset((q, m) for q, m in t2 if q not in s3),
    )


def fixpoint(p: Protocol) -> tuple[AbstractSet, list[AbstractSet]]:
    """Iterate the abstract post operator to stability from ``({q_in}, {})``.

    Returns the stable abstraction and the full chain of iterates.  Raises
    if stabilization exceeds the guaranteed polynomial bound.
    """
    partition(p)
    bound = len(p.states) ** 2 * max(1, len(p.messages))
    cur = AbstractSet(frozenset({p.init}), frozenset())
    trace = [cur]
    for _ in range(bound + 1):
        nxt = abstract_post(cur, p)
        if nxt == cur:
            return cur, trace
        trace.append(nxt)
        cur = nxt
    raise AbstractionDivergenceError(
        f"no fixpoint within {bound} iterations on {p.name}"
    )


def decide_cover(p: Protocol, target: Configuration) -> Verdict:
    """Exact configuration-coverability verdict for a wait-only protocol."""
    check_configuration(p, target)
    gamma_f, _trace = fixpoint(p)
    answer = "yes" if admits(gamma_f, target, p) else "no"
    return Verdict(answer)


def decide_state_cover(p: Protocol) -> Verdict:
    """Exact state-coverability verdict: cover one process in the final state."""
    return decide_cover(p, Configuration(((p.final, 1),)))
