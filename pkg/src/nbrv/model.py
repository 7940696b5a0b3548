"""Core model: rendez-vous protocols, configurations and the non-blocking step relation.

A protocol is a finite automaton whose edges are labelled with internal
actions (``tau``), send requests (``!m``) or receptions (``?m``).  A network
snapshot is a non-empty multiset of protocol states (one entry per process).
The one-step relation has three rules:

* internal: one process takes a ``tau`` edge;
* rendez-vous: a sender and a receiver of the same message move together
  (two distinct processes, which for a self rendez-vous means at least two
  processes in the shared state);
* non-blocking request: a sender moves alone when, once the sender itself is
  set aside, no process sits on a state that could receive the message.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

IDENTIFIER_RE = r"[A-Za-z_][A-Za-z0-9_']*"

TAU = "tau"
SEND = "send"
RECV = "recv"

_KIND_ORDER = {TAU: 0, SEND: 1, RECV: 2}


class ProtocolError(ValueError):
    """Structurally invalid protocol (bad init/final, dangling transition...)."""


class UnknownMessageError(ValueError):
    """A message outside the protocol alphabet was used."""


class UnknownStateError(ValueError):
    """A state outside the protocol state set was used."""


class MalformedConfigurationError(ValueError):
    """Empty configuration, non-positive count, or state outside the protocol."""


@dataclass(frozen=True)
class Action:
    """Edge label: internal move, send request or reception of a message."""

    kind: str
    message: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KIND_ORDER:
            raise ProtocolError(f"unknown action kind {self.kind!r}")
        if self.kind == TAU and self.message is not None:
            raise ProtocolError("internal actions carry no message")
        if self.kind != TAU and not self.message:
            raise ProtocolError(f"{self.kind} action needs a message")

    def sort_key(self) -> tuple[int, str]:
        return (_KIND_ORDER[self.kind], self.message or "")

    def __str__(self) -> str:
        if self.kind == TAU:
            return "tau"
        prefix = "!" if self.kind == SEND else "?"
        return prefix + (self.message or "")


def tau() -> Action:
    return Action(TAU)


def send(message: str) -> Action:
    return Action(SEND, message)


def recv(message: str) -> Action:
    return Action(RECV, message)


Transition = tuple[str, Action, str]


def _transition_key(t: Transition) -> tuple:
    src, act, dst = t
    return (src, act.sort_key(), dst)


class Protocol:
    """Immutable protocol automaton with precomputed lookup tables."""

    def __init__(
        self,
        name: str,
        states: Iterable[str],
        messages: Iterable[str],
        init: str,
        final: str,
        transitions: Iterable[Transition],
    ) -> None:
        self.name = name
        self.states: tuple[str, ...] = tuple(sorted(set(states)))
        self.messages: tuple[str, ...] = tuple(sorted(set(messages)))
        self.init = init
        self.final = final
        self.transitions: tuple[Transition, ...] = tuple(
            sorted(set(transitions), key=_transition_key)
        )
        if not self.states:
            raise ProtocolError("a protocol needs at least one state")
        state_set = set(self.states)
        msg_set = set(self.messages)
        if init not in state_set:
            raise ProtocolError(f"initial state {init!r} not declared")
        if final not in state_set:
            raise ProtocolError(f"final state {final!r} not declared")
        for src, act, dst in self.transitions:
            if src not in state_set or dst not in state_set:
                raise ProtocolError(f"transition {src!r} -> {dst!r} uses undeclared state")
            if act.kind != TAU and act.message not in msg_set:
                raise ProtocolError(f"transition on undeclared message {act.message!r}")

        self._sends: tuple[tuple[str, str, str], ...] = tuple(
            (src, act.message, dst) for src, act, dst in self.transitions if act.kind == SEND
        )
        self._recvs: tuple[tuple[str, str, str], ...] = tuple(
            (src, act.message, dst) for src, act, dst in self.transitions if act.kind == RECV
        )
        self._taus: tuple[tuple[str, str], ...] = tuple(
            (src, dst) for src, act, dst in self.transitions if act.kind == TAU
        )
        recv_by_msg: dict[str, list[tuple[str, str]]] = {m: [] for m in self.messages}
        send_by_msg: dict[str, list[tuple[str, str]]] = {m: [] for m in self.messages}
        receivable: dict[str, set[str]] = {q: set() for q in self.states}
        for src, m, dst in self._recvs:
            recv_by_msg[m].append((src, dst))
            receivable[src].add(m)
        for src, m, dst in self._sends:
            send_by_msg[m].append((src, dst))
        self._recv_by_msg = {m: tuple(v) for m, v in recv_by_msg.items()}
        self._send_by_msg = {m: tuple(v) for m, v in send_by_msg.items()}
        self._receivable = {q: frozenset(v) for q, v in receivable.items()}

    def _key(self) -> tuple:
        return (self.name, self.states, self.messages, self.init, self.final, self.transitions)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Protocol) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return (
            f"Protocol({self.name!r}, |Q|={len(self.states)}, |Sigma|={len(self.messages)}, "
            f"|T|={len(self.transitions)})"
        )

    @property
    def sends(self) -> tuple[tuple[str, str, str], ...]:
        """(source, message, target) for every send transition."""
        return self._sends

    @property
    def recvs(self) -> tuple[tuple[str, str, str], ...]:
        """(source, message, target) for every receive transition."""
        return self._recvs

    @property
    def taus(self) -> tuple[tuple[str, str], ...]:
        """(source, target) for every internal transition."""
        return self._taus


def receivers(p: Protocol, message: str) -> frozenset[str]:
    """States from which ``message`` can be received (the R(m) set)."""
    if message not in p._recv_by_msg:
        raise UnknownMessageError(f"message {message!r} not in alphabet of {p.name}")
    return frozenset(src for src, _dst in p._recv_by_msg[message])


def receivable(p: Protocol, state: str) -> frozenset[str]:
    """Messages with an outgoing reception at ``state``; empty for active states."""
    if state not in p._receivable:
        raise UnknownStateError(f"state {state!r} not in {p.name}")
    return p._receivable[state]


@dataclass(frozen=True)
class Configuration:
    """Non-empty multiset of states, stored sparsely as sorted (state, count) pairs."""

    items: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        if not self.items:
            raise MalformedConfigurationError("configuration must be non-empty")
        for state, count in self.items:
            if count <= 0:
                raise MalformedConfigurationError(f"count for {state!r} must be positive")
        names = [s for s, _ in self.items]
        if names != sorted(names) or len(set(names)) != len(names):
            raise MalformedConfigurationError("configuration items must be sorted and unique")

    @classmethod
    def from_counts(cls, counts: Mapping[str, int]) -> "Configuration":
        return cls(tuple(sorted((s, n) for s, n in counts.items() if n != 0)))

    def get(self, state: str) -> int:
        for s, n in self.items:
            if s == state:
                return n
        return 0

    def total(self) -> int:
        return sum(n for _, n in self.items)

    def counts(self) -> dict[str, int]:
        return dict(self.items)

    def states(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.items)

    def add(self, state: str, k: int = 1) -> "Configuration":
        counts = self.counts()
        counts[state] = counts.get(state, 0) + k
        return Configuration.from_counts(counts)

    def remove(self, state: str, k: int = 1) -> "Configuration":
        counts = self.counts()
        have = counts.get(state, 0)
        if have < k:
            raise MalformedConfigurationError(f"cannot remove {k} from {have} in {state!r}")
        counts[state] = have - k
        return Configuration.from_counts(counts)

    def covers(self, other: "Configuration") -> bool:
        counts = self.counts()
        return all(counts.get(s, 0) >= n for s, n in other.items)

    def __str__(self) -> str:
        return ",".join(s if n == 1 else f"{s}:{n}" for s, n in self.items)


def covers(c: Configuration, target: Configuration) -> bool:
    """Componentwise multiset ordering: c(q) >= target(q) for every q."""
    return c.covers(target)


def initial(p: Protocol, n: int) -> Configuration:
    """The initial configuration with ``n`` processes on the initial state."""
    if n < 1:
        raise MalformedConfigurationError("population must be at least 1")
    return Configuration(((p.init, n),))


def check_configuration(p: Protocol, c: Configuration) -> None:
    """Reject configurations mentioning states outside ``p``."""
    state_set = set(p.states)
    for s, _ in c.items:
        if s not in state_set:
            raise MalformedConfigurationError(f"state {s!r} not in protocol {p.name}")


@dataclass(frozen=True)
class StepLabel:
    """Step kind: ``tau``, rendez-vous ``msg:<m>`` or non-blocking ``nb:<m>``."""

    kind: str
    message: str | None = None

    def sort_key(self) -> tuple[int, str]:
        order = {"tau": 0, "msg": 1, "nb": 2}
        return (order[self.kind], self.message or "")

    def __str__(self) -> str:
        if self.kind == "tau":
            return "tau"
        return f"{self.kind}:{self.message}"


def successors(
    p: Protocol, c: Configuration, *, allow_nonblocking: bool = True
) -> list[tuple[StepLabel, Configuration]]:
    """All one-step successors of ``c``, deduplicated and deterministically ordered.

    ``allow_nonblocking=False`` restricts to the classical rendez-vous
    semantics (internal and rendez-vous rules only).
    """
    check_configuration(p, c)
    if c.total() < 1:
        raise MalformedConfigurationError("empty configuration")
    counts = c.counts()
    out: set[tuple[StepLabel, Configuration]] = set()

    def moved(*deltas: tuple[str, int]) -> Configuration:
        nxt = dict(counts)
        for state, d in deltas:
            nxt[state] = nxt.get(state, 0) + d
        return Configuration.from_counts(nxt)

    for src, dst in p._taus:
        if counts.get(src, 0) > 0:
            out.add((StepLabel("tau"), moved((src, -1), (dst, 1))))

    for q1, m, q1p in p._sends:
        n1 = counts.get(q1, 0)
        if n1 == 0:
            continue
        blocked = False
        for q2, q2p in p._recv_by_msg[m]:
            n2 = counts.get(q2, 0)
            if n2 == 0:
                continue
            # Self rendez-vous needs two processes in the shared state.
            if q2 != q1 or n1 >= 2:
                nxt = moved((q1, -1), (q2, -1), (q1p, 1), (q2p, 1))
                out.add((StepLabel("msg", m), nxt))
                blocked = True
        if allow_nonblocking and not blocked:
            out.add((StepLabel("nb", m), moved((q1, -1), (q1p, 1))))

    return sorted(out, key=lambda pair: (pair[0].sort_key(), pair[1].items))
