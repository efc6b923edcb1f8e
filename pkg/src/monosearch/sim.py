"""Deterministic asynchronous message-passing kernel.

Channels are unordered multisets keyed by fresh message ids; one step
executes exactly one enabled action (a node's timeout, the receipt of one
message, or an application-injected search) atomically. The scheduler picks
which, and optionally enforces bounded-age fairness so that weak fairness
and fair message receipt become checkable on finite runs.

The kernel knows nothing about protocol semantics beyond the message
``refs()`` it uses to check that nodes only send along references they hold.
"""

from __future__ import annotations

import copy
import heapq
import json
import random
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from .messages import SEARCH_KINDS, Message, message_from_dict
from .node import NodeState, Outbox

TIMEOUT = "timeout"
RECEIVE = "receive"
INJECT = "inject"

POLICIES = (
    "uniform-random",
    "aging-fair",
    "fifo-ish",
    "adversarial",
    "adversarial-script",
)


class ProtocolViolation(RuntimeError):
    """A node sent to a reference it does not hold."""


@dataclass(slots=True)
class Envelope:
    id: int
    dest: int
    msg: Message
    sent: int
    # id of the message (or action) at the root of the causal chain
    root: int
    # number of message hops from the root action
    depth: int


@dataclass
class GlobalState:
    nodes: dict[int, NodeState]
    envelopes: dict[int, Envelope] = field(default_factory=dict)
    next_msg_id: int = 0
    step: int = 0
    last_timeout: dict[int, int] = field(default_factory=dict)

    def post(
        self, dest: int, msg: Message, root: Optional[int] = None, depth: int = 1
    ) -> Envelope:
        if dest not in self.nodes:
            raise ProtocolViolation(f"message to unknown node {dest}")
        mid = self.next_msg_id
        self.next_msg_id += 1
        env = Envelope(mid, dest, msg, self.step, mid if root is None else root, depth)
        self.envelopes[mid] = env
        return env

    def channel(self, node_id: int) -> list[Envelope]:
        return [e for e in self.envelopes.values() if e.dest == node_id]

    @property
    def ids(self) -> list[int]:
        return sorted(self.nodes)

    def copy(self) -> "GlobalState":
        return copy.deepcopy(self)

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "nodes": [self.nodes[i].to_dict() for i in self.ids],
            "channels": [
                {"id": e.id, "dest": e.dest, "sent": e.sent, "message": e.msg.to_dict()}
                for e in self.envelopes.values()
            ],
        }


@dataclass
class TraceEvent:
    step: int
    actor: int
    kind: str
    msg_id: Optional[int] = None
    message: Optional[Message] = None
    emitted: list[tuple[int, int, Message]] = field(default_factory=list)
    delta: dict[str, Any] = field(default_factory=dict)
    outcomes: list[tuple[int, str]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    root: Optional[int] = None
    depth: int = 0

    def to_dict(self) -> dict:
        d: dict[str, Any] = {
            "step": self.step,
            "actor": self.actor,
            "kind": self.kind,
            "msg_id": self.msg_id,
            "message": self.message.to_dict() if self.message is not None else None,
            "emitted": [
                {"dest": dst, "msg_id": mid, "message": m.to_dict()}
                for dst, mid, m in self.emitted
            ],
            "delta": self.delta,
        }
        if self.outcomes:
            d["outcomes"] = [list(o) for o in self.outcomes]
        if self.notes:
            d["notes"] = list(self.notes)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "TraceEvent":
        return cls(
            step=d["step"],
            actor=d["actor"],
            kind=d["kind"],
            msg_id=d.get("msg_id"),
            message=message_from_dict(d["message"]) if d.get("message") else None,
            emitted=[
                (e["dest"], e["msg_id"], message_from_dict(e["message"]))
                for e in d.get("emitted", [])
            ],
            delta=d.get("delta", {}),
            outcomes=[tuple(o) for o in d.get("outcomes", [])],
            notes=list(d.get("notes", [])),
        )


class _IndexedSet:
    """Set with O(1) add/remove and uniform random choice."""

    __slots__ = ("items", "pos")

    def __init__(self) -> None:
        self.items: list[int] = []
        self.pos: dict[int, int] = {}

    def add(self, x: int) -> None:
        self.pos[x] = len(self.items)
        self.items.append(x)

    def discard(self, x: int) -> None:
        i = self.pos.pop(x, None)
        if i is None:
            return
        last = self.items.pop()
        if i < len(self.items):
            self.items[i] = last
            self.pos[last] = i

    def __len__(self) -> int:
        return len(self.items)


@dataclass
class Injection:
    step: int
    origin: int
    dest_id: int
    search_id: int


class Scheduler:
    """Chooses the next action.

    Every policy except ``uniform-random`` runs behind a fairness guard. Each
    message gets a delivery deadline when sent (``age_max``, by default
    ``4·n·(pending + n)`` evaluated at send time) and each node a timeout
    deadline after its last timeout (``timeout_gap``, by default
    ``8·(n + pending)``). Items close to their deadline are forced in
    earliest-deadline-first order.

    ``aging-fair`` otherwise picks uniformly among timeouts and messages,
    and a message pick delivers the older of two random candidates.
    ``fifo-ish`` delivers the oldest message half of the time.
    ``adversarial`` favours search-protocol messages and timeouts, starving
    topology traffic up to the fairness bound. ``adversarial-script`` first
    follows an explicit action list.
    """

    def __init__(
        self,
        policy: str = "aging-fair",
        seed: int = 0,
        age_max: Optional[int] = None,
        timeout_gap: Optional[int] = None,
        holds: Sequence[Sequence[int]] = (),
        script: Sequence[Sequence[Any]] = (),
    ) -> None:
        if policy not in POLICIES:
            raise ValueError(f"unknown scheduler policy {policy!r}")
        self.policy = policy
        self.guarded = policy != "uniform-random"
        self.rng = random.Random(seed)
        self.age_max = age_max
        self.timeout_gap = timeout_gap
        # msg id -> first step at which a non-forced pick may deliver it
        self.holds = {int(m): int(s) for m, s in holds}
        self.script = [tuple(a) for a in script]
        self.deadline: dict[int, int] = {}
        # node id -> step by which its next timeout must run
        self.timeout_deadline: dict[int, int] = {}
        self._heap: list[tuple[int, int]] = []

    def age_bound(self, n: int, pending: int) -> int:
        return self.age_max if self.age_max else 4 * n * (pending + n)

    def gap_bound(self, n: int, pending: int = 0) -> int:
        return self.timeout_gap if self.timeout_gap else 8 * (n + pending)

    def on_post(self, env: Envelope, n: int, pending: int) -> None:
        d = env.sent + self.age_bound(n, pending)
        self.deadline[env.id] = d
        heapq.heappush(self._heap, (d, env.id))

    def on_deliver(self, msg_id: int) -> None:
        self.deadline.pop(msg_id, None)

    def on_timeout(self, node_id: int, now: int, n: int, pending: int) -> None:
        self.timeout_deadline[node_id] = now + self.gap_bound(n, pending)

    def choose(self, sim: "Simulation") -> tuple[str, int]:
        state = sim.state
        if self.policy == "adversarial-script":
            while self.script:
                act = self._scripted(sim, self.script.pop(0))
                if act is not None:
                    return act
        if self.guarded:
            forced = self._forced(sim, state.step)
            if forced is not None:
                return forced
        if self.policy == "fifo-ish" and sim.pending and self.rng.random() < 0.5:
            return (RECEIVE, sim.oldest_pending().id)
        if self.policy == "aging-fair":
            return self._aging(sim, state.step)
        if self.policy == "adversarial":
            r = self.rng.random()
            if r < 0.9 and sim.pending_search:
                items = sim.pending_search.items
                return (RECEIVE, items[self.rng.randrange(len(items))])
            if r < 0.95:
                return (TIMEOUT, sim.node_ids[self.rng.randrange(len(sim.node_ids))])
        return self._uniform(sim, state.step)

    def _scripted(self, sim: "Simulation", entry: tuple) -> Optional[tuple[str, int]]:
        kind, arg = entry[0], entry[1]
        state = sim.state
        if kind == TIMEOUT and arg in state.nodes:
            return (TIMEOUT, arg)
        if kind == RECEIVE and arg in state.envelopes:
            return (RECEIVE, arg)
        if kind == "receive-kind":
            # oldest pending message of that kind, optionally at a given node
            at = entry[2] if len(entry) > 2 else None
            for env in sorted(state.envelopes.values(), key=lambda e: e.id):
                if env.msg.kind == arg and (at is None or env.dest == at):
                    return (RECEIVE, env.id)
        return None

    def _forced(self, sim: "Simulation", now: int) -> Optional[tuple[str, int]]:
        heap = self._heap
        while heap and heap[0][1] not in self.deadline:
            heapq.heappop(heap)
        tdl = self.timeout_deadline
        due = min(sim.node_ids, key=lambda u: (tdl[u], u))
        t_deadline = tdl[due]
        n = len(sim.node_ids)
        cands = []
        if heap and heap[0][0] - now <= 2 * (len(sim.pending) + n):
            cands.append((heap[0][0], 1, RECEIVE, heap[0][1]))
        if t_deadline - now <= 2 * n:
            cands.append((t_deadline, 0, TIMEOUT, due))
        if not cands:
            return None
        _, _, kind, arg = min(cands)
        return (kind, arg)

    def _aging(self, sim: "Simulation", now: int) -> tuple[str, int]:
        """Uniform over nodes and messages, except that a message pick looks
        at two random messages and delivers the older one."""
        ids = sim.node_ids
        items = sim.pending.items
        while True:
            k = self.rng.randrange(len(ids) + len(items))
            if k < len(ids):
                return (TIMEOUT, ids[k])
            a = items[k - len(ids)]
            b = items[self.rng.randrange(len(items))]
            mid = min(a, b)
            if self.holds.get(mid, 0) <= now:
                return (RECEIVE, mid)

    def _uniform(self, sim: "Simulation", now: int) -> tuple[str, int]:
        ids = sim.node_ids
        items = sim.pending.items
        while True:
            k = self.rng.randrange(len(ids) + len(items))
            if k < len(ids):
                return (TIMEOUT, ids[k])
            mid = items[k - len(ids)]
            if self.holds.get(mid, 0) <= now:
                return (RECEIVE, mid)


class Simulation:
    """Runs a protocol over a ``GlobalState``; mutates it in place.

    ``snapshot()`` gives an independent copy when value semantics are needed.
    """

    def __init__(
        self,
        state: GlobalState,
        protocol: Any,
        scheduler: Scheduler,
        injections: Sequence[Injection] = (),
        ledger: Any = None,
        check_sends: bool = True,
    ) -> None:
        self.state = state
        self.protocol = protocol
        self.scheduler = scheduler
        self.injections = sorted(injections, key=lambda i: (i.step, i.search_id))
        self._next_injection = 0
        self.ledger = ledger
        self.check_sends = check_sends
        self.node_ids = state.ids
        self.pending = _IndexedSet()
        self.pending_search = _IndexedSet()
        for u in self.node_ids:
            state.last_timeout.setdefault(u, state.step)
            scheduler.on_timeout(
                u, state.last_timeout[u], len(self.node_ids), len(state.envelopes)
            )
        for env in sorted(state.envelopes.values(), key=lambda e: e.id):
            self._track(env)
        self._oldest_id = min(state.envelopes, default=state.next_msg_id)
        # deliveries / timeouts that overran their fairness deadline
        self.late: list[tuple[int, str, int]] = []

    # -- bookkeeping -----------------------------------------------------
    def _track(self, env: Envelope) -> None:
        self.pending.add(env.id)
        if env.msg.kind in SEARCH_KINDS:
            self.pending_search.add(env.id)
        self.scheduler.on_post(env, len(self.node_ids), len(self.pending))

    def oldest_pending(self) -> Envelope:
        envs = self.state.envelopes
        i = self._oldest_id
        while i not in envs:
            i += 1
        self._oldest_id = i
        return envs[i]

    def snapshot(self) -> GlobalState:
        return self.state.copy()

    @property
    def injections_left(self) -> int:
        return len(self.injections) - self._next_injection

    # -- actions ---------------------------------------------------------
    def enabled_actions(self) -> list[tuple[str, int]]:
        acts = [(TIMEOUT, u) for u in self.node_ids]
        acts.extend((RECEIVE, mid) for mid in self.state.envelopes)
        return acts

    def step(self) -> TraceEvent:
        if self._next_injection < len(self.injections):
            inj = self.injections[self._next_injection]
            if inj.step <= self.state.step:
                self._next_injection += 1
                return self._inject(inj)
        return self.execute(self.scheduler.choose(self))

    def _inject(self, inj: Injection) -> TraceEvent:
        state = self.state
        node = state.nodes[inj.origin]
        out = Outbox()
        before = self._edge_kinds(node)
        if self.ledger is not None:
            self.ledger.initiate(inj.search_id, inj.origin, inj.dest_id, state.step)
        self.protocol.init_search(node, inj.dest_id, inj.search_id, out)
        return self._finish(node, INJECT, None, None, out, before, None, 0)

    def execute(self, action: tuple[str, int]) -> TraceEvent:
        kind, arg = action
        state = self.state
        out = Outbox()
        if kind == TIMEOUT:
            node = state.nodes[arg]
            before = self._edge_kinds(node)
            sched = self.scheduler
            if sched.guarded and state.step > sched.timeout_deadline[arg]:
                self.late.append((state.step, TIMEOUT, arg))
            state.last_timeout[arg] = state.step
            sched.on_timeout(arg, state.step, len(self.node_ids), len(self.pending))
            self.protocol.timeout(node, out)
            return self._finish(node, TIMEOUT, None, None, out, before, None, 0)
        env = state.envelopes.pop(arg)
        self.pending.discard(arg)
        self.pending_search.discard(arg)
        deadline = self.scheduler.deadline.get(arg)
        if self.scheduler.guarded and deadline is not None and state.step > deadline:
            self.late.append((state.step, RECEIVE, arg))
        self.scheduler.on_deliver(arg)
        node = state.nodes[env.dest]
        before = self._edge_kinds(node)
        self.protocol.receive(node, env.msg, out)
        return self._finish(node, RECEIVE, env.id, env.msg, out, before, env.root, env.depth)

    @staticmethod
    def _edge_kinds(node: NodeState) -> dict[int, str]:
        return {t: e.kind for t, e in node.edges.items()}

    def _finish(
        self,
        node: NodeState,
        kind: str,
        msg_id: Optional[int],
        msg: Optional[Message],
        out: Outbox,
        before: dict[int, str],
        root: Optional[int],
        depth: int,
    ) -> TraceEvent:
        state = self.state
        after = self._edge_kinds(node)
        if self.check_sends:
            held = msg.refs() if msg is not None else ()
            for dest, m in out.sent:
                if dest != node.id and dest not in before and dest not in after and dest not in held:
                    raise ProtocolViolation(
                        f"step {state.step}: node {node.id} sent {m.kind} to {dest} "
                        "without holding its reference"
                    )
        emitted = []
        for dest, m in out.sent:
            env = state.post(dest, m, root, depth + 1)
            self._track(env)
            emitted.append((dest, env.id, m))
        delta: dict[str, Any] = {}
        added = sorted(t for t in after if t not in before)
        removed = sorted(t for t in before if t not in after)
        changed = sorted(t for t in after if t in before and after[t] != before[t])
        if added:
            delta["added"] = [[t, after[t]] for t in added]
        if removed:
            delta["removed"] = removed
        if changed:
            delta["kinds"] = [[t, after[t]] for t in changed]
        event = TraceEvent(
            step=state.step,
            actor=node.id,
            kind=kind,
            msg_id=msg_id,
            message=msg,
            emitted=emitted,
            delta=delta,
            outcomes=out.outcomes,
            notes=out.notes,
            root=root,
            depth=depth,
        )
        if self.ledger is not None:
            for sid, result in out.outcomes:
                self.ledger.resolve(sid, result, state.step)
        state.step += 1
        return event
