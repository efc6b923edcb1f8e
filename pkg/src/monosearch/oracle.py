"""Global-state inspection: reachability, message invariants, legitimacy,
connectivity, potentials and the search ledger.

Everything here reads a ``GlobalState`` and never mutates it. Protocol code
never imports this module.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .messages import (
    DelegateAckMsg,
    DelegateReqMsg,
    FastProbeMsg,
    PFailMsg,
    ProbeMsg,
    PSuccessMsg,
    SearchMsg,
)
from .node import STABLE, TEMPORARY, dist
from .sim import GlobalState

INVARIANT_IDS = ("1", "2", "3a", "3b", "3c", "3d", "4", "5", "6")


@dataclass(frozen=True)
class Verdict:
    invariant: str
    holds: bool
    witness: Optional[str] = None

    def __post_init__(self):
        if not self.holds and not self.witness:
            raise ValueError(f"violated verdict {self.invariant} needs a witness")

    def to_dict(self) -> dict:
        return {"invariant": self.invariant, "holds": self.holds, "witness": self.witness}


def _ok(inv: str) -> Verdict:
    return Verdict(inv, True)


# -- graphs ---------------------------------------------------------------


def explicit_adjacency(state: GlobalState) -> dict[int, list[int]]:
    return {u: list(node.edges) for u, node in state.nodes.items()}


def _check_node(state: GlobalState, u: int) -> None:
    if u not in state.nodes:
        raise KeyError(f"unknown node {u}")


@dataclass(frozen=True)
class ReachSet:
    origin: int
    dest_id: int
    members: frozenset

    def __contains__(self, x: int) -> bool:
        return x in self.members


def _reach(adj: dict[int, list[int]], origin: int, dest_id: int) -> set[int]:
    seen = {origin}
    stack = [origin]
    while stack:
        a = stack.pop()
        da = dist(a, dest_id)
        for b in adj[a]:
            if b not in seen and dist(b, dest_id) < da:
                seen.add(b)
                stack.append(b)
    return seen


def reach(
    state: GlobalState, origin: int, dest_id: int, adj: Optional[dict] = None
) -> ReachSet:
    """Nodes reachable from ``origin`` over explicit edges whose every hop
    strictly decreases the distance to ``dest_id``."""
    _check_node(state, origin)
    adj = adj if adj is not None else explicit_adjacency(state)
    return ReachSet(origin, dest_id, frozenset(_reach(adj, origin, dest_id)))


def reaching(adj: dict[int, list[int]], target: int) -> set[int]:
    """All x with ``target`` in R(x, id(target)), by reverse search."""
    radj: dict[int, list[int]] = defaultdict(list)
    for a, outs in adj.items():
        da = dist(a, target)
        for b in outs:
            if dist(b, target) < da:
                radj[b].append(a)
    seen = {target}
    stack = [target]
    while stack:
        b = stack.pop()
        for a in radj.get(b, ()):
            if a not in seen:
                seen.add(a)
                stack.append(a)
    return seen


def explicit_path_exists(state: GlobalState, u: int, v: int) -> bool:
    _check_node(state, u)
    _check_node(state, v)
    if u == v:
        return True
    seen = {u}
    stack = [u]
    while stack:
        a = stack.pop()
        for b in state.nodes[a].edges:
            if b == v:
                return True
            if b not in seen:
                seen.add(b)
                stack.append(b)
    return False


def explicit_closure(state: GlobalState) -> dict[int, frozenset]:
    """E(u, ·) for every u."""
    adj = explicit_adjacency(state)
    out = {}
    for u in adj:
        seen = {u}
        stack = [u]
        while stack:
            a = stack.pop()
            for b in adj[a]:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        out[u] = frozenset(seen)
    return out


def weakly_connected_components(state: GlobalState) -> list[set[int]]:
    """Components of NG: explicit edges plus references carried by messages."""
    parent = {u: u for u in state.nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for u, node in state.nodes.items():
        for t in node.edges:
            union(u, t)
        for d, buf in node.waiting.items():
            for m in buf:
                if m.origin in parent:
                    union(u, m.origin)
    for env in state.envelopes.values():
        for r in env.msg.refs():
            if r in parent:
                union(env.dest, r)
    groups: dict[int, set[int]] = defaultdict(set)
    for u in state.nodes:
        groups[find(u)].add(u)
    return sorted(groups.values(), key=min)


# -- invariants 1 and 2 ---------------------------------------------------


def _eseq_path(state: GlobalState, u: int, v: int, w: int, threshold: int) -> bool:
    """Path u -> v over explicit edges (x, y) with x.eseq[y] > threshold that
    avoids the edge (u, w)."""
    if u == v:
        return True
    nodes = state.nodes
    seen = {u}
    stack = [u]
    while stack:
        x = stack.pop()
        nx = nodes[x]
        for y in nx.edges:
            if (x == u and y == w) or y in seen:
                continue
            if nx.eseq.get(y, 0) <= threshold:
                continue
            if y == v:
                return True
            seen.add(y)
            stack.append(y)
    return False


def _delegation_verdict(state: GlobalState, inv: str) -> Verdict:
    for env in state.envelopes.values():
        m = env.msg
        if inv == "1" and isinstance(m, DelegateReqMsg):
            u, w, target = m.sender, m.subject, env.dest
        elif inv == "2" and isinstance(m, DelegateAckMsg):
            u, w, target = env.dest, m.subject, m.subject
        else:
            continue
        if u not in state.nodes or target not in state.nodes:
            return Verdict(inv, False, f"msg {env.id}: reference to unknown node")
        threshold = state.nodes[u].eseq.get(w, 0)
        if threshold > m.eseq:
            continue
        if not _eseq_path(state, u, target, w, threshold):
            return Verdict(
                inv,
                False,
                f"msg {env.id} ({m.kind} at {env.dest}, eseq {m.eseq}): no path "
                f"{u}->{target} avoiding ({u},{w}) above eseq {threshold}",
            )
    return _ok(inv)


def check_invariant_1(state: GlobalState) -> Verdict:
    return _delegation_verdict(state, "1")


def check_invariant_2(state: GlobalState) -> Verdict:
    return _delegation_verdict(state, "2")


# -- invariants 3 to 6 ----------------------------------------------------


class ReachHistory:
    """Past-state memory for the quantified clauses 3c and 5.

    For each tracked (x, d) with a node of id d we remember ``x.seq[d]`` at
    the first recorded admissible state in which that node was in R(x, d).
    Because seq values never decrease, "some admissible state with
    x.seq[d] < s had the target in R(x, d)" is equivalent to
    ``first_seq[(x, d)] < s``.

    ``pairs`` restricts tracking to the (origin, destID) pairs that can ever
    carry a probe or pfail; ``None`` tracks every pair.
    """

    def __init__(self, pairs: Optional[Iterable[tuple[int, int]]] = None) -> None:
        self.first_seq: dict[tuple[int, int], int] = {}
        self.targets: Optional[dict[int, set[int]]] = None
        if pairs is not None:
            self.targets = defaultdict(set)
            for x, d in pairs:
                self.targets[d].add(x)
        self._done: set[int] = set()

    def record(self, state: GlobalState, view: "StateView") -> None:
        nodes = state.nodes
        targets = self.targets
        for d in (nodes if targets is None else targets):
            if d in self._done or d not in nodes:
                continue
            want = nodes.keys() if targets is None else targets[d]
            r = view.reaching(d)
            missing = False
            for x in want:
                key = (x, d)
                if key in self.first_seq:
                    continue
                if x in r:
                    self.first_seq[key] = nodes[x].seq.get(d, 0)
                else:
                    missing = True
            if not missing:
                self._done.add(d)

    def reached_before(self, x: int, d: int, seq: int) -> bool:
        s = self.first_seq.get((x, d))
        return s is not None and s < seq


class StateView:
    """Memoised reach queries over one state."""

    def __init__(self, state: GlobalState) -> None:
        self.state = state
        self.adj = explicit_adjacency(state)
        self._reach: dict[tuple[int, int], set[int]] = {}
        self._reaching: dict[int, set[int]] = {}

    def reach(self, u: int, d: int) -> set[int]:
        key = (u, d)
        r = self._reach.get(key)
        if r is None:
            r = self._reach[key] = _reach(self.adj, u, d)
        return r

    def reaching(self, target: int) -> set[int]:
        r = self._reaching.get(target)
        if r is None:
            r = self._reaching[target] = reaching(self.adj, target)
        return r


def check_invariants_3_to_6(
    state: GlobalState,
    history: Optional[ReachHistory] = None,
    view: Optional[StateView] = None,
    include_current: bool = False,
) -> list[Verdict]:
    """Per-message checks of 3a-3d, 4, 5 and 6.

    Without ``history`` the past-state clauses of 3c and 5 only consider the
    current state. With ``include_current`` the current state also counts
    as one of the quantified admissible states.
    """
    view = view or StateView(state)
    nodes = state.nodes
    found: dict[str, str] = {}
    use_current = history is None or include_current

    def past_reach(x: int, d: int, seq: int) -> bool:
        if history is not None and history.reached_before(x, d, seq):
            return True
        return use_current and nodes[x].seq.get(d, 0) < seq and x in view.reaching(d)

    def fail(inv: str, text: str) -> None:
        found.setdefault(inv, text)

    for env in state.envelopes.values():
        m = env.msg
        u = env.dest
        if isinstance(m, ProbeMsg):
            d = m.dest_id
            if u not in m.next:
                fail("3a", f"msg {env.id}: holder {u} not in Next {sorted(m.next)}")
            else:
                du = dist(u, d)
                far = [w for w in m.next if dist(w, d) > du]
                if far:
                    fail("3a", f"msg {env.id}: Next members {sorted(far)} farther than holder {u}")
            if m.source not in nodes or any(w not in nodes for w in m.next):
                fail("3b", f"msg {env.id}: reference to unknown node")
                continue
            rs = view.reach(m.source, d)
            outside = sorted(w for w in m.next if w not in rs)
            if outside:
                fail("3b", f"msg {env.id}: Next members {outside} not in R({m.source},{d})")
            if d in nodes:
                to_target = view.reaching(d)
                if not any(w in to_target for w in m.next) and past_reach(m.source, d, m.seq):
                    fail(
                        "3c",
                        f"msg {env.id}: target {d} unreachable from Next but was in "
                        f"R({m.source},{d}) while seq < {m.seq}",
                    )
        elif isinstance(m, FastProbeMsg):
            if m.source not in nodes or u not in view.reach(m.source, m.dest_id):
                fail("3d", f"msg {env.id}: holder {u} not in R({m.source},{m.dest_id})")
        elif isinstance(m, PSuccessMsg):
            if m.dest != m.dest_id:
                fail("4", f"msg {env.id}: psuccess names {m.dest} for id {m.dest_id}")
            elif m.dest not in nodes or m.dest not in view.reach(u, m.dest_id):
                fail("4", f"msg {env.id}: {m.dest} not in R({u},{m.dest_id})")
        elif isinstance(m, PFailMsg):
            d = m.dest_id
            if d in nodes and past_reach(u, d, m.seq):
                fail(
                    "5",
                    f"msg {env.id}: pfail({d},{m.seq}) at {u} but {d} was in "
                    f"R({u},{d}) while seq < {m.seq}",
                )
        elif isinstance(m, SearchMsg):
            if u != m.dest_id:
                fail("6", f"msg {env.id}: search for {m.dest_id} held by {u}")
            elif m.origin not in nodes or u not in view.reach(m.origin, m.dest_id):
                fail("6", f"msg {env.id}: {u} not in R({m.origin},{m.dest_id})")
    return [
        Verdict(i, i not in found, found.get(i))
        for i in ("3a", "3b", "3c", "3d", "4", "5", "6")
    ]


def check_all_invariants(
    state: GlobalState,
    history: Optional[ReachHistory] = None,
    view: Optional[StateView] = None,
) -> list[Verdict]:
    """Invariants 1-6. With a history, the current state is first checked
    against past states only; if that makes it admissible, it is included
    in the quantification and 3c/5 are checked again."""
    view = view or StateView(state)
    out = [check_invariant_1(state), check_invariant_2(state)]
    rest = check_invariants_3_to_6(state, history, view)
    if history is not None and all(v.holds for v in out + rest):
        rest = check_invariants_3_to_6(state, history, view, include_current=True)
    return out + rest


def admissible(state: GlobalState, history: Optional[ReachHistory] = None) -> Verdict:
    for v in check_all_invariants(state, history):
        if not v.holds:
            return Verdict("admissible", False, f"invariant {v.invariant}: {v.witness}")
    return _ok("admissible")


# -- legitimacy -----------------------------------------------------------


def sorted_list_edges(ids: Iterable[int]) -> set[tuple[int, int]]:
    s = sorted(ids)
    out = set()
    for a, b in zip(s, s[1:]):
        out.add((a, b))
        out.add((b, a))
    return out


def stable_edges(state: GlobalState) -> set[tuple[int, int]]:
    return {
        (u, t)
        for u, node in state.nodes.items()
        for t, e in node.edges.items()
        if e.kind == STABLE
    }


def stable_list_ok(state: GlobalState) -> bool:
    return stable_edges(state) == sorted_list_edges(state.nodes)


def legitimate_list(state: GlobalState) -> Verdict:
    """Stable ENG is the sorted doubly-linked list, no temporary edges exist
    and no delegation handshake is in flight. Remaining traffic (keep-alive
    introductions, forwarded implicit references, search messages) cannot
    change ENG from such a state."""
    want = sorted_list_edges(state.nodes)
    have = stable_edges(state)
    if have != want:
        missing = sorted(want - have)[:4]
        extra = sorted(have - want)[:4]
        return Verdict("legitimacy", False, f"stable ENG differs: missing {missing}, extra {extra}")
    for u, node in state.nodes.items():
        temps = node.temporary()
        if temps:
            return Verdict("legitimacy", False, f"node {u} has temporary edges {sorted(temps)}")
    for env in state.envelopes.values():
        if isinstance(env.msg, (DelegateReqMsg, DelegateAckMsg)):
            return Verdict("legitimacy", False, f"msg {env.id}: {env.msg.kind} in flight")
    return _ok("legitimacy")


# -- potentials -----------------------------------------------------------


def psi(members: Iterable[int], dest_id: int, n: int) -> int:
    return sum(n ** dist(u, dest_id) for u in members)


def phi_temporary(state: GlobalState) -> Optional[int]:
    """Sum over targets w of the longest remaining delegation path of a
    temporary edge (u, w), i.e. the number of hops u still has to pass the
    reference along the list before it fuses at w's neighbour.

    Only defined once the stable edges form the sorted list; returns
    ``None`` otherwise."""
    if not stable_list_ok(state):
        return None
    rank = {u: i for i, u in enumerate(sorted(state.nodes))}
    best: dict[int, int] = {}
    for u, node in state.nodes.items():
        for w, e in node.edges.items():
            if e.kind != TEMPORARY:
                continue
            length = abs(rank[u] - rank[w]) - 1
            if length > best.get(w, -1):
                best[w] = length
    return sum(best.values())


# -- search ledger --------------------------------------------------------


@dataclass
class LedgerEntry:
    search_id: int
    origin: int
    dest_id: int
    initiated: int
    outcome: Optional[str] = None
    resolved: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "search_id": self.search_id,
            "origin": self.origin,
            "dest_id": self.dest_id,
            "initiated": self.initiated,
            "outcome": self.outcome,
            "resolved": self.resolved,
        }


@dataclass
class SearchLedger:
    entries: dict[int, LedgerEntry] = field(default_factory=dict)
    # outcomes reported for unknown or already resolved search ids
    anomalies: list[str] = field(default_factory=list)

    def initiate(self, search_id: int, origin: int, dest_id: int, step: int) -> None:
        if search_id in self.entries:
            raise ValueError(f"search id {search_id} initiated twice")
        self.entries[search_id] = LedgerEntry(search_id, origin, dest_id, step)

    def resolve(self, search_id: int, outcome: str, step: int) -> None:
        e = self.entries.get(search_id)
        if e is None:
            self.anomalies.append(f"step {step}: outcome for unknown search {search_id}")
            return
        if e.outcome is not None:
            self.anomalies.append(f"step {step}: search {search_id} resolved twice")
            return
        e.outcome = outcome
        e.resolved = step

    def unresolved(self) -> list[LedgerEntry]:
        return [e for e in self.entries.values() if e.outcome is None]

    def stats(self) -> dict:
        out = {"initiated": len(self.entries), "success": 0, "fail": 0, "unresolved": 0}
        for e in self.entries.values():
            out[e.outcome or "unresolved"] += 1
        return out


def ledger_monotone(ledger: SearchLedger) -> Verdict:
    """No fail initiated after some success for the same (origin, destID)."""
    by_pair: dict[tuple[int, int], list[LedgerEntry]] = defaultdict(list)
    for e in ledger.entries.values():
        if e.outcome is not None:
            by_pair[(e.origin, e.dest_id)].append(e)
    for (u, d), es in sorted(by_pair.items()):
        succ = [e for e in es if e.outcome == "success"]
        if not succ:
            continue
        first = min(succ, key=lambda e: (e.initiated, e.search_id))
        for e in sorted(es, key=lambda e: (e.initiated, e.search_id)):
            if e.outcome == "fail" and e.initiated > first.initiated:
                return Verdict(
                    "monotonic",
                    False,
                    f"search {first.search_id} ({u}->{d}, initiated step {first.initiated}) "
                    f"succeeded; search {e.search_id} initiated step {e.initiated} failed",
                )
    return _ok("monotonic")


def monotone_violations(ledger: SearchLedger) -> list[tuple[int, int]]:
    """All (success id, later fail id) pairs."""
    by_pair: dict[tuple[int, int], list[LedgerEntry]] = defaultdict(list)
    for e in ledger.entries.values():
        by_pair[(e.origin, e.dest_id)].append(e)
    out = []
    for es in by_pair.values():
        succ = [e for e in es if e.outcome == "success"]
        if not succ:
            continue
        first = min(succ, key=lambda e: (e.initiated, e.search_id))
        out.extend(
            (first.search_id, e.search_id)
            for e in es
            if e.outcome == "fail" and e.initiated > first.initiated
        )
    return sorted(out)


# -- per-step monitor -----------------------------------------------------


def _links_recovered(ev, state: GlobalState) -> bool:
    """True if every NG link the event removed is still bridged by links
    visible locally after it: the actor's explicit edges and the messages
    the event emitted."""
    if ev.outcomes or (ev.message is not None and ev.message.kind == "psuccess"):
        return False  # search buffers moved; recount
    v = ev.actor
    lost = set(ev.delta.get("removed", ()))
    if ev.message is not None:
        lost.update(ev.message.refs())
    lost.discard(v)
    if not lost:
        return True
    nbr: dict[int, set[int]] = defaultdict(set)

    def link(a, b):
        nbr[a].add(b)
        nbr[b].add(a)

    for t in state.nodes[v].edges:
        link(v, t)
    for dst, _, m in ev.emitted:
        for r in m.refs():
            link(dst, r)
    seen = {v}
    stack = [v]
    while stack:
        a = stack.pop()
        for b in nbr[a]:
            if b not in seen:
                seen.add(b)
                stack.append(b)
    return lost <= seen


DEFAULT_CHECKS = (
    "connectivity",
    "invariants",
    "reach",
    "explicit-paths",
    "stable-mdl",
    "counters",
    "psi",
    "probes",
)


class Monitor:
    """Feeds on trace events and checked states; accumulates verdict counts.

    ``observe_event`` sees every step (cheap bookkeeping); ``check`` runs
    the global predicates on the current state and is called at the oracle
    cadence.
    """

    def __init__(
        self,
        state: GlobalState,
        checks: Iterable[str] = DEFAULT_CHECKS,
        reach_samples: int = 16,
        seed: int = 0,
        search_pairs: Optional[Iterable[tuple[int, int]]] = None,
    ) -> None:
        self.checks = set(checks)
        self.n = len(state.nodes)
        self.counts: dict[str, list[int]] = defaultdict(lambda: [0, 0])
        self.first_violation: dict[str, tuple[int, str]] = {}
        self.history = ReachHistory(search_pairs)
        self._conn_dirty = True
        self.admissible_now: Optional[bool] = None
        self.admissible_steps = 0
        self.inv12_from: Optional[int] = None
        self.legit_from: Optional[int] = None
        self.legit_first: Optional[int] = None
        self.stable_list_from: Optional[int] = None
        self._legit_eng: Optional[set] = None
        self.components = len(weakly_connected_components(state))
        self._closure: Optional[dict[int, frozenset]] = None
        self._list_edges = sorted_list_edges(state.nodes)
        self._held_list_edges: set = set()
        self._eseq = {u: dict(nd.eseq) for u, nd in state.nodes.items()}
        self._seq = {u: dict(nd.seq) for u, nd in state.nodes.items()}
        self._phi: Optional[int] = None
        self.phi_increases = 0
        rng = random.Random(seed ^ 0x5EED)
        ids = sorted(state.nodes)
        lo, hi = ids[0] - 2, ids[-1] + 2
        self.samples = []
        for _ in range(reach_samples):
            u = rng.choice(ids)
            d = rng.choice(ids) if rng.random() < 0.75 else rng.randint(lo, hi)
            self.samples.append((u, d))
        # pairs that searches actually use, up to the same budget
        used = sorted(set(search_pairs or ()) - set(self.samples))
        rng.shuffle(used)
        self.samples.extend(used[:reach_samples])
        self._reach_prev: dict[tuple[int, int], set[int]] = {}
        # probes started in a timeout: root msg id -> (source, dest_id, step)
        self.open_probes: dict[int, tuple[int, int, int]] = {}
        self.probes_started = 0
        self.search_hops: dict[int, int] = {}
        self.notes: dict[str, int] = defaultdict(int)
        self.series: dict[str, list] = defaultdict(list)
        self._last_checked_admissible = True

    # -- recording -------------------------------------------------------
    def verdict(self, step: int, inv: str, holds: bool, witness: Optional[str] = None) -> None:
        c = self.counts[inv]
        c[0] += 1
        if not holds:
            c[1] += 1
            self.first_violation.setdefault(inv, (step, witness or ""))

    def violations(self, inv: str) -> int:
        return self.counts[inv][1] if inv in self.counts else 0

    # -- per event -------------------------------------------------------
    def observe_event(self, ev, state: GlobalState) -> None:
        for note in ev.notes:
            self.notes[note] += 1
        msg = ev.message
        if "connectivity" in self.checks and not self._conn_dirty:
            self._conn_dirty = not _links_recovered(ev, state)
        if "probes" in self.checks:
            if ev.kind == "timeout":
                for _, mid, m in ev.emitted:
                    if m.kind == "probe":
                        self.open_probes[mid] = (ev.actor, m.dest_id, ev.step)
                        self.probes_started += 1
            elif msg is not None and msg.kind in ("psuccess", "pfail"):
                op = self.open_probes.get(ev.root) if ev.root is not None else None
                if op is not None and op[0] == ev.actor:
                    del self.open_probes[ev.root]
        if msg is not None and msg.kind == "search" and ev.outcomes:
            for sid, res in ev.outcomes:
                if res == "success":
                    self.search_hops[sid] = ev.depth
        if "psi" in self.checks and msg is not None and msg.kind in ("probe", "forwardprobe"):
            # the pre-state is the last checked state; only meaningful when
            # the oracle runs every step
            if self._last_checked_admissible:
                before = psi(msg.next, msg.dest_id, self.n)
                for _, mid, m in ev.emitted:
                    if m.kind == "forwardprobe":
                        after = psi(m.next, m.dest_id, self.n)
                        self.verdict(
                            ev.step,
                            "psi",
                            after < before,
                            None if after < before else
                            f"msg {mid}: Next {sorted(m.next)} caused by msg {ev.msg_id} "
                            f"Next {sorted(msg.next)} (psi {after} >= {before})",
                        )

    # -- per checked state ----------------------------------------------
    def check(self, state: GlobalState) -> None:
        step = state.step
        view = StateView(state)
        if "connectivity" in self.checks:
            # a step can only split a component by dropping a link; when every
            # dropped link is bridged by what the step left behind, the count
            # cannot have grown and the full recount is skipped
            if self._conn_dirty:
                c = len(weakly_connected_components(state))
                self._conn_dirty = False
            else:
                c = self.components
            self.verdict(
                step, "connectivity", c <= self.components,
                None if c <= self.components else f"components {self.components} -> {c}",
            )
            self.components = min(self.components, c)
            self.series["components"].append((step, c))

        inv_ok = True
        if "invariants" in self.checks:
            vs = check_all_invariants(state, self.history, view)
            for v in vs:
                self.verdict(step, v.invariant, v.holds, v.witness)
            inv_ok = all(v.holds for v in vs)
            inv12 = vs[0].holds and vs[1].holds
            if inv_ok:
                self.history.record(state, view)
                self.admissible_steps += 1
            if self.inv12_from is None and inv12:
                self.inv12_from = step
            elif self.inv12_from is not None:
                self.verdict(step, "inv12-closure", inv12,
                             None if inv12 else f"invariants 1-2 broke at step {step}")
        self._last_checked_admissible = inv_ok
        self.admissible_now = inv_ok

        if "explicit-paths" in self.checks and self.inv12_from is not None:
            clo = explicit_closure(state)
            if self._closure is not None:
                for u, prev in self._closure.items():
                    lost = prev - clo[u]
                    if lost:
                        self.verdict(step, "explicit-path", False,
                                     f"E({u},{min(lost)}) became false")
                        break
                else:
                    self.verdict(step, "explicit-path", True)
            self._closure = clo

        if "reach" in self.checks and self.inv12_from is not None:
            for key in self.samples:
                u, d = key
                cur = view.reach(u, d)
                prev = self._reach_prev.get(key)
                if prev is not None:
                    lost = prev - cur
                    self.verdict(step, "reach-monotone", not lost,
                                 None if not lost else f"R({u},{d}) lost {sorted(lost)}")
                    if d in state.nodes and d in prev:
                        self.verdict(step, "target-reach-monotone", d in cur,
                                     None if d in cur else f"{d} left R({u},{d})")
                self._reach_prev[key] = cur

        if "stable-mdl" in self.checks:
            held = {
                (u, t)
                for u, nd in state.nodes.items()
                for t, e in nd.edges.items()
                if e.kind == STABLE and (u, t) in self._list_edges
            }
            lost = self._held_list_edges - held
            self.verdict(step, "stable-mdl", not lost,
                         None if not lost else f"list edges lost {sorted(lost)[:4]}")
            self._held_list_edges = held

        if "counters" in self.checks:
            for u, nd in state.nodes.items():
                pe, ps = self._eseq[u], self._seq[u]
                for k, v in pe.items():
                    if nd.eseq.get(k, 0) < v:
                        self.verdict(step, "eseq-monotone", False, f"{u}.eseq[{k}] decreased")
                for k, v in ps.items():
                    if nd.seq.get(k, 0) < v:
                        self.verdict(step, "seq-monotone", False, f"{u}.seq[{k}] decreased")
                self._eseq[u] = dict(nd.eseq)
                self._seq[u] = dict(nd.seq)

        legit = legitimate_list(state).holds
        if legit:
            if self.legit_from is None:
                self.legit_from = step
                if self.legit_first is None:
                    self.legit_first = step
                self._legit_eng = stable_edges(state)
            else:
                self._check_closure(state, step)
        else:
            if self.legit_from is not None:
                # left legitimacy: closure requires the stable ENG to stay
                self._check_closure(state, step)
            self.legit_from = None
        if self.stable_list_from is None and stable_list_ok(state):
            self.stable_list_from = step
        if self.stable_list_from is not None:
            ph = phi_temporary(state)
            if ph is not None:
                if self._phi is not None and ph > self._phi:
                    self.phi_increases += 1
                self._phi = ph
                self.series["phi"].append((step, ph))

    def _check_closure(self, state: GlobalState, step: int) -> None:
        eng = stable_edges(state)
        same = eng == self._legit_eng
        self.verdict(step, "closure", same, None if same else f"stable ENG changed at step {step}")

    def summary(self) -> dict:
        return {
            inv: {"checked": c[0], "violated": c[1],
                  **({"first": {"step": self.first_violation[inv][0],
                                "trace_line": self.first_violation[inv][0] + 1,
                                "witness": self.first_violation[inv][1]}}
                     if inv in self.first_violation else {})}
            for inv, c in sorted(self.counts.items())
        }
