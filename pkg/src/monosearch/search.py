"""Generic search protocol: buffered searches resolved by probing.

A node never forwards a search blindly. It buffers the request, probes for
the target with a ``Next`` set of strictly closer nodes, and only releases
the buffer directly to a node confirmed by ``psuccess`` (or drops it on
``pfail``). Per-destination sequence numbers make stale replies harmless.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .messages import (
    FastProbeMsg,
    ForwardProbeMsg,
    ImplDelegateMsg,
    PFailMsg,
    ProbeMsg,
    PSuccessMsg,
    SearchMsg,
)
from .node import NodeState, Outbox, dist


def closer_neighbors(node: NodeState, dest_id: int) -> set[int]:
    """Explicit neighbours strictly closer to ``dest_id`` than the node."""
    d0 = dist(node.id, dest_id)
    return {t for t in node.edges if dist(t, dest_id) < d0}


def farthest(members: Iterable[int], dest_id: int) -> int:
    """Member with maximum distance to ``dest_id``; ties go to the smaller id."""
    return max(members, key=lambda m: (dist(m, dest_id), -m))


def greedy_hop(node: NodeState, dest_id: int) -> Optional[int]:
    closer = closer_neighbors(node, dest_id)
    if not closer:
        return None
    return min(closer, key=lambda m: (dist(m, dest_id), m))


def init_search(
    node: NodeState, dest_id: int, search_id: int, out: Outbox, fastprobe: bool = True
) -> None:
    if dest_id == node.id:
        out.outcome(search_id, "success")
        return
    buf = node.waiting.get(dest_id)
    if not buf:
        # the max() keeps seq[dest] strictly increasing even after several
        # unguarded psuccess replies bumped it past the global counter
        node.global_seq = max(node.global_seq, node.seq.get(dest_id, 0)) + 1
        node.seq[dest_id] = node.global_seq
        buf = node.waiting[dest_id] = []
    buf.append(SearchMsg(node.id, dest_id, search_id))
    if fastprobe:
        hop = greedy_hop(node, dest_id)
        if hop is not None:
            out.send(hop, FastProbeMsg(node.id, dest_id))


def _drop_buffer(node: NodeState, dest_id: int, out: Outbox) -> None:
    for m in node.waiting.pop(dest_id, ()):
        out.outcome(m.search_id, "fail")
    node.seq[dest_id] = node.seq.get(dest_id, 0) + 1


def probe_timeout(node: NodeState, out: Outbox) -> None:
    for dest_id in sorted(node.waiting):
        if not node.waiting[dest_id]:
            del node.waiting[dest_id]
            continue
        closer = closer_neighbors(node, dest_id)
        if not closer:
            # same effect as a self-addressed pfail for the current seq
            _drop_buffer(node, dest_id, out)
            continue
        out.send(
            farthest(closer, dest_id),
            ProbeMsg(node.id, dest_id, frozenset(closer), node.seq.get(dest_id, 0)),
        )


def on_probe(node: NodeState, msg: ProbeMsg, out: Outbox) -> None:
    dest_id = msg.dest_id
    if node.id == dest_id:
        stray = msg.next - {node.id}
        if stray:
            out.note("probe-at-target-with-next")
            for u in sorted(stray):
                out.send(node.id, ImplDelegateMsg(u))
        out.send(msg.source, PSuccessMsg(dest_id, node.id))
        out.send(node.id, ImplDelegateMsg(msg.source))
        return
    nxt = (msg.next - {node.id}) | closer_neighbors(node, dest_id)
    if not nxt:
        out.send(msg.source, PFailMsg(dest_id, msg.seq))
        out.send(node.id, ImplDelegateMsg(msg.source))
        return
    u = farthest(nxt, dest_id)
    if u not in node.edges:
        out.send(node.id, ImplDelegateMsg(u))
    out.send(u, ForwardProbeMsg(msg.source, dest_id, frozenset(nxt), msg.seq))


def on_psuccess(node: NodeState, msg: PSuccessMsg, out: Outbox) -> None:
    # no seq guard: psuccess carries none, and a stale one still names the
    # right node
    for m in node.waiting.pop(msg.dest_id, ()):
        out.send(msg.dest, m)
    node.seq[msg.dest_id] = node.seq.get(msg.dest_id, 0) + 1
    out.send(node.id, ImplDelegateMsg(msg.dest))


def on_pfail(node: NodeState, msg: PFailMsg, out: Outbox) -> None:
    if msg.seq >= node.seq.get(msg.dest_id, 0):
        _drop_buffer(node, msg.dest_id, out)


def on_fastprobe(node: NodeState, msg: FastProbeMsg, out: Outbox) -> None:
    if node.id == msg.dest_id:
        out.send(msg.source, PSuccessMsg(msg.dest_id, node.id))
        return
    hop = greedy_hop(node, msg.dest_id)
    if hop is not None:
        out.send(hop, FastProbeMsg(msg.source, msg.dest_id))


def on_search(node: NodeState, msg: SearchMsg, out: Outbox) -> None:
    if node.id == msg.dest_id:
        out.outcome(msg.search_id, "success")
    else:
        # only reachable from corrupted initial messages
        out.note("search-at-wrong-node")
        out.outcome(msg.search_id, "fail")
