"""Edge-manipulation primitives: Introduction, Safe-Delegation, Fusion, plus
the unsafe plain Delegation kept for negative-control runs.

Safe-Delegation handlers need two decisions from the topology protocol: what
to do with a reference that arrives (keep or pass on) and where a temporary
edge is delegated to. Those come from a ``Topology`` object so the
primitives stay protocol-agnostic.
"""

from __future__ import annotations

from typing import Optional, Protocol

from .messages import (
    DelegateAckMsg,
    DelegateReqMsg,
    ImplDelegateMsg,
    IntroduceMsg,
    OriginTag,
    PlainDelegateMsg,
)
from .node import STABLE, TEMPORARY, EdgeRecord, NodeState, Outbox


class PrimitiveError(ValueError):
    """A primitive was invoked with its precondition violated."""


class Topology(Protocol):
    def delegation_target(self, node: NodeState, subject: int) -> Optional[int]: ...

    def adopt_explicit(
        self, node: NodeState, subject: int, tag: Optional[OriginTag], out: Outbox
    ) -> None: ...

    def on_implicit_reference(
        self, node: NodeState, subject: int, tag: Optional[OriginTag], out: Outbox
    ) -> None: ...


def _holds(node: NodeState, ref: int) -> bool:
    return ref == node.id or ref in node.edges


def introduce(node: NodeState, subject: int, target: int, out: Outbox) -> None:
    """Send ``subject``'s reference to ``target``; the actor keeps it."""
    if subject == target:
        raise PrimitiveError(f"node {node.id}: cannot introduce {subject} to itself")
    if not (_holds(node, subject) and _holds(node, target)):
        raise PrimitiveError(
            f"node {node.id} lacks a reference of {subject} or {target}"
        )
    out.send(target, IntroduceMsg(subject))


def safe_delegate_start(
    node: NodeState,
    subject: int,
    via: int,
    out: Outbox,
    tag: Optional[OriginTag] = None,
) -> DelegateReqMsg:
    """First phase of Safe-Delegation: ask ``via`` to take over ``subject``.

    The edge to ``subject`` stays until a matching acknowledgement returns.
    """
    if not node.is_temporary(subject):
        raise PrimitiveError(f"({node.id},{subject}) is not a temporary edge")
    edge = node.edges.get(via)
    if edge is None or edge.kind != STABLE:
        raise PrimitiveError(f"({node.id},{via}) is not a stable edge")
    eseq = node.get_eseq(subject)
    if tag is None:
        tag = node.edges[subject].tag
    msg = DelegateReqMsg(node.id, subject, eseq, tag)
    out.send(via, msg)
    node.bump_eseq(via, eseq + 1)
    return msg


def fuse(a: EdgeRecord, b: EdgeRecord) -> EdgeRecord:
    """Merge two records of the same reference. Stable wins over temporary."""
    if a.target != b.target:
        raise PrimitiveError(f"cannot fuse references of {a.target} and {b.target}")
    if a.kind == STABLE or b.kind != STABLE:
        keep = a
    else:
        keep = b
    return EdgeRecord(keep.target, keep.kind, keep.tag or a.tag or b.tag)


def store_reference(node: NodeState, record: EdgeRecord) -> EdgeRecord:
    """Store an explicit edge, fusing with an existing record of the same node."""
    old = node.edges.get(record.target)
    if old is not None:
        record = fuse(old, record)
    node.edges[record.target] = record
    return record


def on_delegate_req(
    node: NodeState, msg: DelegateReqMsg, topo: Topology, out: Outbox
) -> None:
    w = msg.subject
    if w != node.id:
        if w not in node.edges:
            # kind is settled by the topology right below
            node.edges[w] = EdgeRecord(w, TEMPORARY, msg.tag)
            fresh = True
        else:
            fresh = False
        node.bump_eseq(w, msg.eseq + 1)
    out.send(msg.sender, DelegateAckMsg(w, msg.eseq, msg.tag))
    if w != node.id and fresh:
        # a reference already held is fused and triggers nothing further
        topo.adopt_explicit(node, w, msg.tag, out)


def on_delegate_ack(
    node: NodeState, msg: DelegateAckMsg, topo: Topology, out: Outbox
) -> None:
    w = msg.subject
    if msg.eseq == node.get_eseq(w) and node.is_temporary(w):
        via = topo.delegation_target(node, w)
        if via is not None:
            del node.edges[w]
            out.send(via, ImplDelegateMsg(w, msg.tag))
            return
    on_impl_delegate(node, ImplDelegateMsg(w, msg.tag), topo, out)


def on_impl_delegate(
    node: NodeState, msg: ImplDelegateMsg, topo: Topology, out: Outbox
) -> None:
    w = msg.subject
    if w == node.id or w in node.edges:
        return  # fused with the reference already held
    topo.on_implicit_reference(node, w, msg.tag, out)


def plain_delegate(
    node: NodeState,
    subject: int,
    via: int,
    out: Outbox,
    *,
    negative_control: bool = False,
) -> None:
    """Unsafe Delegation: hand ``subject`` to ``via`` and forget it at once."""
    if not negative_control:
        raise PrimitiveError("plain delegation is only allowed in negative-control mode")
    if len({node.id, subject, via}) != 3:
        raise PrimitiveError("delegation needs three distinct nodes")
    if subject not in node.edges or via not in node.edges:
        raise PrimitiveError(f"node {node.id} lacks a reference of {subject} or {via}")
    del node.edges[subject]
    out.send(via, PlainDelegateMsg(subject))
