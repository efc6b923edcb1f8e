"""Self-stabilizing sorted list, in two flavours.

``ListProtocol`` is the transformed protocol built only from Introduction,
Safe-Delegation and Fusion. Every node keeps the closest known id on each
side as a stable edge; all other explicit edges are temporary and get
safe-delegated to the stable neighbour on their side. References arriving
implicitly are stored if closer than the current neighbour and passed on
otherwise.

``PlainListProtocol`` is the same linearization with the unsafe Delegation
primitive. It exists only to show that searches can fail after having
succeeded.
"""

from __future__ import annotations

from typing import Optional

from . import primitives, search
from .messages import (
    DelegateAckMsg,
    DelegateReqMsg,
    FastProbeMsg,
    ForwardProbeMsg,
    ImplDelegateMsg,
    IntroduceMsg,
    Message,
    OriginTag,
    PFailMsg,
    PlainDelegateMsg,
    ProbeMsg,
    PSuccessMsg,
    SearchMsg,
)
from .node import STABLE, TEMPORARY, EdgeRecord, NodeState, Outbox, dist

ISF = "isf"
NEGATIVE_CONTROL = "negative-control-idf"
MODES = (ISF, NEGATIVE_CONTROL)


def sides(node: NodeState) -> tuple[Optional[int], Optional[int]]:
    """Closest explicit neighbour below and above the node's id."""
    left = right = None
    me = node.id
    for t in node.edges:
        if t < me:
            if left is None or t > left:
                left = t
        elif t > me:
            if right is None or t < right:
                right = t
    return left, right


def same_side(node: NodeState, subject: int) -> Optional[int]:
    left, right = sides(node)
    return right if subject > node.id else left


def _displace_tag(node: NodeState, subject: int) -> OriginTag:
    side = "right" if subject > node.id else "left"
    return OriginTag(f"linearize-{side}", PlainDelegateMsg(subject).to_dict())


class _Base:
    mode: str

    def __init__(self, fastprobe: bool = True) -> None:
        self.fastprobe = fastprobe
        self._dispatch = {
            ProbeMsg: lambda n, m, o: search.on_probe(n, m, o),
            ForwardProbeMsg: lambda n, m, o: search.on_probe(n, m, o),
            FastProbeMsg: lambda n, m, o: search.on_fastprobe(n, m, o),
            PSuccessMsg: lambda n, m, o: search.on_psuccess(n, m, o),
            PFailMsg: lambda n, m, o: search.on_pfail(n, m, o),
            SearchMsg: lambda n, m, o: search.on_search(n, m, o),
        }

    def receive(self, node: NodeState, msg: Message, out: Outbox) -> None:
        self._dispatch[type(msg)](node, msg, out)

    def init_search(
        self, node: NodeState, dest_id: int, search_id: int, out: Outbox
    ) -> None:
        search.init_search(node, dest_id, search_id, out, self.fastprobe)

    def delegation_target(self, node: NodeState, subject: int) -> Optional[int]:
        """Stable neighbour on ``subject``'s side, which lies strictly between
        the node and ``subject``; ``None`` means hold the reference."""
        if subject == node.id:
            return None
        s = same_side(node, subject)
        if s is None or s == subject:
            return None
        return s


class ListProtocol(_Base):
    mode = ISF

    def __init__(self, fastprobe: bool = True) -> None:
        super().__init__(fastprobe)
        self._dispatch.update(
            {
                IntroduceMsg: self._on_introduce,
                DelegateReqMsg: lambda n, m, o: primitives.on_delegate_req(n, m, self, o),
                DelegateAckMsg: lambda n, m, o: primitives.on_delegate_ack(n, m, self, o),
                ImplDelegateMsg: lambda n, m, o: primitives.on_impl_delegate(n, m, self, o),
                # stray plain delegations (corrupt starts) carry an implicit edge
                PlainDelegateMsg: self._on_introduce,
            }
        )

    def classify(self, node: NodeState) -> list[tuple[int, str]]:
        """Recompute stable/temporary kinds. Returns ``(target, old_kind)``
        for every edge whose kind changed."""
        left, right = sides(node)
        changed = []
        for t, e in node.edges.items():
            want = STABLE if t == left or t == right else TEMPORARY
            if e.kind != want:
                changed.append((t, e.kind))
                if want == TEMPORARY and e.tag is None:
                    e.tag = _displace_tag(node, t)
                e.kind = want
        return changed

    def _settle(self, node: NodeState, before: dict[int, str], out: Outbox) -> None:
        """Reclassify and start delegating every edge that just turned
        temporary. A displaced stable neighbour is also introduced to the
        node that displaced it."""
        self.classify(node)
        for t, e in list(node.edges.items()):
            if e.kind != TEMPORARY or before.get(t) == TEMPORARY:
                continue
            via = self.delegation_target(node, t)
            if via is None:
                continue
            if before.get(t) == STABLE:
                primitives.introduce(node, t, via, out)
            primitives.safe_delegate_start(node, t, via, out)

    def adopt_explicit(
        self, node: NodeState, subject: int, tag: Optional[OriginTag], out: Outbox
    ) -> None:
        before = {t: e.kind for t, e in node.edges.items() if t != subject}
        self._settle(node, before, out)

    def on_implicit_reference(
        self, node: NodeState, subject: int, tag: Optional[OriginTag], out: Outbox
    ) -> None:
        s = same_side(node, subject)
        if s is None or dist(subject, node.id) < dist(s, node.id):
            before = {t: e.kind for t, e in node.edges.items()}
            node.edges[subject] = EdgeRecord(subject, STABLE)
            self._settle(node, before, out)
        else:
            out.send(s, ImplDelegateMsg(subject, tag))

    def _on_introduce(self, node: NodeState, msg: Message, out: Outbox) -> None:
        w = msg.subject  # type: ignore[attr-defined]
        if w == node.id or w in node.edges:
            return
        self.on_implicit_reference(node, w, None, out)

    def timeout(self, node: NodeState, out: Outbox) -> None:
        left, right = sides(node)
        for s in (left, right):
            if s is not None:
                primitives.introduce(node, node.id, s, out)
        for t in sorted(node.temporary()):
            via = self.delegation_target(node, t)
            if via is not None:
                primitives.safe_delegate_start(node, t, via, out)
        search.probe_timeout(node, out)


class PlainListProtocol(_Base):
    """Linearization with unsafe Delegation (negative control)."""

    mode = NEGATIVE_CONTROL

    def __init__(self, fastprobe: bool = True) -> None:
        super().__init__(fastprobe)
        for cls in (IntroduceMsg, PlainDelegateMsg, ImplDelegateMsg):
            self._dispatch[cls] = self._on_reference
        for cls in (DelegateReqMsg, DelegateAckMsg):
            self._dispatch[cls] = self._on_stray_safe

    def classify(self, node: NodeState) -> list[tuple[int, str]]:
        for e in node.edges.values():
            e.kind = STABLE
        return []

    def _on_reference(self, node: NodeState, msg: Message, out: Outbox) -> None:
        self._take(node, msg.subject, out)  # type: ignore[attr-defined]

    def _on_stray_safe(self, node: NodeState, msg: Message, out: Outbox) -> None:
        for r in msg.refs():
            self._take(node, r, out)

    def _take(self, node: NodeState, w: int, out: Outbox) -> None:
        if w == node.id or w in node.edges:
            return
        s = same_side(node, w)
        if s is None or dist(w, node.id) < dist(s, node.id):
            node.edges[w] = EdgeRecord(w, STABLE)
            if s is not None:
                primitives.plain_delegate(node, s, w, out, negative_control=True)
        else:
            out.send(s, PlainDelegateMsg(w))

    def timeout(self, node: NodeState, out: Outbox) -> None:
        left, right = sides(node)
        for t in sorted(node.edges):
            if t != left and t != right:
                via = left if t < node.id else right
                primitives.plain_delegate(node, t, via, out, negative_control=True)
        for s in (left, right):
            if s is not None:
                primitives.introduce(node, node.id, s, out)
        search.probe_timeout(node, out)


def make_protocol(mode: str = ISF, fastprobe: bool = True) -> _Base:
    if mode == ISF:
        return ListProtocol(fastprobe)
    if mode == NEGATIVE_CONTROL:
        return PlainListProtocol(fastprobe)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
