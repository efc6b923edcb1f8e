"""Protocol message kinds and their JSON encoding.

Node references are plain integer ids. Every message knows which references
it carries (``refs``); those are the implicit edges of the network graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any, ClassVar, Optional


@dataclass(frozen=True)
class OriginTag:
    """Marks a temporary edge or delegation message with the action of the
    untransformed list protocol that produced it, plus the message that
    action would have sent."""

    action: str
    message: Optional[dict] = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {"action": self.action, "message": self.message}

    @classmethod
    def from_dict(cls, d: Optional[dict]) -> Optional["OriginTag"]:
        if d is None:
            return None
        return cls(d["action"], d.get("message"))


class Message:
    kind: ClassVar[str] = "?"
    topology: ClassVar[bool] = False

    def refs(self) -> tuple[int, ...]:
        return ()

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        for f in fields(self):  # type: ignore[arg-type]
            v = getattr(self, f.name)
            if isinstance(v, OriginTag):
                v = v.to_dict()
            elif isinstance(v, frozenset):
                v = sorted(v)
            out[f.name] = v
        return out


@dataclass(frozen=True)
class IntroduceMsg(Message):
    subject: int
    kind: ClassVar[str] = "introduce"
    topology: ClassVar[bool] = True

    def refs(self):
        return (self.subject,)


@dataclass(frozen=True)
class DelegateReqMsg(Message):
    sender: int
    subject: int
    eseq: int
    tag: Optional[OriginTag] = None
    kind: ClassVar[str] = "delegate-req"
    topology: ClassVar[bool] = True

    def refs(self):
        return (self.sender, self.subject)


@dataclass(frozen=True)
class DelegateAckMsg(Message):
    subject: int
    eseq: int
    tag: Optional[OriginTag] = None
    kind: ClassVar[str] = "delegate-ack"
    topology: ClassVar[bool] = True

    def refs(self):
        return (self.subject,)


@dataclass(frozen=True)
class ImplDelegateMsg(Message):
    subject: int
    tag: Optional[OriginTag] = None
    kind: ClassVar[str] = "impl-delegate"
    topology: ClassVar[bool] = True

    def refs(self):
        return (self.subject,)


@dataclass(frozen=True)
class PlainDelegateMsg(Message):
    """Reference handed over by the unsafe Delegation primitive
    (negative-control mode only)."""

    subject: int
    kind: ClassVar[str] = "delegate"
    topology: ClassVar[bool] = True

    def refs(self):
        return (self.subject,)


@dataclass(frozen=True)
class ProbeMsg(Message):
    source: int
    dest_id: int
    next: frozenset
    seq: int
    kind: ClassVar[str] = "probe"

    def refs(self):
        return (self.source, *sorted(self.next))


@dataclass(frozen=True)
class ForwardProbeMsg(ProbeMsg):
    """A probe relayed by an intermediate node; handled exactly like a probe."""

    kind: ClassVar[str] = "forwardprobe"


@dataclass(frozen=True)
class FastProbeMsg(Message):
    source: int
    dest_id: int
    kind: ClassVar[str] = "fastprobe"

    def refs(self):
        return (self.source,)


@dataclass(frozen=True)
class PSuccessMsg(Message):
    dest_id: int
    dest: int
    kind: ClassVar[str] = "psuccess"

    def refs(self):
        return (self.dest,)


@dataclass(frozen=True)
class PFailMsg(Message):
    dest_id: int
    seq: int
    kind: ClassVar[str] = "pfail"


@dataclass(frozen=True)
class SearchMsg(Message):
    origin: int
    dest_id: int
    # application-level label used by the ledger; never inspected by nodes
    search_id: int = -1
    kind: ClassVar[str] = "search"

    def refs(self):
        return (self.origin,)


MESSAGE_TYPES: dict[str, type] = {
    cls.kind: cls
    for cls in (
        IntroduceMsg,
        DelegateReqMsg,
        DelegateAckMsg,
        ImplDelegateMsg,
        PlainDelegateMsg,
        ProbeMsg,
        ForwardProbeMsg,
        FastProbeMsg,
        PSuccessMsg,
        PFailMsg,
        SearchMsg,
    )
}

SEARCH_KINDS = frozenset(
    {"probe", "forwardprobe", "fastprobe", "psuccess", "pfail", "search"}
)


def message_from_dict(d: dict) -> Message:
    try:
        cls = MESSAGE_TYPES[d["kind"]]
    except KeyError:
        raise ValueError(f"unknown message kind: {d.get('kind')!r}") from None
    kwargs = {}
    for f in fields(cls):
        if f.name not in d:
            continue
        v = d[f.name]
        if f.name == "tag":
            v = OriginTag.from_dict(v)
        elif f.name == "next":
            v = frozenset(v)
        kwargs[f.name] = v
    return cls(**kwargs)
