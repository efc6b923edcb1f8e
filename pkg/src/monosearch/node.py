"""Local node memory."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Optional

from .messages import Message, OriginTag, SearchMsg

STABLE = "stable"
TEMPORARY = "temporary"


def dist(a: int, b: int) -> int:
    return abs(a - b)


@dataclass
class EdgeRecord:
    target: int
    kind: str = STABLE
    tag: Optional[OriginTag] = None

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "kind": self.kind,
            "tag": self.tag.to_dict() if self.tag else None,
        }


@dataclass
class NodeState:
    id: int
    edges: dict[int, EdgeRecord] = field(default_factory=dict)
    eseq: dict[int, int] = field(default_factory=dict)
    waiting: dict[int, list[SearchMsg]] = field(default_factory=dict)
    seq: dict[int, int] = field(default_factory=dict)
    global_seq: int = 0

    def has_edge(self, target: int) -> bool:
        return target in self.edges

    def stable(self) -> list[int]:
        return [t for t, e in self.edges.items() if e.kind == STABLE]

    def temporary(self) -> list[int]:
        return [t for t, e in self.edges.items() if e.kind == TEMPORARY]

    def is_temporary(self, target: int) -> bool:
        e = self.edges.get(target)
        return e is not None and e.kind == TEMPORARY

    def get_eseq(self, target: int) -> int:
        return self.eseq.get(target, 0)

    def bump_eseq(self, target: int, value: int) -> None:
        if value > self.eseq.get(target, 0):
            self.eseq[target] = value

    def copy(self) -> "NodeState":
        return copy.deepcopy(self)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "edges": [self.edges[t].to_dict() for t in sorted(self.edges)],
            "eseq": {str(k): v for k, v in sorted(self.eseq.items())},
            "waiting": {
                str(d): [m.to_dict() for m in ms]
                for d, ms in sorted(self.waiting.items())
            },
            "seq": {str(k): v for k, v in sorted(self.seq.items())},
            "global_seq": self.global_seq,
        }


class Outbox:
    """Collects what a single atomic action sends and reports."""

    __slots__ = ("sent", "outcomes", "notes")

    def __init__(self) -> None:
        self.sent: list[tuple[int, Message]] = []
        # (search_id, "success" | "fail")
        self.outcomes: list[tuple[int, str]] = []
        self.notes: list[str] = []

    def send(self, dest: int, msg: Message) -> None:
        self.sent.append((dest, msg))

    def outcome(self, search_id: int, result: str) -> None:
        self.outcomes.append((search_id, result))

    def note(self, text: str) -> None:
        self.notes.append(text)
