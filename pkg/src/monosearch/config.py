"""Scenario configuration: one JSON object, validated with field diagnostics."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from .listproto import MODES
from .messages import message_from_dict
from .sim import POLICIES

ID_SCHEMES = ("contiguous", "random-sparse")
GRAPHS = (
    "random-weakly-connected",
    "star",
    "reversed-line",
    "clique",
    "soup-with-temporaries",
    "scripted",
)
STOPS = ("max-steps", "legitimate")
CHECKS = (
    "connectivity",
    "invariants",
    "reach",
    "explicit-paths",
    "stable-mdl",
    "counters",
    "psi",
    "probes",
)
DEFAULT_CHECKS = [c for c in CHECKS if c != "reach"]


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid config: " + "; ".join(problems))


@dataclass
class ScenarioConfig:
    seed: int = 0
    n: int = 8
    ids: str = "contiguous"
    graph: str = "random-weakly-connected"
    # extra random edges per node for the random generators
    extra_edges: float = 1.0
    # graph == "scripted": {"ids": [...], "edges": [[a, b], ...],
    #   "buffers": [[origin, dest_id, search_id], ...],
    #   "eseq": [[u, v, value], ...], "seq": [[u, dest_id, value], ...]}
    script: Optional[dict] = None
    corrupt_start: bool = False
    # initial channel contents: [[dest, message], ...]; requires corrupt_start
    planted: list = field(default_factory=list)
    mode: str = "isf"
    scheduler: str = "aging-fair"
    age_max: Optional[int] = None
    timeout_gap: Optional[int] = None
    # [[msg_id, step]]: the message is not picked at random before that step
    holds: list = field(default_factory=list)
    # adversarial-script actions: [["timeout", id] | ["receive", msg_id] |
    #   ["receive-kind", kind] | ["receive-kind", kind, node]]
    schedule_script: list = field(default_factory=list)
    # explicit search plan: [[step, origin, dest_id], ...]
    searches: list = field(default_factory=list)
    # additional random searches spread over [0, search_horizon)
    search_count: int = 0
    search_horizon: int = 0
    # share of random searches aimed at an existing id
    existing_ratio: float = 0.7
    prebuffered: int = 0
    fastprobe: bool = True
    max_steps: int = 10_000
    stop: str = "max-steps"
    closure_steps: int = 0
    # extra steps allowed after the stop point until every search resolved
    # and every probe was answered
    drain: int = 0
    oracle_every: Optional[int] = None
    checks: list = field(default_factory=lambda: list(DEFAULT_CHECKS))
    reach_samples: int = 16
    record_series: bool = False

    # -- validation ------------------------------------------------------
    def problems(self) -> list[str]:
        p = []

        def need(cond: bool, msg: str) -> None:
            if not cond:
                p.append(msg)

        for f in ("seed", "n", "search_count", "search_horizon", "prebuffered",
                  "max_steps", "closure_steps", "drain", "reach_samples"):
            v = getattr(self, f)
            need(isinstance(v, int) and not isinstance(v, bool), f"{f}: expected integer, got {v!r}")
        if p:
            return p
        need(self.n >= 1, f"n: must be >= 1, got {self.n}")
        need(self.ids in ID_SCHEMES, f"ids: expected one of {ID_SCHEMES}, got {self.ids!r}")
        need(self.graph in GRAPHS, f"graph: expected one of {GRAPHS}, got {self.graph!r}")
        need(self.mode in MODES, f"mode: expected one of {MODES}, got {self.mode!r}")
        need(self.scheduler in POLICIES, f"scheduler: expected one of {POLICIES}, got {self.scheduler!r}")
        need(self.stop in STOPS, f"stop: expected one of {STOPS}, got {self.stop!r}")
        need(self.max_steps >= 0, "max_steps: must be >= 0")
        need(self.extra_edges >= 0, "extra_edges: must be >= 0")
        need(0 <= self.existing_ratio <= 1, "existing_ratio: must be within [0, 1]")
        for f in ("age_max", "timeout_gap", "oracle_every"):
            v = getattr(self, f)
            need(v is None or (isinstance(v, int) and v >= 1), f"{f}: must be null or a positive integer")
        bad = [c for c in self.checks if c not in CHECKS]
        need(not bad, f"checks: unknown {bad}; allowed {CHECKS}")
        if self.planted:
            need(self.corrupt_start, "planted: messages given but corrupt_start is false")
            for i, entry in enumerate(self.planted):
                try:
                    dest, msg = entry
                    message_from_dict(msg)
                    int(dest)
                except Exception as e:  # noqa: BLE001 - reported as diagnostic
                    p.append(f"planted[{i}]: {e}")
        if self.graph == "scripted":
            s = self.script
            if not isinstance(s, dict) or "ids" not in s:
                p.append("script: graph 'scripted' needs a script with 'ids'")
            else:
                ids = s["ids"]
                need(len(set(ids)) == len(ids), "script.ids: ids must be distinct")
                need(len(ids) == self.n, f"script.ids: {len(ids)} ids but n = {self.n}")
                known = set(ids)
                for a, b in s.get("edges", []):
                    need(a in known and b in known and a != b, f"script.edges: bad edge ({a},{b})")
        elif self.script is not None:
            p.append("script: only allowed with graph 'scripted'")
        for i, entry in enumerate(self.searches):
            if not (isinstance(entry, (list, tuple)) and len(entry) == 3):
                p.append(f"searches[{i}]: expected [step, origin, dest_id]")
            elif entry[0] < 0:
                p.append(f"searches[{i}]: negative step")
        if self.schedule_script:
            need(self.scheduler == "adversarial-script",
                 "schedule_script: only used by scheduler 'adversarial-script'")
        return p

    def validate(self) -> "ScenarioConfig":
        p = self.problems()
        if p:
            raise ConfigError(p)
        return self

    @property
    def cadence(self) -> int:
        if self.oracle_every:
            return self.oracle_every
        return 1 if self.n <= 32 else 16

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ScenarioConfig":
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError([f"{k}: unknown field" for k in unknown])
        try:
            cfg = cls(**d)
        except TypeError as e:
            raise ConfigError([str(e)]) from None
        return cfg.validate()

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError([f"not valid JSON: {e}"]) from None
        if not isinstance(d, dict):
            raise ConfigError(["top level must be a JSON object"])
        return cls.from_dict(d)

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioConfig":
        return cls.from_json(Path(path).read_text())

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    def replace(self, **changes) -> "ScenarioConfig":
        d = self.to_dict()
        d.update(changes)
        return type(self)(**d)
