"""Running scenarios: single runs, suites, shrinking and replay."""

from __future__ import annotations

import hashlib
import json
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Optional

from . import oracle
from .config import ConfigError, ScenarioConfig
from .generate import generate_initial_state, plan_injections, search_pairs
from .listproto import make_protocol
from .sim import Scheduler, Simulation

# verdicts that decide whether a run counts as violating
HARD = (
    "1", "2", "3a", "3b", "3c", "3d", "4", "5", "6",
    "connectivity", "monotonic", "closure", "stable-mdl", "explicit-path",
    "inv12-closure", "eseq-monotone", "seq-monotone", "psi", "resolution",
    "probe-answer", "fairness", "reach-monotone", "target-reach-monotone",
    "hop-bound",
)


@dataclass
class Report:
    config: dict
    steps: int = 0
    trace_hash: str = ""
    initial_admissible: Optional[bool] = None
    converged_step: Optional[int] = None
    legitimate_at_end: bool = False
    verdicts: dict = field(default_factory=dict)
    ledger: dict = field(default_factory=dict)
    monotone_pairs: list = field(default_factory=list)
    unresolved: list = field(default_factory=list)
    open_probes: int = 0
    probes_started: int = 0
    late_actions: int = 0
    phi_increases: int = 0
    notes: dict = field(default_factory=dict)
    search_hops: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def mode(self) -> str:
        return self.config.get("mode", "isf")

    def violated(self) -> list[str]:
        out = [k for k, v in self.verdicts.items() if v.get("violated")]
        return sorted(out)

    def hard_violations(self) -> list[str]:
        return [k for k in self.violated() if k in HARD]

    @property
    def ok(self) -> bool:
        return self.error is None and not self.hard_violations()

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["violated"] = self.violated()
        d["ok"] = self.ok
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        keys = cls.__dataclass_fields__.keys()
        return cls(**{k: v for k, v in d.items() if k in keys})


def _add(verdicts: dict, name: str, holds: bool, witness: Optional[str] = None,
         step: Optional[int] = None) -> None:
    v = verdicts.setdefault(name, {"checked": 0, "violated": 0})
    v["checked"] += 1
    if not holds:
        v["violated"] += 1
        line = None if step is None else step + 1
        v.setdefault("first", {"step": step, "trace_line": line, "witness": witness})


def _downsample(points: list, limit: int = 400) -> list:
    if len(points) <= limit:
        return [list(p) for p in points]
    k = len(points) / limit
    return [list(points[int(i * k)]) for i in range(limit)] + [list(points[-1])]


def run_scenario(
    cfg: ScenarioConfig,
    trace_path: Optional[str | Path] = None,
    on_event: Optional[Callable[[Any, Any], None]] = None,
) -> Report:
    """Run one scenario to its stop condition. Deterministic given ``cfg``."""
    cfg.validate()
    report = Report(config=cfg.to_dict())
    state, ledger = generate_initial_state(cfg)
    ids = state.ids
    injections = plan_injections(cfg, ids)
    bad = [i for i in injections if i.origin not in state.nodes]
    if bad:
        raise ConfigError([f"searches: origin {i.origin} is not a node" for i in bad])
    protocol = make_protocol(cfg.mode, cfg.fastprobe)
    sched = Scheduler(
        cfg.scheduler,
        seed=hash_seed(cfg.seed, "scheduler"),
        age_max=cfg.age_max,
        timeout_gap=cfg.timeout_gap,
        holds=cfg.holds,
        script=cfg.schedule_script,
    )
    sim = Simulation(state, protocol, sched, injections, ledger)
    monitor = oracle.Monitor(
        state,
        checks=cfg.checks,
        reach_samples=cfg.reach_samples,
        seed=cfg.seed,
        search_pairs=search_pairs(cfg, state, ledger, injections),
    )
    monitor.check(state)
    report.initial_admissible = monitor.admissible_now if "invariants" in cfg.checks else None

    hasher = hashlib.sha256()
    trace = open(trace_path, "w") if trace_path else None
    cadence = cfg.cadence
    series = cfg.record_series
    stop_at = cfg.max_steps
    try:
        while True:
            step = state.step
            if step >= stop_at:
                if step >= cfg.max_steps + cfg.drain:
                    break
                drained = (
                    sim.injections_left == 0
                    and not ledger.unresolved()
                    and not monitor.open_probes
                )
                if cfg.drain == 0 or drained:
                    break
            elif cfg.stop == "legitimate" and monitor.legit_first is not None:
                if (
                    monitor.legit_from is not None
                    and step >= monitor.legit_first + cfg.closure_steps
                    and sim.injections_left == 0
                ):
                    stop_at = step
                    continue
            ev = sim.step()
            line = ev.to_json()
            hasher.update(line.encode())
            hasher.update(b"\n")
            if trace:
                trace.write(line + "\n")
            monitor.observe_event(ev, state)
            if on_event is not None:
                on_event(ev, state)
            if state.step % cadence == 0:
                monitor.check(state)
            if series and state.step % 10 == 0:
                monitor.series["pending"].append((state.step, len(state.envelopes)))
                monitor.series["temporary"].append(
                    (state.step, sum(len(nd.temporary()) for nd in state.nodes.values()))
                )
                monitor.series["list-edges"].append(
                    (state.step, len(oracle.stable_edges(state) & monitor._list_edges))
                )
    except Exception as e:  # noqa: BLE001 - reported, suite continues
        report.error = f"{type(e).__name__}: {e}\n{traceback.format_exc(limit=4)}"
    finally:
        if trace:
            trace.close()
    if state.step % cadence != 0 and report.error is None:
        monitor.check(state)

    report.steps = state.step
    report.trace_hash = hasher.hexdigest()
    report.converged_step = monitor.legit_first
    report.legitimate_at_end = oracle.legitimate_list(state).holds
    verdicts = monitor.summary()
    mono = oracle.ledger_monotone(ledger)
    report.monotone_pairs = [list(p) for p in oracle.monotone_violations(ledger)]
    fail_steps = [ledger.entries[f].resolved for _, f in report.monotone_pairs]
    _add(verdicts, "monotonic", mono.holds, mono.witness,
         min((s for s in fail_steps if s is not None), default=None))
    report.ledger = ledger.stats()
    report.ledger["anomalies"] = list(ledger.anomalies)
    report.unresolved = sorted(e.search_id for e in ledger.unresolved())
    report.open_probes = len(monitor.open_probes)
    report.probes_started = monitor.probes_started
    if cfg.drain > 0:
        _add(verdicts, "resolution", not report.unresolved,
             f"unresolved searches {report.unresolved[:8]}")
        if "probes" in cfg.checks:
            _add(verdicts, "probe-answer", not monitor.open_probes,
                 f"{len(monitor.open_probes)} probes unanswered")
    report.late_actions = len(sim.late)
    if sched.guarded:
        _add(verdicts, "fairness", not sim.late, f"late actions {sim.late[:4]}")
    report.phi_increases = monitor.phi_increases
    report.notes = dict(monitor.notes)
    report.search_hops = {str(k): v for k, v in sorted(monitor.search_hops.items())}
    report.verdicts = verdicts
    if series:
        report.series = {k: _downsample(v) for k, v in monitor.series.items()}
    return report


def hash_seed(seed: int, stream: str) -> int:
    h = hashlib.sha256(f"{seed}:{stream}".encode()).digest()
    return int.from_bytes(h[:8], "big")


def _run_safe(cfg_dict: dict) -> dict:
    cfg = ScenarioConfig.from_dict(cfg_dict)
    try:
        return run_scenario(cfg).to_dict()
    except Exception as e:  # noqa: BLE001
        return Report(config=cfg_dict, error=f"{type(e).__name__}: {e}").to_dict()


def run_suite(configs: Iterable[ScenarioConfig], parallelism: int = 1) -> list[Report]:
    """Run independent scenarios; results keep input order and do not
    depend on ``parallelism``."""
    dicts = [c.to_dict() for c in configs]
    if parallelism > 1 and len(dicts) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as ex:
            out = list(ex.map(_run_safe, dicts, chunksize=1))
    else:
        out = [_run_safe(d) for d in dicts]
    return [Report.from_dict(d) for d in out]


# -- shrinking ------------------------------------------------------------


def violates(report: Report, verdict: str) -> bool:
    v = report.verdicts.get(verdict)
    return bool(v and v.get("violated"))


def materialize(cfg: ScenarioConfig) -> ScenarioConfig:
    """Same scenario with the random search plan written out explicitly."""
    if cfg.search_count == 0:
        return cfg
    state, _ = generate_initial_state(cfg)
    inj = plan_injections(cfg, state.ids)
    # list order fixes the search ids, so the run is unchanged
    plan = [[i.step, i.origin, i.dest_id] for i in inj]
    return cfg.replace(searches=plan, search_count=0, search_horizon=0)


def shrink(cfg: ScenarioConfig, verdict: str = "monotonic", max_runs: int = 400) -> ScenarioConfig:
    """Greedy minimisation over n, the step budget and the search plan that
    keeps ``verdict`` violated. Returns ``cfg`` unchanged if it does not
    violate to begin with."""
    runs = 0

    def bad(c: ScenarioConfig) -> Optional[Report]:
        nonlocal runs
        runs += 1
        try:
            r = run_scenario(c)
        except ConfigError:
            return None
        return r if violates(r, verdict) else None

    base = bad(cfg)
    if base is None:
        return cfg
    cur = cfg
    # smaller n (only for generated graphs, with the random plan)
    if cur.graph != "scripted":
        improved = True
        while improved and runs < max_runs:
            improved = False
            for n in sorted({2, cur.n // 2, cur.n - 1}):
                if 2 <= n < cur.n:
                    cand = cur.replace(n=n)
                    if bad(cand):
                        cur, improved = cand, True
                        break
    cur = materialize(cur)
    # step budget and search plan, repeated until a pass changes nothing
    while runs < max_runs:
        before = cur
        rep = bad(cur)
        if rep is None:  # only if the budget trimmed away the violation
            return before
        cur = _trim_steps(cur, rep, verdict, bad)
        i = len(cur.searches) - 1
        while i >= 0 and runs < max_runs:
            cand = cur.replace(searches=cur.searches[:i] + cur.searches[i + 1:])
            if bad(cand):
                cur = cand
            i -= 1
        if cur == before:
            break
    return cur


def _trim_steps(cfg, rep, verdict, bad) -> ScenarioConfig:
    lo, hi = 1, min(cfg.max_steps, rep.steps)
    if not bad(cfg.replace(max_steps=hi, drain=0)):
        return cfg
    while lo < hi:
        mid = (lo + hi) // 2
        if bad(cfg.replace(max_steps=mid, drain=0)):
            hi = mid
        else:
            lo = mid + 1
    plan = [s for s in cfg.searches if s[0] < hi]
    return cfg.replace(max_steps=hi, drain=0, searches=plan)


def replay(cfg: ScenarioConfig, expected_hash: str) -> tuple[bool, Report]:
    r = run_scenario(cfg)
    return r.trace_hash == expected_hash, r
