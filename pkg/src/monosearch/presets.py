"""Named scenario families used by the CLI and the acceptance suite."""

from __future__ import annotations

from typing import Callable, Iterable

from .config import DEFAULT_CHECKS, ScenarioConfig
from .messages import SearchMsg

CONVERGENCE_NS = (2, 4, 8, 16, 32)


def convergence(seeds: Iterable[int] = range(100), ns: Iterable[int] = CONVERGENCE_NS) -> list[ScenarioConfig]:
    """Random weakly connected starts run to legitimacy plus a closure window."""
    return [
        ScenarioConfig(
            seed=s, n=n, graph="random-weakly-connected", ids="random-sparse" if s % 2 else "contiguous",
            stop="legitimate", max_steps=50_000, closure_steps=5_000,
            checks=["connectivity", "stable-mdl", "counters"],
        )
        for n in ns
        for s in seeds
    ]


def admissible_search(seeds: Iterable[int] = range(1000), searches: int = 24) -> list[ScenarioConfig]:
    """Small systems with searches injected during stabilization.

    Even seeds start from explicit edges only (empty channels), odd seeds
    from a soup of explicit and in-flight references. Reach checks are on.
    """
    out = []
    for s in seeds:
        n = 4 + s % 6
        horizon = 10 * n * n
        out.append(ScenarioConfig(
            seed=s, n=n,
            graph="soup-with-temporaries" if s % 2 else "random-weakly-connected",
            ids="random-sparse" if s % 4 >= 2 else "contiguous",
            search_count=searches, search_horizon=horizon,
            max_steps=horizon + 400, drain=20_000,
            checks=list(DEFAULT_CHECKS) + ["reach"], reach_samples=16,
        ))
    return out


def negative_control(seeds: Iterable[int] = range(200), searches: int = 24) -> list[ScenarioConfig]:
    """Plain Delegation under a scheduler that rushes search traffic."""
    out = []
    for s in seeds:
        n = 4 + s % 5
        horizon = 10 * n * n
        out.append(ScenarioConfig(
            seed=s, n=n, mode="negative-control-idf", scheduler="adversarial",
            graph="random-weakly-connected",
            search_count=searches, search_horizon=horizon, existing_ratio=0.9,
            max_steps=horizon + 400, drain=20_000,
            checks=["connectivity", "probes"],
        ))
    return out


def sorted_list_script(ids: list[int]) -> dict:
    edges = []
    for a, b in zip(ids, ids[1:]):
        edges += [[a, b], [b, a]]
    return {"ids": list(ids), "edges": edges}


def fastpath(n: int = 32, spacing: int = 64) -> list[ScenarioConfig]:
    """Legitimate sorted list, one run per origin searching every other id.

    Searches start every ``spacing`` steps. Running all ordered pairs in a
    single run floods the list: every success sends references back along
    O(n)-hop delegation chains and every timeout re-probes each pending
    destination, which outpaces one delivery per step.
    """
    ids = list(range(n))
    out = []
    for u in ids:
        plan = [[k * spacing, u, v] for k, v in enumerate(v for v in ids if v != u)]
        out.append(ScenarioConfig(
            seed=u, n=n, graph="scripted", script=sorted_list_script(ids),
            searches=plan, max_steps=len(plan) * spacing + 10 * n, drain=50_000,
            checks=["connectivity"],
        ))
    return out


def corrupt_start(planted: bool = True) -> ScenarioConfig:
    """Corrupted start: node 0 cannot reach 1 (only 1 -> 0 exists), yet a
    planted search message from 0 for id 1 already sits at node 1 and
    succeeds. A genuine search 0 -> 1 started afterwards fails.
    With ``planted=False`` the same schedule runs from an admissible state."""
    script = {"ids": [0, 1], "edges": [[1, 0]]}
    return ScenarioConfig(
        seed=0, n=2, graph="scripted", script=script, corrupt_start=planted,
        planted=[[1, SearchMsg(0, 1, 50).to_dict()]] if planted else [],
        scheduler="adversarial-script",
        schedule_script=[["receive-kind", "search", 1], ["timeout", 0]],
        searches=[[1, 0, 1]], max_steps=3,
    )


def target_reach_counterexample() -> ScenarioConfig:
    """Admissible start on ids 0, 5, 7, 10 with edges 0->10, 10->7, 5->0.

    A search 0 -> 7 succeeds via 10. Then 0 learns 5, which is closer to 10,
    and safely delegates (0,10) to 5. Every hop leaving 0 toward 7 now goes
    through 5, and 5 cannot move closer to 7, so a second search fails.
    """
    script = {"ids": [0, 5, 7, 10], "edges": [[0, 10], [10, 7], [5, 0]]}
    return ScenarioConfig(
        seed=0, n=4, graph="scripted", script=script,
        scheduler="adversarial-script",
        searches=[[0, 0, 7], [9, 0, 7]],
        schedule_script=[
            ["receive-kind", "fastprobe", 10], ["receive-kind", "fastprobe", 7],
            ["receive-kind", "psuccess", 0], ["receive-kind", "search", 7],
            ["timeout", 5], ["receive-kind", "introduce", 0],
            ["receive-kind", "delegate-req", 5], ["receive-kind", "delegate-ack", 0],
            ["timeout", 0], ["receive-kind", "probe", 5], ["receive-kind", "pfail", 0],
        ],
        max_steps=13,
        checks=list(DEFAULT_CHECKS) + ["reach"],
    )


PRESETS: dict[str, Callable[..., object]] = {
    "convergence": convergence,
    "admissible-search": admissible_search,
    "negative-control": negative_control,
    "fastpath": fastpath,
    "corrupt-start": corrupt_start,
    "target-reach": target_reach_counterexample,
}


def build(name: str, seeds: int | None = None) -> list[ScenarioConfig]:
    """Configs for a named preset; ``seeds`` limits seeded families."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    fn = PRESETS[name]
    if name in ("convergence", "admissible-search", "negative-control"):
        got = fn(range(seeds)) if seeds is not None else fn()
    else:
        got = fn()
    return got if isinstance(got, list) else [got]
