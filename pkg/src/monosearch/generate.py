"""Initial states and search plans from a ScenarioConfig."""

from __future__ import annotations

import random

from .config import ScenarioConfig
from .listproto import make_protocol
from .messages import ImplDelegateMsg, IntroduceMsg, SearchMsg, message_from_dict
from .node import EdgeRecord, NodeState
from .oracle import SearchLedger, weakly_connected_components
from .sim import GlobalState, Injection


class GeneratorError(RuntimeError):
    pass


def rng_for(cfg: ScenarioConfig, stream: str) -> random.Random:
    """Independent deterministic stream per purpose."""
    return random.Random(f"{cfg.seed}:{stream}")


def make_ids(cfg: ScenarioConfig, rng: random.Random) -> list[int]:
    if cfg.graph == "scripted":
        return sorted(cfg.script["ids"])
    if cfg.ids == "random-sparse":
        return sorted(rng.sample(range(10 * cfg.n), cfg.n))
    return list(range(cfg.n))


def _random_tree(ids: list[int], rng: random.Random) -> list[tuple[int, int]]:
    order = ids[:]
    rng.shuffle(order)
    out = []
    for k in range(1, len(order)):
        a, b = order[k], order[rng.randrange(k)]
        out.append((a, b) if rng.random() < 0.5 else (b, a))
    return out


def _random_pairs(ids: list[int], count: int, rng: random.Random) -> list[tuple[int, int]]:
    if len(ids) < 2:
        return []
    return [tuple(rng.sample(ids, 2)) for _ in range(count)]


def generate_initial_state(cfg: ScenarioConfig) -> tuple[GlobalState, SearchLedger]:
    """Build the start state and a ledger holding any searches that exist
    before the first step (pre-buffered or planted); those count as
    initiated at step -1."""
    cfg.validate()
    rng = rng_for(cfg, "graph")
    ids = make_ids(cfg, rng)
    nodes = {i: NodeState(i) for i in ids}
    explicit: list[tuple[int, int]] = []
    implicit: list[tuple[int, int]] = []
    extra = round(cfg.extra_edges * len(ids))

    if cfg.graph == "random-weakly-connected":
        explicit = _random_tree(ids, rng) + _random_pairs(ids, extra, rng)
    elif cfg.graph == "star":
        c = rng.choice(ids)
        explicit = [(c, x) for x in ids if x != c]
    elif cfg.graph == "reversed-line":
        explicit = [(ids[k], ids[k - 1]) for k in range(1, len(ids))]
    elif cfg.graph == "clique":
        explicit = [(a, b) for a in ids for b in ids if a != b]
    elif cfg.graph == "soup-with-temporaries":
        for a, b in _random_tree(ids, rng):
            (implicit if rng.random() < 0.4 else explicit).append((a, b))
        for a, b in _random_pairs(ids, extra, rng):
            (implicit if rng.random() < 0.25 else explicit).append((a, b))
    elif cfg.graph == "scripted":
        explicit = [(a, b) for a, b, *_ in cfg.script.get("edges", [])]

    for a, b in explicit:
        nodes[a].edges[b] = EdgeRecord(b)
    protocol = make_protocol(cfg.mode, cfg.fastprobe)
    for node in nodes.values():
        protocol.classify(node)
        if cfg.graph != "scripted":
            for t in node.edges:
                node.eseq[t] = rng.randint(0, 3)

    state = GlobalState(nodes)
    for a, b in implicit:
        msg = IntroduceMsg(b) if rng.random() < 0.5 else ImplDelegateMsg(b)
        state.post(a, msg)

    ledger = SearchLedger()
    search_ids = _SearchIds(cfg)
    if cfg.graph == "scripted":
        s = cfg.script
        for u, v, val in s.get("eseq", []):
            nodes[u].eseq[v] = val
        for u, d, val in s.get("seq", []):
            nodes[u].seq[d] = val
            nodes[u].global_seq = max(nodes[u].global_seq, val)
        for origin, d, sid in s.get("buffers", []):
            _buffer(nodes[origin], d, sid, ledger)
    brng = rng_for(cfg, "buffers")
    for _ in range(cfg.prebuffered):
        origin = brng.choice(ids)
        d = _pick_dest(cfg, ids, origin, brng)
        _buffer(nodes[origin], d, search_ids.next(), ledger)

    for dest, md in cfg.planted:
        msg = message_from_dict(md)
        state.post(int(dest), msg)
        if isinstance(msg, SearchMsg) and msg.search_id >= 0:
            ledger.initiate(msg.search_id, msg.origin, msg.dest_id, -1)

    if not cfg.corrupt_start and cfg.graph != "scripted":
        comps = weakly_connected_components(state)
        if len(comps) != 1:
            raise GeneratorError(f"generated state has {len(comps)} components")
    return state, ledger


def _buffer(node: NodeState, d: int, sid: int, ledger: SearchLedger) -> None:
    buf = node.waiting.setdefault(d, [])
    if not buf and d not in node.seq:
        node.global_seq += 1
        node.seq[d] = node.global_seq
    buf.append(SearchMsg(node.id, d, sid))
    ledger.initiate(sid, node.id, d, -1)


class _SearchIds:
    """Ids for pre-buffered searches, placed after the injection plan."""

    def __init__(self, cfg: ScenarioConfig) -> None:
        self._next = len(cfg.searches) + cfg.search_count

    def next(self) -> int:
        self._next += 1
        return self._next - 1


def _pick_dest(cfg: ScenarioConfig, ids: list[int], origin: int, rng: random.Random) -> int:
    others = [i for i in ids if i != origin]
    if others and rng.random() < cfg.existing_ratio:
        return rng.choice(others)
    present = set(ids)
    lo, hi = ids[0] - 3, ids[-1] + 3
    while True:
        d = rng.randint(lo, hi)
        if d not in present:
            return d


def plan_injections(cfg: ScenarioConfig, ids: list[int]) -> list[Injection]:
    """Explicit searches first (ids 0..), then ``search_count`` random ones."""
    out = [Injection(int(s), int(o), int(d), i) for i, (s, o, d) in enumerate(cfg.searches)]
    rng = rng_for(cfg, "searches")
    horizon = max(1, cfg.search_horizon or cfg.max_steps // 2)
    base = len(out)
    for k in range(cfg.search_count):
        origin = rng.choice(ids)
        d = _pick_dest(cfg, ids, origin, rng)
        out.append(Injection(rng.randrange(horizon), origin, d, base + k))
    return out


def search_pairs(cfg: ScenarioConfig, state: GlobalState, ledger: SearchLedger,
                 injections: list[Injection]) -> set[tuple[int, int]]:
    """Every (origin, destID) that can carry a probe or pfail in the run."""
    pairs = {(i.origin, i.dest_id) for i in injections}
    pairs.update((e.origin, e.dest_id) for e in ledger.entries.values())
    for u, node in state.nodes.items():
        pairs.update((u, d) for d in node.waiting)
    for env in state.envelopes.values():
        m = env.msg
        if m.kind in ("probe", "forwardprobe"):
            pairs.add((m.source, m.dest_id))
        elif m.kind == "pfail":
            pairs.add((env.dest, m.dest_id))
    return pairs
