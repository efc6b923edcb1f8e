"""Property tests over randomly drawn scenarios and states."""

import random

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import node
from monosearch import oracle as O
from monosearch import primitives as P
from monosearch.config import GRAPHS, ScenarioConfig
from monosearch.harness import run_scenario
from monosearch.messages import (
    DelegateAckMsg,
    DelegateReqMsg,
    ImplDelegateMsg,
    IntroduceMsg,
    PFailMsg,
    PSuccessMsg,
)
from monosearch.node import Outbox
from monosearch.presets import sorted_list_script

SETTINGS = settings(max_examples=30, deadline=None,
                    suppress_health_check=[HealthCheck.too_slow])

generated = st.builds(
    ScenarioConfig,
    seed=st.integers(0, 10**6),
    n=st.integers(2, 7),
    ids=st.sampled_from(["contiguous", "random-sparse"]),
    graph=st.sampled_from([g for g in GRAPHS if g != "scripted"]),
    scheduler=st.sampled_from(["aging-fair", "fifo-ish", "adversarial", "uniform-random"]),
    search_count=st.integers(0, 8),
    search_horizon=st.just(300),
    max_steps=st.integers(50, 600),
    drain=st.just(20_000),
    checks=st.just(["connectivity", "invariants", "explicit-paths", "counters", "psi", "probes"]),
)


@SETTINGS
@given(generated)
def test_isf_runs_keep_safety_properties(cfg):
    r = run_scenario(cfg)
    assert r.error is None
    bad = set(r.violated())
    # component count never grows, counters never decrease
    assert not bad & {"connectivity", "eseq-monotone", "seq-monotone"}
    # once invariants 1 and 2 hold they keep holding, and explicit paths
    # are never lost from then on
    assert not bad & {"inv12-closure", "explicit-path"}
    # forwarded probes shrink the potential
    assert "psi" not in bad
    # every search resolves and every probe gets an answer
    assert not r.unresolved and r.open_probes == 0
    assert not r.ledger["anomalies"]


@SETTINGS
@given(generated, st.randoms(use_true_random=False))
def test_connectivity_survives_corrupted_channels(cfg, rnd):
    """Planted messages may break every message invariant but never the
    component count."""
    ids = list(range(cfg.n))
    planted = []
    for _ in range(rnd.randint(1, 6)):
        a, b = rnd.choice(ids), rnd.choice(ids)
        msg = rnd.choice([
            IntroduceMsg(b), ImplDelegateMsg(b), DelegateReqMsg(a, b, rnd.randint(0, 4)),
            DelegateAckMsg(b, rnd.randint(0, 4)), PSuccessMsg(b, b), PFailMsg(b, rnd.randint(0, 3)),
        ])
        planted.append([rnd.choice(ids), msg.to_dict()])
    cfg = cfg.replace(ids="contiguous", corrupt_start=True, planted=planted,
                      checks=["connectivity", "counters"], drain=0)
    r = run_scenario(cfg)
    assert r.error is None
    assert "connectivity" not in r.violated()


@SETTINGS
@given(st.integers(2, 12), st.integers(0, 10**6))
def test_legitimate_list_is_closed(n, seed):
    ids = sorted(random.Random(seed).sample(range(4 * n), n))
    cfg = ScenarioConfig(seed=seed, n=n, graph="scripted", script=sorted_list_script(ids),
                         stop="legitimate", closure_steps=400, max_steps=2000,
                         checks=["connectivity", "stable-mdl"])
    r = run_scenario(cfg)
    assert r.converged_step == 0
    assert r.legitimate_at_end
    assert not r.violated()


@given(st.dictionaries(st.integers(0, 9), st.integers(0, 9), max_size=6),
       st.integers(0, 9), st.integers(0, 9))
def test_safe_delegate_max_rule_property(eseq, subj_e, via_e):
    u = node(20, stable=[21], temporary=[25], eseq={**eseq, 25: subj_e, 21: via_e})
    msg = P.safe_delegate_start(u, 25, 21, Outbox())
    assert msg.eseq == subj_e
    assert u.eseq[21] == max(via_e, subj_e + 1)
    assert all(u.eseq.get(k, 0) >= v for k, v in eseq.items())


rows = st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 30),
                          st.sampled_from(["success", "fail", None])), max_size=12)


@given(rows)
def test_ledger_monotone_matches_definition(entries):
    led = O.SearchLedger()
    for sid, (u, d, t, res) in enumerate(entries):
        led.initiate(sid, u, d, t)
        if res:
            led.resolve(sid, res, t + 1)
    naive = any(
        a[3] == "success" and b[3] == "fail" and a[:2] == b[:2] and b[2] > a[2]
        for a in entries for b in entries
    )
    assert O.ledger_monotone(led).holds is not naive
    assert bool(O.monotone_violations(led)) is naive


@given(st.frozensets(st.integers(-20, 20), max_size=6), st.integers(-20, 20), st.integers(2, 9))
def test_psi_drops_when_a_member_is_swapped_for_closer_ones(members, d, n):
    """Replacing one member by fewer than n strictly closer members lowers
    the potential: the step the probe forwarding relies on."""
    if not members:
        return
    far = max(members, key=lambda m: abs(m - d))
    if far == d:
        return
    step = 1 if far < d else -1
    closer = {far + step * k for k in range(1, min(n - 1, abs(far - d)) + 1)}
    after = (members - {far}) | closer
    assert O.psi(after, d, n) < O.psi(members, d, n)


@SETTINGS
@given(st.builds(ScenarioConfig, seed=st.integers(0, 10**6), n=st.integers(1, 30),
                 graph=st.sampled_from([g for g in GRAPHS if g != "scripted"]),
                 search_count=st.integers(0, 50), fastprobe=st.booleans(),
                 checks=st.lists(st.sampled_from(["connectivity", "invariants", "reach"]), unique=True)))
def test_config_json_round_trip(cfg):
    assert ScenarioConfig.from_json(cfg.to_json()) == cfg
