import itertools

import pytest

from conftest import list_state, node
from monosearch import oracle as O
from monosearch.messages import DelegateAckMsg, DelegateReqMsg, IntroduceMsg, PSuccessMsg, SearchMsg
from monosearch.node import Outbox
from monosearch import primitives
from monosearch.sim import GlobalState


def brute_reach(state, u, d):
    """All nodes at the end of some simple path from u whose every hop
    strictly decreases |id - d|, by enumerating vertex sequences."""
    ids = list(state.nodes)
    out = {u}
    for k in range(1, len(ids)):
        for seq in itertools.permutations([i for i in ids if i != u], k):
            path = (u,) + seq
            if all(b in state.nodes[a].edges and abs(b - d) < abs(a - d) for a, b in zip(path, path[1:])):
                out.add(path[-1])
    return out


def test_reach_on_list():
    s = list_state([1, 3, 5])
    assert O.reach(s, 1, 5).members == {1, 3, 5} == brute_reach(s, 1, 5)


def test_reach_trivial_cases():
    s = list_state([1, 3, 5])
    assert 3 in O.reach(s, 3, 3)
    e = GlobalState({1: node(1), 2: node(2)})
    assert O.reach(e, 1, 2).members == {1}


@pytest.mark.parametrize("seed", range(20))
def test_reach_matches_enumeration(seed):
    import random

    rng = random.Random(seed)
    ids = sorted(rng.sample(range(20), 6))
    s = GlobalState({i: node(i, stable=[j for j in ids if j != i and rng.random() < 0.35]) for i in ids})
    for u in ids:
        for d in range(-1, 21, 3):
            assert O.reach(s, u, d).members == brute_reach(s, u, d)


def test_explicit_path_exists():
    s = list_state([1, 3, 5])
    assert all(O.explicit_path_exists(s, a, b) for a in s.nodes for b in s.nodes)
    t = GlobalState({1: node(1, stable=[2]), 2: node(2, stable=[1]), 7: node(7)})
    assert O.explicit_path_exists(t, 7, 7)
    assert not O.explicit_path_exists(t, 1, 7)


def test_fresh_delegate_req_satisfies_invariant_1(isf):
    s = GlobalState({5: node(5, stable=[7], temporary=[9]), 7: node(7, stable=[5]), 9: node(9)})
    out = Outbox()
    primitives.safe_delegate_start(s.nodes[5], 9, 7, out)
    for dest, m in out.sent:
        s.post(dest, m)
    assert O.check_invariant_1(s).holds


def test_corrupt_delegate_req_violates_invariant_1():
    s = GlobalState({5: node(5, temporary=[9]), 7: node(7), 9: node(9)})
    env = s.post(7, DelegateReqMsg(5, 9, 0))
    v = O.check_invariant_1(s)
    assert not v.holds and f"msg {env.id}" in v.witness


def test_stale_eseq_escape_clause():
    s = GlobalState({5: node(5, temporary=[9], eseq={9: 4}), 7: node(7), 9: node(9)})
    s.post(7, DelegateReqMsg(5, 9, 2))
    s.post(5, DelegateAckMsg(9, 2))
    assert O.check_invariant_1(s).holds and O.check_invariant_2(s).holds


def test_planted_psuccess_with_wrong_id_violates_invariant_4():
    s = list_state([1, 3, 5])
    s.nodes[1].waiting[5] = [SearchMsg(1, 5, 0)]
    s.nodes[1].seq[5] = 1
    s.post(1, PSuccessMsg(5, 3))
    vs = {v.invariant: v for v in O.check_all_invariants(s)}
    assert not vs["4"].holds


def test_admissible_empty_channels():
    assert O.admissible(list_state(range(5))).holds
    s = list_state(range(3))
    s.post(1, SearchMsg(0, 2, 0))
    v = O.admissible(s)
    assert not v.holds and v.witness


def test_legitimate_list():
    assert O.legitimate_list(list_state([0, 4, 9])).holds
    assert O.legitimate_list(GlobalState({3: node(3)})).holds
    s = GlobalState({0: node(0, stable=[2]), 1: node(1), 2: node(2)})
    assert not O.legitimate_list(s).holds
    ok = list_state([0, 1])
    ok.post(0, IntroduceMsg(1))
    assert O.legitimate_list(ok).holds
    busy = list_state([0, 1])
    busy.post(0, DelegateAckMsg(1, 0))
    assert not O.legitimate_list(busy).holds


def test_components():
    assert len(O.weakly_connected_components(GlobalState({i: node(i) for i in range(4)}))) == 4
    s = GlobalState({i: node(i) for i in range(3)})
    s.post(0, IntroduceMsg(2))
    assert sorted(map(sorted, O.weakly_connected_components(s))) == [[0, 2], [1]]


def test_psi():
    assert O.psi({4}, 4, 7) == 1
    assert O.psi({5, 7}, 9, 3) == 3**4 + 3**2 == 90
    assert O.psi(set(), 4, 7) == 0
    assert O.psi({0}, 200, 10) == 10**200  # exact


def test_phi():
    s = list_state(range(5))
    assert O.phi_temporary(s) == 0
    primitives.store_reference(s.nodes[0], node(0, temporary=[3]).edges[3])
    # 0 -> 1 -> 2 before fusing at 3's neighbour 2
    assert O.phi_temporary(s) == 2
    assert O.phi_temporary(GlobalState({0: node(0), 1: node(1)})) is None


def _ledger(*rows):
    led = O.SearchLedger()
    for sid, (u, d, t, res) in enumerate(rows):
        led.initiate(sid, u, d, t)
        if res:
            led.resolve(sid, res, t + 5)
    return led


def test_ledger_monotone():
    assert O.ledger_monotone(_ledger((0, 3, 0, "success"), (0, 3, 4, "success"))).holds
    assert O.ledger_monotone(_ledger((0, 3, 0, "fail"), (0, 3, 4, "success"))).holds
    bad = _ledger((0, 3, 0, "success"), (0, 3, 4, "fail"))
    v = O.ledger_monotone(bad)
    assert not v.holds and "search 0" in v.witness and "search 1" in v.witness
    assert O.monotone_violations(bad) == [(0, 1)]
    # other pairs do not interact
    assert O.ledger_monotone(_ledger((0, 3, 0, "success"), (1, 3, 4, "fail"))).holds


def test_verdict_needs_witness():
    with pytest.raises(ValueError):
        O.Verdict("1", False)
