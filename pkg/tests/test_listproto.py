from conftest import node
from monosearch.listproto import make_protocol
from monosearch.messages import DelegateReqMsg, ImplDelegateMsg, IntroduceMsg
from monosearch.node import STABLE, TEMPORARY, Outbox


def test_closer_reference_displaces_right_neighbour(isf):
    u, out = node(5, stable=[9]), Outbox()
    isf.receive(u, IntroduceMsg(7), out)
    assert u.edges[7].kind == STABLE
    assert u.edges[9].kind == TEMPORARY
    assert (7, IntroduceMsg(9)) in out.sent
    reqs = [(d, m) for d, m in out.sent if isinstance(m, DelegateReqMsg)]
    assert [(d, m.subject) for d, m in reqs] == [(7, 9)]


def test_farther_reference_forwarded_toward_neighbour(isf):
    # (5,9) already delegated away: only 7 is held
    u, out = node(5, stable=[7]), Outbox()
    isf.receive(u, IntroduceMsg(9), out)
    assert 9 not in u.edges
    assert out.sent == [(7, ImplDelegateMsg(9))]


def test_own_reference_dropped(isf):
    u, out = node(5, stable=[7]), Outbox()
    isf.receive(u, IntroduceMsg(5), out)
    assert list(u.edges) == [7] and out.sent == []


def test_timeout_in_place_introduces_self(isf):
    u, out = node(5, stable=[2, 9]), Outbox()
    isf.timeout(u, out)
    assert sorted(out.sent, key=lambda x: x[0]) == [(2, IntroduceMsg(5)), (9, IntroduceMsg(5))]


def test_timeout_rerequests_temporary(isf):
    u = node(5, stable=[9], temporary=[12], eseq={12: 4})
    out = Outbox()
    isf.timeout(u, out)
    reqs = [(d, m) for d, m in out.sent if isinstance(m, DelegateReqMsg)]
    assert len(reqs) == 1
    dest, m = reqs[0]
    assert dest == 9 and (m.sender, m.subject, m.eseq) == (5, 12, 4)


def test_isolated_timeout_is_silent(isf):
    out = Outbox()
    isf.timeout(node(5), out)
    assert out.sent == []


def test_delegation_target(isf):
    assert isf.delegation_target(node(5, stable=[7]), 12) == 7
    assert isf.delegation_target(node(5, stable=[2]), 1) == 2
    assert isf.delegation_target(node(5, stable=[2]), 12) is None


def test_classify_keeps_closest_per_side(isf):
    u = node(5, stable=[1, 3, 8, 20])
    isf.classify(u)
    assert sorted(u.stable()) == [3, 8]
    assert sorted(u.temporary()) == [1, 20]


def test_negative_control_delegates_plainly():
    plain = make_protocol("negative-control-idf")
    u, out = node(5, stable=[9]), Outbox()
    plain.receive(u, IntroduceMsg(7), out)
    assert sorted(u.edges) == [7]
    assert [m.kind for _, m in out.sent] == ["delegate"]
