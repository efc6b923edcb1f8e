from __future__ import annotations

import pytest

from monosearch.listproto import make_protocol
from monosearch.node import STABLE, TEMPORARY, EdgeRecord, NodeState, Outbox
from monosearch.sim import GlobalState, Scheduler, Simulation


def node(id_, stable=(), temporary=(), eseq=None) -> NodeState:
    nd = NodeState(id_)
    for t in stable:
        nd.edges[t] = EdgeRecord(t, STABLE)
    for t in temporary:
        nd.edges[t] = EdgeRecord(t, TEMPORARY)
    nd.eseq.update(eseq or {})
    return nd


def list_state(ids) -> GlobalState:
    """Sorted doubly linked list over ``ids`` with empty channels."""
    ids = sorted(ids)
    nodes = {}
    for k, i in enumerate(ids):
        nb = [ids[j] for j in (k - 1, k + 1) if 0 <= j < len(ids)]
        nodes[i] = node(i, stable=nb)
    return GlobalState(nodes)


def sent(out: Outbox):
    return [(d, m) for d, m in out.sent]


@pytest.fixture
def isf():
    return make_protocol("isf")


@pytest.fixture
def make_sim():
    def build(state, policy="aging-fair", seed=0, protocol=None, **kw):
        return Simulation(state, protocol or make_protocol("isf"), Scheduler(policy, seed=seed, **kw))

    return build


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
