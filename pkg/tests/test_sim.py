import pytest

from conftest import list_state, node
from monosearch.config import ScenarioConfig
from monosearch.harness import run_scenario
from monosearch.listproto import make_protocol
from monosearch.messages import IntroduceMsg
from monosearch.oracle import legitimate_list, stable_edges, sorted_list_edges
from monosearch.sim import (
    RECEIVE,
    TIMEOUT,
    GlobalState,
    ProtocolViolation,
    Scheduler,
    Simulation,
    TraceEvent,
)


def test_single_node_only_times_out(make_sim):
    sim = make_sim(GlobalState({0: node(0)}))
    events = [sim.step() for _ in range(10)]
    assert [(e.kind, e.actor) for e in events] == [(TIMEOUT, 0)] * 10
    assert [e.step for e in events] == list(range(10))


def test_enabled_actions_count(make_sim):
    state = GlobalState({0: node(0, stable=[1]), 1: node(1, stable=[0])})
    sim = make_sim(state)
    assert len(sim.enabled_actions()) == 2
    env = state.post(1, IntroduceMsg(0))
    sim._track(env)
    assert len(sim.enabled_actions()) == 3
    ev = sim.execute((RECEIVE, env.id))
    assert ev.msg_id == env.id and env.id not in state.envelopes
    assert len(sim.enabled_actions()) == 2


def test_receive_appends_emissions(make_sim):
    state = GlobalState({5: node(5, stable=[9]), 7: node(7), 9: node(9)})
    env = state.post(5, IntroduceMsg(7))
    sim = make_sim(state)
    ev = sim.execute((RECEIVE, env.id))
    assert ev.emitted and all(mid in state.envelopes for _, mid, _ in ev.emitted)
    assert ev.delta["added"] == [[7, "stable"]]


def test_sending_without_reference_is_caught():
    class Rogue:
        def timeout(self, node, out):
            out.send(2, IntroduceMsg(node.id))

    state = GlobalState({0: node(0), 2: node(2)})
    sim = Simulation(state, Rogue(), Scheduler("uniform-random"))
    with pytest.raises(ProtocolViolation):
        sim.execute((TIMEOUT, 0))


def test_trace_event_round_trip(make_sim):
    state = list_state([1, 3, 5])
    sim = make_sim(state)
    for _ in range(30):
        ev = sim.step()
        assert TraceEvent.from_dict(ev.to_dict()).to_json() == ev.to_json()


def _trace(cfg, tmp_path, name):
    p = tmp_path / name
    run_scenario(cfg, trace_path=p)
    return p.read_bytes()


def test_runs_are_byte_identical(tmp_path):
    cfg = ScenarioConfig(seed=3, n=6, search_count=5, max_steps=600)
    assert _trace(cfg, tmp_path, "a") == _trace(cfg, tmp_path, "b")


@pytest.mark.parametrize("policy", ["aging-fair", "fifo-ish", "adversarial"])
def test_message_age_never_exceeds_bound(policy):
    """Replays a run and checks every delivery against the age bound."""
    age_max = 60
    cfg = ScenarioConfig(seed=1, n=6, graph="soup-with-temporaries", scheduler=policy,
                         age_max=age_max, max_steps=3000)
    state_sent = {}
    worst = 0

    def watch(ev, state):
        nonlocal worst
        for _, mid, _ in ev.emitted:
            state_sent[mid] = ev.step
        if ev.kind == RECEIVE and ev.msg_id in state_sent:
            worst = max(worst, ev.step - state_sent[ev.msg_id])

    r = run_scenario(cfg, on_event=watch)
    assert r.late_actions == 0
    assert 0 < worst <= age_max


def test_reversed_line_reaches_sorted_list():
    r = run_scenario(ScenarioConfig(seed=2, n=8, graph="reversed-line", stop="legitimate",
                                    max_steps=50_000, closure_steps=200))
    assert r.converged_step is not None and r.legitimate_at_end


def test_protocol_keeps_legitimate_list_static(make_sim):
    state = list_state(range(6))
    sim = make_sim(state)
    for _ in range(2000):
        sim.step()
    assert stable_edges(state) == sorted_list_edges(state.nodes)
    assert legitimate_list(state).holds


def test_scripted_policy_follows_script():
    state = GlobalState({0: node(0, stable=[1]), 1: node(1, stable=[0])})
    sched = Scheduler("adversarial-script", script=[["timeout", 1], ["receive-kind", "introduce", 0]])
    sim = Simulation(state, make_protocol("isf"), sched)
    e1, e2 = sim.step(), sim.step()
    assert (e1.kind, e1.actor) == (TIMEOUT, 1)
    assert (e2.kind, e2.actor, e2.message.kind) == (RECEIVE, 0, "introduce")
