"""Hand-built schedules with known outcomes."""

from monosearch import presets
from monosearch.harness import run_scenario


def test_delegation_can_break_monotonic_searchability_from_admissible_start():
    """0 -> 10 -> 7 lets 0 find 7. After 0 learns 5 and safely delegates
    (0,10) to 5, no distance-decreasing path from 0 to 7 is left: 5 -> 10
    moves away from 7. The next search 0 -> 7 fails."""
    r = run_scenario(presets.target_reach_counterexample())
    assert r.initial_admissible is True
    assert r.ledger == {"initiated": 2, "success": 1, "fail": 1, "unresolved": 0, "anomalies": []}
    assert r.monotone_pairs == [[0, 1]]
    # the oracle sees 7 leave R(0,7) and the resulting bad probe replies
    assert {"reach-monotone", "target-reach-monotone", "3c", "5", "monotonic"} <= set(r.violated())
    # delegation invariants and connectivity are untouched
    for k in ("1", "2", "connectivity", "psi"):
        assert k not in r.violated()


def test_corrupted_start_breaks_monotonic_searchability():
    r = run_scenario(presets.corrupt_start())
    assert r.initial_admissible is False
    assert "6" in r.violated()
    assert r.monotone_pairs == [[50, 0]]


def test_same_schedule_without_corruption_is_monotone():
    r = run_scenario(presets.corrupt_start(planted=False))
    assert r.initial_admissible is True
    assert r.violated() == []
    assert r.ledger["fail"] == 1 and r.ledger["success"] == 0


def test_fastpath_small_list():
    for cfg in presets.fastpath(8):
        r = run_scenario(cfg)
        assert r.ledger["success"] == r.ledger["initiated"] == 7
        for sid, (_, u, v) in enumerate(cfg.searches):
            assert r.search_hops[str(sid)] <= abs(u - v) + 2
        assert r.legitimate_at_end and not r.violated()
