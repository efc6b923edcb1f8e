import json

from monosearch.cli import COLUMNS, main
from monosearch.config import ScenarioConfig


def _cfg(tmp_path, **kw):
    p = tmp_path / "cfg.json"
    ScenarioConfig(**kw).save(p)
    return str(p)


def test_run_clean_exits_zero(tmp_path, capsys):
    trace, rep = tmp_path / "t.jsonl", tmp_path / "r.json"
    code = main(["run", _cfg(tmp_path, seed=1, n=4, max_steps=200),
                 "--trace", str(trace), "--report", str(rep)])
    out = capsys.readouterr().out
    assert code == 0
    assert out.splitlines()[0].split("\t") == list(COLUMNS)
    assert len(trace.read_text().splitlines()) == 200
    assert json.loads(rep.read_text())["steps"] == 200


def test_run_violation_exits_nonzero(capsys):
    assert main(["run", "--preset", "target-reach"]) == 1
    assert "monotonic" in capsys.readouterr().out


def test_negative_control_violations_do_not_fail(tmp_path, capsys):
    out = tmp_path / "nc.jsonl"
    assert main(["suite", "--preset", "negative-control", "--seeds", "12", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 12


def test_bad_config_exits_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"n": -3}')
    assert main(["run", str(p)]) == 2
    assert "n:" in capsys.readouterr().err


def test_replay_and_report(tmp_path, capsys):
    cfg = _cfg(tmp_path, seed=2, n=5, search_count=3, max_steps=300, record_series=True)
    rep = tmp_path / "r.json"
    main(["run", cfg, "--report", str(rep)])
    assert main(["replay", cfg, "--report", str(rep)]) == 0
    assert capsys.readouterr().out.strip().splitlines()[-1].startswith("match")
    figs = tmp_path / "figs"
    assert main(["report", str(rep), "--figures", str(figs), "--csv"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == ",".join(COLUMNS)
    assert (figs / "violations.png").exists() and (figs / "series-000.png").exists()


def test_shrink_writes_config(tmp_path, capsys):
    dst = tmp_path / "small.json"
    assert main(["shrink", "--preset", "corrupt-start", "--verdict", "monotonic", "--out", str(dst)]) == 0
    small = ScenarioConfig.load(dst)
    assert small.n == 2
