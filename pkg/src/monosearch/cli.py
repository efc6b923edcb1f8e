"""Command line entry point: run, suite, shrink, replay, report."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Iterable, Optional

from . import presets
from .config import ConfigError, ScenarioConfig
from .harness import HARD, Report, replay, run_scenario, run_suite, shrink
from .listproto import NEGATIVE_CONTROL

# columns of the delimited summary printed by `report` and `suite`
COLUMNS = (
    "seed", "n", "mode", "graph", "steps", "converged", "legit_end",
    "admissible0", "searches", "success", "fail", "unresolved",
    "monotone_pairs", "violated", "error",
)


def _load_configs(args) -> list[ScenarioConfig]:
    cfgs: list[ScenarioConfig] = []
    if getattr(args, "preset", None):
        cfgs += presets.build(args.preset, getattr(args, "seeds", None))
    for p in getattr(args, "configs", None) or []:
        text = Path(p).read_text()
        data = json.loads(text)
        items = data if isinstance(data, list) else [data]
        cfgs += [ScenarioConfig.from_dict(d) for d in items]
    return cfgs


def _one_config(args) -> ScenarioConfig:
    cfgs = _load_configs(args)
    if len(cfgs) != 1:
        raise ConfigError([f"expected exactly one config, got {len(cfgs)}"])
    return cfgs[0]


def _row(r: Report) -> list[str]:
    c, led = r.config, r.ledger or {}
    vals = [
        c.get("seed"), c.get("n"), c.get("mode"), c.get("graph"), r.steps,
        "" if r.converged_step is None else r.converged_step,
        int(r.legitimate_at_end),
        "" if r.initial_admissible is None else int(r.initial_admissible),
        led.get("initiated", 0), led.get("success", 0), led.get("fail", 0),
        len(r.unresolved), len(r.monotone_pairs),
        ",".join(r.violated()), (r.error or "").splitlines()[0] if r.error else "",
    ]
    return ["" if v is None else str(v) for v in vals]


def print_table(reports: Iterable[Report], out=None, sep: str = "\t") -> None:
    out = out or sys.stdout
    print(sep.join(COLUMNS), file=out)
    for r in reports:
        print(sep.join(_row(r)), file=out)


def failing(reports: Iterable[Report]) -> list[Report]:
    """Reports that make the exit code nonzero: any hard verdict violated
    (or an error) outside negative-control mode."""
    return [r for r in reports if r.mode != NEGATIVE_CONTROL and not r.ok]


def _write_reports(reports: list[Report], path: Optional[str]) -> None:
    if not path:
        return
    with open(path, "w") as f:
        for r in reports:
            f.write(r.to_json() + "\n")


def read_reports(path: str | Path) -> list[Report]:
    text = Path(path).read_text().strip()
    if not text:
        return []
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        # one report per line
        return [Report.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]
    items = data if isinstance(data, list) else [data]
    return [Report.from_dict(d) for d in items]


def cmd_run(args) -> int:
    cfg = _one_config(args)
    r = run_scenario(cfg, trace_path=args.trace)
    if args.report:
        Path(args.report).write_text(json.dumps(r.to_dict(), indent=2, sort_keys=True) + "\n")
    print_table([r])
    for k in r.violated():
        first = r.verdicts[k].get("first", {})
        print(f"# {k}: {r.verdicts[k]['violated']}/{r.verdicts[k]['checked']} "
              f"first at trace line {first.get('trace_line')}: {first.get('witness')}")
    print(f"# trace_hash {r.trace_hash}")
    return 1 if failing([r]) else 0


def cmd_suite(args) -> int:
    cfgs = _load_configs(args)
    reports = run_suite(cfgs, parallelism=args.parallelism)
    _write_reports(reports, args.out)
    print_table(reports)
    bad = failing(reports)
    print(f"# {len(reports)} runs, {len(bad)} failing")
    return 1 if bad else 0


def cmd_shrink(args) -> int:
    cfg = _one_config(args)
    small = shrink(cfg, args.verdict, max_runs=args.max_runs)
    r = run_scenario(small)
    if args.out:
        small.save(args.out)
    else:
        print(small.to_json())
    print(f"# n={small.n} max_steps={small.max_steps} searches={len(small.searches)} "
          f"violated={r.violated()} trace_hash={r.trace_hash}")
    return 0 if args.verdict in r.violated() else 1


def cmd_replay(args) -> int:
    cfg = _one_config(args)
    expected = args.hash
    if args.report:
        expected = read_reports(args.report)[0].trace_hash
    if not expected:
        raise ConfigError(["replay needs --hash or --report"])
    same, r = replay(cfg, expected)
    print(f"{'match' if same else 'MISMATCH'}\t{r.trace_hash}\t{','.join(r.violated())}")
    return 0 if same else 1


def cmd_report(args) -> int:
    reports: list[Report] = []
    for p in args.reports:
        reports += read_reports(p)
    sep = "," if args.csv else "\t"
    print_table(reports, sep=sep)
    counts: dict[str, int] = {}
    for r in reports:
        for k in r.violated():
            counts[k] = counts.get(k, 0) + 1
    print(f"# verdict{sep}runs_violated{sep}hard")
    for k in sorted(counts):
        print(f"# {k}{sep}{counts[k]}{sep}{int(k in HARD)}")
    if args.figures:
        from .plotting import render_all

        made = render_all([r.to_dict() for r in reports], Path(args.figures))
        for p in made:
            print(f"# figure {p}")
    return 1 if failing(reports) else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="monosearch", description=__doc__)
    sub = ap.add_subparsers(dest="verb", required=True)

    def add_sources(p, many: bool) -> None:
        p.add_argument("configs", nargs="*" if many else "?", default=None,
                       help="JSON config file(s); a file may hold one object or a list")
        p.add_argument("--preset", choices=sorted(presets.PRESETS),
                       help="use a built-in scenario family")
        p.add_argument("--seeds", type=int, help="number of seeds for seeded presets")

    p = sub.add_parser("run", help="run one scenario")
    add_sources(p, many=False)
    p.add_argument("--trace", help="write the JSONL trace here")
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("suite", help="run many scenarios")
    add_sources(p, many=True)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--out", help="write one JSON report per line here")
    p.set_defaults(fn=cmd_suite)

    p = sub.add_parser("shrink", help="minimise a violating scenario")
    add_sources(p, many=False)
    p.add_argument("--verdict", default="monotonic")
    p.add_argument("--max-runs", type=int, default=400)
    p.add_argument("--out", help="write the shrunk config here")
    p.set_defaults(fn=cmd_shrink)

    p = sub.add_parser("replay", help="rerun a config and compare its trace hash")
    add_sources(p, many=False)
    p.add_argument("--hash")
    p.add_argument("--report", help="report file holding the expected hash")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("report", help="summarise reports as delimited text and figures")
    p.add_argument("reports", nargs="+", help="report files (JSON or JSONL)")
    p.add_argument("--figures", help="directory for PNG figures")
    p.add_argument("--csv", action="store_true", help="comma instead of tab")
    p.set_defaults(fn=cmd_report)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if hasattr(args, "configs") and isinstance(args.configs, str):
        args.configs = [args.configs]
    try:
        return args.fn(args)
    except ConfigError as e:
        for p in e.problems:
            print(f"config error: {p}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
