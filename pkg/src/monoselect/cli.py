"""Command-line front end: ``monoselect run|verify|repro-appendix-b``.

Exit codes: 0 success, 1 config or input error, 2 failed golden or bound
check, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from monoselect.core import NumericalError
from monoselect.experiments import (ConfigError, aggregate, load_config, normalize_config,
                                    run_replicates, verify_record)

OUT_ENV = "MONOSELECT_OUT"
CSV_COLUMNS = ("round", "arm", "explore_flag", "loss_or_return", "payment", "tab",
               "cumulative_regret_external", "cumulative_regret_swap")
PER_ROUND_KINDS = ("regret-bench", "simulate-game1", "simulate-game2")

EXIT_OK, EXIT_CONFIG, EXIT_CHECK, EXIT_NUMERIC = 0, 1, 2, 3


def dumps(obj) -> str:
    # repr floats round-trip exactly; sorted keys keep output byte-stable
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n"


def _g(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    return "%.8g" % x


def record_csv(record: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    game = record["kind"] != "regret-bench"
    ext = record["summary"]["cumulative_external"]
    swp = record["summary"]["cumulative_swap"]
    for row, e, s in zip(record["rows"], ext, swp):
        w.writerow([_g(row["round"]), _g(row["arm"]), _g(row["explore"]),
                    _g(row["return"] if game else row["loss"]), _g(row["payment"]), _g(row["tab"]), _g(e), _g(s)])
    return buf.getvalue()


def out_dir(cfg: dict, override: str | None) -> Path:
    return Path(override or os.environ.get(OUT_ENV) or cfg["output"]["dir"])


def emit(cfg: dict, records: list[dict], summary: dict, directory: Path) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    name = cfg["output"]["name"]
    written = []
    for rec in records:
        stem = directory / f"{name}-seed{rec['seed']}"
        p = stem.with_suffix(".json")
        p.write_text(dumps(rec))
        written.append(p)
        if rec["kind"] in PER_ROUND_KINDS:
            p = stem.with_suffix(".csv")
            p.write_text(record_csv(rec))
            written.append(p)
    p = directory / f"{name}-summary.json"
    p.write_text(dumps(summary))
    written.append(p)
    return written


def _execute(cfg: dict, override: str | None) -> int:
    records = run_replicates(cfg)
    summary = aggregate(cfg, records)
    for p in emit(cfg, records, summary, out_dir(cfg, override)):
        print(p)
    return report(summary)


def report(summary: dict) -> int:
    kind = summary["kind"]
    if kind == "repro-appendix-b":
        print(f"golden cells off: {summary['mismatches']}")
        for v in summary["violations"]:
            print(f"  round {v['round']}: arm-0 probability {v['base']:.8f} -> {v['perturbed']:.8f}")
    elif "bound_satisfied" in summary:
        for key, ok in summary["bound_satisfied"].items():
            print(f"bound {key}: {'satisfied' if ok else 'VIOLATED'}")
    print("ok" if summary["ok"] else "FAILED")
    return EXIT_OK if summary["ok"] else EXIT_CHECK


def cmd_run(args) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    cfg = load_config(text)
    if args.workers:
        cfg["workers"] = args.workers
    return _execute(cfg, args.out)


def cmd_verify(args) -> int:
    try:
        record = json.loads(Path(args.record).read_text())
        ok = verify_record(record)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"cannot parse record: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print("verified" if ok else "MISMATCH")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_counterexample(args) -> int:
    cfg = normalize_config({"kind": "repro-appendix-b"})
    return _execute(cfg, args.out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="monoselect", description="Monotone selection experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run the experiment described by a YAML config")
    p.add_argument("config")
    p.add_argument("--out", help=f"output directory (overrides ${OUT_ENV} and the config)")
    p.add_argument("--workers", type=int, help="process pool size for replicates")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("verify", help="recompute a record's summary from its rows")
    p.add_argument("record")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("repro-appendix-b", help="rerun the Blum-Mansour counterexample against the fixture")
    p.add_argument("--out")
    p.set_defaults(func=cmd_counterexample)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
