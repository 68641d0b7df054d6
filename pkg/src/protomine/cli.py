"""Command line front end.

Three subcommands:

* ``run``: execute the full loop from a JSON config and write
  ``metrics.csv``, ``summary.json``, and bank snapshots into an output
  directory.
* ``inspect-bank``: print the shape, norms, and consistency state of a
  saved bank snapshot.
* ``report``: render the saved metrics of a finished run as text.

Exit codes: 0 on success, 2 for configuration or input errors, 3 for
runtime failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bank import load_snapshot, novel_slot_consistent, snapshot
from .errors import (
    InvalidConfigError,
    MalformedSnapshotError,
    ProtomineError,
    VersionMismatchError,
)
from .experiment import (
    ExperimentConfig,
    config_from_json,
    config_to_json,
    rows_to_csv,
    run_experiment,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_json(text)


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    out_dir = Path(args.out)
    report = run_experiment(config, snapshot_every=args.snapshot_every)

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "metrics.csv").write_text(rows_to_csv(report.rows), encoding="utf-8")
    (out_dir / "summary.json").write_text(
        json.dumps(report.summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    snapshots = dict(report.bank_snapshots)
    if config.iterations > 0 and config.iterations not in snapshots:
        snapshots[config.iterations] = snapshot(report.final_bank)
    for iteration, payload in sorted(snapshots.items()):
        (out_dir / f"bank_{iteration}.json").write_bytes(payload)

    final = report.summary["final"]
    if final is not None:
        print(f"finished {config.iterations} iterations; "
              f"final assignment accuracy "
              f"{_fmt(final['base_accuracy'])}, novel recall {_fmt(final['novel_recall'])}")
    else:
        print(f"finished {config.iterations} iterations; no evaluation rows")
    print(f"wrote {out_dir / 'metrics.csv'}")
    return EXIT_OK


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def _cmd_inspect_bank(args: argparse.Namespace) -> int:
    try:
        payload = Path(args.snapshot).read_bytes()
    except OSError as exc:
        raise InvalidConfigError(f"cannot read snapshot {args.snapshot}: {exc}") from exc
    bank = load_snapshot(payload)

    print(f"classes: {bank.num_base_classes}  dim: {bank.dim}  momentum: {bank.momentum}")
    print(f"novel slot consistent: {novel_slot_consistent(bank)}")
    print("row norms (prototype / aux+ / aux- / disparity):")
    for i in range(bank.num_base_classes):
        print(f"  class {i + 1}: "
              f"{np.linalg.norm(bank.base_prototypes[i]):.4f} / "
              f"{np.linalg.norm(bank.base_aux_plus[i]):.4f} / "
              f"{np.linalg.norm(bank.base_aux_minus[i]):.4f} / "
              f"{np.linalg.norm(bank.base_disparity[i]):.4f}")
    print(f"  novel:   "
          f"{np.linalg.norm(bank.novel_prototype):.4f} / "
          f"{np.linalg.norm(bank.novel_aux_plus):.4f} / "
          f"{np.linalg.norm(bank.novel_aux_minus):.4f} / "
          f"{np.linalg.norm(bank.novel_disparity):.4f}")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    csv_path = out_dir / "metrics.csv"
    summary_path = out_dir / "summary.json"
    try:
        csv_text = csv_path.read_text(encoding="utf-8")
        summary = json.loads(summary_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidConfigError(f"cannot read run outputs in {out_dir}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfigError(f"summary.json is not valid JSON: {exc}") from exc

    lines = csv_text.strip().splitlines()
    print(f"run outputs in {out_dir}")
    print(f"evaluation rounds: {max(len(lines) - 1, 0)}")
    for line in lines:
        print("  " + line)
    final = summary.get("final")
    if final:
        print(f"final assignment accuracy: {_fmt(final.get('base_accuracy'))}")
        print(f"final novel recall:        {_fmt(final.get('novel_recall'))}")
        print(f"baseline accuracy:         {_fmt(summary.get('final_baseline_accuracy'))}")
    return EXIT_OK


def _cmd_print_config(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    print(config_to_json(config))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="protomine",
        description="deterministic collaboration-memory experiments on a synthetic benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the full loop and write outputs")
    run_p.add_argument("--config", default=None, help="JSON config path (defaults when omitted)")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--snapshot-every", type=int, default=0,
                       help="also save a bank snapshot every N iterations")
    run_p.set_defaults(func=_cmd_run)

    inspect_p = sub.add_parser("inspect-bank", help="describe a saved bank snapshot")
    inspect_p.add_argument("--snapshot", required=True, help="path to a bank_<iter>.json file")
    inspect_p.set_defaults(func=_cmd_inspect_bank)

    report_p = sub.add_parser("report", help="print the metrics of a finished run")
    report_p.add_argument("--out", required=True, help="directory written by the run command")
    report_p.set_defaults(func=_cmd_report)

    config_p = sub.add_parser("print-config", help="echo the resolved config as JSON")
    config_p.add_argument("--config", default=None, help="JSON config path (defaults when omitted)")
    config_p.set_defaults(func=_cmd_print_config)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidConfigError, MalformedSnapshotError, VersionMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ProtomineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entry() -> None:
    raise SystemExit(main())
