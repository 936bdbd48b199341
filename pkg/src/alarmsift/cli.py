"""Command-line entry points.

Subcommands: synth, scalogram, features, train, run, sweep, ablate, report.
On failure a machine-readable error JSON is printed to stderr and the exit
code is nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import features as feats
from .harness import (AblationSpec, ExperimentConfig, SweepSpec, ablate,
                      build_sequences, emit_comparison, emit_report,
                      holdout_run, prepare_records, run_experiment, sweep,
                      write_ablation, write_sweep)
from .net import ModelConfig, save_checkpoint
from .records import SynthSpec, synth_dataset, write_dataset
from .scalogram import Scalogram, cache_path, save_scalogram
from .temporal import build_sequence


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures through the JSON contract
        raise CliError(message)


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc


def _experiment_config(args, overrides_ok: bool = True) -> ExperimentConfig:
    blob = _load_json(args.config)
    blob.pop("sweep_spec", None)
    blob.pop("ablation_spec", None)
    if overrides_ok:
        if getattr(args, "data", None):
            blob["data_dir"] = args.data
        if getattr(args, "seed", None) is not None:
            blob["seed"] = args.seed
        if getattr(args, "out", None):
            blob["out_dir"] = args.out
    return ExperimentConfig.from_dict(blob)


def cmd_synth(args) -> None:
    spec = SynthSpec(n=args.n, true_ratio=args.true_ratio)
    records = synth_dataset(spec, args.seed)
    write_dataset(records, args.out)
    print(json.dumps({"written": len(records), "out": str(args.out)}))


def cmd_scalogram(args) -> None:
    records = prepare_records(getattr(args, "in"))
    out = Path(args.out)
    count = 0
    for record in records:
        seq = build_sequence(record, args.chunks)
        for k in range(seq.n_chunks):
            for ci, chan in enumerate(seq.channels):
                path = cache_path(out, record.record_id, k, chan.value)
                save_scalogram(Scalogram(values=seq.tensors[k, ci]), path)
                count += 1
    print(json.dumps({"records": len(records), "scalograms": count,
                      "out": str(out)}))


def cmd_features(args) -> None:
    records = prepare_records(getattr(args, "in"))
    feats.export_features_csv(records, args.out)
    print(json.dumps({"records": len(records), "out": str(args.out)}))


def cmd_train(args) -> None:
    blob = _load_json(args.config)
    if "experiment" in blob:
        cfg = ExperimentConfig.from_dict(blob)
        model_cfg = cfg.resolved_model()
        channels = cfg.channel_subset()
        window_s = cfg.window_s
    else:
        model_cfg = ModelConfig.from_dict(blob)
        channels = None
        window_s = 60.0
    records = prepare_records(args.data, window_s)
    labels = np.array([r.label for r in records], dtype=bool)
    subset = channels or records[0].channels
    x = build_sequences(records, model_cfg.n_chunks, subset)
    params, history, best_val, test_auc = holdout_run(
        x, labels, model_cfg, model_cfg.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(params, out / "checkpoint.npz")
    (out / "history.json").write_text(json.dumps({
        "train_loss": history.train_loss,
        "val_auc": history.val_auc,
        "best_epoch": history.best_epoch,
        "stop_reason": history.stop_reason,
        "best_val_auc": best_val,
        "test_auc": test_auc,
    }, indent=2) + "\n")
    print(json.dumps({"out": str(out), "best_val_auc": best_val,
                      "test_auc": test_auc, "epochs": history.epochs_run}))


def cmd_run(args) -> None:
    cfg = _experiment_config(args)
    run_dir = run_experiment(cfg)
    print(json.dumps({"run_dir": str(run_dir)}))


def cmd_sweep(args) -> None:
    blob = _load_json(args.config)
    spec_blob = blob.get("sweep_spec", {})
    spec = SweepSpec(**{k: (dict(v) if k == "axes" else v)
                        for k, v in spec_blob.items()}) if spec_blob else SweepSpec()
    cfg = _experiment_config(args)
    result = sweep(spec, cfg)
    out = write_sweep(result, args.out or cfg.out_dir)
    print(json.dumps({"out": str(out), "runs_executed": result.runs_executed}))


def cmd_ablate(args) -> None:
    blob = _load_json(args.config)
    spec_blob = blob.get("ablation_spec", {})
    spec = AblationSpec(**{k: tuple(v) if isinstance(v, list) else v
                           for k, v in spec_blob.items()}) if spec_blob else AblationSpec()
    cfg = _experiment_config(args)
    result = ablate(spec, cfg)
    out = write_ablation(result, args.out or cfg.out_dir)
    print(json.dumps({"out": str(out),
                      "chunk_rows": len(result.chunk_rows),
                      "channel_rows": len(result.channel_rows)}))


def cmd_report(args) -> None:
    target = Path(args.out)
    if (target / "report.json").is_file():
        paths = emit_report(target, args.format)
    else:
        paths = [emit_comparison(target, args.format)]
    print(json.dumps({"written": [str(p) for p in paths]}))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="alarmsift")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labelled dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--true-ratio", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("scalogram", help="write the per-chunk scalogram cache")
    p.add_argument("--in", dest="in", required=True)
    p.add_argument("--chunks", type=int, default=6)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scalogram)

    p = sub.add_parser("features", help="export the 103-feature CSV")
    p.add_argument("--in", dest="in", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="single holdout training run")
    p.add_argument("--data", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    for name, func in (("run", cmd_run), ("sweep", cmd_sweep), ("ablate", cmd_ablate)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--data", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.set_defaults(func=func)

    p = sub.add_parser("report", help="emit per-figure plot data from a run")
    p.add_argument("--out", required=True,
                   help="run directory (or a parent of several runs)")
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
        return 0
    except CliError as exc:
        print(json.dumps({"error": "usage", "message": str(exc)}), file=sys.stderr)
        return 2
    except Exception as exc:  # contract: machine-readable error on stderr
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
