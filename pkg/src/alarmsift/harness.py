"""Experiment orchestration: the four experiment modes, stratified k-fold
evaluation, the one-parameter-at-a-time sweep, the ablation grids, and
report / plot-data emission.

Every run is reproducible from (data, config, seed): run ids are content
hashes, no wall-clock values are emitted, and re-emission of any report is
byte-identical.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import features as feats
from .net import ModelConfig, predict, stack_sequences, train
from .records import CHANNEL_ORDER, Channel, Record, load_dataset, tail_window
from .stats import (Confusion, FoldAssignment, auc, confusion_metrics,
                    bootstrap_auc_diff, delong_test, error_report,
                    fold_summary, per_alarm_report, stratified_kfold)
from .temporal import build_sequence

EXPERIMENTS = ("temporal", "static", "features", "per_alarm")

_CHANNEL_SUBSETS = {
    1: (Channel.ECG_II,),
    2: (Channel.ECG_II, Channel.ECG_V),
    4: CHANNEL_ORDER,
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    data_dir: str
    model: ModelConfig = ModelConfig()
    folds: int = 5
    seed: int = 42
    out_dir: str = "runs"
    window_s: float = 60.0
    channels: tuple[str, ...] = tuple(c.value for c in CHANNEL_ORDER)
    val_fraction: float = 0.15  # inner early-stopping split within train folds
    compare_with: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}")
        if self.compare_with is not None and self.compare_with not in EXPERIMENTS:
            raise ValueError(f"compare_with must be one of {EXPERIMENTS}")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")

    def channel_subset(self) -> tuple[Channel, ...]:
        return tuple(Channel(c) for c in self.channels)

    def resolved_model(self) -> ModelConfig:
        """Model config with data-derived fields filled in."""
        n_chunks = 1 if self.experiment == "static" else self.model.n_chunks
        return replace(self.model,
                       in_channels=len(self.channels),
                       n_chunks=n_chunks,
                       use_lstm=self.experiment != "static")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["channels"] = list(self.channels)
        d["model"] = self.model.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "model" in d and isinstance(d["model"], dict):
            d["model"] = ModelConfig.from_dict(d["model"])
        if "channels" in d:
            d["channels"] = tuple(d["channels"])
        return cls(**d)


def run_id_for(cfg: ExperimentConfig) -> str:
    blob = json.dumps(cfg.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


# ---------------------------------------------------------------------------
# Splitting helpers
# ---------------------------------------------------------------------------

def stratified_split(labels, fractions, seed: int) -> list[np.ndarray]:
    """Disjoint index groups with per-class proportions ~= ``fractions``."""
    labels = np.asarray(labels, dtype=bool)
    fracs = np.asarray(fractions, dtype=np.float64)
    if abs(fracs.sum() - 1.0) > 1e-9 or (fracs <= 0).any():
        raise ValueError("fractions must be positive and sum to 1")
    rng = np.random.default_rng(seed)
    groups: list[list[np.ndarray]] = [[] for _ in fracs]
    for cls in (True, False):
        idx = np.flatnonzero(labels == cls)
        rng.shuffle(idx)
        bounds = np.floor(np.cumsum(fracs) * idx.size + 0.5).astype(int)
        bounds[-1] = idx.size
        start = 0
        for gi, b in enumerate(bounds):
            groups[gi].append(idx[start:b])
            start = b
    return [np.sort(np.concatenate(g)) for g in groups]


def _assert_no_leakage(train_idx, eval_idx, ids):
    overlap = set(np.asarray(train_idx).tolist()) & set(np.asarray(eval_idx).tolist())
    if overlap:  # structurally impossible; guarded per the evaluation contract
        leaked = sorted(ids[i] for i in overlap)[:5]
        raise RuntimeError(f"fold leakage: train/eval share records {leaked}")


# ---------------------------------------------------------------------------
# Data preparation
# ---------------------------------------------------------------------------

def prepare_records(data_dir, window_s: float = 60.0) -> list[Record]:
    records = load_dataset(data_dir)
    if not records:
        raise ValueError(f"no records found under {data_dir}")
    out = []
    for r in records:
        n_window = int(round(window_s * r.fs))
        out.append(tail_window(r, window_s) if r.n_samples > n_window else r)
    return out


def build_sequences(records, n_chunks, channel_subset) -> np.ndarray:
    return stack_sequences(
        [build_sequence(r, n_chunks, channel_subset) for r in records])


def _feature_matrix(records, with_beats: bool) -> np.ndarray:
    rows = []
    for r in records:
        v = feats.extract_features(r).values
        if with_beats:
            ecg = r.channel(Channel.ECG_II).astype(np.float64)
            beats = feats.detect_beats(ecg, r.fs)
            v = np.concatenate([v, feats.beat_features(ecg, beats)])
        rows.append(v)
    return np.stack(rows)


# ---------------------------------------------------------------------------
# Cross-validated scoring engines
# ---------------------------------------------------------------------------

def _cv_net(x, labels, ids, assignment: FoldAssignment, model_cfg: ModelConfig,
            seed: int, val_fraction: float):
    """k-fold CV for the sequence model: per-fold held-out scores + history."""
    oof = np.full(labels.size, np.nan)
    fold_aucs, histories = [], []
    for fold in range(assignment.k):
        tr = assignment.train_indices(fold)
        te = assignment.test_indices(fold)
        _assert_no_leakage(tr, te, ids)
        fit_rel, stop_rel = stratified_split(
            labels[tr], [1.0 - val_fraction, val_fraction], seed + 101 * fold)
        fit_idx, stop_idx = tr[fit_rel], tr[stop_rel]
        cfg_fold = replace(model_cfg, seed=model_cfg.seed + fold)
        params, history = train(x, labels, fit_idx, stop_idx, cfg_fold)
        scores = predict(x[te], params)
        oof[te] = scores
        fold_aucs.append(auc(scores, labels[te]))
        histories.append(history)
    return oof, fold_aucs, histories


def _fit_linear_scores(features_tr, labels_tr, features_te, seed):
    model = feats.linear_classifier_fit(features_tr, labels_tr, seed=seed)
    return feats.linear_classifier_predict(model, features_te)


def _cv_linear(x, labels, ids, assignment: FoldAssignment, seed: int,
               alarm_types=None):
    """k-fold CV for the feature baselines.  With ``alarm_types`` given, one
    classifier is fit per alarm type (single-class types score 0.5)."""
    oof = np.full(labels.size, np.nan)
    fold_aucs = []
    for fold in range(assignment.k):
        tr = assignment.train_indices(fold)
        te = assignment.test_indices(fold)
        _assert_no_leakage(tr, te, ids)
        if alarm_types is None:
            oof[te] = _fit_linear_scores(x[tr], labels[tr], x[te], seed + fold)
        else:
            types = np.asarray(alarm_types, dtype=object)
            scores = np.full(te.size, 0.5)
            for atype in set(types[te]):
                tr_sel = tr[types[tr] == atype]
                te_sel = types[te] == atype
                y_tr = labels[tr_sel]
                if y_tr.size == 0 or y_tr.all() or not y_tr.any():
                    continue  # no usable per-type training data; scores stay 0.5
                scores[te_sel] = _fit_linear_scores(
                    x[tr_sel], y_tr, x[te][te_sel], seed + fold)
            oof[te] = scores
        fold_aucs.append(auc(oof[te], labels[te]))
    return oof, fold_aucs, []


def _oof_scores(records, labels, ids, assignment, cfg: ExperimentConfig,
                experiment: str):
    model_cfg = replace(cfg.resolved_model(),
                        use_lstm=experiment != "static",
                        n_chunks=1 if experiment == "static" else cfg.model.n_chunks)
    if experiment in ("temporal", "static"):
        x = build_sequences(records, model_cfg.n_chunks, cfg.channel_subset())
        return _cv_net(x, labels, ids, assignment, model_cfg, cfg.seed,
                       cfg.val_fraction)
    if experiment == "features":
        x = _feature_matrix(records, with_beats=False)
        return _cv_linear(x, labels, ids, assignment, cfg.seed)
    x = _feature_matrix(records, with_beats=True)
    types = [r.alarm_type for r in records]
    return _cv_linear(x, labels, ids, assignment, cfg.seed, alarm_types=types)


# ---------------------------------------------------------------------------
# run_experiment
# ---------------------------------------------------------------------------

def run_experiment(cfg: ExperimentConfig) -> Path:
    """Execute one experiment config; returns the run directory.

    Per fold: train on the other k-1 folds (with an inner early-stopping
    split for the sequence models), score the held-out fold.  Emits
    report.json, predictions.csv, and training_curves.csv.
    """
    records = prepare_records(cfg.data_dir, cfg.window_s)
    labels = np.array([r.label for r in records], dtype=bool)
    ids = [r.record_id for r in records]
    assignment = stratified_kfold(labels, cfg.folds, cfg.seed, tuple(ids))

    oof, fold_aucs, histories = _oof_scores(
        records, labels, ids, assignment, cfg, cfg.experiment)

    delong_blob = None
    bootstrap_blob = None
    if cfg.compare_with is not None:
        base_oof, _, _ = _oof_scores(
            records, labels, ids, assignment, cfg, cfg.compare_with)
        # baseline first so the z statistic is negative when the main model wins
        dl = delong_test(base_oof, oof, labels)
        ci = bootstrap_auc_diff(oof, base_oof, labels, seed=cfg.seed)
        delong_blob = {"z": dl.z, "p": dl.p,
                       "auc_a": dl.auc_a, "auc_b": dl.auc_b,
                       "order": [cfg.compare_with, cfg.experiment]}
        bootstrap_blob = {"lo": ci.lower, "hi": ci.upper, "n_iter": ci.n_iter,
                          "diff": f"{cfg.experiment} - {cfg.compare_with}"}

    summary = fold_summary(fold_aucs)
    confusion = Confusion.from_predictions(oof, labels)
    metrics = confusion_metrics(confusion, auc_value=auc(oof, labels))
    per_alarm = per_alarm_report(oof, records)
    errors = error_report(oof, labels, ids)

    report = {
        "run_id": run_id_for(cfg),
        "config": cfg.to_dict(),
        "folds": [{"fold": f, "auc": fold_aucs[f]} for f in range(cfg.folds)],
        "mean_auc": summary.mean,
        "std_auc": summary.std,
        "ci95": [summary.ci_lo, summary.ci_hi],
        "pooled_auc": metrics.auc,
        "confusion": {"tp": confusion.tp, "tn": confusion.tn,
                      "fp": confusion.fp, "fn": confusion.fn},
        "metrics": metrics.as_dict(),
        "per_alarm": [{"type": row.alarm_type.value, "n": row.n,
                       "auc": row.auc, "accuracy": row.accuracy}
                      for row in per_alarm],
        "errors": {"fn": list(errors.fn_ids), "fp": list(errors.fp_ids),
                   "high_confidence": list(errors.high_confidence_ids)},
        "delong": delong_blob,
        "bootstrap": bootstrap_blob,
        "training": [
            {"fold": f, "epochs": h.epochs_run, "best_epoch": h.best_epoch,
             "stop_reason": h.stop_reason, "train_loss": h.train_loss,
             "val_auc": h.val_auc}
            for f, h in enumerate(histories)
        ],
    }

    run_dir = Path(cfg.out_dir) / f"{cfg.experiment}-{report['run_id']}"
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    with open(run_dir / "predictions.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["record_id", "alarm_type", "label", "fold", "p_true"])
        for i, r in enumerate(records):
            writer.writerow([r.record_id, r.alarm_type.value, int(r.label),
                             int(assignment.fold_of[i]), repr(float(oof[i]))])
    _write_training_curves(run_dir / "training_curves.csv", report["training"])
    return run_dir


def _write_training_curves(path: Path, training_blobs) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fold", "epoch", "train_loss", "val_auc"])
        for blob in training_blobs:
            for e, (tl, va) in enumerate(zip(blob["train_loss"], blob["val_auc"]), 1):
                writer.writerow([blob["fold"], e, repr(tl), repr(va)])


# ---------------------------------------------------------------------------
# Holdout training (used by the sweep and by `alarmsift train`)
# ---------------------------------------------------------------------------

def holdout_run(x, labels, model_cfg: ModelConfig, split_seed: int,
                fractions=(0.70, 0.15, 0.15)):
    """Single stratified 70/15/15 train/val/test run.

    Returns (params, history, val_auc_at_best, test_auc).
    """
    tr, va, te = stratified_split(labels, fractions, split_seed)
    params, history = train(x, labels, tr, va, model_cfg)
    best_val = max(history.val_auc)
    test_auc = auc(predict(x[te], params), labels[te])
    return params, history, best_val, test_auc


# ---------------------------------------------------------------------------
# Hyperparameter sweep (one parameter at a time)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    axes: dict = field(default_factory=lambda: {
        "lstm_hidden": (64, 128, 256, 512),
        "dropout": (0.2, 0.3, 0.4, 0.5),
        "learning_rate": (1e-2, 1e-3, 1e-4, 1e-5),
    })
    repeats: int = 4

    @property
    def total_runs(self) -> int:
        return sum(len(v) for v in self.axes.values()) * self.repeats


@dataclass
class SweepResult:
    rows: list[dict]       # one per axis: parameter, values, winner, val_auc
    runs: list[dict]       # every executed run
    runs_executed: int


def sweep(spec: SweepSpec, base: ExperimentConfig) -> SweepResult:
    """For each axis, vary only that parameter (others at their defaults),
    train ``repeats`` times per value on a fixed 70/15/15 split, and pick
    the winner by mean validation AUC."""
    records = prepare_records(base.data_dir, base.window_s)
    labels = np.array([r.label for r in records], dtype=bool)
    model_base = base.resolved_model()
    x = build_sequences(records, model_base.n_chunks, base.channel_subset())

    runs, rows = [], []
    executed = 0
    for axis, values in spec.axes.items():
        means = []
        for value in values:
            aucs = []
            for r in range(spec.repeats):
                cfg_run = replace(model_base, **{axis: value},
                                  seed=model_base.seed + r)
                _, _, best_val, _ = holdout_run(x, labels, cfg_run, base.seed)
                executed += 1
                aucs.append(best_val)
                runs.append({"parameter": axis, "value": value, "repeat": r,
                             "val_auc": best_val})
            means.append(float(np.mean(aucs)))
        win = int(np.argmax(means))
        rows.append({"parameter": axis, "values": list(values),
                     "winner": values[win], "val_auc": means[win]})
    return SweepResult(rows=rows, runs=runs, runs_executed=executed)


def write_sweep(result: SweepResult, out_dir) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "sweep.json").write_text(json.dumps(
        {"rows": result.rows, "runs": result.runs,
         "runs_executed": result.runs_executed}, indent=2) + "\n")
    with open(out_dir / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parameter", "values_tested", "winner", "val_auc"])
        for row in result.rows:
            writer.writerow([row["parameter"],
                             " ".join(str(v) for v in row["values"]),
                             row["winner"], repr(row["val_auc"])])
    return out_dir


# ---------------------------------------------------------------------------
# Ablation grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AblationSpec:
    chunk_grid: tuple[int, ...] = (1, 2, 3, 6)
    channel_grid: tuple[int, ...] = (1, 2, 4)
    folds: int = 3


@dataclass
class AblationResult:
    chunk_rows: list[dict]
    channel_rows: list[dict]


def ablate(spec: AblationSpec, base: ExperimentConfig) -> AblationResult:
    """3-fold CV per condition: chunk grid at 4 channels, channel grid at 6
    chunks.  The chunks=1 condition is the static (no LSTM) model."""
    records = prepare_records(base.data_dir, base.window_s)
    labels = np.array([r.label for r in records], dtype=bool)
    ids = [r.record_id for r in records]
    assignment = stratified_kfold(labels, spec.folds, base.seed, tuple(ids))
    model_base = base.resolved_model()

    def condition(n_chunks, channel_count):
        subset = _CHANNEL_SUBSETS[channel_count]
        cfg = replace(model_base, n_chunks=n_chunks,
                      in_channels=len(subset), use_lstm=n_chunks > 1)
        x = build_sequences(records, n_chunks, subset)
        _, fold_aucs, _ = _cv_net(x, labels, ids, assignment, cfg, base.seed,
                                  base.val_fraction)
        s = fold_summary(fold_aucs)
        return {"mean_auc": s.mean, "std_auc": s.std,
                "fold_aucs": list(map(float, fold_aucs))}

    chunk_rows = [{"condition": f"chunks={n}", **condition(n, 4)}
                  for n in spec.chunk_grid]
    channel_rows = [{"condition": f"channels={c}", **condition(6, c)}
                    for c in spec.channel_grid]
    return AblationResult(chunk_rows=chunk_rows, channel_rows=channel_rows)


def write_ablation(result: AblationResult, out_dir) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "ablation.json").write_text(json.dumps(
        {"chunks": result.chunk_rows, "channels": result.channel_rows},
        indent=2) + "\n")
    for name, rows in (("ablation_chunks.csv", result.chunk_rows),
                       ("ablation_channels.csv", result.channel_rows)):
        with open(out_dir / name, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["condition", "mean_auc", "std_auc"])
            for row in rows:
                writer.writerow([row["condition"], repr(row["mean_auc"]),
                                 repr(row["std_auc"])])
    return out_dir


# ---------------------------------------------------------------------------
# Plot-data emission
# ---------------------------------------------------------------------------

def emit_report(run_dir, fmt: str = "csv") -> list[Path]:
    """Emit per-figure plot data from a completed run directory.

    csv: one file per figure (fold bars, per-alarm bars, error breakdown,
    training curve).  json: a single figures.json with the same blocks.
    Emission is deterministic and byte-identical across calls.
    """
    run_dir = Path(run_dir)
    report_path = run_dir / "report.json"
    if not report_path.is_file():
        raise FileNotFoundError(f"incomplete run directory: {report_path} missing")
    report = json.loads(report_path.read_text())
    out = run_dir / "figures"
    out.mkdir(exist_ok=True)
    written: list[Path] = []

    blocks = {
        "per_fold": [{"fold": f["fold"], "auc": f["auc"]} for f in report["folds"]],
        "per_alarm": report["per_alarm"],
        "error_breakdown": [
            {"category": "false_negative", "count": len(report["errors"]["fn"])},
            {"category": "false_positive", "count": len(report["errors"]["fp"])},
            {"category": "high_confidence", "count": len(report["errors"]["high_confidence"])},
        ],
        "training_curve": [
            {"fold": blob["fold"], "epoch": e, "train_loss": tl, "val_auc": va}
            for blob in report.get("training", [])
            for e, (tl, va) in enumerate(zip(blob["train_loss"], blob["val_auc"]), 1)
        ],
    }

    if fmt == "json":
        path = out / "figures.json"
        path.write_text(json.dumps(blocks, indent=2) + "\n")
        return [path]
    if fmt != "csv":
        raise ValueError(f"format must be 'json' or 'csv', got {fmt!r}")
    for name, rows in blocks.items():
        path = out / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            if rows:
                header = list(rows[0].keys())
                writer.writerow(header)
                for row in rows:
                    writer.writerow([_csv_cell(row[k]) for k in header])
            else:
                writer.writerow([])
        written.append(path)
    return written


def emit_comparison(parent_dir, fmt: str = "csv") -> Path:
    """Experiment-comparison table over every run directory under ``parent_dir``."""
    parent = Path(parent_dir)
    rows = []
    for report_path in sorted(parent.glob("*/report.json")):
        report = json.loads(report_path.read_text())
        rows.append({"experiment": report["config"]["experiment"],
                     "run_id": report["run_id"],
                     "mean_auc": report["mean_auc"],
                     "std_auc": report["std_auc"]})
    if not rows:
        raise FileNotFoundError(f"no completed runs under {parent}")
    if fmt == "json":
        path = parent / "comparison.json"
        path.write_text(json.dumps(rows, indent=2) + "\n")
        return path
    path = parent / "comparison.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["experiment", "run_id", "mean_auc", "std_auc"])
        for row in rows:
            writer.writerow([row["experiment"], row["run_id"],
                             repr(row["mean_auc"]), repr(row["std_auc"])])
    return path


def _csv_cell(value):
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return value
