"""Evaluation statistics: AUC, confusion/clinical metrics, stratified fold
assignment, the DeLong paired-AUC test, bootstrap confidence intervals, and
per-alarm / error breakdowns.

Everything here is pure and deterministic; resampling routines take an
explicit seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from scipy.stats import norm

import numpy as np

from .records import AlarmType, Record

Z_95 = 1.96


# ---------------------------------------------------------------------------
# AUC (Mann-Whitney with midranks; ties between classes count 0.5)
# ---------------------------------------------------------------------------

def _midranks(x: np.ndarray) -> np.ndarray:
    """1-based midranks; tied values share the mean of their positions."""
    order = np.argsort(x, kind="mergesort")
    z = x[order]
    n = x.size
    starts = np.concatenate(([0], np.flatnonzero(np.diff(z) != 0) + 1))
    ends = np.concatenate((starts[1:], [n]))
    group_rank = 0.5 * (starts + ends - 1) + 1.0
    ranks = np.empty(n)
    ranks[order] = np.repeat(group_rank, ends - starts)
    return ranks


def auc(scores, labels) -> float:
    """Probability a random positive outscores a random negative (ties = 0.5)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    m = int(labels.sum())
    n = labels.size - m
    if m == 0 or n == 0:
        raise ValueError("auc requires both classes present")
    ranks = _midranks(scores)
    return (ranks[labels].sum() - m * (m + 1) / 2.0) / (m * n)


# ---------------------------------------------------------------------------
# Confusion counts and clinical metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Confusion:
    tp: int
    tn: int
    fp: int
    fn: int

    @classmethod
    def from_predictions(cls, p_true, labels, threshold: float = 0.5) -> "Confusion":
        p = np.asarray(p_true, dtype=np.float64)
        y = np.asarray(labels, dtype=bool)
        pred = p >= threshold
        return cls(
            tp=int(np.sum(pred & y)),
            tn=int(np.sum(~pred & ~y)),
            fp=int(np.sum(pred & ~y)),
            fn=int(np.sum(~pred & y)),
        )

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class MetricsReport:
    """The seven clinical metrics; ``flagged`` names metrics whose
    denominator was zero (reported as 0 by convention)."""

    sensitivity: float
    specificity: float
    precision: float
    f1: float
    npv: float
    accuracy: float
    auc: float | None = None
    flagged: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "precision": self.precision,
            "f1": self.f1,
            "npv": self.npv,
            "accuracy": self.accuracy,
            "auc": self.auc,
        }


def confusion_metrics(c: Confusion, auc_value: float | None = None) -> MetricsReport:
    """Closed-form metrics from confusion counts; AUC is supplied separately."""
    flagged = []

    def ratio(num, den, name):
        if den == 0:
            flagged.append(name)
            return 0.0
        return num / den

    sens = ratio(c.tp, c.tp + c.fn, "sensitivity")
    spec = ratio(c.tn, c.tn + c.fp, "specificity")
    prec = ratio(c.tp, c.tp + c.fp, "precision")
    f1 = ratio(2.0 * prec * sens, prec + sens, "f1")
    npv = ratio(c.tn, c.tn + c.fn, "npv")
    acc = ratio(c.tp + c.tn, c.total, "accuracy")
    return MetricsReport(sens, spec, prec, f1, npv, acc, auc_value, tuple(flagged))


# ---------------------------------------------------------------------------
# Stratified k-fold assignment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FoldAssignment:
    fold_of: np.ndarray
    k: int
    seed: int
    record_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        fold_of = np.ascontiguousarray(self.fold_of, dtype=np.int64)
        fold_of.setflags(write=False)
        object.__setattr__(self, "fold_of", fold_of)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)

    def by_id(self) -> dict[str, int]:
        if self.record_ids is None:
            raise ValueError("fold assignment carries no record ids")
        return {rid: int(f) for rid, f in zip(self.record_ids, self.fold_of)}


def stratified_kfold(labels, k: int, seed: int,
                     record_ids: tuple[str, ...] | None = None) -> FoldAssignment:
    """Seeded shuffle within each class, then round-robin dealing to folds.

    Per-fold class counts differ by at most one.  Deterministic: the same
    (labels, k, seed) always produce the same assignment.
    """
    labels = np.asarray(labels, dtype=bool)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    for cls in (True, False):
        if int(np.sum(labels == cls)) < k:
            raise ValueError(f"class {cls} has fewer than k={k} members")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(labels.size, dtype=np.int64)
    for cls in (True, False):
        idx = np.flatnonzero(labels == cls)
        rng.shuffle(idx)
        fold_of[idx] = np.arange(idx.size) % k
    return FoldAssignment(fold_of=fold_of, k=k, seed=seed, record_ids=record_ids)


# ---------------------------------------------------------------------------
# DeLong paired test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DelongResult:
    auc_a: float
    auc_b: float
    z: float
    p: float


def _structural_components(scores: np.ndarray, labels: np.ndarray):
    """Per-positive (V10) and per-negative (V01) placement components."""
    pos, neg = scores[labels], scores[~labels]
    m, n = pos.size, neg.size
    tx = _midranks(pos)
    ty = _midranks(neg)
    tz = _midranks(np.concatenate([pos, neg]))
    v10 = (tz[:m] - tx) / n
    v01 = 1.0 - (tz[m:] - ty) / m
    return v10, v01


def delong_test(scores_a, scores_b, labels) -> DelongResult:
    """Paired test of AUC equality for two models scored on the same records.

    Uses the midrank structural-component estimator of the covariance of the
    paired AUCs; z carries the sign of auc_a - auc_b and p is two-sided
    normal.  Zero estimated variance (e.g. identical score vectors) yields
    z = 0, p = 1.
    """
    scores_a = np.asarray(scores_a, dtype=np.float64)
    scores_b = np.asarray(scores_b, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores_a.shape != scores_b.shape or scores_a.shape != labels.shape:
        raise ValueError("paired scores and labels must have identical shape")
    m = int(labels.sum())
    n = labels.size - m
    if m == 0 or n == 0:
        raise ValueError("delong_test requires both classes present")
    v10_a, v01_a = _structural_components(scores_a, labels)
    v10_b, v01_b = _structural_components(scores_b, labels)
    auc_a = float(v10_a.mean())
    auc_b = float(v10_b.mean())
    s10 = np.cov(np.stack([v10_a, v10_b]), ddof=1) if m > 1 else np.zeros((2, 2))
    s01 = np.cov(np.stack([v01_a, v01_b]), ddof=1) if n > 1 else np.zeros((2, 2))
    var = (s10[0, 0] + s10[1, 1] - 2 * s10[0, 1]) / m \
        + (s01[0, 0] + s01[1, 1] - 2 * s01[0, 1]) / n
    if var <= 0 or not np.isfinite(var) or np.sqrt(var) < 1e-12:
        return DelongResult(auc_a, auc_b, 0.0, 1.0)
    z = (auc_a - auc_b) / np.sqrt(var)
    p = 2.0 * float(norm.cdf(-abs(z)))
    return DelongResult(auc_a, auc_b, float(z), max(p, np.finfo(float).tiny))


# ---------------------------------------------------------------------------
# Bootstrap CI on the AUC difference
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BootstrapCI:
    lower: float
    upper: float
    n_iter: int
    seed: int


def bootstrap_auc_diff(scores_a, scores_b, labels, n_iter: int = 1000,
                       seed: int = 0) -> BootstrapCI:
    """Percentile 95% CI of AUC_a - AUC_b over paired record resamples.

    Records are drawn with replacement; a resample missing one class is
    redrawn.  Deterministic under ``seed``.
    """
    scores_a = np.asarray(scores_a, dtype=np.float64)
    scores_b = np.asarray(scores_b, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    n = labels.size
    if labels.sum() in (0, n):
        raise ValueError("bootstrap_auc_diff requires both classes present")
    rng = np.random.default_rng(seed)
    diffs = np.empty(n_iter)
    for i in range(n_iter):
        while True:
            idx = rng.integers(0, n, size=n)
            y = labels[idx]
            if 0 < y.sum() < n:
                break
        diffs[i] = auc(scores_a[idx], y) - auc(scores_b[idx], y)
    lo, hi = np.percentile(diffs, [2.5, 97.5])
    return BootstrapCI(float(lo), float(hi), n_iter, seed)


# ---------------------------------------------------------------------------
# Per-alarm and error reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PerAlarmRow:
    alarm_type: AlarmType
    n: int
    auc: float | None  # None when only one class is present (flagged)
    accuracy: float
    single_class: bool


@dataclass(frozen=True)
class ErrorReport:
    fn_ids: tuple[str, ...]
    fp_ids: tuple[str, ...]
    high_confidence_ids: tuple[str, ...]
    per_alarm: tuple[PerAlarmRow, ...] = ()

    @property
    def n_errors(self) -> int:
        return len(self.fn_ids) + len(self.fp_ids)


def per_alarm_report(p_true, records: list[Record],
                     threshold: float = 0.5) -> list[PerAlarmRow]:
    """Per-alarm-type sample count, AUC, and accuracy at ``threshold``.

    Types where every record shares one label report accuracy only; their
    AUC is None and the row is flagged single_class.
    """
    p = np.asarray(p_true, dtype=np.float64)
    if p.size != len(records):
        raise ValueError("every record needs a prediction")
    labels = np.array([r.label for r in records], dtype=bool)
    types = np.array([r.alarm_type for r in records], dtype=object)
    rows = []
    for atype in AlarmType:
        sel = types == atype
        if not sel.any():
            continue
        y, s = labels[sel], p[sel]
        acc = float(np.mean((s >= threshold) == y))
        single = bool(y.all() or not y.any())
        rows.append(PerAlarmRow(
            alarm_type=atype,
            n=int(sel.sum()),
            auc=None if single else auc(s, y),
            accuracy=acc,
            single_class=single,
        ))
    return rows


def error_report(p_true, labels, record_ids=None,
                 confidence_threshold: float = 0.8) -> ErrorReport:
    """Misclassification breakdown at decision threshold 0.5.

    FN = true alarms scored below 0.5; FP = false alarms scored at or
    above.  A high-confidence error is any misclassified record whose
    winning-class probability exceeds ``confidence_threshold``.
    """
    p = np.asarray(p_true, dtype=np.float64)
    if p.size and (p.min() < 0.0 or p.max() > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    y = np.asarray(labels, dtype=bool)
    ids = tuple(record_ids) if record_ids is not None else tuple(str(i) for i in range(p.size))
    pred = p >= 0.5
    fn = [ids[i] for i in range(p.size) if y[i] and not pred[i]]
    fp = [ids[i] for i in range(p.size) if not y[i] and pred[i]]
    confidence = np.maximum(p, 1.0 - p)
    high = [ids[i] for i in range(p.size)
            if pred[i] != y[i] and confidence[i] > confidence_threshold]
    return ErrorReport(tuple(fn), tuple(fp), tuple(high))


# ---------------------------------------------------------------------------
# Fold aggregation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FoldSummary:
    mean: float
    std: float
    ci_lo: float
    ci_hi: float


def fold_summary(fold_aucs) -> FoldSummary:
    """Mean, std, and 95% interval (mean +/- 1.96 * std) over fold AUCs.

    The spread is the population std of the fold values, matching the
    published interval arithmetic this toolkit reproduces.
    """
    a = np.asarray(fold_aucs, dtype=np.float64)
    mean = float(a.mean())
    std = float(a.std(ddof=0))
    return FoldSummary(mean, std, mean - Z_95 * std, mean + Z_95 * std)


# ---------------------------------------------------------------------------
# Report JSON schema (the harness emits documents in this shape)
# ---------------------------------------------------------------------------

REPORT_SCHEMA: dict = {
    "type": "object",
    "required": ["run_id", "config", "folds", "mean_auc", "std_auc", "ci95",
                 "confusion", "metrics", "per_alarm", "errors", "delong", "bootstrap"],
    "properties": {
        "run_id": {"type": "string"},
        "config": {"type": "object"},
        "folds": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["fold", "auc"],
                "properties": {"fold": {"type": "integer"},
                               "auc": {"type": "number"}},
            },
        },
        "mean_auc": {"type": "number"},
        "std_auc": {"type": "number"},
        "ci95": {"type": "array", "items": {"type": "number"},
                 "minItems": 2, "maxItems": 2},
        "pooled_auc": {"type": ["number", "null"]},
        "confusion": {
            "type": "object",
            "required": ["tp", "tn", "fp", "fn"],
            "properties": {k: {"type": "integer"} for k in ("tp", "tn", "fp", "fn")},
        },
        "metrics": {
            "type": "object",
            "required": ["sensitivity", "specificity", "precision",
                         "f1", "npv", "accuracy"],
        },
        "per_alarm": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["type", "n", "auc", "accuracy"],
                "properties": {
                    "type": {"type": "string"},
                    "n": {"type": "integer"},
                    "auc": {"type": ["number", "null"]},
                    "accuracy": {"type": "number"},
                },
            },
        },
        "errors": {
            "type": "object",
            "required": ["fn", "fp", "high_confidence"],
            "properties": {
                "fn": {"type": "array", "items": {"type": "string"}},
                "fp": {"type": "array", "items": {"type": "string"}},
                "high_confidence": {"type": "array", "items": {"type": "string"}},
            },
        },
        "delong": {
            "type": ["object", "null"],
            "required": ["z", "p"],
            "properties": {"z": {"type": "number"}, "p": {"type": "number"}},
        },
        "bootstrap": {
            "type": ["object", "null"],
            "required": ["lo", "hi"],
            "properties": {"lo": {"type": "number"}, "hi": {"type": "number"}},
        },
    },
}
