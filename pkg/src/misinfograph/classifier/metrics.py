"""Binary classification metrics with the fabricated class as positive.

Class 1 is the positive class throughout. A score crosses the decision
threshold when score >= threshold. Every ratio with a zero denominator
is reported as 0.0 rather than raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError


@dataclass(frozen=True)
class PRPoint:
    threshold: float
    precision: float
    recall: float


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    fp: int
    tn: int
    fn: int
    threshold: float
    precision: float
    recall: float
    f1: float
    mcc: float
    accuracy: float
    per_class: dict = field(default_factory=dict)
    pr_curve: tuple = ()

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "threshold": self.threshold,
            "precision": self.precision, "recall": self.recall,
            "f1": self.f1, "mcc": self.mcc, "accuracy": self.accuracy,
            "per_class": self.per_class,
            "pr_curve": [
                {"threshold": p.threshold, "precision": p.precision, "recall": p.recall}
                for p in self.pr_curve
            ],
        }


def _ratio(num: float, den: float) -> float:
    return num / den if den != 0 else 0.0


def confusion_counts(labels, scores, threshold: float = 0.5) -> tuple[int, int, int, int]:
    """(tp, fp, tn, fn) for predictions score >= threshold against 0/1 labels."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape:
        raise InputError(f"labels and scores differ in length: {labels.shape} vs {scores.shape}")
    if labels.size == 0:
        raise InputError("cannot compute metrics on an empty evaluation set")
    bad = set(np.unique(labels)) - {0, 1}
    if bad:
        raise InputError(f"labels must be 0 or 1, got {sorted(bad)}")
    pred = scores >= threshold
    pos = labels == 1
    tp = int(np.sum(pred & pos))
    fp = int(np.sum(pred & ~pos))
    tn = int(np.sum(~pred & ~pos))
    fn = int(np.sum(~pred & pos))
    return tp, fp, tn, fn


def precision_recall_f1(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f1 = _ratio(2.0 * precision * recall, precision + recall)
    return precision, recall, f1


def matthews_corrcoef(tp: int, fp: int, tn: int, fn: int) -> float:
    num = tp * tn - fp * fn
    den = math.sqrt(float(tp + fp) * (tp + fn) * (tn + fp) * (tn + fn))
    return _ratio(num, den)


def pr_curve(labels, scores) -> tuple[PRPoint, ...]:
    """Precision/recall at every distinct score used as a threshold.

    Thresholds descend, so recall is non-decreasing along the curve.
    """
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    points = []
    for t in sorted(set(scores.tolist()), reverse=True):
        tp, fp, _, fn = confusion_counts(labels, scores, threshold=t)
        p, r, _ = precision_recall_f1(tp, fp, fn)
        points.append(PRPoint(threshold=float(t), precision=p, recall=r))
    return tuple(points)


def metrics_report(labels, scores, threshold: float = 0.5, with_curve: bool = True) -> MetricsReport:
    tp, fp, tn, fn = confusion_counts(labels, scores, threshold)
    precision, recall, f1 = precision_recall_f1(tp, fp, fn)
    mcc = matthews_corrcoef(tp, fp, tn, fn)
    total = tp + fp + tn + fn
    accuracy = _ratio(tp + tn, total)

    # class 0 metrics come from the mirrored confusion matrix
    p0, r0, f0 = precision_recall_f1(tn, fn, fp)
    per_class = {
        "0": {"precision": p0, "recall": r0, "f1": f0, "support": tn + fp},
        "1": {"precision": precision, "recall": recall, "f1": f1, "support": tp + fn},
    }
    curve = pr_curve(labels, scores) if with_curve else ()
    return MetricsReport(
        tp=tp, fp=fp, tn=tn, fn=fn, threshold=threshold,
        precision=precision, recall=recall, f1=f1, mcc=mcc, accuracy=accuracy,
        per_class=per_class, pr_curve=curve,
    )


def evaluate(params, vocab, eval_corpus, threshold: float = 0.5,
             batch_size: int = 32) -> MetricsReport:
    """Score a labeled corpus with the encoder and report threshold metrics."""
    from .training import encode_corpus, predict_scores

    ids, mask, labels = encode_corpus(eval_corpus, vocab, params.config.max_seq_len)
    scores = predict_scores(params, ids, mask, batch_size=batch_size)
    return metrics_report(labels.astype(np.int64), scores, threshold)
