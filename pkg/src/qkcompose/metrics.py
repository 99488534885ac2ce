"""Binary classification metrics with class 1 as the positive class."""
from dataclasses import dataclass

import numpy as np


class UndefinedMetricError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @classmethod
    def from_labels(cls, y_true, y_pred):
        y_true = np.asarray(y_true).astype(int)
        y_pred = np.asarray(y_pred).astype(int)
        if y_true.shape != y_pred.shape:
            raise ValueError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
        return cls(
            tp=int(np.sum((y_true == 1) & (y_pred == 1))),
            fp=int(np.sum((y_true == 0) & (y_pred == 1))),
            tn=int(np.sum((y_true == 0) & (y_pred == 0))),
            fn=int(np.sum((y_true == 1) & (y_pred == 0))),
        )

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


def tpr(c):
    if c.tp + c.fn == 0:
        raise UndefinedMetricError("TPR undefined: no positive samples")
    return c.tp / (c.tp + c.fn)


def tnr(c):
    if c.tn + c.fp == 0:
        raise UndefinedMetricError("TNR undefined: no negative samples")
    return c.tn / (c.tn + c.fp)


def balanced_accuracy(c):
    return (tpr(c) + tnr(c)) / 2


def f1(c):
    if c.tp + c.fp + c.fn == 0:
        raise UndefinedMetricError("F1 undefined: no positives predicted or present")
    return c.tp / (c.tp + (c.fp + c.fn) / 2)


def lowest_class_accuracy(c):
    return min(tpr(c), tnr(c))


def report(y_true, y_pred):
    """All metrics for one evaluation set, as a plain dict."""
    c = ConfusionCounts.from_labels(y_true, y_pred)
    out = {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn,
           "tpr": tpr(c), "tnr": tnr(c), "balanced_accuracy": balanced_accuracy(c),
           "lowest_class_accuracy": lowest_class_accuracy(c)}
    try:
        out["f1"] = f1(c)
    except UndefinedMetricError:
        out["f1"] = None
    return out
