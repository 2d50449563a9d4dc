"""Pair-classification metrics: accuracy, un-weighted macro F1, and
positive-class precision/recall, with the F1-of-empty-class = 0
convention."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, InputError
from .index import Resources, score_pair
from .svm import LabeledPair, MetaClassifier


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    macro_f1: float
    precision_pos: float
    recall_pos: float
    confusion: tuple[int, int, int, int]  # (tp, fp, tn, fn)
    threshold: float

    @classmethod
    def from_confusion(cls, tp: int, fp: int, tn: int, fn: int, threshold: float) -> "EvalReport":
        total = tp + fp + tn + fn
        if total == 0:
            raise InputError("cannot evaluate an empty pair list")
        precision_pos = tp / (tp + fp) if tp + fp else 0.0
        recall_pos = tp / (tp + fn) if tp + fn else 0.0
        f1_pos = (
            2 * precision_pos * recall_pos / (precision_pos + recall_pos)
            if precision_pos + recall_pos
            else 0.0
        )
        precision_neg = tn / (tn + fn) if tn + fn else 0.0
        recall_neg = tn / (tn + fp) if tn + fp else 0.0
        f1_neg = (
            2 * precision_neg * recall_neg / (precision_neg + recall_neg)
            if precision_neg + recall_neg
            else 0.0
        )
        return cls(
            accuracy=(tp + tn) / total,
            macro_f1=(f1_pos + f1_neg) / 2.0,
            precision_pos=precision_pos,
            recall_pos=recall_pos,
            confusion=(tp, fp, tn, fn),
            threshold=threshold,
        )

    def as_dict(self) -> dict:
        tp, fp, tn, fn = self.confusion
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "precision_pos": self.precision_pos,
            "recall_pos": self.recall_pos,
            "confusion": {"tp": tp, "fp": fp, "tn": tn, "fn": fn},
            "threshold": self.threshold,
        }


def evaluate(
    pairs: list[LabeledPair],
    model: MetaClassifier,
    resources: Resources,
    threshold: float | None = None,
) -> EvalReport:
    if not pairs:
        raise InputError("cannot evaluate an empty pair list")
    t = model.threshold if threshold is None else threshold
    tp = fp = tn = fn = 0
    for pair in pairs:
        features = score_pair(pair.question1, pair.question2, resources)
        if len(features) < model.n_features:
            raise InputError(
                f"pair ({pair.question1!r}, {pair.question2!r}) produced "
                f"{len(features)} features but the model needs {model.n_features}"
            )
        features = features[: model.n_features]
        prob = model.predict_proba(np.asarray(features))
        predicted = 1 if prob >= t else 0
        if predicted == 1 and pair.label == 1:
            tp += 1
        elif predicted == 1:
            fp += 1
        elif pair.label == 0:
            tn += 1
        else:
            fn += 1
    return EvalReport.from_confusion(tp, fp, tn, fn, t)


def load_pairs_tsv(path: str | Path) -> list[LabeledPair]:
    """Three tab-separated columns: question1, question2, label in {0,1}."""
    path = Path(path)
    pairs: list[LabeledPair] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise FormatError(f"{path}:{lineno}: expected 3 tab-separated columns, got {len(parts)}")
        q1, q2, raw_label = parts
        if raw_label not in ("0", "1"):
            raise FormatError(f"{path}:{lineno}: label must be 0 or 1, got {raw_label!r}")
        pairs.append(LabeledPair(question1=q1, question2=q2, label=int(raw_label)))
    return pairs


def load_pairs_qqp(path: str | Path) -> list[LabeledPair]:
    """QQP-format CSV with columns question1, question2, is_duplicate."""
    path = Path(path)
    pairs: list[LabeledPair] = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {
            "question1", "question2", "is_duplicate"
        } <= set(reader.fieldnames):
            raise FormatError(
                f"{path}: expected columns question1, question2, is_duplicate, "
                f"got {reader.fieldnames}"
            )
        for lineno, row in enumerate(reader, 2):
            label = row["is_duplicate"]
            if label not in ("0", "1"):
                raise FormatError(f"{path}:{lineno}: is_duplicate must be 0 or 1, got {label!r}")
            pairs.append(
                LabeledPair(question1=row["question1"], question2=row["question2"], label=int(label))
            )
    return pairs
