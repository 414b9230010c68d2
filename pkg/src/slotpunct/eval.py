"""Slot-level precision / recall / F1 for comma, period and question.

"Overall" is the micro average over the three punctuation classes: tp, fp and
fn are pooled before the ratios are taken, and the no-punctuation class
contributes nothing on its own.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

from slotpunct import kernels
from slotpunct.slotmask import LabeledSequence, PunctClass

# Column order of the result tables.
TABLE_CLASSES = (PunctClass.P, PunctClass.C, PunctClass.Q)
CLASS_TITLES = {PunctClass.P: "Period", PunctClass.C: "Comma", PunctClass.Q: "Question"}
EMPTY_MARK = "*"


class AlignmentError(ValueError):
    def __init__(self, index: int, detail: str):
        self.index = index
        super().__init__(f"prediction/reference mismatch at sequence {index}: {detail}")


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> PRF:
        pr = tp / (tp + fp) if tp + fp else 0.0
        rc = tp / (tp + fn) if tp + fn else 0.0
        return cls(pr, rc, f1_score(pr, rc))

    def as_percent(self) -> tuple[float, float, float]:
        return (100 * self.precision, 100 * self.recall, 100 * self.f1)


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: Mapping[PunctClass, int]
    fp: Mapping[PunctClass, int]
    fn: Mapping[PunctClass, int]

    @classmethod
    def from_array(cls, arr: np.ndarray) -> ConfusionCounts:
        classes = TABLE_CLASSES
        return cls(
            {c: int(arr[c, 0]) for c in classes},
            {c: int(arr[c, 1]) for c in classes},
            {c: int(arr[c, 2]) for c in classes},
        )

    def support(self, cls: PunctClass) -> int:
        return self.tp[cls] + self.fn[cls]

    def predicted(self, cls: PunctClass) -> int:
        return self.tp[cls] + self.fp[cls]


@dataclass(frozen=True)
class EvalReport:
    per_class: Mapping[PunctClass, PRF]
    overall: PRF
    counts: ConfusionCounts | None = field(default=None, compare=False)

    @classmethod
    def from_counts(cls, counts: ConfusionCounts) -> EvalReport:
        per_class = {c: PRF.from_counts(counts.tp[c], counts.fp[c], counts.fn[c]) for c in TABLE_CLASSES}
        overall = PRF.from_counts(
            sum(counts.tp.values()), sum(counts.fp.values()), sum(counts.fn.values())
        )
        return cls(per_class, overall, counts)

    @classmethod
    def from_percent(cls, cells: Mapping[str, Sequence[float]]) -> EvalReport:
        """Build a report from published ``PR/RC/F1`` percentages (no counts)."""
        per_class = {c: PRF(*(v / 100 for v in cells[c.name])) for c in TABLE_CLASSES}
        return cls(per_class, PRF(*(v / 100 for v in cells["overall"])))

    def is_empty(self, cls: PunctClass) -> bool:
        return self.counts is not None and self.counts.support(cls) == 0 and self.counts.predicted(cls) == 0

    def to_dict(self) -> dict:
        out = {c.name: vars(self.per_class[c]) for c in TABLE_CLASSES}
        out["overall"] = vars(self.overall)
        if self.counts is not None:
            out["counts"] = {
                c.name: {"tp": self.counts.tp[c], "fp": self.counts.fp[c], "fn": self.counts.fn[c]}
                for c in TABLE_CLASSES
            }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: Mapping) -> EvalReport:
        """Inverse of :meth:`to_dict`; counts, when present, are authoritative."""
        if "counts" in d:
            c = d["counts"]
            return cls.from_counts(
                ConfusionCounts(
                    {k: int(c[k.name]["tp"]) for k in TABLE_CLASSES},
                    {k: int(c[k.name]["fp"]) for k in TABLE_CLASSES},
                    {k: int(c[k.name]["fn"]) for k in TABLE_CLASSES},
                )
            )
        per_class = {k: PRF(**d[k.name]) for k in TABLE_CLASSES}
        return cls(per_class, PRF(**d["overall"]))


def confusion(pred: Sequence[LabeledSequence], ref: Sequence[LabeledSequence]) -> ConfusionCounts:
    if len(pred) != len(ref):
        raise AlignmentError(min(len(pred), len(ref)), f"{len(pred)} predicted vs {len(ref)} reference sequences")
    p_all, r_all = [], []
    for i, (p, r) in enumerate(zip(pred, ref)):
        if list(p.words) != list(r.words):
            raise AlignmentError(i, "word sequences differ")
        p_all.extend(int(x) for x in p.labels)
        r_all.extend(int(x) for x in r.labels)
    arr = kernels.confusion_counts(np.asarray(p_all, dtype=np.int64), np.asarray(r_all, dtype=np.int64))
    return ConfusionCounts.from_array(arr)


def score(pred: Sequence[LabeledSequence], ref: Sequence[LabeledSequence]) -> EvalReport:
    return EvalReport.from_counts(confusion(pred, ref))


def micro_recall(recalls: Mapping[PunctClass, float], supports: Mapping[PunctClass, int]) -> float:
    """Pooled recall from per-class recalls and reference supports."""
    total = sum(supports.values())
    return sum(recalls[c] * supports[c] for c in supports) / total if total else 0.0


def _cell(prf: PRF) -> str:
    return "/".join(f"{v:.1f}" for v in prf.as_percent())


def render_table(reports: Mapping[str, EvalReport] | Sequence[tuple[str, EvalReport]], title: str | None = None) -> str:
    """Render ``Model | Period | Comma | Question | Overall`` with PR/RC/F1 cells."""
    items = list(reports.items()) if isinstance(reports, Mapping) else list(reports)
    if not items:
        raise ValueError("nothing to render")
    header = ["Model", *(CLASS_TITLES[c] for c in TABLE_CLASSES), "Overall"]
    sub = ["", *(["PR/RC/F1"] * (len(TABLE_CLASSES) + 1))]
    rows = [header, sub]
    footnote = False
    for name, rep in items:
        row = [name]
        for c in TABLE_CLASSES:
            cell = _cell(rep.per_class[c])
            if rep.is_empty(c):
                cell += EMPTY_MARK
                footnote = True
            row.append(cell)
        row.append(_cell(rep.overall))
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = []
    if title:
        lines.append(title)
    for k, r in enumerate(rows):
        lines.append("| " + " | ".join(cell.ljust(w) for cell, w in zip(r, widths)) + " |")
        if k == 1:
            lines.append("|" + "|".join("-" * (w + 2) for w in widths) + "|")
    if footnote:
        lines.append(f"{EMPTY_MARK} class absent from both reference and prediction")
    return "\n".join(lines)


@dataclass(frozen=True)
class DeltaTable:
    """Signed percentage-point differences ``a - b`` per cell."""

    per_class: Mapping[PunctClass, tuple[float, float, float]]
    overall: tuple[float, float, float]
    names: tuple[str, str] = ("a", "b")

    def render(self) -> str:
        header = ["Delta", *(CLASS_TITLES[c] for c in TABLE_CLASSES), "Overall"]
        cells = [f"{self.names[0]} - {self.names[1]}"]
        for c in TABLE_CLASSES:
            cells.append("/".join(f"{v:+.1f}" for v in self.per_class[c]))
        cells.append("/".join(f"{v:+.1f}" for v in self.overall))
        sub = ["", *(["PR/RC/F1"] * (len(TABLE_CLASSES) + 1))]
        rows = [header, sub, cells]
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        return "\n".join("| " + " | ".join(x.ljust(w) for x, w in zip(r, widths)) + " |" for r in rows)


def compare_runs(report_a: EvalReport, report_b: EvalReport, names: tuple[str, str] = ("a", "b")) -> DeltaTable:
    def diff(x: PRF, y: PRF) -> tuple[float, float, float]:
        return tuple(round(u - v, 10) for u, v in zip(x.as_percent(), y.as_percent()))

    return DeltaTable(
        {c: diff(report_a.per_class[c], report_b.per_class[c]) for c in TABLE_CLASSES},
        diff(report_a.overall, report_b.overall),
        names,
    )


def load_baselines() -> dict:
    """Published result tables (percentages) shipped with the package."""
    ref = resources.files("slotpunct") / "data" / "baselines.json"
    return json.loads(ref.read_text(encoding="utf-8"))


def baseline_report(table: str, model: str) -> EvalReport:
    return EvalReport.from_percent(load_baselines()["tables"][table]["models"][model])
