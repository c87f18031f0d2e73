"""Arc-level precision/recall/F1 and BIC comparison of learned graphs."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .data import Dataset
from .model import DirectedGraph
from .scoring import model_bic

__all__ = ["EvalReport", "REPORT_COLUMNS", "compare_graphs", "delta_bic_percent", "evaluate"]

REPORT_COLUMNS = ["tp", "fp", "fn", "precision", "recall", "f1",
                  "bic_learned", "bic_reference", "delta_bic_percent"]


@dataclass
class EvalReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    bic_learned: float | None = None
    bic_reference: float | None = None
    delta_bic_percent: float | None = None
    wall_seconds: dict = field(default_factory=dict)

    def csv_header(self) -> list[str]:
        return REPORT_COLUMNS + [f"wall_seconds_{k}" for k in sorted(self.wall_seconds)]

    def csv_row(self) -> list:
        d = asdict(self)
        row = ["" if d[c] is None else d[c] for c in REPORT_COLUMNS]
        return row + [self.wall_seconds[k] for k in sorted(self.wall_seconds)]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1)


def compare_graphs(learned: DirectedGraph, truth: DirectedGraph) -> EvalReport:
    """Score ``learned`` arcs against ``truth`` arcs as a binary classifier.

    Two empty graphs agree perfectly (all metrics 1); a zero denominator in
    precision or recall otherwise gives 0.
    """
    if learned.n != truth.n:
        raise ValueError(f"graphs have {learned.n} and {truth.n} nodes")
    a, b = set(learned.arcs), set(truth.arcs)
    tp, fp, fn = len(a & b), len(a - b), len(b - a)
    if not a and not b:
        return EvalReport(0, 0, 0, 1.0, 1.0, 1.0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalReport(tp, fp, fn, precision, recall, f1)


def delta_bic_percent(bic_ctss: float, bic_ctpc: float) -> float:
    """``(bic_ctss - bic_ctpc) / bic_ctss * 100``.

    The sign is relative to the reference's sign. Continuous-time
    log-likelihoods are densities and can be positive, so with a positive
    reference a positive result means the second graph scores worse; with a
    negative reference it means it scores better.
    """
    if bic_ctss == 0:
        raise ValueError("reference BIC is zero")
    return (bic_ctss - bic_ctpc) / bic_ctss * 100.0


def evaluate(learned: DirectedGraph, truth: DirectedGraph, dataset: Dataset | None = None,
             reference: DirectedGraph | None = None) -> EvalReport:
    """Structural comparison plus, given data, BIC of ``learned`` and of
    ``reference`` (``truth`` by default)."""
    rep = compare_graphs(learned, truth)
    if dataset is not None and dataset.n_transitions > 0:
        ref = truth if reference is None else reference
        rep.bic_learned = model_bic(learned, dataset)
        rep.bic_reference = model_bic(ref, dataset)
        rep.delta_bic_percent = delta_bic_percent(rep.bic_reference, rep.bic_learned)
    return rep
