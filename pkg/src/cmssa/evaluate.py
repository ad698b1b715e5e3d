"""Extrinsic clustering evaluation with item-level BCubed scores.

Each item's precision is the fraction of its cluster sharing its gold
class, its recall the fraction of its gold class sharing its cluster;
both are averaged over items and combined into an F1.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping

from .errors import DataError, ParameterError

from .cluster import ClusterAssignment


@dataclass(frozen=True)
class EvalReport:
    """BCubed precision/recall/F1 plus an echo of the producing config."""

    precision: float
    recall: float
    f1: float
    n_items: int
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "n_items": self.n_items,
            "config": dict(self.config),
        }


def bcubed(
    predicted: ClusterAssignment,
    gold: Mapping[str, str],
    config: dict | None = None,
) -> EvalReport:
    """Score a clustering against gold labels.

    Every clustered id must have a gold label; a missing one raises
    DataError naming the id. F1 is defined as 0 when precision and recall
    are both 0.
    """
    items = list(predicted.assignments)
    if not items:
        raise ParameterError("cannot evaluate an empty clustering")
    for sid in items:
        if sid not in gold:
            raise DataError(f"series '{sid}' has no gold label")

    cluster_sizes = Counter(predicted.assignments[sid] for sid in items)
    class_sizes = Counter(gold[sid] for sid in items)
    pair_sizes = Counter((predicted.assignments[sid], gold[sid]) for sid in items)

    precision = 0.0
    recall = 0.0
    for sid in items:
        both = pair_sizes[(predicted.assignments[sid], gold[sid])]
        precision += both / cluster_sizes[predicted.assignments[sid]]
        recall += both / class_sizes[gold[sid]]
    precision /= len(items)
    recall /= len(items)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return EvalReport(
        precision=precision,
        recall=recall,
        f1=f1,
        n_items=len(items),
        config=dict(config or {}),
    )
