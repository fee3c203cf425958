"""Rescale similarity scores into next-period link-strength forecasts."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .domains import LinkClass
from .predictors import PredictorConfig, SimilarityMatrix
from .scoring import NetworkSnapshot, classify_link, classify_matrix


@dataclass(frozen=True, eq=False)
class PredictedNetwork:
    weights: np.ndarray
    config: PredictorConfig
    train_period: str
    target_period: str | None
    domain_table: object

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def class_matrix(self) -> np.ndarray:
        return classify_matrix(self.weights)

    def link_class(self, a: str, b: str) -> LinkClass:
        t = self.domain_table
        return classify_link(float(self.weights[t.index(a), t.index(b)]))

    def strong_pairs(self) -> set[tuple[int, int]]:
        return {(i, j) for i, j in self.domain_table.pairs() if self.weights[i, j] > 1}

    def to_csv(self) -> str:
        t = self.domain_table
        buf = io.StringIO()
        buf.write(
            f"# predictor={self.config.kind.value} {self.config.param_label} "
            f"train={self.train_period} target={self.target_period or ''}\n".replace("  ", " ")
        )
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["domain_a", "domain_b", "predicted_weight", "predicted_class"])
        for i, j in t.lexicographic_pairs():
            w = float(self.weights[i, j])
            out.writerow([t[i].abbrev, t[j].abbrev, f"{w:.6f}", classify_link(w).value])
        return buf.getvalue()


def rescale(sim: SimilarityMatrix, train: NetworkSnapshot, target_period: str | None = None) -> PredictedNetwork:
    """Divide every score by the largest one and multiply by the training max CS."""
    scores = sim.scores
    top = float(scores.max()) if scores.size else 0.0
    if top > 0:
        weights = scores / top * train.max_cs()
    else:
        weights = np.zeros_like(scores)
    np.fill_diagonal(weights, 0.0)
    return PredictedNetwork(weights, sim.config, train.period, target_period, train.domain_table)
