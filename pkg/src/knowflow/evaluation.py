"""Confusion-matrix scoring of forecasts and the backcasting sweep."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .forecast import PredictedNetwork, rescale
from .ingest import PeriodAggregates
from .predictors import PredictorConfig, predict_all
from .scoring import NetworkSnapshot, build_snapshots

RATES = ("accuracy", "precision", "recall", "f_score")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @property
    def predicted_strong(self) -> int:
        return self.tp + self.fp

    @property
    def actual_strong(self) -> int:
        return self.tp + self.fn


@dataclass(frozen=True)
class Rates:
    accuracy: float
    precision: float
    recall: float
    f_score: float


def confusion(pred: PredictedNetwork, actual: NetworkSnapshot) -> ConfusionMatrix:
    if pred.domain_table != actual.domain_table:
        raise ValueError("prediction and actual snapshot use different domain tables")
    iu = np.triu_indices(len(actual.domain_table), 1)
    p = pred.weights[iu] > 1
    a = actual.weights[iu] > 1
    return ConfusionMatrix(
        tp=int(np.sum(p & a)),
        tn=int(np.sum(~p & ~a)),
        fp=int(np.sum(p & ~a)),
        fn=int(np.sum(~p & a)),
    )


def _ratio(num, den):
    return num / den if den else 0.0


def metrics(cm: ConfusionMatrix) -> Rates:
    """Accuracy, precision, recall and F-score; a zero denominator gives 0."""
    accuracy = _ratio(cm.tp + cm.tn, cm.total)
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    f_score = _ratio(2 * precision * recall, precision + recall)
    return Rates(accuracy, precision, recall, f_score)


@dataclass(frozen=True)
class EvaluationRow:
    config: PredictorConfig
    train_period: str
    test_period: str
    cm: ConfusionMatrix
    rates: Rates
    predicted_strong: int
    predicted_weak: int
    actual_strong: int
    actual_weak: int
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class EvaluationReport:
    rows: tuple[EvaluationRow, ...]
    configs: tuple[PredictorConfig, ...]
    test_periods: tuple[str, ...]

    def row(self, config: PredictorConfig, test_period: str) -> EvaluationRow:
        for r in self.rows:
            if r.config == config and r.test_period == test_period:
                return r
        raise KeyError((config.label, test_period))

    def average(self, config: PredictorConfig, rate: str) -> float:
        vals = [getattr(r.rates, rate) for r in self.rows if r.config == config]
        return math.fsum(vals) / len(vals)

    def metrics_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["predictor", "param", "period", "tp", "tn", "fp", "fn", *RATES])
        for r in self.rows:
            out.writerow(
                [r.config.kind.value, r.config.param_label, r.test_period, r.cm.tp, r.cm.tn, r.cm.fp, r.cm.fn]
                + [f"{getattr(r.rates, k):.3f}" for k in RATES]
            )
        return buf.getvalue()

    def counts_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["predictor", "param", "period", "predicted_strong", "predicted_weak", "actual_strong", "actual_weak"])
        for r in self.rows:
            out.writerow(
                [r.config.kind.value, r.config.param_label, r.test_period,
                 r.predicted_strong, r.predicted_weak, r.actual_strong, r.actual_weak]
            )
        return buf.getvalue()

    def rate_table_csv(self, rate: str) -> str:
        """One rate as a predictor x testing-period grid with an average column."""
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow([rate, *self.test_periods, "Ave."])
        for cfg in self.configs:
            vals = [getattr(self.row(cfg, t).rates, rate) for t in self.test_periods]
            out.writerow([cfg.label, *(f"{v:.3f}" for v in vals), f"{self.average(cfg, rate):.3f}"])
        return buf.getvalue()

    def link_count_table_csv(self) -> str:
        """Predicted Strong/Weak link counts per testing period, actual counts last."""
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["links", "predictor", *self.test_periods])
        for kind, attr, actual in (("Strong", "predicted_strong", "actual_strong"), ("Weak", "predicted_weak", "actual_weak")):
            for cfg in self.configs:
                out.writerow([kind, cfg.label, *(getattr(self.row(cfg, t), attr) for t in self.test_periods)])
            first = self.configs[0]
            out.writerow([kind, "Actual", *(getattr(self.row(first, t), actual) for t in self.test_periods)])
        return buf.getvalue()

    def warnings_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["predictor", "param", "period", "warning"])
        for r in self.rows:
            for w in r.warnings:
                out.writerow([r.config.kind.value, r.config.param_label, r.test_period, w])
        return buf.getvalue()


def evaluate_pair(train: NetworkSnapshot, test: NetworkSnapshot, cfg: PredictorConfig) -> EvaluationRow:
    sim = predict_all(train, cfg)
    pred = rescale(sim, train, test.period)
    cm = confusion(pred, test)
    iu = np.triu_indices(len(train.domain_table), 1)
    pw, aw = pred.weights[iu], test.weights[iu]
    return EvaluationRow(
        config=cfg,
        train_period=train.period,
        test_period=test.period,
        cm=cm,
        rates=metrics(cm),
        predicted_strong=int(np.sum(pw > 1)),
        predicted_weak=int(np.sum((pw > 0) & (pw <= 1))),
        actual_strong=int(np.sum(aw > 1)),
        actual_weak=int(np.sum((aw > 0) & (aw <= 1))),
        warnings=sim.warnings,
    )


def backcast_sweep(agg: PeriodAggregates, grid: Sequence[PredictorConfig], threads: int = 1) -> EvaluationReport:
    """Train on each period, test on the next, for every config in ``grid``.

    Cells are independent; with ``threads > 1`` they run on a thread pool,
    and rows are always assembled in (config, period) order.
    """
    if len(agg.windows) < 2:
        raise ValueError("need >= 2 periods for backcasting")
    if not grid:
        raise ValueError("predictor grid is empty")
    snaps = build_snapshots(agg)
    jobs = [(cfg, snaps[k], snaps[k + 1]) for cfg in grid for k in range(len(snaps) - 1)]

    def run(job):
        cfg, train, test = job
        return evaluate_pair(train, test, cfg)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, jobs))
    else:
        rows = [run(j) for j in jobs]
    return EvaluationReport(tuple(rows), tuple(grid), tuple(s.period for s in snaps[1:]))
