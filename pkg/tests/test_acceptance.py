"""Acceptance gate: one group of checks per exit criterion.

Each test carries ``criterion(<name>)``; the terminal summary prints one
PASS/FAIL line per criterion.
"""

from __future__ import annotations

import filecmp
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

import oracles
from conftest import random_weights, snapshot_from
from knowflow import cli
from knowflow.dynamics import (
    Emergence,
    Pattern,
    Stability,
    LinkTrajectory,
    emergence_class,
    pattern_class,
    stability_class,
)
from knowflow.errors import NotApplicableError
from knowflow.evaluation import ConfusionMatrix, backcast_sweep, metrics
from knowflow.forecast import rescale
from knowflow.predictors import (
    Predictor,
    PredictorConfig,
    katz,
    katz_series,
    predict_all,
    spectral_radius,
)
from knowflow.scoring import build_snapshots
from knowflow.synth import PlantedLink, SynthMode, SynthSpec, generate, generic_table

pytestmark = pytest.mark.acceptance

ORACLE = "predictor oracle suite"
KATZ = "Katz consistency"
NULL = "null model"
EVAL = "evaluation cross-check"
DYN = "dynamics suite"
E2E = "end-to-end golden run"
PLANTED = "planted-signal sanity"

GOLDEN = Path(__file__).parent / "golden"


# -- predictor oracle suite ---------------------------------------------------------


def _oracle_graphs(count=200, seed=7):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(2, 9))
        yield random_weights(rng, n, density=rng.uniform(0.2, 0.9))


@pytest.mark.criterion(ORACLE)
def test_oracle_suite_all_metrics_on_200_graphs():
    start = time.perf_counter()
    worst = {}
    for w in _oracle_graphs():
        s = snapshot_from(w)
        off = ~np.eye(len(w), dtype=bool)
        for name in oracles.LOCAL_ORACLES:
            got = predict_all(s, PredictorConfig(Predictor(name))).scores
            gap = np.abs(got - oracles.local_matrix(w, name))[off].max()
            worst[name] = max(worst.get(name, 0.0), gap)
        beta, k = 0.05, 4
        gap = np.abs(katz_series(w, beta, k) - oracles.katz_walks(w, beta, k)).max()
        worst["Katz"] = max(worst.get("Katz", 0.0), gap)
        for alpha in (0.1, 0.5, 0.9):
            got = predict_all(s, PredictorConfig(Predictor.ROOTED_PAGERANK, alpha=alpha)).scores
            pi = oracles.rooted_pagerank_solve(w, alpha)
            gap = np.abs(got - (pi + pi.T) / 2)[off].max()
            worst["RootedPageRank"] = max(worst.get("RootedPageRank", 0.0), gap)
        for gamma in (0.1, 0.5, 0.9):
            got = predict_all(s, PredictorConfig(Predictor.SIMRANK, gamma=gamma)).scores
            gap = np.abs(got - oracles.simrank_naive(w, gamma))[off].max()
            worst["SimRank"] = max(worst.get("SimRank", 0.0), gap)
    elapsed = time.perf_counter() - start
    assert len(worst) == 8
    bad = {k: v for k, v in worst.items() if not v <= 1e-9}
    assert not bad, f"metrics off by more than 1e-9: {bad}"
    assert elapsed < 30, f"oracle suite took {elapsed:.1f} s"


# -- Katz consistency ----------------------------------------------------------------


@pytest.mark.criterion(KATZ)
@pytest.mark.parametrize("target_rho", [0.1, 0.3, 0.5, 0.6, 0.7, 0.8, 0.9])
def test_katz_closed_form_matches_truncation(target_rho):
    """Closed form vs 50-term truncation within 1e-9 while rho(beta A) <= 0.9.

    The dropped tail is about rho^51 / (1 - rho) times the scale of the
    leading eigenvector block, so this cannot hold near rho = 0.9; the
    check is kept at the stated tolerance on purpose.
    """
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        w = random_weights(rng, int(rng.integers(3, 9)), 0.6)
        rho = spectral_radius(w)
        if rho == 0:
            continue
        beta = min(target_rho / rho, 0.999)
        s = snapshot_from(w)
        closed = katz(s, beta, method="closed").scores
        series = katz(s, beta, katz_max_k=50, method="series").scores
        worst = max(worst, float(np.abs(closed - series).max()))
    assert worst <= 1e-9, f"max gap {worst:.3e} at rho(beta A) = {target_rho}"


@pytest.mark.criterion(KATZ)
@pytest.mark.parametrize("w,beta", [(1.0, 0.5), (2.5, 0.1), (7.3, 0.001), (0.4, 0.9), (12.0, 0.05)])
def test_katz_two_node_analytic(w, beta):
    s = snapshot_from([[0, w], [w, 0]])
    got = katz(s, beta).scores[0, 1]
    assert abs(got - beta * w / (1 - beta**2 * w**2)) <= 1e-12


# -- null model ---------------------------------------------------------------------


@pytest.mark.criterion(NULL)
@pytest.mark.parametrize("m", [1, 3])
def test_exact_null_rational_counts_score_one(m):
    rng = np.random.default_rng(5)
    T, n = 8, 29
    patents = rng.integers(3, 40, size=(T, n))
    citations = [m * int(row.sum()) ** 2 for row in patents]
    agg = generate(SynthSpec(seed=1, patents=patents, citations=citations, mode=SynthMode.EXACT_NULL))
    for k, snap in enumerate(build_snapshots(agg)):
        p, c_tot, p_tot = agg.p[k], int(agg.c_total[k]), int(agg.p_total[k])
        for i, j in agg.domain_table.pairs():
            bound = Fraction(p_tot**2, int(p[i]) * int(p[j]) * c_tot)
            assert abs(snap.weights[i, j] - 1) <= bound
            assert snap.weights[i, j] == 1.0
        assert int((snap.class_matrix() == 2).sum()) == 0


@pytest.mark.criterion(NULL)
def test_exact_null_rounded_counts_within_bound():
    agg = generate(SynthSpec(seed=2, patents=37, citations=123_457, mode=SynthMode.EXACT_NULL))
    for k, snap in enumerate(build_snapshots(agg)):
        p, c_tot, p_tot = agg.p[k], int(agg.c_total[k]), int(agg.p_total[k])
        for i, j in agg.domain_table.pairs():
            bound = p_tot**2 / (int(p[i]) * int(p[j]) * c_tot)
            assert abs(snap.weights[i, j] - 1) <= bound * (1 + 1e-12)


@pytest.mark.criterion(NULL)
def test_multinomial_null_mean_cs_near_one():
    agg = generate(SynthSpec(seed=42, patents=100, citations=1_000_000, mode=SynthMode.MULTINOMIAL_NULL))
    iu = np.triu_indices(len(agg.domain_table), 1)
    for snap in build_snapshots(agg):
        assert abs(snap.weights[iu].mean() - 1) <= 0.02


# -- evaluation cross-check ---------------------------------------------------------


@pytest.mark.criterion(EVAL)
def test_confusion_counts_reproduce_reported_rates():
    r = metrics(ConfusionMatrix(tp=9, tn=390, fp=1, fn=6))
    assert r.precision == pytest.approx(0.900, abs=5e-4)
    assert r.recall == pytest.approx(0.600, abs=5e-4)
    assert r.accuracy == pytest.approx(0.983, abs=5e-4)
    assert r.f_score == pytest.approx(0.720, abs=5e-4)


# -- dynamics suite -----------------------------------------------------------------

# (cs by period, emergence, stability, {t: pattern})
TRAJECTORIES = [
    ((1.5, 1.6, 1.7, 1.6), Emergence.PRESENT_AT_START, Stability.STAYS_STRONG,
     {2: Pattern.STEADY, 3: Pattern.STEADY, 4: Pattern.STEADY}),
    ((0.5, 2.0, 2.1, 2.2), Emergence.FROM_WEAK, Stability.STAYS_STRONG,
     {2: Pattern.INCREASING, 3: Pattern.STEADY, 4: Pattern.STEADY}),
    ((0.0, 1.2, 0.0, 0.0), Emergence.FROM_ZERO, Stability.FLUCTUATES, {2: Pattern.PEAK}),
    ((1.0, 1.4, 1.3, 1.2), Emergence.FROM_WEAK, Stability.STAYS_STRONG,
     {2: Pattern.INCREASING, 3: Pattern.STEADY, 4: Pattern.STEADY}),
    ((0.0, 0.0, 0.0, 3.0), Emergence.FROM_ZERO, Stability.UNCLASSIFIED, {4: Pattern.INCREASING}),
    ((0.3, 0.6, 0.9, 1.01), Emergence.FROM_WEAK, Stability.UNCLASSIFIED, {4: Pattern.INCREASING}),
    ((4.0, 2.0, 1.9, 3.0), Emergence.PRESENT_AT_START, Stability.STAYS_STRONG,
     {2: Pattern.DECREASING, 3: Pattern.STEADY, 4: Pattern.INCREASING}),
    ((2.0, 1.0, 2.0, 0.5), Emergence.PRESENT_AT_START, Stability.FLUCTUATES, {3: Pattern.PEAK}),
    ((0.0, 1.5, 1.0, 1.5, 0.0), Emergence.FROM_ZERO, Stability.FLUCTUATES,
     {2: Pattern.PEAK, 4: Pattern.PEAK}),
    ((0.2, 1.1, 1.375, 1.03125), Emergence.FROM_WEAK, Stability.STAYS_STRONG,
     {2: Pattern.INCREASING, 3: Pattern.STEADY, 4: Pattern.STEADY}),
    ((2.0, 2.6, 1.4, 1.04), Emergence.PRESENT_AT_START, Stability.STAYS_STRONG,
     {2: Pattern.INCREASING, 3: Pattern.DECREASING, 4: Pattern.DECREASING}),
    ((0.0, 2.0, 2.1, 0.0), Emergence.FROM_ZERO, Stability.FLUCTUATES, {2: Pattern.INCREASING, 3: Pattern.STEADY}),
    ((0.0, 3.0, 0.2), Emergence.FROM_ZERO, Stability.FLUCTUATES, {2: Pattern.PEAK}),
    ((0.8, 1.0, 5.0, 5.0, 4.0), Emergence.FROM_WEAK, Stability.STAYS_STRONG,
     {3: Pattern.INCREASING, 4: Pattern.STEADY, 5: Pattern.STEADY}),
]


@pytest.mark.criterion(DYN)
@pytest.mark.parametrize("cs,emergence,stability,patterns", TRAJECTORIES)
def test_hand_built_trajectories(cs, emergence, stability, patterns):
    tr = LinkTrajectory(("A", "B"), cs)
    assert emergence_class(tr) is emergence
    assert stability_class(tr) is stability
    for t in range(2, len(cs) + 1):
        if t in patterns:
            assert pattern_class(tr, t) is patterns[t], f"t={t}"
        else:
            with pytest.raises(NotApplicableError):
                pattern_class(tr, t)


@pytest.mark.criterion(DYN)
def test_trajectory_suite_covers_every_label():
    seen = set()
    for _, e, s, pats in TRAJECTORIES:
        seen |= {e, s, *pats.values()}
    assert seen >= set(Emergence) | set(Stability) | set(Pattern)
    assert len(TRAJECTORIES) >= 10


@pytest.mark.criterion(DYN)
def test_cs_exactly_one_is_weak_and_never_strong():
    tr = LinkTrajectory(("A", "B"), (1.0, 1.0, 1.0))
    assert tr.first_strong() is None
    with pytest.raises(NotApplicableError):
        emergence_class(tr)


# -- end-to-end golden run ----------------------------------------------------------


def _tree(path: Path) -> dict[str, bytes]:
    return {p.relative_to(path).as_posix(): p.read_bytes() for p in sorted(path.rglob("*")) if p.is_file()}


@pytest.mark.criterion(E2E)
def test_end_to_end_deterministic_across_threads(tmp_path):
    start = time.perf_counter()
    assert cli.main(["synth", "--seed", "42", "--out", str(tmp_path / "synth")]) == 0
    agg = tmp_path / "synth" / "aggregates.json"
    assert cli.main(["evaluate", "--aggregates", str(agg), "--out", str(tmp_path / "run1"), "--threads", "1"]) == 0
    elapsed = time.perf_counter() - start
    trees = [_tree(tmp_path / "run1")]
    for name, threads in [("run1b", "1"), ("run4", "4"), ("run8", "8")]:
        assert cli.main(["evaluate", "--aggregates", str(agg), "--out", str(tmp_path / name), "--threads", threads]) == 0
        trees.append(_tree(tmp_path / name))
    assert all(t == trees[0] for t in trees[1:])
    assert len(trees[0]["metrics.csv"].decode().splitlines()) == 1 + 7 * 17
    assert elapsed < 5, f"synth + sweep took {elapsed:.2f} s"


@pytest.mark.criterion(E2E)
def test_end_to_end_matches_golden(tmp_path):
    assert cli.main(["synth", "--seed", "42", "--out", str(tmp_path / "s")]) == 0
    assert cli.main(["evaluate", "--aggregates", str(tmp_path / "s" / "aggregates.json"), "--out", str(tmp_path / "ev")]) == 0
    for name in ("metrics.csv", "period_stats.csv"):
        assert filecmp.cmp(tmp_path / "ev" / name, GOLDEN / name, shallow=False), name


# -- planted-signal sanity ----------------------------------------------------------


def persistence_fixture(seed=42):
    """Twelve domains whose planted links keep the same CS in every period."""
    table = generic_table(12)
    names = table.abbrevs
    targets = {(0, 1): 3.0, (0, 2): 2.5, (1, 3): 1.8, (2, 5): 1.4, (4, 6): 2.2, (7, 8): 1.6,
               (5, 9): 1.2, (3, 10): 0.6, (6, 11): 0.8, (8, 11): 0.4, (1, 2): 0.9, (9, 10): 0.5}
    labels = [f"T{k}" for k in range(1, 9)]
    planted = tuple(PlantedLink((names[i], names[j]), tuple(labels), t) for (i, j), t in targets.items())
    return SynthSpec(seed=seed, domain_table=table, patents=10, citations=14_400, mode=SynthMode.PLANTED_LINKS,
                     planted=planted, cross_fraction=0.05, planted_background=False)


@pytest.mark.criterion(PLANTED)
def test_katz_recall_at_least_preferential_attachment():
    agg = generate(persistence_fixture())
    snaps = build_snapshots(agg)
    katz_cfg = PredictorConfig(Predictor.KATZ, beta=0.001)
    pa_cfg = PredictorConfig(Predictor.PREFERENTIAL_ATTACHMENT)
    report = backcast_sweep(agg, [katz_cfg, pa_cfg])
    totals = {}
    for cfg in (katz_cfg, pa_cfg):
        tp = fn = 0
        for train, test in zip(snaps, snaps[1:]):
            pred = rescale(predict_all(train, cfg), train, test.period)
            counts = oracles.confusion_counts(pred.weights, test.weights)
            row = report.row(cfg, test.period)
            assert (row.cm.tp, row.cm.tn, row.cm.fp, row.cm.fn) == counts
            tp, fn = tp + counts[0], fn + counts[3]
        totals[cfg.kind] = tp / (tp + fn)
    assert totals[Predictor.KATZ] >= totals[Predictor.PREFERENTIAL_ATTACHMENT]
