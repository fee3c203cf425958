"""Citation scores, network snapshots and per-period statistics."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .domains import DomainTable, LinkClass
from .errors import UndefinedScoreError
from .ingest import PeriodAggregates


def citation_score(c_ij: int, p_i: int, p_j: int, c_tot: int, p_tot: int) -> float:
    """Observed cross citations relative to the uniform-random expectation.

    Evaluated as ``c_ij * p_tot**2 / (p_i * p_j * c_tot)`` on Python ints,
    so the single float rounding happens at the final division and a
    count that equals its expectation scores exactly 1.0.
    """
    if p_i <= 0 or p_j <= 0 or c_tot <= 0 or p_tot <= 0:
        raise UndefinedScoreError(
            f"citation score undefined for p_i={p_i}, p_j={p_j}, c_tot={c_tot}, p_tot={p_tot}"
        )
    if c_ij < 0:
        raise ValueError("citation count must be nonnegative")
    return int(c_ij) * int(p_tot) ** 2 / (int(p_i) * int(p_j) * int(c_tot))


def classify_link(cs: float) -> LinkClass:
    if cs < 0 or math.isnan(cs):
        raise ValueError(f"citation score must be >= 0, got {cs}")
    if cs > 1:
        return LinkClass.STRONG
    if cs > 0:
        return LinkClass.WEAK
    return LinkClass.ZERO


def classify_matrix(w: np.ndarray) -> np.ndarray:
    """Vectorized :func:`classify_link`: 2 Strong, 1 Weak, 0 Zero."""
    return np.where(w > 1, 2, np.where(w > 0, 1, 0)).astype(np.int8)


@dataclass(frozen=True, eq=False)
class NetworkSnapshot:
    """Weighted undirected network over the domains for one period.

    ``weights[i, j]`` is the citation score of the pair (0 when absent);
    ``defined[i, j]`` is False when the score is undefined because a
    domain had no patents, or the period had no citations.
    """

    domain_table: DomainTable
    period: str
    weights: np.ndarray
    defined: np.ndarray = None
    neighbor_sets: tuple = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.domain_table)
        w = np.array(self.weights, dtype=float)
        if w.shape != (n, n):
            raise ValueError(f"weights must be {n}x{n}")
        np.fill_diagonal(w, 0.0)
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        if not np.array_equal(w, w.T):
            raise ValueError("weights must be symmetric")
        defined = np.ones((n, n), bool) if self.defined is None else np.array(self.defined, bool)
        np.fill_diagonal(defined, False)
        w.setflags(write=False)
        defined.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "defined", defined)
        object.__setattr__(self, "neighbor_sets", tuple(frozenset(np.flatnonzero(w[i] > 0).tolist()) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.domain_table)

    def neighbors(self, u: int) -> frozenset:
        return self.neighbor_sets[u]

    def strength(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def weight(self, a: str, b: str) -> float:
        t = self.domain_table
        return float(self.weights[t.index(a), t.index(b)])

    def edges(self) -> list[tuple[int, int, float]]:
        return [(i, j, float(self.weights[i, j])) for i, j in self.domain_table.pairs() if self.weights[i, j] > 0]

    def link_class(self, a: str, b: str) -> LinkClass:
        return classify_link(self.weight(a, b))

    def class_matrix(self) -> np.ndarray:
        return classify_matrix(self.weights)

    def max_cs(self) -> float:
        return float(self.weights.max()) if self.n else 0.0

    def to_csv(self) -> str:
        t = self.domain_table
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["domain_a", "domain_b", "cs", "class"])
        for i, j in t.lexicographic_pairs():
            cs = float(self.weights[i, j])
            out.writerow([t[i].abbrev, t[j].abbrev, f"{cs:.6f}", classify_link(cs).value])
        return buf.getvalue()

    def to_dot(self) -> str:
        t = self.domain_table
        lines = [f'graph "{self.period}" {{']
        for d in t:
            lines.append(f'  "{d.abbrev}" [operand="{d.operand.value}", operation="{d.operation.value}"];')
        for i, j in t.lexicographic_pairs():
            cs = float(self.weights[i, j])
            if cs > 0:
                lines.append(
                    f'  "{t[i].abbrev}" -- "{t[j].abbrev}" [weight={cs:.6f}, class="{classify_link(cs).value}"];'
                )
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_snapshot(agg: PeriodAggregates, t: str) -> NetworkSnapshot:
    k = agg.period_index(t)
    n = len(agg.domain_table)
    w = np.zeros((n, n))
    defined = np.zeros((n, n), bool)
    c, p = agg.c[k], agg.p[k]
    c_tot, p_tot = int(agg.c_total[k]), int(agg.p_total[k])
    for i, j in agg.domain_table.pairs():
        try:
            cs = citation_score(int(c[i, j]), int(p[i]), int(p[j]), c_tot, p_tot)
        except UndefinedScoreError:
            continue
        w[i, j] = w[j, i] = cs
        defined[i, j] = defined[j, i] = True
    return NetworkSnapshot(agg.domain_table, t, w, defined)


def build_snapshots(agg: PeriodAggregates) -> list[NetworkSnapshot]:
    return [build_snapshot(agg, label) for label in agg.labels]


@dataclass(frozen=True)
class PeriodStats:
    period: str
    mean: float
    mean_weak: float
    std: float
    max_cs: float
    max_pair: tuple[str, str] | None
    n_strong: int
    n_weak: int
    n_zero: int

    @property
    def n_pairs(self) -> int:
        return self.n_strong + self.n_weak + self.n_zero


def snapshot_stats(s: NetworkSnapshot) -> PeriodStats:
    """Per-period summary statistics of a snapshot.

    Mean and (population) standard deviation run over pairs with a defined
    score, absent edges counting as 0. Undefined pairs count as Zero links
    so the three link counts always sum to n(n-1)/2. Sums use ``math.fsum``
    in table pair order, which makes them exactly rounded.
    """
    t = s.domain_table
    values, weak = [], []
    n_strong = n_weak = n_zero = 0
    best, best_pair = -1.0, None
    for i, j in t.lexicographic_pairs():
        cs = float(s.weights[i, j])
        cls = classify_link(cs)
        if cls is LinkClass.STRONG:
            n_strong += 1
        elif cls is LinkClass.WEAK:
            n_weak += 1
            weak.append(cs)
        else:
            n_zero += 1
        if s.defined[i, j]:
            values.append(cs)
        if cs > best:
            best, best_pair = cs, (t[i].abbrev, t[j].abbrev)
    if values:
        mean = math.fsum(values) / len(values)
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))
    else:
        mean = std = 0.0
    mean_weak = math.fsum(weak) / len(weak) if weak else 0.0
    if best <= 0:
        best, best_pair = 0.0, None
    return PeriodStats(s.period, mean, mean_weak, std, best, best_pair, n_strong, n_weak, n_zero)


def stats_table_csv(stats: list[PeriodStats]) -> str:
    """Periods as columns, statistics as rows (one column per period)."""
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["statistic"] + [s.period for s in stats])
    out.writerow(["average"] + [f"{s.mean:.6f}" for s in stats])
    out.writerow(["average_weak"] + [f"{s.mean_weak:.6f}" for s in stats])
    out.writerow(["std"] + [f"{s.std:.6f}" for s in stats])
    out.writerow(["max"] + [f"{s.max_cs:.6f}" for s in stats])
    out.writerow(["max_pair"] + ["-".join(s.max_pair) if s.max_pair else "" for s in stats])
    out.writerow(["strong"] + [s.n_strong for s in stats])
    out.writerow(["weak"] + [s.n_weak for s in stats])
    out.writerow(["zero"] + [s.n_zero for s in stats])
    return buf.getvalue()
