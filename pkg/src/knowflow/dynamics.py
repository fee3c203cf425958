"""Per-pair link trajectories: emergence, stability and period-to-period patterns.

Period positions passed to :func:`pattern_class` and
:func:`carryover_fraction` are 1-based (the first period is 1), matching
the T1..Tn labels.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .domains import DomainTable, FunctionalClass, LinkClass, functional_class
from .errors import NotApplicableError
from .scoring import NetworkSnapshot, classify_link


class Emergence(str, Enum):
    FROM_WEAK = "FromWeak"
    FROM_ZERO = "FromZero"
    PRESENT_AT_START = "PresentAtStart"


class Stability(str, Enum):
    STAYS_STRONG = "StaysStrong"
    FLUCTUATES = "Fluctuates"
    UNCLASSIFIED = "Unclassified"


class Pattern(str, Enum):
    DECREASING = "Decreasing"
    INCREASING = "Increasing"
    STEADY = "Steady"
    PEAK = "Peak"


DEFAULT_DELTA = 0.25


@dataclass(frozen=True)
class LinkTrajectory:
    pair: tuple[str, str]
    cs_by_period: tuple[float, ...]

    @property
    def class_by_period(self) -> tuple[LinkClass, ...]:
        return tuple(classify_link(cs) for cs in self.cs_by_period)

    @property
    def n_periods(self) -> int:
        return len(self.cs_by_period)

    def is_strong(self, t: int) -> bool:
        """``t`` is 1-based."""
        return self.cs_by_period[t - 1] > 1

    def first_strong(self) -> int | None:
        for t, cs in enumerate(self.cs_by_period, start=1):
            if cs > 1:
                return t
        return None


def _require_strong(traj: LinkTrajectory) -> int:
    first = traj.first_strong()
    if first is None:
        raise NotApplicableError(f"{'-'.join(traj.pair)} is never Strong")
    return first


def emergence_class(traj: LinkTrajectory) -> Emergence:
    first = _require_strong(traj)
    if first == 1:
        return Emergence.PRESENT_AT_START
    if traj.class_by_period[first - 2] is LinkClass.WEAK:
        return Emergence.FROM_WEAK
    return Emergence.FROM_ZERO


def stability_class(traj: LinkTrajectory) -> Stability:
    first = _require_strong(traj)
    if first == traj.n_periods:
        return Stability.UNCLASSIFIED
    if all(cs > 1 for cs in traj.cs_by_period[first - 1:]):
        return Stability.STAYS_STRONG
    return Stability.FLUCTUATES


def strong_persistence(traj: LinkTrajectory) -> int:
    return sum(1 for cs in traj.cs_by_period if cs > 1)


def pattern_class(traj: LinkTrajectory, t: int, delta: float = DEFAULT_DELTA) -> Pattern:
    """Label a Strong link at period ``t`` by how it got there.

    Strong at t-1: relative change above ``delta`` is Increasing, below
    ``-delta`` Decreasing, otherwise Steady. Not Strong at t-1: Increasing
    when still Strong at t+1, Peak when it drops again; at the final period
    no drop can be observed, so the label is Increasing.
    """
    if not 2 <= t <= traj.n_periods:
        raise IndexError(f"period {t} out of range 2..{traj.n_periods}")
    if not traj.is_strong(t):
        raise NotApplicableError(f"{'-'.join(traj.pair)} is not Strong at period {t}")
    prev, cur = traj.cs_by_period[t - 2], traj.cs_by_period[t - 1]
    if prev > 1:
        change = (cur - prev) / prev
        if change > delta:
            return Pattern.INCREASING
        if change < -delta:
            return Pattern.DECREASING
        return Pattern.STEADY
    if t == traj.n_periods or traj.is_strong(t + 1):
        return Pattern.INCREASING
    return Pattern.PEAK


def trajectories(snapshots: Sequence[NetworkSnapshot]) -> list[LinkTrajectory]:
    """One trajectory per unordered pair, in lexicographic pair order."""
    table = snapshots[0].domain_table
    out = []
    for i, j in table.lexicographic_pairs():
        out.append(LinkTrajectory((table[i].abbrev, table[j].abbrev), tuple(float(s.weights[i, j]) for s in snapshots)))
    return out


@dataclass(frozen=True)
class StrongLinkSummary:
    pair: tuple[str, str]
    first_strong: int
    emergence: Emergence
    stability: Stability
    strong_periods: int
    functional: FunctionalClass


@dataclass(frozen=True)
class DynamicsReport:
    domain_table: DomainTable
    periods: tuple[str, ...]
    trajectories: tuple[LinkTrajectory, ...]
    delta: float = DEFAULT_DELTA

    @classmethod
    def from_snapshots(cls, snapshots: Sequence[NetworkSnapshot], delta: float = DEFAULT_DELTA) -> "DynamicsReport":
        return cls(snapshots[0].domain_table, tuple(s.period for s in snapshots), tuple(trajectories(snapshots)), delta)

    def trajectory(self, a: str, b: str) -> LinkTrajectory:
        key = {a, b}
        for tr in self.trajectories:
            if set(tr.pair) == key:
                return tr
        raise KeyError(f"no pair {a}-{b}")

    def strong_links(self) -> list[StrongLinkSummary]:
        out = []
        for tr in self.trajectories:
            first = tr.first_strong()
            if first is None:
                continue
            a, b = (self.domain_table[x] for x in tr.pair)
            out.append(
                StrongLinkSummary(tr.pair, first, emergence_class(tr), stability_class(tr), strong_persistence(tr), functional_class(a, b))
            )
        return out

    def new_strong_counts(self) -> dict[str, Counter]:
        """Per first-Strong period: counts of emergence, stability and functional labels."""
        counts = {p: Counter() for p in self.periods}
        for s in self.strong_links():
            c = counts[self.periods[s.first_strong - 1]]
            c["total"] += 1
            c[s.emergence.value] += 1
            c[s.stability.value] += 1
            c[s.functional.value] += 1
        return counts

    def pattern_counts(self) -> dict[str, Counter]:
        """Per period from the second on: pattern labels of the links Strong then."""
        out = {}
        for t in range(2, len(self.periods) + 1):
            c = Counter()
            for tr in self.trajectories:
                if tr.is_strong(t):
                    c["total"] += 1
                    c[pattern_class(tr, t, self.delta).value] += 1
                    if tr.is_strong(t - 1):
                        c["carried"] += 1
            out[self.periods[t - 1]] = c
        return out

    def dynamics_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["domain_a", "domain_b", "first_strong_period", "emergence", "stability", "strong_periods", "functional_class"])
        for s in self.strong_links():
            out.writerow([s.pair[0], s.pair[1], self.periods[s.first_strong - 1], s.emergence.value,
                          s.stability.value, s.strong_periods, s.functional.value])
        return buf.getvalue()

    def new_strong_csv(self) -> str:
        counts = self.new_strong_counts()
        rows = [e.value for e in Emergence] + [s.value for s in Stability] + [f.value for f in FunctionalClass] + ["total"]
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["row", *self.periods, "Total"])
        for r in rows:
            vals = [counts[p][r] for p in self.periods]
            out.writerow([r, *vals, sum(vals)])
        return buf.getvalue()

    def pattern_csv(self) -> str:
        counts = self.pattern_counts()
        periods = list(counts)
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["row", *periods, "Total"])
        for r in ["total"] + [p.value for p in Pattern] + ["carried"]:
            vals = [counts[p][r] for p in periods]
            out.writerow([r, *vals, sum(vals)])
        non_peak = [counts[p]["total"] - counts[p]["Peak"] for p in periods]
        totals = [counts[p]["total"] for p in periods]
        out.writerow(["non_peak_fraction", *(f"{n / d:.6f}" if d else "0.000000" for n, d in zip(non_peak, totals)),
                      f"{sum(non_peak) / sum(totals):.6f}" if sum(totals) else "0.000000"])
        carried = [counts[p]["carried"] for p in periods]
        out.writerow(["carryover_fraction", *(f"{n / d:.6f}" if d else "0.000000" for n, d in zip(carried, totals)),
                      f"{sum(carried) / sum(totals):.6f}" if sum(totals) else "0.000000"])
        return buf.getvalue()


def carryover_fraction(report: DynamicsReport | Sequence[LinkTrajectory], t: int) -> float:
    """Share of links Strong at period ``t`` that were also Strong at ``t - 1``."""
    trajs = report.trajectories if isinstance(report, DynamicsReport) else report
    if t < 2:
        raise IndexError("carry-over needs t >= 2")
    strong = [tr for tr in trajs if tr.is_strong(t)]
    if not strong:
        return 0.0
    return sum(1 for tr in strong if tr.is_strong(t - 1)) / len(strong)
