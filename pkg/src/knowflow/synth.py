"""Seeded synthetic citation data: exact and sampled null models, planted links.

The null model spreads a period's citations over domain pairs in
proportion to ``p_i * p_j / p_tot**2``; whatever mass is left over is
treated as intra-domain citations, so it counts towards ``c_total`` only.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import islice, product
from pathlib import Path
from typing import Sequence

import numpy as np

from .domains import (
    Domain,
    DomainTable,
    Operand,
    Operation,
    PeriodWindow,
    bundled_domains,
    default_windows,
    validate_windows,
)
from .errors import SynthSpecError
from .ingest import PeriodAggregates

GENERATOR_ID = "numpy.random.Generator(PCG64)"


class SynthMode(str, Enum):
    EXACT_NULL = "ExactNull"
    MULTINOMIAL_NULL = "MultinomialNull"
    PLANTED_LINKS = "PlantedLinks"


@dataclass(frozen=True)
class PlantedLink:
    pair: tuple[str, str]
    periods: tuple[str, ...]
    target: float


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of one synthetic data set.

    ``patents`` is a (periods x domains) count array or a scalar;
    ``citations`` is one total per period or a scalar. In the sampled
    modes, ``cross_fraction`` scales the cross-domain share of the null
    (1.0 is the pure null, whose expected citation score is 1) and
    ``active_fraction`` gives, per period, the share of pairs that may
    receive background citations at all; a pair's activation threshold is
    drawn once, so with a nondecreasing schedule an active pair stays
    active. ``planted_background=False`` keeps planted pairs out of the
    background, leaving them at zero outside their planted periods.
    """

    seed: int = 42
    domain_table: DomainTable | None = None
    n_domains: int | None = None
    windows: tuple[PeriodWindow, ...] = field(default_factory=default_windows)
    patents: object = 100
    citations: object = 10_000
    mode: SynthMode = SynthMode.MULTINOMIAL_NULL
    planted: tuple[PlantedLink, ...] = ()
    cross_fraction: float = 1.0
    active_fraction: object = 1.0
    planted_background: bool = True

    def resolved_table(self) -> DomainTable:
        if self.domain_table is not None:
            return self.domain_table
        if self.n_domains is None:
            return bundled_domains()
        return generic_table(self.n_domains)


def generic_table(n: int) -> DomainTable:
    operands, operations = list(Operand), list(Operation)
    width = len(str(n))
    return DomainTable(
        tuple(
            Domain(f"D{k + 1:0{width}d}", f"Domain {k + 1}", operands[k % 3], operations[(k // 3) % 3])
            for k in range(n)
        )
    )


def _broadcast_patents(spec, T, n):
    p = np.array(spec.patents, dtype=np.int64)
    if p.ndim == 0:
        p = np.full((T, n), int(p))
    elif p.ndim == 1 and p.shape == (n,):
        p = np.tile(p, (T, 1))
    if p.shape != (T, n):
        raise SynthSpecError(f"patents must be a scalar, length-{n} vector or {T}x{n} array")
    if np.any(p <= 0):
        raise SynthSpecError("patent counts must be positive")
    return p


def _per_period(value, T, name, kind=int):
    arr = np.array(value)
    if arr.ndim == 0:
        return [kind(arr)] * T
    if arr.shape != (T,):
        raise SynthSpecError(f"{name} needs one value per period ({T})")
    return [kind(v) for v in arr]


def largest_remainder(quotas: Sequence[Fraction], total: int) -> list[int]:
    """Round nonnegative quotas summing to ``total`` to integers with the same sum.

    Floors every quota, then hands the missing units to the largest
    fractional parts; ties go to the lower index.
    """
    floors = [q.numerator // q.denominator for q in quotas]
    missing = total - sum(floors)
    order = sorted(range(len(quotas)), key=lambda k: (-(quotas[k] - floors[k]), k))
    for k in order[:missing]:
        floors[k] += 1
    return floors


def generate(spec: SynthSpec) -> PeriodAggregates:
    table = spec.resolved_table()
    windows = validate_windows(spec.windows)
    T, n = len(windows), len(table)
    p = _broadcast_patents(spec, T, n)
    c_tot = _per_period(spec.citations, T, "citations")
    if any(c <= 0 for c in c_tot):
        raise SynthSpecError("citation totals must be positive")
    active = _per_period(spec.active_fraction, T, "active_fraction", float)
    if not 0 < spec.cross_fraction <= 1:
        raise SynthSpecError("cross_fraction must be in (0, 1]")
    mode = SynthMode(spec.mode)
    pairs = list(table.pairs())
    labels = [w.label for w in windows]

    planted = {}  # (t, pair index) -> target
    planted_pairs = set()
    if mode is SynthMode.PLANTED_LINKS:
        pair_pos = {pr: k for k, pr in enumerate(pairs)}
        for link in spec.planted:
            if link.target <= 0:
                raise SynthSpecError(f"planted target for {link.pair} must be > 0")
            try:
                i, j = sorted(table.index(a) for a in link.pair)
            except KeyError as exc:
                raise SynthSpecError(str(exc)) from None
            if i == j:
                raise SynthSpecError(f"planted pair {link.pair} repeats a domain")
            for label in link.periods:
                if label not in labels:
                    raise SynthSpecError(f"planted link {link.pair}: unknown period {label!r}")
                planted[(labels.index(label), pair_pos[(i, j)])] = Fraction(str(link.target))
                planted_pairs.add(pair_pos[(i, j)])
    elif spec.planted:
        raise SynthSpecError("planted links need mode PlantedLinks")

    rng = np.random.Generator(np.random.PCG64(spec.seed))
    threshold = rng.random(len(pairs))

    c = np.zeros((T, n, n), dtype=np.int64)
    c_total = np.array(c_tot, dtype=np.int64)
    p_total = p.sum(axis=1)
    for t in range(T):
        ptot2 = int(p_total[t]) ** 2
        quota = [Fraction(c_tot[t] * int(p[t, i]) * int(p[t, j]), ptot2) for i, j in pairs]
        if mode is SynthMode.EXACT_NULL:
            counts = largest_remainder(quota + [c_tot[t] - sum(quota)], c_tot[t])[:-1]
        else:
            counts = [0] * len(pairs)
            fixed = 0
            for (tt, k), target in planted.items():
                if tt != t:
                    continue
                exact = target * quota[k]
                if exact.denominator != 1:
                    raise SynthSpecError(
                        f"target {float(target)} for {table[pairs[k][0]].abbrev}-{table[pairs[k][1]].abbrev} "
                        f"in {labels[t]} needs {float(exact)} citations, not an integer"
                    )
                counts[k] = int(exact)
                fixed += int(exact)
            if fixed > c_tot[t]:
                raise SynthSpecError(f"planted links need {fixed} citations in {labels[t]}, more than the {c_tot[t]} available")
            probs = np.zeros(len(pairs) + 1)
            for k, (i, j) in enumerate(pairs):
                if (t, k) in planted:
                    continue
                if k in planted_pairs and not spec.planted_background:
                    continue
                if threshold[k] < active[t]:
                    probs[k] = spec.cross_fraction * float(quota[k]) / c_tot[t]
            probs[-1] = max(0.0, 1.0 - probs[:-1].sum())
            draw = rng.multinomial(c_tot[t] - fixed, probs / probs.sum())
            for k in range(len(pairs)):
                counts[k] += int(draw[k])
        for k, (i, j) in enumerate(pairs):
            c[t, i, j] = c[t, j, i] = counts[k]

    metadata = {"generator": GENERATOR_ID, "seed": spec.seed, "mode": mode.value}
    return PeriodAggregates(table, windows, c, p, c_total, p_total, metadata)


# -- bundled fixture --------------------------------------------------------------

# CS trajectories over T1..T8 for the planted pairs (0 = no link that period).
FIXTURE_SHAPES = {
    ("EM", "FLY"): [12, 11.6, 10, 10.4, 11, 12.4, 10, 9.6],
    ("BAT", "FC"): [8, 8.4, 9, 9.6, 9.2, 8, 9.4, 8.8],
    ("IC", "SPP"): [3, 3.2, 2.8, 3, 3.4, 3.6, 3.2, 3],
    ("MIS", "OIS"): [6, 4, 3, 2.2, 1.6, 1.4, 1.2, 1.2],
    ("CAM", "IC"): [6, 6.4, 7, 7.2, 8, 9.6, 11, 12],
    ("CAP", "ET"): [1.6, 0.4, 0.2, 0, 0, 0, 0, 0],
    ("CAM", "SIS"): [2.4, 1.8, 0.6, 0.4, 0.2, 0, 0, 0],
    ("IC", "LED"): [4.8, 4, 3.6, 3, 2.6, 2.2, 1.8, 0.8],
    ("IC", "SIS"): [2, 2.2, 2.4, 1.6, 1.2, 0.8, 0.6, 0.6],
    ("IC", "SCD"): [1.4, 1.6, 1.2, 1.4, 1.8, 1.2, 0.8, 0.6],
    ("EM", "PMM"): [0, 2.4, 2.8, 3, 3.2, 3, 3.4, 3.6],
    ("AIR", "WIND"): [0, 1.6, 2.2, 2.8, 3, 3.2, 3, 3.4],
    ("LED", "PLG"): [0, 2, 2.2, 1.6, 0.6, 0.4, 0.2, 0.2],
    ("CAM", "PLG"): [0, 1.4, 0.4, 0.2, 0, 0, 0, 0],
    ("PMM", "SCD"): [0, 1.8, 2, 1.4, 0.6, 0.4, 0.4, 0.2],
    ("CT", "MRI"): [0, 0, 5.2, 6, 7.4, 9.6, 11.4, 13.4],
    ("PMM", "MRI"): [0, 0, 2.2, 0.8, 1.6, 2, 2.4, 2.2],
    ("LED", "SPP"): [0.2, 0.4, 1.6, 1.8, 1.4, 1.2, 0.8, 0.6],
    ("EM", "MIS"): [0.4, 0.6, 2, 2.4, 1.8, 1.2, 1.4, 0.8],
    ("EM", "WIND"): [0.2, 0.4, 0.6, 1.4, 1.8, 1.2, 1.6, 0.8],
    ("ET", "IL"): [0.2, 0.2, 0.4, 1.2, 1.4, 1.6, 1.8, 2],
    ("CAM", "LED"): [0, 0, 0, 1.6, 1.4, 1.2, 0.6, 0.4],
    ("EM", "ET"): [0.2, 0.4, 0.6, 1.2, 0.8, 0.6, 0.4, 0.4],
    ("IL", "LED"): [0, 0, 0, 0, 2.4, 3, 3.2, 3],
    ("PLG", "3D"): [0.2, 0.2, 0.4, 0.6, 1.4, 1.6, 1.8, 2.4],
    ("BAT", "CAP"): [0.4, 0.4, 0.6, 0.8, 1.2, 1.2, 1.4, 1.4],
    ("MIS", "PMM"): [0.2, 0.4, 0.4, 0.6, 1.2, 1.4, 0.6, 0.4],
    ("FLY", "SCD"): [0, 0, 0, 0, 1.4, 0.2, 0, 0],
    ("CAP", "SCD"): [0.2, 0.2, 0.4, 0.6, 1.2, 1.6, 0.8, 0.6],
    ("CAP", "IC"): [0.4, 0.6, 0.6, 0.8, 1.6, 2, 2.6, 3.2],
    ("ET", "OT"): [0.4, 0.6, 0.6, 0.8, 0.8, 2, 2.2, 2],
    ("IL", "3D"): [0, 0, 0, 0, 0, 1.6, 1.8, 0.4],
    ("EM", "MIL"): [0.2, 0.4, 0.4, 0.6, 0.8, 1.6, 1.6, 1.8],
    ("EC", "SIS"): [0.2, 0.4, 0.4, 0.4, 0.6, 1.4, 1.8, 0.6],
    ("PMM", "WIND"): [0, 0, 0, 0, 0, 1.2, 1.4, 0.6],
    ("BAT", "SPP"): [0.2, 0.2, 0.4, 0.4, 0.6, 1.8, 2.2, 2.6],
    ("SPP", "WIND"): [0.4, 0.4, 0.6, 0.6, 0.8, 0.8, 1.4, 0.8],
    ("CT", "3D"): [0.2, 0.2, 0.4, 0.4, 0.6, 0.6, 1.2, 0.6],
    ("CE", "FLY"): [0.2, 0.4, 0.4, 0.6, 0.6, 0.8, 1.6, 2.4],
    ("MRI", "SCD"): [0.2, 0.2, 0.4, 0.6, 0.6, 0.8, 1.8, 2.2],
    ("CAP", "3D"): [0, 0, 0, 0, 0, 0, 1.4, 1.6],
    ("MIL", "3D"): [0, 0, 0, 0, 0, 0, 0, 1.6],
    ("FLY", "WIND"): [0, 0, 0, 0, 0, 0, 0.4, 1.8],
    ("SCD", "3D"): [0, 0, 0, 0, 0, 0, 0, 1.2],
    ("OT", "WT"): [1, 1, 1, 1, 1, 1, 1, 1],
}

FIXTURE_ACTIVE = (0.05, 0.2, 0.35, 0.5, 0.6, 0.7, 0.75, 0.8)


def shapes_to_planted(shapes: dict, labels: Sequence[str]) -> tuple[PlantedLink, ...]:
    out = []
    for pair, values in shapes.items():
        for label, v in zip(labels, values):
            if v:
                out.append(PlantedLink(pair, (label,), float(v)))
    return tuple(out)


def fixture_spec(seed: int = 42) -> SynthSpec:
    """29 domains, eight 1976-2013 windows, sparse sampled background plus planted trajectories.

    Patent counts are 20*k per domain with k in {1, 2, 3} (drawn from the
    seed) and each period carries 25*K**2 citations, K = sum(k); that puts
    a CS of 1 at 25*k_i*k_j citations, so every planted target that is a
    multiple of 0.04 is hit exactly.
    """
    table = bundled_domains()
    windows = default_windows()
    k = np.random.Generator(np.random.PCG64(seed)).integers(1, 4, size=len(table))
    K = int(k.sum())
    return SynthSpec(
        seed=seed,
        domain_table=table,
        windows=windows,
        patents=20 * k,
        citations=25 * K * K,
        mode=SynthMode.PLANTED_LINKS,
        planted=shapes_to_planted(FIXTURE_SHAPES, [w.label for w in windows]),
        cross_fraction=0.1,
        active_fraction=FIXTURE_ACTIVE,
        planted_background=False,
    )


# -- raw record export ----------------------------------------------------------------


def write_raw_records(agg: PeriodAggregates, directory) -> None:
    """Write domains/patents/citations CSVs and windows.json that re-aggregate to ``agg``.

    Patents are granted at the first year of their window and belong to
    one domain each. Intra-domain citations (``c_total`` minus the cross
    counts) are split over domains in proportion to ``p**2``.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    table, windows = agg.domain_table, agg.windows
    T, n = len(windows), len(table)
    ids = [[[f"{w.label}-{table[i].abbrev}-{m:05d}" for m in range(int(agg.p[t, i]))] for i in range(n)] for t, w in enumerate(windows)]
    if np.any(agg.p.sum(axis=1) != agg.p_total):
        raise SynthSpecError("raw export needs p_total == sum of p (no overlapping domains)")
    every = [[pid for t in range(T) for pid in ids[t][i]] for i in range(n)]

    (out / "domains.csv").write_text(table.to_csv(), encoding="utf-8", newline="\n")
    (out / "windows.json").write_text(json.dumps({"windows": [w.to_dict() for w in windows]}, indent=2) + "\n", encoding="utf-8", newline="\n")
    with open(out / "patents.csv", "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["patent_id", "domain_abbrev", "grant_year"])
        for t, w in enumerate(windows):
            for i in range(n):
                for pid in ids[t][i]:
                    wr.writerow([pid, table[i].abbrev, w.start_year])

    with open(out / "citations.csv", "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["citing_patent_id", "cited_patent_id"])
        for t, w in enumerate(windows):
            cross = 0
            for i, j in table.pairs():
                need = int(agg.c[t, i, j])
                cross += need
                cand = list(islice(product(ids[t][i], every[j]), need))
                cand += islice(product(ids[t][j], every[i]), need - len(cand))
                if len(cand) < need:
                    raise SynthSpecError(f"{w.label}: cannot realise {need} distinct citations between {table[i].abbrev} and {table[j].abbrev}")
                wr.writerows(cand)
            intra_total = int(agg.c_total[t]) - cross
            weights = [Fraction(int(agg.p[t, i]) ** 2) for i in range(n)]
            scale = sum(weights)
            intra = largest_remainder([wt * intra_total / scale for wt in weights], intra_total) if scale else [0] * n
            for i in range(n):
                cand = list(islice(((a, b) for a, b in product(ids[t][i], every[i]) if a != b), intra[i]))
                if len(cand) < intra[i]:
                    raise SynthSpecError(f"{w.label}: cannot realise {intra[i]} intra-domain citations in {table[i].abbrev}")
                wr.writerows(cand)
