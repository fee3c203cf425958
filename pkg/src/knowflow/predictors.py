"""Weighted link-prediction scores over a network snapshot.

Five local metrics (common neighbours, Jaccard, Adamic-Adar, resource
allocation, preferential attachment) and three global ones (Katz, rooted
PageRank as a random walk with restart, SimRank). Every metric returns a
full symmetric score matrix with a zero diagonal.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, ConvergenceError, InvalidPairError
from .scoring import NetworkSnapshot

log = logging.getLogger(__name__)


class Predictor(str, Enum):
    COMMON_NEIGHBORS = "CommonNeighbors"
    JACCARD = "Jaccard"
    ADAMIC_ADAR = "AdamicAdar"
    RESOURCE_ALLOCATION = "ResourceAllocation"
    PREFERENTIAL_ATTACHMENT = "PreferentialAttachment"
    KATZ = "Katz"
    ROOTED_PAGERANK = "RootedPageRank"
    SIMRANK = "SimRank"

    @property
    def is_local(self) -> bool:
        return self in LOCAL


LOCAL = frozenset(
    {
        Predictor.COMMON_NEIGHBORS,
        Predictor.JACCARD,
        Predictor.ADAMIC_ADAR,
        Predictor.RESOURCE_ALLOCATION,
        Predictor.PREFERENTIAL_ATTACHMENT,
    }
)

_PARAM_NAME = {Predictor.KATZ: "beta", Predictor.ROOTED_PAGERANK: "alpha", Predictor.SIMRANK: "gamma"}

_ALIASES = {
    "cn": Predictor.COMMON_NEIGHBORS,
    "commonneighbors": Predictor.COMMON_NEIGHBORS,
    "jaccard": Predictor.JACCARD,
    "jc": Predictor.JACCARD,
    "aa": Predictor.ADAMIC_ADAR,
    "adamicadar": Predictor.ADAMIC_ADAR,
    "adamic-adar": Predictor.ADAMIC_ADAR,
    "ra": Predictor.RESOURCE_ALLOCATION,
    "resourceallocation": Predictor.RESOURCE_ALLOCATION,
    "pa": Predictor.PREFERENTIAL_ATTACHMENT,
    "preferentialattachment": Predictor.PREFERENTIAL_ATTACHMENT,
    "katz": Predictor.KATZ,
    "rpr": Predictor.ROOTED_PAGERANK,
    "rootedpagerank": Predictor.ROOTED_PAGERANK,
    "simrank": Predictor.SIMRANK,
}


def parse_predictor(name: str) -> Predictor:
    try:
        return _ALIASES[name.strip().lower()]
    except KeyError:
        raise ConfigError(f"unknown predictor {name!r}") from None


@dataclass(frozen=True)
class PredictorConfig:
    kind: Predictor
    beta: float | None = None
    alpha: float | None = None
    gamma: float | None = None
    katz_max_k: int = 50
    tol: float = 1e-10
    max_iter: int = 100_000

    def __post_init__(self):
        object.__setattr__(self, "kind", Predictor(self.kind))
        if self.tol <= 0:
            raise ConfigError("tol must be > 0")
        if self.katz_max_k < 1 or self.max_iter < 1:
            raise ConfigError("katz_max_k and max_iter must be >= 1")
        name = _PARAM_NAME.get(self.kind)
        if name is not None:
            value = getattr(self, name)
            if value is None or not 0 < value < 1:
                raise ConfigError(f"{self.kind.value} needs {name} in (0, 1), got {value}")

    @property
    def param_name(self) -> str | None:
        return _PARAM_NAME.get(self.kind)

    @property
    def param(self) -> float | None:
        name = self.param_name
        return getattr(self, name) if name else None

    @property
    def param_label(self) -> str:
        return f"{self.param_name}={self.param:g}" if self.param_name else ""

    @property
    def label(self) -> str:
        return f"{self.kind.value}({self.param_label})" if self.param_name else self.kind.value

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value}
        if self.param_name:
            d[self.param_name] = self.param
        if self.kind is Predictor.KATZ:
            d["katz_max_k"] = self.katz_max_k
        if self.kind in (Predictor.ROOTED_PAGERANK, Predictor.SIMRANK):
            d["tol"] = self.tol
            d["max_iter"] = self.max_iter
        return d

    @classmethod
    def parse(cls, text: str) -> "PredictorConfig":
        """``katz:0.001``, ``rpr:0.5``, ``simrank:0.9`` or a bare local name."""
        name, _, value = text.partition(":")
        kind = parse_predictor(name)
        pname = _PARAM_NAME.get(kind)
        if pname is None:
            if value:
                raise ConfigError(f"{kind.value} takes no parameter")
            return cls(kind)
        if not value:
            raise ConfigError(f"{kind.value} needs a {pname} value, e.g. {name}:0.1")
        try:
            return cls(kind, **{pname: float(value)})
        except ValueError:
            raise ConfigError(f"bad {pname} value {value!r}") from None


KATZ_BETAS = (0.001, 0.01, 0.1, 0.5)
RPR_ALPHAS = (0.01, 0.1, 0.5, 0.9)
SIMRANK_GAMMAS = (0.01, 0.1, 0.5, 0.9)


def default_grid() -> list[PredictorConfig]:
    """The 17-configuration sweep: 5 local metrics plus 4 values each for Katz, RPR and SimRank."""
    grid = [PredictorConfig(k) for k in Predictor if k in LOCAL]
    grid += [PredictorConfig(Predictor.KATZ, beta=b) for b in KATZ_BETAS]
    grid += [PredictorConfig(Predictor.ROOTED_PAGERANK, alpha=a) for a in RPR_ALPHAS]
    grid += [PredictorConfig(Predictor.SIMRANK, gamma=g) for g in SIMRANK_GAMMAS]
    return grid


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    scores: np.ndarray
    config: PredictorConfig
    period: str
    domain_table: object = None
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        s = np.array(self.scores, dtype=float)
        np.fill_diagonal(s, 0.0)
        s.setflags(write=False)
        object.__setattr__(self, "scores", s)

    def __getitem__(self, ij) -> float:
        return float(self.scores[ij])

    def pair_values(self) -> np.ndarray:
        return self.scores[np.triu_indices(self.scores.shape[0], 1)]

    def to_csv(self) -> str:
        t = self.domain_table
        buf = io.StringIO()
        buf.write(f"# predictor={self.config.kind.value} {self.config.param_label} period={self.period}".rstrip() + "\n")
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["domain_a", "domain_b", "score"])
        for i, j in t.lexicographic_pairs():
            out.writerow([t[i].abbrev, t[j].abbrev, f"{self.scores[i, j]:.6f}"])
        return buf.getvalue()


# -- local metrics -----------------------------------------------------------


def local_similarity(s: NetworkSnapshot, kind: Predictor, u: int, v: int) -> float:
    """Score a single pair by summing over explicit neighbour sets."""
    kind = Predictor(kind)
    if kind not in LOCAL:
        raise ValueError(f"{kind.value} is not a local metric")
    if u == v:
        raise InvalidPairError("similarity is only defined between two different nodes")
    w = s.weights
    gu, gv = s.neighbors(u), s.neighbors(v)
    if kind is Predictor.PREFERENTIAL_ATTACHMENT:
        return math.fsum(w[p, u] for p in gu) * math.fsum(w[q, v] for q in gv)
    common = sorted(gu & gv)
    if not common:
        return 0.0
    if kind is Predictor.COMMON_NEIGHBORS:
        return math.fsum(w[u, z] + w[v, z] for z in common)
    if kind is Predictor.JACCARD:
        denom = math.fsum(w[p, u] for p in gu) + math.fsum(w[q, v] for q in gv)
        return math.fsum(w[u, z] + w[v, z] for z in common) / denom
    strength = {z: math.fsum(w[z, r] for r in s.neighbors(z)) for z in common}
    if kind is Predictor.ADAMIC_ADAR:
        return math.fsum((w[u, z] + w[v, z]) / math.log1p(strength[z]) for z in common)
    return math.fsum((w[u, z] + w[v, z]) / strength[z] for z in common)


def _local_matrix(s: NetworkSnapshot, kind: Predictor) -> np.ndarray:
    A = s.weights
    B = (A > 0).astype(float)
    strength = A.sum(axis=1)
    if kind is Predictor.PREFERENTIAL_ATTACHMENT:
        return np.outer(strength, strength)
    if kind in (Predictor.COMMON_NEIGHBORS, Predictor.JACCARD):
        # sum_z B[u,z] B[v,z] (A[u,z] + A[v,z]) = (A B + B A)[u, v]
        cn = A @ B + B @ A
        if kind is Predictor.COMMON_NEIGHBORS:
            return cn
        denom = strength[:, None] + strength[None, :]
        return np.divide(cn, denom, out=np.zeros_like(cn), where=denom > 0)
    if kind is Predictor.ADAMIC_ADAR:
        inv = np.divide(1.0, np.log1p(strength), out=np.zeros_like(strength), where=strength > 0)
    else:
        inv = np.divide(1.0, strength, out=np.zeros_like(strength), where=strength > 0)
    AD = A * inv[None, :]
    BD = B * inv[None, :]
    return AD @ B + BD @ A


# -- Katz -----------------------------------------------------------------------


def spectral_radius(A: np.ndarray) -> float:
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(A))))


def katz_series(A: np.ndarray, beta: float, max_k: int) -> np.ndarray:
    """Partial sum of beta^k A^k for k = 1..max_k."""
    n = A.shape[0]
    term = np.eye(n)
    total = np.zeros((n, n))
    for _ in range(max_k):
        term = beta * (term @ A)
        total += term
    return total


def katz(s: NetworkSnapshot, beta: float, katz_max_k: int = 50, method: str = "auto", period=None) -> SimilarityMatrix:
    """Katz index.

    ``method="auto"`` uses ``(I - beta A)^-1 - I`` when the spectral radius
    of ``beta A`` is below 1 and the solve is well conditioned, and the
    truncated series otherwise (recording a warning on the result).
    ``"closed"`` and ``"series"`` force one route.
    """
    if not 0 < beta < 1:
        raise ConfigError(f"beta must be in (0, 1), got {beta}")
    A = s.weights
    n = A.shape[0]
    cfg = PredictorConfig(Predictor.KATZ, beta=beta, katz_max_k=katz_max_k)
    notes = []
    rho = beta * spectral_radius(A)
    use_closed = method == "closed" or (method == "auto" and rho < 1)
    if method not in ("auto", "closed", "series"):
        raise ValueError(f"unknown Katz method {method!r}")
    S = None
    if use_closed:
        M = np.eye(n) - beta * A
        if method == "auto" and np.linalg.cond(M) > 1e12:
            notes.append(f"I - beta*A is near-singular (rho(beta*A)={rho:.6g}); used truncated series to k={katz_max_k}")
        else:
            S = np.linalg.solve(M, np.eye(n)) - np.eye(n)
            S = (S + S.T) / 2
    elif method == "auto":
        notes.append(f"Katz series diverges (rho(beta*A)={rho:.6g} >= 1); truncated at k={katz_max_k}")
    if S is None:
        S = katz_series(A, beta, katz_max_k)
        if not np.all(np.isfinite(S)):
            raise ConvergenceError(f"truncated Katz series overflowed (rho(beta*A)={rho:.6g})")
    for note in notes:
        log.info(note)
    np.clip(S, 0.0, None, out=S)
    return SimilarityMatrix(S, cfg, period or s.period, s.domain_table, tuple(notes))


# -- rooted PageRank (random walk with restart) ------------------------------------------


def rooted_pagerank_matrix(s: NetworkSnapshot, alpha: float, tol: float = 1e-10, max_iter: int = 100_000) -> np.ndarray:
    """Row r holds the stationary distribution of the walk rooted at r.

    The walker moves to a weighted-random neighbour with probability
    ``alpha`` and jumps back to the root otherwise; a walker at a node with
    no neighbours always jumps back. All roots are iterated together until
    the largest per-root L1 change drops below ``tol``.
    """
    if not 0 < alpha < 1:
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    A = s.weights
    n = A.shape[0]
    strength = A.sum(axis=1)
    dangling = strength <= 0
    P = np.divide(A, strength[:, None], out=np.zeros_like(A), where=~dangling[:, None])
    Pi = np.eye(n)
    residual = math.inf
    for it in range(1, max_iter + 1):
        stuck = Pi[:, dangling].sum(axis=1)
        nxt = alpha * (Pi @ P)
        nxt[np.diag_indices(n)] += (1 - alpha) + alpha * stuck
        residual = float(np.abs(nxt - Pi).sum(axis=1).max()) if n else 0.0
        Pi = nxt
        if residual < tol:
            return Pi
    raise ConvergenceError(
        f"rooted PageRank did not converge in {max_iter} iterations (residual {residual:.3e})",
        residual=residual,
        iterations=max_iter,
    )


def rooted_pagerank(s: NetworkSnapshot, alpha: float, root: int, tol: float = 1e-10, max_iter: int = 100_000) -> np.ndarray:
    """Stationary probabilities of the walk restarting at ``root``."""
    return rooted_pagerank_matrix(s, alpha, tol, max_iter)[root].copy()


def rooted_pagerank_scores(s: NetworkSnapshot, alpha: float, tol: float = 1e-10, max_iter: int = 100_000, period=None) -> SimilarityMatrix:
    Pi = rooted_pagerank_matrix(s, alpha, tol, max_iter)
    cfg = PredictorConfig(Predictor.ROOTED_PAGERANK, alpha=alpha, tol=tol, max_iter=max_iter)
    return SimilarityMatrix((Pi + Pi.T) / 2, cfg, period or s.period, s.domain_table)


# -- SimRank -------------------------------------------------------------------------


def simrank(s: NetworkSnapshot, gamma: float, tol: float = 1e-10, max_iter: int = 100_000, period=None) -> SimilarityMatrix:
    """SimRank on the unweighted neighbour sets, iterated from the identity."""
    if not 0 < gamma < 1:
        raise ConfigError(f"gamma must be in (0, 1), got {gamma}")
    B = (s.weights > 0).astype(float)
    n = B.shape[0]
    deg = B.sum(axis=1)
    W = np.divide(B, deg[:, None], out=np.zeros_like(B), where=deg[:, None] > 0)
    S = np.eye(n)
    change = math.inf
    for _ in range(max_iter):
        nxt = gamma * (W @ S @ W.T)
        np.fill_diagonal(nxt, 1.0)
        change = float(np.abs(nxt - S).max()) if n else 0.0
        S = nxt
        if change < tol:
            cfg = PredictorConfig(Predictor.SIMRANK, gamma=gamma, tol=tol, max_iter=max_iter)
            return SimilarityMatrix((S + S.T) / 2, cfg, period or s.period, s.domain_table)
    raise ConvergenceError(
        f"SimRank did not converge in {max_iter} iterations (max change {change:.3e})",
        residual=change,
        iterations=max_iter,
    )


def predict_all(s: NetworkSnapshot, cfg: PredictorConfig) -> SimilarityMatrix:
    kind = cfg.kind
    if kind in LOCAL:
        return SimilarityMatrix(_local_matrix(s, kind), cfg, s.period, s.domain_table)
    if kind is Predictor.KATZ:
        out = katz(s, cfg.beta, cfg.katz_max_k)
    elif kind is Predictor.ROOTED_PAGERANK:
        out = rooted_pagerank_scores(s, cfg.alpha, cfg.tol, cfg.max_iter)
    else:
        out = simrank(s, cfg.gamma, cfg.tol, cfg.max_iter)
    return SimilarityMatrix(out.scores, cfg, s.period, s.domain_table, out.warnings)
