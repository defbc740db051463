"""Error metrics between ideal and non-ideal chains."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sampler import ChainAccumulators


@dataclass(frozen=True)
class StateDistribution:
    """Sparse probability law over the ``2**n`` states of ``n`` devices."""

    probs: dict[int, float]
    n: int

    def __post_init__(self):
        total = math.fsum(self.probs.values())
        if self.probs and abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total}, not 1")
        if any(p < 0 for p in self.probs.values()):
            raise ValueError("negative probability")

    @classmethod
    def from_dense(cls, p, n: int) -> "StateDistribution":
        p = np.asarray(p, dtype=float)
        nz = np.flatnonzero(p)
        return cls({int(c): float(p[c]) for c in nz}, n)


@dataclass(frozen=True)
class CorrelationMatrix:
    sigma: np.ndarray

    @property
    def n(self) -> int:
        return self.sigma.shape[0]


@dataclass(frozen=True)
class MaeSummary:
    mean: float
    std: float
    n_reps: int


def project_code(code: int, bits: Sequence[int]) -> int:
    """Re-pack the selected device bits of ``code`` into a compact code."""
    out = 0
    for k, b in enumerate(bits):
        out |= ((code >> b) & 1) << k
    return out


def distribution(acc: ChainAccumulators, bits: Sequence[int] | None = None) -> StateDistribution:
    """Empirical state law; ``bits`` restricts it to a subset of devices."""
    total = acc.recorded_steps
    if bits is None:
        return StateDistribution({c: k / total for c, k in acc.histogram.items()}, acc.n)
    counts: dict[int, int] = {}
    for c, k in acc.histogram.items():
        key = project_code(c, bits)
        counts[key] = counts.get(key, 0) + k
    return StateDistribution({c: k / total for c, k in counts.items()}, len(bits))


def correlation(acc: ChainAccumulators) -> CorrelationMatrix:
    return CorrelationMatrix(acc.corr_sum / acc.recorded_steps)


def mae_emoa(p_ideal: StateDistribution, p_var: StateDistribution, n: int) -> float:
    """Summed absolute probability difference over all states, divided by ``n``."""
    if p_ideal.n != n or p_var.n != n:
        raise ValueError(f"distributions are over {p_ideal.n} and {p_var.n} devices, expected {n}")
    keys = p_ideal.probs.keys() | p_var.probs.keys()
    return math.fsum(abs(p_ideal.probs.get(k, 0.0) - p_var.probs.get(k, 0.0)) for k in keys) / n


def mae_pga(s_ideal: CorrelationMatrix, s_var: CorrelationMatrix) -> float:
    """Mean absolute difference over the distinct off-diagonal pairs."""
    a, b = np.asarray(s_ideal.sigma), np.asarray(s_var.sigma)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"correlation matrices differ in shape: {a.shape} vs {b.shape}")
    n = a.shape[0]
    if n < 2:
        raise ValueError("need at least two devices")
    iu = np.triu_indices(n, 1)
    return float(np.abs(a[iu] - b[iu]).sum() / iu[0].size)


def tv_distance(p: StateDistribution, q: StateDistribution) -> float:
    keys = p.probs.keys() | q.probs.keys()
    return 0.5 * math.fsum(abs(p.probs.get(k, 0.0) - q.probs.get(k, 0.0)) for k in keys)


def aggregate(values: Sequence[float]) -> MaeSummary:
    """Sample mean and (n-1) standard deviation; std is 0 for a single value."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("cannot aggregate an empty list")
    std = float(x.std(ddof=1)) if x.size > 1 else 0.0
    return MaeSummary(float(x.mean()), std, int(x.size))
