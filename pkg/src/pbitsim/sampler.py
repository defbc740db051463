"""Sequential p-bit chain with barrier-gated updates and a kappa schedule.

Random numbers come from two PCG64 streams spawned from the chain seed (one
for output noise, one for update gating), generated in blocks by numpy and
consumed by a compiled sweep kernel.  Results are therefore bit-identical
for a given seed regardless of block size or process.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .device import PBitParams
from .network import NetworkSpec
from .variability import DeviceEnsemble

MAX_DEVICES = 63  # states are packed into int64 codes
_BLOCK_DRAWS = 1 << 20


@dataclass(frozen=True)
class Schedule:
    """Piecewise-constant kappa: a tuple of ``(kappa, steps)`` stages.

    A fixed schedule has a single stage with ``steps=None`` meaning "the whole
    chain".
    """

    stages: tuple[tuple[float, int | None], ...]

    def __post_init__(self):
        stages = tuple((float(k), None if s is None else int(s)) for k, s in self.stages)
        if not stages:
            raise ValueError("schedule needs at least one stage")
        for k, s in stages:
            if not k > 0:
                raise ValueError(f"kappa must be > 0, got {k}")
            if s is not None and s < 1:
                raise ValueError(f"stage step counts must be >= 1, got {s}")
        if any(s is None for _, s in stages) and len(stages) > 1:
            raise ValueError("only a single-stage schedule may leave steps open")
        object.__setattr__(self, "stages", stages)

    @classmethod
    def fixed(cls, kappa: float) -> "Schedule":
        return cls(((kappa, None),))

    @classmethod
    def annealing(cls, stages) -> "Schedule":
        return cls(tuple(stages))

    @property
    def is_fixed(self) -> bool:
        return self.stages[0][1] is None

    @property
    def total_steps(self) -> int | None:
        return None if self.is_fixed else sum(s for _, s in self.stages)

    @property
    def label(self) -> str:
        if self.is_fixed:
            return f"fixed({self.stages[0][0]:g})"
        return "anneal(" + ";".join(f"{k:g}x{s}" for k, s in self.stages) + ")"

    def kappas(self, start: int, stop: int) -> np.ndarray:
        """kappa for sweeps ``start..stop-1``."""
        if self.is_fixed:
            return np.full(stop - start, self.stages[0][0])
        values = np.array([k for k, _ in self.stages])
        bounds = np.cumsum([s for _, s in self.stages])
        idx = np.searchsorted(bounds, np.arange(start, stop), side="right")
        return values[np.minimum(idx, len(values) - 1)]


def default_anneal(total_steps: int = 10**6, kappa_start: float = 0.5, kappa_stop: float = 5.0,
                   n_stages: int = 5) -> Schedule:
    """Linearly spaced kappa stages of equal length (remainder goes to the last)."""
    if total_steps < n_stages:
        raise ValueError("need at least one step per stage")
    base = total_steps // n_stages
    lengths = [base] * n_stages
    lengths[-1] += total_steps - base * n_stages
    kappas = np.linspace(kappa_start, kappa_stop, n_stages)
    return Schedule.annealing(zip(kappas.tolist(), lengths))


@dataclass(frozen=True)
class ChainConfig:
    steps: int = 10**6
    seed: int = 0
    record_burn_in: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not 0 <= self.record_burn_in < self.steps:
            raise ValueError("record_burn_in must lie in [0, steps)")


@dataclass
class ChainAccumulators:
    """Statistics of one chain over the recorded sweeps.

    ``histogram`` maps a state code (bit ``i`` set iff device ``i`` is +1) to
    its visit count.  ``corr_sum`` and ``marginal_sum`` are in units of
    ``m = V_out / (vdd/2)``.  ``update_counts`` counts fired updates per
    device over all sweeps, burn-in included.
    """

    n: int
    histogram: dict[int, int]
    corr_sum: np.ndarray
    marginal_sum: np.ndarray
    recorded_steps: int
    update_counts: np.ndarray = field(repr=False)


@numba.njit(cache=True)
def _init_state(noise, m):
    for i in range(m.size):
        m[i] = 1 if 2.0 * noise[i] - 1.0 >= 0.0 else -1


@numba.njit(cache=True)
def _run_block(j, h, order, beta, alpha, h_shift, v_shift, h_scale, v_scale, p_update,
               kappas, noise, gate, use_gate, m, codes, update_counts):
    n = m.size
    for t in range(kappas.size):
        kappa = kappas[t]
        for k in range(n):
            i = order[k]
            if use_gate:
                if not gate[t, k] < p_update[i]:
                    continue
            acc = h[i]
            for q in range(n):
                acc += j[i, q] * m[q]
            v_in = kappa * acc
            y = v_scale[i] * np.tanh(h_scale[i] * beta * (v_in - h_shift[i])) + v_shift[i]
            m[i] = 1 if y + alpha * (2.0 * noise[t, k] - 1.0) >= 0.0 else -1
            update_counts[i] += 1
        code = 0
        for i in range(n):
            if m[i] > 0:
                code |= np.int64(1) << np.int64(i)
        codes[t] = code


def _stats_from_histogram(n: int, keys: np.ndarray, counts: np.ndarray):
    bits = (keys[:, None] >> np.arange(n, dtype=np.int64)) & 1
    spins = (2 * bits - 1).astype(float)
    weighted = spins * counts[:, None]
    # float matmul is exact here: every partial sum is an integer below 2**53
    corr = np.rint(weighted.T @ spins).astype(np.int64)
    return corr, np.rint(weighted.sum(axis=0)).astype(np.int64)


def run_chain(net: NetworkSpec, ensemble: DeviceEnsemble, params: PBitParams,
              schedule: Schedule | None = None, config: ChainConfig = ChainConfig()) -> ChainAccumulators:
    """Run one chain and return its accumulators.

    Outputs start from one fair draw each.  Every sweep visits devices in
    ``net.update_order``; a device re-samples (with the latest neighbour
    outputs) with its barrier-limited update probability.  The state is
    recorded once per sweep after the burn-in.
    """
    n = net.n
    if ensemble.n != n:
        raise ValueError(f"ensemble has {ensemble.n} devices, network has {n}")
    if n > MAX_DEVICES:
        raise ValueError(f"networks are limited to {MAX_DEVICES} devices")
    if schedule is None:
        schedule = Schedule.fixed(params.kappa)
    if not schedule.is_fixed and schedule.total_steps != config.steps:
        raise ValueError(f"schedule covers {schedule.total_steps} steps, chain has {config.steps}")

    cols = ensemble.arrays()
    order = np.array(net.update_order, dtype=np.int64)
    p_update = cols["p_update"]
    use_gate = bool(np.any(p_update < 1.0))

    noise_seq, gate_seq = np.random.SeedSequence(config.seed).spawn(2)
    noise_rng = np.random.Generator(np.random.PCG64(noise_seq))
    gate_rng = np.random.Generator(np.random.PCG64(gate_seq))

    m = np.empty(n, dtype=np.int64)
    _init_state(noise_rng.random(n), m)
    update_counts = np.zeros(n, dtype=np.int64)
    codes = np.empty(config.steps, dtype=np.int64)
    j = np.ascontiguousarray(net.j)
    empty_gate = np.empty((0, n))
    block = max(1, _BLOCK_DRAWS // max(n, 1))
    for start in range(0, config.steps, block):
        stop = min(start + block, config.steps)
        noise = noise_rng.random((stop - start, n))
        gate = gate_rng.random((stop - start, n)) if use_gate else empty_gate
        _run_block(j, net.h, order, params.beta, params.alpha,
                   cols["h_shift"], cols["v_shift"], cols["h_scale"], cols["v_scale"], p_update,
                   schedule.kappas(start, stop), noise, gate, use_gate, m,
                   codes[start:stop], update_counts)

    keys, counts = np.unique(codes[config.record_burn_in:], return_counts=True)
    counts = counts.astype(np.int64)
    corr_sum, marginal_sum = _stats_from_histogram(n, keys, counts)
    return ChainAccumulators(
        n=n,
        histogram=dict(zip(keys.tolist(), counts.tolist())),
        corr_sum=corr_sum,
        marginal_sum=marginal_sum,
        recorded_steps=config.steps - config.record_burn_in,
        update_counts=update_counts,
    )
