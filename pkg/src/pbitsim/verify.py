"""Build-time oracles: brute-force ground states, stationary law, sampling law, metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import metrics
from .device import PBitParams, plus_probability, threshold
from .network import (
    NetworkSpec, and_gate, and_rows, boltzmann, full_adder, full_adder_rows, ground_states, projections,
)
from .sampler import ChainConfig, run_chain
from .variability import ideal_ensemble


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def truth_table_violations(net: NetworkSpec, io: tuple[int, ...], rows: set) -> list[str]:
    """Differences between the projected ground-state set and the truth table."""
    ground = [g.state for g in ground_states(net)]
    got = projections(ground, io)
    problems = [f"ground state {s} projects to invalid row {tuple(s[d] for d in io)}"
                for s in ground if tuple(s[d] for d in io) not in rows]
    problems += [f"valid row {r} has no ground state" for r in sorted(rows - got)]
    if len(ground) != len(rows):
        problems.append(f"{len(ground)} ground states for {len(rows)} truth-table rows")
    return problems


def check_truth_table(net: NetworkSpec, io, rows, name: str) -> CheckResult:
    problems = truth_table_violations(net, tuple(io), rows)
    return CheckResult(name, not problems, "; ".join(problems[:5]) if problems else f"{len(rows)} rows exact")


def check_boltzmann(net: NetworkSpec, kappa: float = 0.8, steps: int = 10**6, seed: int = 1,
                    tol: float = 0.01) -> CheckResult:
    params = PBitParams(kappa=kappa)
    acc = run_chain(net, ideal_ensemble(net.n), params, config=ChainConfig(steps, seed))
    exact = metrics.StateDistribution.from_dense(boltzmann(net, params.beta * kappa), net.n)
    tv = metrics.tv_distance(metrics.distribution(acc), exact)
    return CheckResult(f"boltzmann[{net.name}]", tv < tol, f"TV={tv:.5f} (tol {tol})")


def check_sampling_law(ys=(-0.9, -0.5, 0.0, 0.5, 0.9), alpha: float = 1.0, draws: int = 10**6,
                       seed: int = 2) -> CheckResult:
    rng = np.random.default_rng(seed)
    tol = 4 / math.sqrt(draws)
    worst = 0.0
    for y in ys:
        u = 2.0 * rng.random(draws) - 1.0
        freq = float(np.mean(threshold(y, u, alpha) > 0))
        worst = max(worst, abs(freq - float(plus_probability(y, alpha))))
    return CheckResult("sampling_law", worst < tol, f"max deviation {worst:.5f} (tol {tol:.4f})")


def check_metrics(seed: int = 3, trials: int = 200) -> CheckResult:
    rng = np.random.default_rng(seed)
    failures = []
    for _ in range(trials):
        n = int(rng.integers(2, 6))
        ps = [metrics.StateDistribution.from_dense(rng.dirichlet(np.ones(2**n)), n) for _ in range(3)]
        d = lambda a, b: metrics.mae_emoa(a, b, n)  # noqa: E731
        if d(ps[0], ps[0]) != 0 or abs(d(ps[0], ps[1]) - d(ps[1], ps[0])) > 1e-15:
            failures.append("emoa identity/symmetry")
        if d(ps[0], ps[2]) > d(ps[0], ps[1]) + d(ps[1], ps[2]) + 1e-12 or d(ps[0], ps[1]) > 2 / n + 1e-12:
            failures.append("emoa triangle/bound")
        cs = [metrics.CorrelationMatrix(_random_corr(rng, n)) for _ in range(3)]
        e = metrics.mae_pga
        if e(cs[0], cs[0]) != 0 or e(cs[0], cs[1]) != e(cs[1], cs[0]):
            failures.append("pga identity/symmetry")
        if e(cs[0], cs[2]) > e(cs[0], cs[1]) + e(cs[1], cs[2]) + 1e-12 or e(cs[0], cs[1]) > 2:
            failures.append("pga triangle/bound")
    return CheckResult("metric_properties", not failures, ", ".join(sorted(set(failures))) or f"{trials} triples ok")


def _random_corr(rng, n):
    a = rng.uniform(-1, 1, (n, n))
    a = (a + a.T) / 2
    np.fill_diagonal(a, 1.0)
    return a


def verify(full_adder_net: NetworkSpec | None = None) -> list[CheckResult]:
    fa = full_adder() if full_adder_net is None else full_adder_net
    return [
        check_truth_table(and_gate(), (0, 1, 2), and_rows(), "truth_table[and_gate]"),
        check_truth_table(fa, (0, 1, 2, 3, 4), full_adder_rows(), "truth_table[full_adder]"),
        check_boltzmann(and_gate()),
        check_sampling_law(),
        check_metrics(),
    ]
