"""Disorder-frequency scans of last-contact tightness (free and constrained ends).

For every replica the Gibbs probabilities are exact; only the disorder
average is Monte Carlo.  A single partition table to ``max(n)`` serves every
``n`` on the grid because ``Z^c_m`` does not depend on the horizon.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._logspace import logsumexp, log_rcumsum
from ..disorder import GaussianLaw, annealed_critical_point, sample_environment
from ..polymer import PolymerParams, build_partition_table, straddle_log_matrix, DEFAULT_BUDGET
from ..errors import BudgetExceeded
from ._smoke import smoke_check
from .report import ExperimentReport, binomial_se, replica_seed, run_tasks

__all__ = ["TightnessGrid", "default_delocalized_h", "tightness_scan",
           "constrained_tightness_scan", "last_contact_tail", "escape_probabilities"]


def default_delocalized_h(law, beta, offset=1.0):
    """``h_c^ann(beta) - offset``; below the quenched critical point."""
    return annealed_critical_point(law, beta) - offset


@dataclass
class TightnessGrid:
    kernel: object
    params: PolymerParams
    n_values: tuple
    N_values: tuple
    epsilon: float = 0.1
    replicas: int = 200
    master_seed: int = 0
    law: object = field(default_factory=GaussianLaw)
    M_values: tuple = ()
    workers: int = 1
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        self.n_values = tuple(sorted(int(n) for n in self.n_values))
        self.N_values = tuple(sorted(int(N) for N in self.N_values))
        self.M_values = tuple(sorted(int(M) for M in self.M_values))
        if not self.n_values or self.n_values[0] < 1:
            raise ValueError("n_values must be positive")
        if any(N < 0 for N in self.N_values) or any(M < 0 for M in self.M_values):
            raise ValueError("N and M values must be nonnegative")
        if not 0 <= self.epsilon < 1:
            raise ValueError("epsilon must lie in [0, 1)")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.n_values[-1] > self.kernel.horizon:
            raise ValueError(f"n={self.n_values[-1]} exceeds kernel horizon {self.kernel.horizon}")
        if self.budget is not None and self.n_values[-1] ** 2 > self.budget:
            raise BudgetExceeded(f"DP work {self.n_values[-1] ** 2} exceeds budget {self.budget}")

    def header(self, command):
        return {
            "command": command,
            "kernel": self.kernel.descriptor(),
            "law": self.law.descriptor(),
            "beta": self.params.beta,
            "h": self.params.h,
            "h_c_ann": annealed_critical_point(self.law, self.params.beta),
            "n_values": list(self.n_values),
            "N_values": list(self.N_values),
            "M_values": list(self.M_values),
            "epsilon": self.epsilon,
            "replicas": self.replicas,
            "master_seed": self.master_seed,
            "seed_rule": "blake2b-64(master:command:replica)",
        }


def last_contact_tail(table, n, N_values):
    """``P(tau_last > N)`` under the free measure on ``[0, n]`` for each N."""
    m = np.arange(n + 1)
    lt = table.log_zc[: n + 1] + table.kernel.log_tail[n - m]
    total = logsumexp(lt)
    rc = np.append(log_rcumsum(lt), -np.inf)  # rc[k] = log sum_{m >= k}
    out = np.empty(len(N_values))
    for i, N in enumerate(N_values):
        out[i] = 0.0 if N >= n else min(float(np.exp(rc[N + 1] - total)), 1.0)
    return out


def escape_probabilities(table, N_values, M_values):
    """``P(hat > N or check < n - M)`` under the constrained measure, shape (|N|, |M|).

    Summed directly over the escape region of the straddle law rather than as
    one minus the complement.
    """
    n = table.n
    js, ls, logP, p_mid = straddle_log_matrix(table)
    P = np.exp(logP) if len(js) and len(ls) else np.zeros((len(js), len(ls)))
    out = np.zeros((len(N_values), len(M_values)))
    for a, N in enumerate(N_values):
        far = js > N
        near = ~far
        row_far = P[far].sum()
        for b, M in enumerate(M_values):
            low = ls < n - M
            val = row_far + P[np.ix_(near, low)].sum()
            if n % 2 == 0:
                mid = n // 2
                if mid > N or mid < n - M:
                    val += p_mid
            out[a, b] = min(val, 1.0)
    return out


def _free_task(args):
    grid, k = args
    seed = replica_seed(grid.master_seed, "tightness", k)
    n_max = grid.n_values[-1]
    env = sample_environment(grid.law, (0, n_max), seed)
    table = build_partition_table(env, grid.params, grid.kernel, n_max, budget=grid.budget)
    return seed, [last_contact_tail(table, n, grid.N_values) for n in grid.n_values]


def _constrained_task(args):
    grid, k = args
    seed = replica_seed(grid.master_seed, "tightness-constrained", k)
    n_max = grid.n_values[-1]
    env = sample_environment(grid.law, (0, n_max), seed)
    table = build_partition_table(env, grid.params, grid.kernel, n_max, budget=grid.budget)
    out = []
    for n in grid.n_values:
        sub = table if n == n_max else build_partition_table(
            env, grid.params, grid.kernel, n, budget=grid.budget)
        out.append(escape_probabilities(sub, grid.N_values, grid.M_values))
    return seed, out


def _monotone_in_N(probs):
    return bool(np.all(np.diff(probs, axis=-1) <= 1e-15)) if probs.shape[-1] > 1 else True


def tightness_scan(grid: TightnessGrid) -> ExperimentReport:
    """Frequency over disorder replicas of ``{P_n(tau_last > N) > epsilon}``."""
    smoke = smoke_check(grid.law, grid.kernel, grid.params)
    res = run_tasks(_free_task, [(grid, k) for k in range(grid.replicas)], grid.workers)
    probs = np.array([r[1] for r in res])  # (replica, n, N)
    hits = probs > grid.epsilon
    rows, reps = [], []
    for i, n in enumerate(grid.n_values):
        for j, N in enumerate(grid.N_values):
            f = float(hits[:, i, j].mean())
            rows.append({"n": n, "N": N, "frequency": f,
                         "se": binomial_se(f, grid.replicas),
                         "mean_probability": float(probs[:, i, j].mean())})
            for k, (seed, _) in enumerate(res):
                reps.append({"n": n, "N": N, "replica": k, "seed": seed,
                             "probability": float(probs[k, i, j]),
                             "exceeds": bool(hits[k, i, j])})
    footer = {
        "smoke_check_max_rel_err": smoke,
        "monotone_in_N_per_replica": _monotone_in_N(probs),
    }
    return ExperimentReport("tightness", grid.header("tightness"), rows, footer, reps)


def constrained_tightness_scan(grid: TightnessGrid) -> ExperimentReport:
    """Frequency of ``{P^c_n(hat > N or check < n - M) > epsilon}``."""
    if not grid.M_values:
        raise ValueError("constrained scan needs M_values")
    smoke = smoke_check(grid.law, grid.kernel, grid.params)
    res = run_tasks(_constrained_task, [(grid, k) for k in range(grid.replicas)], grid.workers)
    probs = np.array([r[1] for r in res])  # (replica, n, N, M)
    hits = probs > grid.epsilon
    rows, reps = [], []
    for i, n in enumerate(grid.n_values):
        for a, N in enumerate(grid.N_values):
            for b, M in enumerate(grid.M_values):
                f = float(hits[:, i, a, b].mean())
                rows.append({"n": n, "N": N, "M": M, "frequency": f,
                             "se": binomial_se(f, grid.replicas),
                             "mean_probability": float(probs[:, i, a, b].mean())})
                for k, (seed, _) in enumerate(res):
                    reps.append({"n": n, "N": N, "M": M, "replica": k, "seed": seed,
                                 "probability": float(probs[k, i, a, b]),
                                 "exceeds": bool(hits[k, i, a, b])})
    footer = {
        "smoke_check_max_rel_err": smoke,
        "monotone_in_N_per_replica": _monotone_in_N(np.swapaxes(probs, -1, -2)),
        "monotone_in_M_per_replica": _monotone_in_N(probs),
    }
    return ExperimentReport("tightness-constrained", grid.header("tightness-constrained"),
                            rows, footer, reps)
