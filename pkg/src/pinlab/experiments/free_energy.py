"""Quenched free-energy estimates and the homogeneous (annealed) root."""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from ..disorder import Environment, GaussianLaw, sample_environment
from ..errors import ConvergenceError
from ..polymer import PolymerParams, build_partition_table, free_log_partitions
from ._smoke import smoke_check
from .report import ExperimentReport, replica_seed, run_tasks

__all__ = ["homogeneous_free_energy", "annealed_free_energy", "free_energy_estimate"]

_EXPLICIT_TERMS = 1 << 22


def _laplace_sum(kernel, f):
    """``sum_{n >= r} K(n) exp(-f n)`` for ``f > 0``."""
    s = 1.0 + kernel.alpha
    r = kernel.r
    stop = r + int(min(math.ceil(60.0 / f), _EXPLICIT_TERMS))
    total = 0.0
    for a in range(r, stop + 1, 1 << 20):
        n = np.arange(a, min(a + (1 << 20), stop + 1), dtype=float)
        total += float(np.sum(np.exp(-s * np.log(n) - f * n)))
    if 60.0 / f > _EXPLICIT_TERMS:
        # midpoint rule for the remainder; its error is far below the summand size
        rem, _ = integrate.quad(lambda x: x ** (-s) * math.exp(-f * x), stop + 0.5, np.inf,
                                epsabs=0.0, epsrel=1e-12, limit=200)
        total += rem
    return kernel.c * total


def homogeneous_free_energy(kernel, h_eff, tol=1e-14, max_iter=200):
    """Root ``f`` of ``sum_n K(n) e^{-f n} = e^{-h_eff}``; 0 when ``h_eff <= 0``."""
    if not math.isfinite(h_eff):
        raise ValueError("h_eff must be finite")
    if h_eff <= 0:
        return 0.0
    target = math.exp(-h_eff)
    lo, hi = 0.0, float(h_eff)
    # at f = h_eff the sum is <= e^{-h_eff} because every gap is >= 1
    if _laplace_sum(kernel, hi) > target:
        raise ConvergenceError("root bracket failure in homogeneous_free_energy")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if _laplace_sum(kernel, mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * hi:
            return 0.5 * (lo + hi)
    raise ConvergenceError("bisection did not converge in homogeneous_free_energy")


def annealed_free_energy(law, kernel, params):
    return homogeneous_free_energy(kernel, params.h + law.log_mgf(params.beta))


def annealed_log_partitions(law, kernel, params, n_values):
    """``log E Z_n`` on the grid: the homogeneous model at ``h + log M(beta)``."""
    n_max = max(n_values)
    flat = Environment.from_values(np.zeros(n_max + 1), law)
    ann = PolymerParams(0.0, params.h + law.log_mgf(params.beta))
    return free_log_partitions(build_partition_table(flat, ann, kernel, n_max), n_values)


def _task(args):
    law, kernel, params, n_values, master, k = args
    seed = replica_seed(master, "free-energy", k)
    env = sample_environment(law, (0, n_values[-1]), seed)
    table = build_partition_table(env, params, kernel, n_values[-1])
    return seed, free_log_partitions(table, n_values)


def free_energy_estimate(kernel, params, n_values, replicas=1, master_seed=0,
                         law=None, workers=1):
    """Disorder-averaged ``(1/n) log Z_n`` and the difference quotient
    ``(log Z_{n_i} - log Z_{n_{i-1}}) / (n_i - n_{i-1})``, which cancels the
    O(1) boundary term."""
    law = law or GaussianLaw()
    n_values = sorted(int(n) for n in n_values)
    if len(n_values) < 1 or n_values[0] < 1:
        raise ValueError("n_values must be positive")
    smoke = smoke_check(law, kernel, params)
    res = run_tasks(_task, [(law, kernel, params, n_values, master_seed, k)
                            for k in range(replicas)], workers)
    logz = np.array([r[1] for r in res])  # (replica, n)
    f_a = annealed_free_energy(law, kernel, params)
    log_ez = annealed_log_partitions(law, kernel, params, n_values)
    rows, reps = [], []
    ok = True
    for i, n in enumerate(n_values):
        raw = logz[:, i] / n
        row = {"n": n, "raw_mean": float(raw.mean()),
               "raw_se": float(raw.std(ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0}
        if i > 0:
            q = (logz[:, i] - logz[:, i - 1]) / (n - n_values[i - 1])
            row["estimate"] = float(q.mean())
            row["se"] = float(q.std(ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0
        else:
            q = raw
            row["estimate"] = row["raw_mean"]
            row["se"] = row["raw_se"]
        # Jensen at finite n: E log Z_n <= log E Z_n
        row["annealed_n"] = float(log_ez[i] / n)
        row["annealed"] = f_a
        row["below_annealed"] = bool(row["raw_mean"] <= row["annealed_n"] + 3.0 * row["raw_se"]
                                     + 1e-12 * abs(row["annealed_n"]))
        ok &= row["below_annealed"]
        rows.append(row)
        for k, (seed, _) in enumerate(res):
            reps.append({"n": n, "replica": k, "seed": seed, "log_Z": float(logz[k, i]),
                         "estimate": float(q[k])})
    header = {"command": "free-energy", "kernel": kernel.descriptor(), "law": law.descriptor(),
              "beta": params.beta, "h": params.h, "n_values": n_values, "replicas": replicas,
              "master_seed": master_seed}
    footer = {"smoke_check_max_rel_err": smoke, "annealed": f_a,
              "final_estimate": rows[-1]["estimate"], "annealing_bound_ok": bool(ok)}
    return ExperimentReport("free-energy", header, rows, footer, reps)
