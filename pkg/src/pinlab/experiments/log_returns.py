"""Rich disorder segments and the number of returns they force.

For each replica and each n: whether the segment ``J_n`` is rich (average
disorder >= u), the exact Gibbs probability of more than ``nu' log n``
contacts, the single-trajectory bound ``log Z_n >= weight(J_n path)`` and,
when a plan supplies kappa, the lower bound ``(1/2) n^{-alpha+kappa} phi(n)``
on rich instances.  The lim sup over n is replaced by a running maximum over
the grid.  With ``planted=True`` the segment is overwritten by ``u``
(synthetic environments, flagged in the header).
"""
from __future__ import annotations

import math

import numpy as np
from scipy import stats

from .._intpart import log_count
from .._logspace import log_rcumsum, lse_axis0, logsumexp
from ..disorder import GaussianLaw, rich_segment_scan, sample_environment
from ..polymer import (DEFAULT_COUNT_BUDGET, FREE, build_partition_table, contact_marginals,
                       trajectory_log_weight)
from ..renewal import RenewalTrajectory
from ._smoke import smoke_check
from .report import ExperimentReport, binomial_se, loglog_slope, replica_seed, run_tasks

__all__ = ["log_returns_experiment", "segment_trajectory", "count_tail_probabilities",
           "rich_event_probability"]


def segment_trajectory(J, n):
    """The path that jumps from 0 to the start of ``J`` and then visits every site of ``J``."""
    return RenewalTrajectory((0,) + tuple(sorted(J)), n)


def count_tail_probabilities(table, n, thresholds):
    """Free-measure ``P(|tau ∩ [0,n]| > N)`` for each N, from a count-resolved table."""
    lc = table.log_zc_counts[: n + 1]
    m = np.arange(n + 1)
    per_k = lse_axis0(lc + table.kernel.log_tail[n - m][:, None])
    total = logsumexp(per_k)
    tail = np.append(log_rcumsum(per_k), -np.inf)
    out = []
    for N in thresholds:
        # count = k + 1 on [0, n], so count > N  <=>  k >= N
        out.append(1.0 if N <= 0 else min(float(np.exp(tail[min(N, len(per_k))] - total)), 1.0))
    return out, float(total)


def rich_event_probability(law, size, u):
    """Exact ``P(mean of size i.i.d. draws >= u)`` for the Gaussian law; NaN otherwise."""
    if isinstance(law, GaussianLaw):
        return float(stats.norm.sf(u * math.sqrt(size)))
    return math.nan


def _resolve(plan, u, gamma):
    if plan is not None:
        if not plan.feasible:
            raise ValueError(f"plan infeasible: {plan.infeasibility_reason}")
        return plan.u_beta, plan.gamma, plan.kappa
    if u is None or gamma is None:
        raise ValueError("give either a plan or both u and gamma")
    return float(u), float(gamma), None


def _task(args):
    (law, kernel, params, n_values, nus, u, gamma, kappa, planted, master, k,
     count_budget) = args
    seed = replica_seed(master, "log-returns", k)
    n_max = n_values[-1]
    base = sample_environment(law, (0, n_max), seed)
    r = kernel.r
    thresholds = {n: [log_count(v, n) for v in nus] for n in n_values}
    k_max = max(1, max(max(t) for t in thresholds.values()))
    shared = None
    if not planted:
        shared = build_partition_table(base, params, kernel, n_max, count_axis=k_max,
                                       count_budget=count_budget)
    out = []
    for n in n_values:
        scan = rich_segment_scan(base, n, r, gamma, u)
        J = scan.indices
        env = base
        table = shared
        if planted:
            env = base.with_planted(J, u)
            table = build_partition_table(env, params, kernel, n, count_axis=k_max,
                                          count_budget=count_budget)
            scan = rich_segment_scan(env, n, r, gamma, u)
        probs, log_z = count_tail_probabilities(table, n, thresholds[n])
        rec = {"hit": scan.hit, "average": scan.average, "size": len(J), "log_Z": log_z,
               "probs": probs}
        if min(J) >= r:
            tw = trajectory_log_weight(segment_trajectory(J, n), env, params, kernel, FREE)
            rec["segment_weight"] = tw
            rec["segment_bound"] = bool(log_z >= tw)
        else:
            rec["segment_weight"] = math.nan
            rec["segment_bound"] = True
        if kappa is not None and scan.hit:
            w0 = params.beta * env[0] + params.h
            rhs = math.log(0.5) + (-kernel.alpha + kappa) * math.log(n) + math.log(kernel.c)
            rec["kappa_bound"] = bool(log_z - w0 >= rhs)
        else:
            rec["kappa_bound"] = None
        if planted:
            sub = build_partition_table(env, params, kernel, n)
            marg = contact_marginals(sub, FREE)
            rec["expected_contacts"] = float(marg[1:].sum())
            rec["expected_contacts_in_J"] = float(marg[list(J)].sum())
        out.append(rec)
    return seed, out


def log_returns_experiment(kernel, params, n_values, replicas=1, master_seed=0, law=None,
                           plan=None, u=None, gamma=None, nu_values=(0.5, 1.0, 2.0),
                           planted=False, workers=1, count_budget=DEFAULT_COUNT_BUDGET):
    law = law or GaussianLaw()
    u, gamma, kappa = _resolve(plan, u, gamma)
    n_values = sorted(int(n) for n in n_values)
    nus = sorted({float(v) for v in nu_values} | ({plan.nu} if plan is not None else set()))
    smoke = smoke_check(law, kernel, params)
    args = [(law, kernel, params, n_values, nus, u, gamma, kappa, planted, master_seed, k,
             count_budget) for k in range(replicas)]
    res = run_tasks(_task, args, workers)

    rows, reps = [], []
    running = np.zeros((replicas, len(nus)))
    seg_ok = seg_total = kap_ok = kap_total = 0
    freq = []
    for i, n in enumerate(n_values):
        recs = [r[1][i] for r in res]
        hits = np.array([rec["hit"] for rec in recs])
        P = np.array([rec["probs"] for rec in recs])  # (replica, nu)
        running = np.maximum(running, P)
        f = float(hits.mean())
        freq.append(f)
        size = recs[0]["size"]
        for rec in recs:
            seg_total += 1
            seg_ok += rec["segment_bound"]
            if rec["kappa_bound"] is not None:
                kap_total += 1
                kap_ok += rec["kappa_bound"]
        for j, v in enumerate(nus):
            row = {"n": n, "nu": v, "threshold": log_count(v, n), "segment_size": size,
                   "rich_frequency": f, "rich_se": binomial_se(f, replicas),
                   "rich_exact": rich_event_probability(law, size, u),
                   "mean_probability": float(P[:, j].mean()),
                   "conditional_probability": float(P[hits, j].mean()) if hits.any() else math.nan,
                   "running_max_mean": float(running[:, j].mean())}
            if planted:
                row["expected_contacts"] = float(np.mean([rec["expected_contacts"] for rec in recs]))
                row["expected_contacts_in_J"] = float(np.mean([rec["expected_contacts_in_J"]
                                                               for rec in recs]))
            rows.append(row)
            for k, (seed, _) in enumerate(res):
                rec = recs[k]
                rep = {"n": n, "nu": v, "replica": k, "seed": seed, "rich": rec["hit"],
                       "segment_average": rec["average"], "log_Z": rec["log_Z"],
                       "segment_weight": rec["segment_weight"],
                       "segment_bound": rec["segment_bound"],
                       "kappa_bound": rec["kappa_bound"], "probability": float(P[k, j]),
                       "running_max": float(running[k, j])}
                if planted:
                    rep["expected_contacts"] = rec["expected_contacts"]
                    rep["expected_contacts_in_J"] = rec["expected_contacts_in_J"]
                reps.append(rep)
    header = {"command": "log-returns", "kernel": kernel.descriptor(), "law": law.descriptor(),
              "beta": params.beta, "h": params.h, "u": u, "gamma": gamma, "kappa": kappa,
              "plan": plan.as_dict() if plan is not None else None, "n_values": n_values,
              "nu_values": nus, "replicas": replicas, "master_seed": master_seed,
              "synthetic_planted_segment": bool(planted)}
    footer = {"smoke_check_max_rel_err": smoke,
              "segment_bound_fraction": seg_ok / seg_total if seg_total else math.nan,
              "kappa_bound_fraction": kap_ok / kap_total if kap_total else math.nan,
              "kappa_bound_checked": kap_total,
              "rich_frequency_slope": loglog_slope(n_values, freq) if not planted else math.nan}
    return ExperimentReport("log-returns", header, rows, footer, reps)
