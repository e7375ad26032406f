"""Series of constrained partition functions: event sums, plateau, reversal symmetry."""
from __future__ import annotations

import math

import numpy as np
from scipy import stats

from .._logspace import log_cumsum, lse_axis0
from ..disorder import GaussianLaw, annealed_critical_point, sample_environment
from ..polymer import (DEFAULT_COUNT_BUDGET, SeriesResult, build_partition_table,
                       constrained_series, reversed_series)
from ._smoke import smoke_check
from .report import ExperimentReport, replica_seed, run_tasks

__all__ = ["series_event_partials", "series_event_sum", "series_event_report",
           "geometric_envelope", "series_plateau", "series_symmetry"]


def series_event_partials(env, params, kernel, N_values, n_max, count_budget=DEFAULT_COUNT_BUDGET):
    """``{N: SeriesResult}`` for ``sum_{n <= n_max} Z^c_n(|tau ∩ [0,n]| > N)``."""
    N_values = [int(N) for N in N_values]
    if any(N < 0 for N in N_values):
        raise ValueError("N must be nonnegative")
    empty = np.full(n_max + 1, -np.inf)
    live = [N for N in N_values if 1 <= N <= n_max]
    out = {}
    lc = None
    if live:
        table = build_partition_table(env, params, kernel, n_max, count_axis=max(live),
                                      count_budget=count_budget)
        lc = table.log_zc_counts
    base = None
    for N in N_values:
        if N > n_max:
            terms = empty  # at most n_max + 1 contacts fit in [0, n_max]
        elif N == 0:
            if base is None:
                base = build_partition_table(env, params, kernel, n_max).log_zc
            terms = np.asarray(base)
        else:
            # count on [0, n] exceeds N  <=>  bin k = count - 1 >= N
            terms = lse_axis0(lc[:, N:].T)
        out[N] = SeriesResult(terms, log_cumsum(terms))
    return out


def series_event_sum(env, params, kernel, N, n_max, count_budget=DEFAULT_COUNT_BUDGET):
    return series_event_partials(env, params, kernel, [N], n_max, count_budget)[int(N)]


def geometric_envelope(N, rate):
    """``sum_{k >= N} e^{-k * rate}``; infinite when ``rate <= 0``."""
    if rate <= 0:
        return math.inf
    return math.exp(-N * rate) / -math.expm1(-rate)


def series_event_report(env, params, kernel, N_values, n_max, h_c=None, epsilon=0.0,
                        count_budget=DEFAULT_COUNT_BUDGET):
    """Partial sums at ``n_max`` per N next to the envelope ``sum_{k>=N} e^{-k(h_c-h-eps)}``.

    ``h_c`` defaults to the annealed critical point.  Nothing is asserted
    about the almost-sure threshold beyond which the envelope applies.
    """
    if h_c is None:
        h_c = annealed_critical_point(env.law, params.beta)
    N_values = sorted(int(N) for N in N_values)
    res = series_event_partials(env, params, kernel, N_values, n_max, count_budget)
    rate = h_c - params.h - epsilon
    rows = []
    for N in N_values:
        lp = float(res[N].log_partial[-1])
        rows.append({"N": N, "log_partial_sum": lp,
                     "partial_sum": math.exp(lp) if lp > -np.inf else 0.0,
                     "envelope": geometric_envelope(N, rate)})
    sums = [r["partial_sum"] for r in rows]
    footer = {"nonincreasing_in_N": bool(all(b <= a for a, b in zip(sums, sums[1:]))),
              "envelope_rate": rate}
    header = {"command": "series", "kernel": kernel.descriptor(), "law": env.law.descriptor(),
              "seed": env.seed, "beta": params.beta, "h": params.h, "h_c": h_c,
              "epsilon": epsilon, "n_max": n_max, "N_values": N_values}
    return ExperimentReport("series", header, rows, footer)


def _plateau_task(args):
    law, kernel, params, n_small, n_large, master, k = args
    seed = replica_seed(master, "series-plateau", k)
    env = sample_environment(law, (0, n_large), seed)
    s = constrained_series(env, params, kernel, n_large)
    return seed, float(s.log_partial[n_small]), float(s.log_partial[n_large])


def series_plateau(kernel, params, n_small=2000, n_large=4000, replicas=100, master_seed=0,
                   law=None, tol=0.01, required=0.95, workers=1):
    """Relative growth of the partial sums between ``n_small`` and ``n_large``."""
    law = law or GaussianLaw()
    smoke = smoke_check(law, kernel, params)
    res = run_tasks(_plateau_task, [(law, kernel, params, n_small, n_large, master_seed, k)
                                    for k in range(replicas)], workers)
    reps = []
    for k, (seed, a, b) in enumerate(res):
        inc = math.expm1(b - a)
        reps.append({"replica": k, "seed": seed, "log_partial_small": a,
                     "log_partial_large": b, "relative_increment": inc, "within": inc < tol})
    frac = sum(r["within"] for r in reps) / replicas
    incs = np.array([r["relative_increment"] for r in reps])
    rows = [{"n_small": n_small, "n_large": n_large, "fraction_within": frac,
             "median_increment": float(np.median(incs)), "max_increment": float(incs.max())}]
    header = {"command": "series-plateau", "kernel": kernel.descriptor(),
              "law": law.descriptor(), "beta": params.beta, "h": params.h,
              "replicas": replicas, "master_seed": master_seed, "tol": tol}
    footer = {"smoke_check_max_rel_err": smoke, "fraction_within": frac,
              "pass": frac >= required}
    return ExperimentReport("series-plateau", header, rows, footer, reps)


def _symmetry_task(args):
    law, kernel, params, depth, master, k = args
    s_f = replica_seed(master, "series-forward", k)
    s_r = replica_seed(master, "series-reversed", k)
    fwd = constrained_series(sample_environment(law, (0, depth), s_f), params, kernel, depth)
    # one-site window at the anchor; reversed_series grows it leftward on demand
    env_r = sample_environment(law, (depth, depth), s_r)
    rev = reversed_series(env_r, params, kernel, depth, depth)
    return s_f, s_r, float(fwd.log_partial[-1]), float(rev.log_partial[-1])


def series_symmetry(kernel, params, depth=1000, replicas=500, master_seed=0, law=None,
                    alpha_level=0.01, workers=1):
    """Two-sample KS test between forward and reversed partial sums at fixed depth,
    on independent environments."""
    law = law or GaussianLaw()
    res = run_tasks(_symmetry_task, [(law, kernel, params, depth, master_seed, k)
                                     for k in range(replicas)], workers)
    f = np.array([r[2] for r in res])
    b = np.array([r[3] for r in res])
    ks = stats.ks_2samp(f, b)
    reps = [{"replica": k, "seed_forward": r[0], "seed_reversed": r[1],
             "log_forward": r[2], "log_reversed": r[3]} for k, r in enumerate(res)]
    rows = [{"depth": depth, "ks_statistic": float(ks.statistic), "p_value": float(ks.pvalue),
             "mean_log_forward": float(f.mean()), "mean_log_reversed": float(b.mean())}]
    header = {"command": "series-symmetry", "kernel": kernel.descriptor(),
              "law": law.descriptor(), "beta": params.beta, "h": params.h, "depth": depth,
              "replicas": replicas, "master_seed": master_seed}
    footer = {"p_value": float(ks.pvalue), "pass": bool(ks.pvalue > alpha_level)}
    return ExperimentReport("series-symmetry", header, rows, footer, reps)
