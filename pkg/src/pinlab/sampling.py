"""Exact sampling of polymer paths by backward decomposition.

The last contact ``m`` is drawn with probability proportional to
``Z^c_m K^+(n - m)`` (free boundary) or set to ``n`` (constrained); given a
contact at ``m``, the previous one ``j`` is drawn with probability
proportional to ``Z^c_j K(m - j)``.  Batches are processed position by
position from ``n`` down to 1 so each conditional law is computed once per
occupied site.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .polymer import FREE, CONSTRAINED, build_partition_table, trajectory_log_weight
from .renewal import RenewalTrajectory

__all__ = ["PathSample", "sample_path", "sample_paths"]


@dataclass(frozen=True)
class PathSample:
    trajectory: RenewalTrajectory
    log_weight: float


def _inverse_cdf(logw, u):
    p = np.exp(logw - logw.max())
    cdf = np.cumsum(p)
    return np.minimum(np.searchsorted(cdf, u * cdf[-1], side="right"), len(p) - 1)


def sample_paths(env, params, kernel, n, boundary, rng, size, table=None, with_weights=True):
    """Draw ``size`` independent exact samples from the polymer measure."""
    if boundary not in (FREE, CONSTRAINED):
        raise ValueError(f"unknown boundary {boundary!r}")
    if table is None or table.n != n or table.restricted:
        table = build_partition_table(env, params, kernel, n)
    lz, log_k = table.log_zc, kernel.log_mass

    paths = [[] for _ in range(size)]
    if boundary == FREE:
        m = np.arange(n + 1)
        last = _inverse_cdf(lz + kernel.log_tail[n - m], rng.random(size))
    else:
        last = np.full(size, n)
    buckets = defaultdict(list)
    for i, m in enumerate(last.tolist()):
        paths[i].append(m)
        buckets[m].append(i)

    for m in range(n, 0, -1):
        idx = buckets.pop(m, None)
        if not idx:
            continue
        prev = _inverse_cdf(lz[:m] + log_k[m:0:-1], rng.random(len(idx)))
        for i, j in zip(idx, prev.tolist()):
            paths[i].append(j)
            buckets[j].append(i)

    out = []
    for p in paths:
        traj = RenewalTrajectory(tuple(reversed(p)), n)
        lw = trajectory_log_weight(traj, env, params, kernel, boundary) if with_weights else np.nan
        out.append(PathSample(traj, lw))
    return out


def sample_path(env, params, kernel, n, boundary, rng, table=None):
    return sample_paths(env, params, kernel, n, boundary, rng, 1, table)[0]
