"""Pre-flight self check: recursion results against direct enumeration at small n.

Experiments call :func:`smoke_check` before their main grid so that a broken
kernel or recursion is caught on an instance small enough to enumerate.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..disorder import sample_environment
from ..errors import PinlabError
from ..polymer import (CONSTRAINED, FREE, EventSpec, build_partition_table,
                       event_log_partition, free_log_partition)

SMOKE_N = 10
SMOKE_RTOL = 1e-10


class SmokeCheckFailed(PinlabError):
    pass


def _enumerate(w, K, Kp, n, boundary, pred):
    total = []
    inner = range(1, n) if boundary == CONSTRAINED else range(1, n + 1)
    for size in range(n + 1):
        for sub in itertools.combinations(inner, size):
            ep = (0,) + sub + ((n,) if boundary == CONSTRAINED else ())
            if not pred(ep):
                continue
            x = math.exp(sum(w[i] for i in ep))
            for a, b in zip(ep, ep[1:]):
                x *= K[b - a]
            if boundary == FREE:
                x *= Kp[n - ep[-1]]
            total.append(x)
    return math.fsum(total)


def smoke_check(law, kernel, params, seed=0, n=SMOKE_N):
    """Compare free, constrained and two event partitions with enumeration."""
    n = min(n, kernel.horizon)
    env = sample_environment(law, (0, n), seed)
    w = params.beta * np.asarray(env.segment(0, n)) + params.h
    K, Kp = kernel.mass, kernel.tail
    table = build_partition_table(env, params, kernel, n)
    half = n // 2
    cases = [
        (free_log_partition(table), FREE, lambda ep: True),
        (float(table.log_zc[n]), CONSTRAINED, lambda ep: True),
        (event_log_partition(env, params, kernel, n, EventSpec(last_above=half)),
         FREE, lambda ep: ep[-1] > half),
        (event_log_partition(env, params, kernel, n, EventSpec(contacts_above=2)),
         FREE, lambda ep: len(ep) > 2),
    ]
    worst = 0.0
    for got, boundary, pred in cases:
        ref = _enumerate(w, K, Kp, n, boundary, pred)
        if ref == 0.0:
            err = 0.0 if got == -np.inf else math.inf
        else:
            err = abs(math.expm1(got - math.log(ref)))
        worst = max(worst, err)
    if worst > SMOKE_RTOL:
        raise SmokeCheckFailed(f"recursion disagrees with enumeration at n={n}: rel err {worst:.3e}")
    return worst
