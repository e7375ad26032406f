"""Exact free-renewal probability of few contacts and no long gap."""
from __future__ import annotations

import math

from .._intpart import log_count, long_gap_length
from ..renewal import DEFAULT_COUNT_BUDGET, free_event_probability
from .report import ExperimentReport, loglog_slope

__all__ = ["decay_probability", "decay_check", "DEFAULT_C1"]

DEFAULT_C1 = 4.0


def decay_probability(kernel, n, b=None, C1=None, budget=DEFAULT_COUNT_BUDGET):
    """``P(|tau ∩ [0,n]| <= C1 log n, every gap in [0,n] < bn, n - tau_last < bn)``.

    ``None`` for ``b`` or ``C1`` drops the corresponding restriction.
    """
    max_c = None if C1 is None else log_count(C1, n)
    cap = None if b is None else long_gap_length(b, n)
    return free_event_probability(kernel, n, max_contacts=max_c, gap_cap=cap,
                                  require_final_gap_below=cap, budget=budget)


def decay_check(kernel, b, n_values, C1=DEFAULT_C1, budget=DEFAULT_COUNT_BUDGET):
    """Tabulate the probability against ``n^{-alpha/(9b)}`` and fit the decay exponent."""
    if not b > 0:
        raise ValueError("b must be positive")
    n_values = sorted(int(n) for n in n_values)
    expo = kernel.alpha / (9.0 * b)
    rows = []
    for n in n_values:
        p = decay_probability(kernel, n, b, C1, budget)
        bound = n ** (-expo)
        rows.append({"n": n, "max_contacts": log_count(C1, n), "gap_bound": long_gap_length(b, n),
                     "probability": p, "bound": bound, "holds": p <= bound})
    holds = [r["holds"] for r in rows]
    first = next((r["n"] for r in rows if r["holds"]), None)
    persists = first is not None and all(holds[holds.index(True):])
    slope = loglog_slope([r["n"] for r in rows], [r["probability"] for r in rows])
    footer = {
        "decay_exponent": -expo,
        "fitted_slope": slope,
        "slope_ok": bool(slope <= -expo + 0.1) if not math.isnan(slope) else False,
        "first_crossing": first,
        "persists_after_crossing": persists,
        "zero_probability_points": sum(r["probability"] == 0.0 for r in rows),
    }
    header = {"command": "decay-check", "kernel": kernel.descriptor(), "b": b, "C1": C1,
              "n_values": n_values}
    return ExperimentReport("decay-check", header, rows, footer)
