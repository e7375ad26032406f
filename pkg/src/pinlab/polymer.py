"""Exact log-space partition functions of the disordered pinning model.

Conventions: the Hamiltonian sums ``beta*omega_i + h`` over contacts
``i in tau ∩ [0, n]`` and the origin is always a contact, so every partition
value carries the factor ``exp(beta*omega_0 + h)``.  Contact counts reported
to users are ``|tau ∩ [0, n]|`` (origin included); the optional count axis of
a :class:`PartitionTable` counts contacts in ``[1, m]``.

The constrained recursion is

    logZc[m] = w[m] + logsumexp_{j < m} (logZc[j] + log K(m - j)),
    logZc[0] = w[0],   w[i] = beta*omega_i + h,

and every restricted variant (gap caps, forbidden sites, count axis, a
"long gap seen" layer) is a masked version of the same loop.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
import math
import warnings

import numpy as np

from ._logspace import logsumexp, log_cumsum, log_sub, lse_axis0
from .errors import BudgetExceeded, CancellationWarning
from .renewal import RenewalTrajectory

__all__ = [
    "PolymerParams",
    "PartitionTable",
    "EventSpec",
    "ContactStatistics",
    "SeriesResult",
    "site_weights",
    "build_partition_table",
    "free_log_partition",
    "free_log_partitions",
    "total_log_partition",
    "event_log_partition",
    "gibbs_probability",
    "trajectory_log_weight",
    "backward_free",
    "backward_constrained",
    "contact_marginals",
    "contact_statistics",
    "straddle_log_matrix",
    "constrained_series",
    "reversed_series",
    "DEFAULT_BUDGET",
    "DEFAULT_COUNT_BUDGET",
]

DEFAULT_BUDGET = 2**30          # n**2 for the plain recursion
DEFAULT_COUNT_BUDGET = 2**21    # n * k_max for the count-resolved recursion
CANCELLATION_RTOL = 1e-13

FREE, CONSTRAINED = "free", "constrained"


@dataclass(frozen=True)
class PolymerParams:
    beta: float
    h: float

    def __post_init__(self):
        if not (math.isfinite(self.beta) and math.isfinite(self.h)):
            raise ValueError("beta and h must be finite")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")


def site_weights(env, params, n, lo=0):
    return params.beta * np.asarray(env.segment(lo, lo + n), dtype=float) + params.h


def _check_boundary(boundary):
    if boundary not in (FREE, CONSTRAINED):
        raise ValueError(f"boundary must be 'free' or 'constrained', got {boundary!r}")


def _check_horizon(kernel, n):
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > kernel.horizon:
        raise ValueError(f"n={n} exceeds kernel horizon {kernel.horizon}")


# --------------------------------------------------------------------------
# forward recursions

def _forward_plain(w, log_k):
    n = len(w) - 1
    z = np.empty(n + 1)
    z[0] = w[0]
    for m in range(1, n + 1):
        a = z[:m] + log_k[m:0:-1]
        mx = a.max()
        if mx == -np.inf:
            z[m] = -np.inf
            continue
        z[m] = w[m] + (mx + np.log(np.exp(a - mx).sum()))
    return z


def _forward(w, log_k, *, gap_cap=None, k_max=None, forbidden=None, long_gap=None):
    """General constrained recursion.

    Returns an array of shape ``(n+1, L, C)``: ``L = 2`` layers when
    ``long_gap`` is set (layer 1 = some gap >= long_gap already used), and
    ``C = k_max + 1`` count bins when ``k_max`` is set (bin k = exactly k
    contacts in [1, m]; bin k_max aggregates k >= k_max).
    ``gap_cap`` forbids gaps >= gap_cap; ``forbidden`` masks contact sites.
    """
    n = len(w) - 1
    L = 2 if long_gap is not None else 1
    C = 1 if k_max is None else k_max + 1
    z = np.full((n + 1, L, C), -np.inf)
    if forbidden is None or not forbidden[0]:
        z[0, 0, 0] = w[0]
    for m in range(1, n + 1):
        if forbidden is not None and forbidden[m]:
            continue
        jlo = 0 if gap_cap is None else max(0, m - gap_cap + 1)
        if jlo >= m:
            continue
        a = z[jlo:m] + log_k[m - jlo:0:-1][:, None, None]
        if L == 2:
            split = m - long_gap + 1 - jlo  # rows [0, split) are long jumps
            split = min(max(split, 0), m - jlo)
            short = lse_axis0(a[split:]) if split < m - jlo else np.full((L, C), -np.inf)
            if split > 0:
                longj = lse_axis0(a[:split])
                t = np.empty((L, C))
                t[0] = short[0]
                t[1] = np.logaddexp(short[1], np.logaddexp(longj[0], longj[1]))
            else:
                t = short
        else:
            t = lse_axis0(a)
        if C > 1:
            s = np.full((L, C), -np.inf)
            s[:, 1:] = t[:, :-1]
            s[:, -1] = np.logaddexp(s[:, -1], t[:, -1])
            t = s
        z[m] = w[m] + t
    return z


# --------------------------------------------------------------------------
# tables

@dataclass(frozen=True, eq=False)
class PartitionTable:
    """Constrained log partition values ``log Z^c_m`` for ``m = 0..n``.

    ``log_zc_counts[m, k]`` (when present) restricts to exactly ``k``
    contacts in ``[1, m]``, the last bin aggregating ``k >= k_max``.
    ``gap_cap`` records a baked-in restriction to gaps ``< gap_cap``.
    """

    env: object
    params: PolymerParams
    kernel: object
    n: int
    log_zc: np.ndarray
    log_zc_counts: np.ndarray | None = None
    k_max: int | None = None
    gap_cap: int | None = None

    @property
    def w(self):
        return site_weights(self.env, self.params, self.n)

    @property
    def restricted(self):
        return self.gap_cap is not None

    @property
    def flags(self):
        return {"count_axis": self.k_max is not None, "gap_cap": self.gap_cap}


def build_partition_table(env, params, kernel, n, count_axis=None, gap_cap=None,
                          budget=DEFAULT_BUDGET, count_budget=DEFAULT_COUNT_BUDGET):
    """Run the constrained recursion on ``[0, n]``.

    ``count_axis`` is the ``k_max`` of an optional contact-count axis;
    ``gap_cap`` restricts every gap to ``< gap_cap``.
    """
    _check_horizon(kernel, n)
    if not env.covers(0, n):
        raise ValueError(f"environment window [{env.lo}, {env.hi}] does not cover [0, {n}]")
    if budget is not None and n * n > budget:
        raise BudgetExceeded(f"DP work n^2 = {n * n} exceeds budget {budget}")
    w = site_weights(env, params, n)
    counts = None
    if count_axis is not None:
        k_max = int(count_axis)
        if k_max < 1:
            raise ValueError("count_axis must be >= 1")
        if count_budget is not None and n * k_max > count_budget:
            raise BudgetExceeded(f"count DP work n*k_max = {n * k_max} exceeds budget {count_budget}")
        counts = _forward(w, kernel.log_mass, gap_cap=gap_cap, k_max=k_max)[:, 0, :]
        log_zc = lse_axis0(counts.T)
        counts.flags.writeable = False
    elif gap_cap is not None:
        log_zc = _forward(w, kernel.log_mass, gap_cap=gap_cap)[:, 0, 0]
    else:
        log_zc = _forward_plain(w, kernel.log_mass)
    log_zc.flags.writeable = False
    return PartitionTable(env, params, kernel, n, log_zc, counts,
                          None if count_axis is None else int(count_axis), gap_cap)


def free_log_partition(table, n=None):
    """``log Z_n = logsumexp_m (logZc[m] + log K^+(n - m))``."""
    n = table.n if n is None else n
    if not 0 <= n <= table.n:
        raise ValueError(f"n={n} outside table range [0, {table.n}]")
    m = np.arange(n + 1)
    return float(logsumexp(table.log_zc[: n + 1] + table.kernel.log_tail[n - m]))


def free_log_partitions(table, ns):
    return np.array([free_log_partition(table, int(n)) for n in ns])


def total_log_partition(table, boundary=FREE, n=None):
    _check_boundary(boundary)
    n = table.n if n is None else n
    if boundary == CONSTRAINED:
        return float(table.log_zc[n])
    return free_log_partition(table, n)


# --------------------------------------------------------------------------
# events

@dataclass(frozen=True)
class EventSpec:
    """An intersection of trajectory restrictions on ``[0, n]``.

    Every field is optional.  Contact counts include the origin.

    contacts_above       |tau ∩ [0,n]| > N          (E_{n,N})
    contacts_at_most     |tau ∩ [0,n]| <= N
    gaps_below           every gap inside [0,n] is < g
    some_gap_at_least    some gap inside [0,n] is >= g
    final_gap_below      n - tau_last < g            (free boundary)
    final_gap_at_least   n - tau_last >= g           (free boundary)
    last_above           tau_last > N                (free boundary)
    last_at_most         tau_last <= N               (free boundary)
    hat_at_most          no contact in (N, n/2]      (constrained boundary)
    check_margin         no contact in [n/2, n - M)  (constrained boundary)

    ``complement=True`` negates the whole intersection.
    """

    contacts_above: int | None = None
    contacts_at_most: int | None = None
    gaps_below: int | None = None
    some_gap_at_least: int | None = None
    final_gap_below: int | None = None
    final_gap_at_least: int | None = None
    last_above: int | None = None
    last_at_most: int | None = None
    hat_at_most: int | None = None
    check_margin: int | None = None
    complement: bool = False

    _DUALS = {
        "contacts_above": "contacts_at_most",
        "contacts_at_most": "contacts_above",
        "gaps_below": "some_gap_at_least",
        "some_gap_at_least": "gaps_below",
        "final_gap_below": "final_gap_at_least",
        "final_gap_at_least": "final_gap_below",
        "last_above": "last_at_most",
        "last_at_most": "last_above",
    }

    def active(self):
        return {k: v for k, v in self.__dict__.items() if k != "complement" and v is not None}

    def is_trivial(self):
        return not self.active()

    def direct_form(self):
        """An equivalent spec without ``complement``, when one exists."""
        if not self.complement:
            return self
        act = self.active()
        if len(act) == 1:
            (k, v), = act.items()
            if k in self._DUALS:
                return EventSpec(**{self._DUALS[k]: v})
        return None

    # named events
    @classmethod
    def many_contacts(cls, N):
        return cls(contacts_above=int(N))

    @classmethod
    def last_beyond(cls, N):
        return cls(last_above=int(N))

    @classmethod
    def midpoint_escape(cls, N, M):
        """``{hat tau_last > N} ∪ {check tau_last < n - M}``."""
        return cls(hat_at_most=int(N), check_margin=int(M), complement=True)


def _event_parts(event, n, boundary):
    """Translate an EventSpec into recursion settings; None means the event is empty."""
    e = event
    cnt_lo = 1 if e.contacts_above is None else e.contacts_above + 1
    cnt_hi = e.contacts_at_most
    if cnt_hi is not None and cnt_hi < cnt_lo:
        return None
    gap_cap = e.gaps_below
    long_gap = e.some_gap_at_least
    if gap_cap is not None and gap_cap < 1:
        return None
    if long_gap is not None:
        long_gap = max(int(long_gap), 1)
        if long_gap > n or (gap_cap is not None and long_gap >= gap_cap):
            return None
    last_lo, last_hi = 0, n
    free_only = {"final_gap_below", "final_gap_at_least", "last_above", "last_at_most"}
    if boundary == FREE:
        if e.final_gap_below is not None:
            last_lo = max(last_lo, n - e.final_gap_below + 1)
        if e.final_gap_at_least is not None:
            last_hi = min(last_hi, n - e.final_gap_at_least)
        if e.last_above is not None:
            last_lo = max(last_lo, e.last_above + 1)
        if e.last_at_most is not None:
            last_hi = min(last_hi, e.last_at_most)
        if e.hat_at_most is not None or e.check_margin is not None:
            raise ValueError("hat/check last-contact events need the constrained boundary")
    else:
        # tau_last = n under the constrained measure
        for k in free_only:
            v = getattr(e, k)
            if v is None:
                continue
            ok = {
                "final_gap_below": 0 < v,
                "final_gap_at_least": v <= 0,
                "last_above": n > v,
                "last_at_most": n <= v,
            }[k]
            if not ok:
                return None
        last_lo = last_hi = n
    if last_lo > last_hi:
        return None
    forbidden = None
    if e.hat_at_most is not None or e.check_margin is not None:
        forbidden = np.zeros(n + 1, dtype=bool)
        j = np.arange(n + 1)
        if e.hat_at_most is not None:
            forbidden |= (j > e.hat_at_most) & (2 * j <= n)
        if e.check_margin is not None:
            forbidden |= (2 * j >= n) & (j < n - e.check_margin)
        if forbidden[n]:
            return None
    return dict(cnt_lo=cnt_lo, cnt_hi=cnt_hi, gap_cap=gap_cap, long_gap=long_gap,
                last_lo=last_lo, last_hi=last_hi, forbidden=forbidden)


def _direct_event_log_partition(w, kernel, n, event, boundary, count_budget):
    parts = _event_parts(event, n, boundary)
    if parts is None:
        return -np.inf
    cnt_lo, cnt_hi = parts["cnt_lo"], parts["cnt_hi"]
    if cnt_lo > n + 1:
        return -np.inf
    # bins over k = contacts in [1, m] = |tau ∩ [0, m]| - 1
    need_hi = cnt_hi if cnt_hi is not None and cnt_hi <= n else None
    need_lo = cnt_lo - 1 if cnt_lo > 1 else None
    k_max = need_hi if need_hi is not None else need_lo
    if k_max is not None and count_budget is not None and n * k_max > count_budget:
        raise BudgetExceeded(f"count DP work n*k_max = {n * k_max} exceeds budget {count_budget}")
    z = _forward(w, kernel.log_mass, gap_cap=parts["gap_cap"], k_max=k_max,
                 forbidden=parts["forbidden"], long_gap=parts["long_gap"])
    layer = z[:, -1, :]  # with a long-gap layer only layer 1 qualifies
    if need_hi is not None:
        sel = lse_axis0(layer[:, cnt_lo - 1:need_hi].T)
    elif need_lo is not None:
        sel = layer[:, k_max]
    else:
        sel = layer[:, 0]
    m = np.arange(parts["last_lo"], parts["last_hi"] + 1)
    if boundary == CONSTRAINED:
        return float(sel[n])
    return float(logsumexp(sel[m] + kernel.log_tail[n - m]))


def event_log_partition(env, params, kernel, n, event, boundary=FREE,
                        count_budget=DEFAULT_COUNT_BUDGET, table=None):
    """``log Z(A)`` for the event described by ``event``.

    Complements are computed by a direct restricted recursion when the event
    has a single restriction with a natural dual; otherwise by subtraction
    from the unrestricted value, with a :class:`CancellationWarning` when the
    two are equal to relative precision 1e-13.
    """
    _check_boundary(boundary)
    _check_horizon(kernel, n)
    w = site_weights(env, params, n)
    if event.complement and event.is_trivial():
        return -np.inf
    direct = event.direct_form()
    if direct is not None:
        if direct.is_trivial():
            if table is None:
                table = build_partition_table(env, params, kernel, n)
            return total_log_partition(table, boundary, n)
        return _direct_event_log_partition(w, kernel, n, direct, boundary, count_budget)
    if table is None:
        table = build_partition_table(env, params, kernel, n)
    total = total_log_partition(table, boundary, n)
    inner = _direct_event_log_partition(w, kernel, n, replace(event, complement=False),
                                        boundary, count_budget)
    if inner > total or -np.expm1(inner - total) < CANCELLATION_RTOL:
        warnings.warn("complement cancels to relative precision 1e-13", CancellationWarning,
                      stacklevel=2)
        if inner >= total:
            return -np.inf
    return log_sub(total, inner)


def gibbs_probability(env, params, kernel, n, event, boundary=FREE,
                      count_budget=DEFAULT_COUNT_BUDGET, table=None):
    """Polymer-measure probability of ``event``."""
    if table is None:
        table = build_partition_table(env, params, kernel, n)
    total = total_log_partition(table, boundary, n)
    num = event_log_partition(env, params, kernel, n, event, boundary, count_budget, table)
    p = math.exp(num - total) if num > -np.inf else 0.0
    if p > 1.0 + 1e-12:
        raise ArithmeticError(f"event probability {p} exceeds 1")
    return min(max(p, 0.0), 1.0)


# --------------------------------------------------------------------------
# single trajectories

def trajectory_log_weight(traj, env, params, kernel, boundary=FREE):
    """Log weight of one trajectory: contact energies, gap masses, and for the
    free boundary the tail of the incomplete final gap.

    Accumulates in the same order as the recursion so that
    ``log Z >= trajectory_log_weight`` holds exactly in floating point.
    """
    _check_boundary(boundary)
    n = traj.n
    if boundary == CONSTRAINED and traj.last != n:
        raise ValueError("a constrained trajectory must contain n")
    w = site_weights(env, params, n)
    log_k = kernel.log_mass
    acc = w[0]
    prev = 0
    for e in traj.epochs[1:]:
        acc = w[e] + (acc + log_k[e - prev])
        prev = e
    if boundary == FREE:
        acc = acc + kernel.log_tail[n - prev]
    return float(acc)


# --------------------------------------------------------------------------
# backward passes, marginals, statistics

def backward_free(w, kernel):
    """``b[i]`` = log of the free-end weight of paths started by a contact at i,
    excluding ``w[i]``: ``b[i] = lse(log K^+(n-i), lse_{j>i} (log K(j-i) + w[j] + b[j]))``."""
    n = len(w) - 1
    log_k, log_t = kernel.log_mass, kernel.log_tail
    b = np.empty(n + 1)
    b[n] = log_t[0]
    for i in range(n - 1, -1, -1):
        a = log_k[1:n - i + 1] + w[i + 1:] + b[i + 1:]
        b[i] = np.logaddexp(log_t[n - i], logsumexp(a))
    return b


def backward_constrained(w, kernel):
    """``b[i]`` = log weight of paths from a contact at i to a contact at n,
    excluding ``w[i]``; equal to the reflected forward recursion minus ``w[i]``."""
    zr = _forward_plain(w[::-1].copy(), kernel.log_mass)
    return zr[::-1] - w


def contact_marginals(table, boundary=FREE):
    """P(i in tau) for i = 0..n under the polymer measure."""
    _check_boundary(boundary)
    w = table.w
    if boundary == FREE:
        b = backward_free(w, table.kernel)
        total = free_log_partition(table)
    else:
        b = backward_constrained(w, table.kernel)
        total = float(table.log_zc[table.n])
    return np.exp(table.log_zc + b - total)


def straddle_log_matrix(table):
    """Constrained-boundary jump across the midpoint.

    Returns ``(js, ls, logP, p_mid)``: ``logP[a, b]`` is the log probability
    that ``js[a]`` is the last contact before n/2 and ``ls[b]`` the first one
    after it (jump over the midpoint), and ``p_mid`` is P(n/2 in tau) (zero
    for odd n).
    """
    n = table.n
    w = table.w
    bc = backward_constrained(w, table.kernel)
    log_rc = w + bc
    total = float(table.log_zc[n])
    js = np.arange(0, (n + 1) // 2)          # j < n/2
    ls = np.arange(n // 2 + 1, n + 1)        # l > n/2
    logP = (table.log_zc[js][:, None] + table.kernel.log_mass[ls[None, :] - js[:, None]]
            + log_rc[ls][None, :] - total)
    p_mid = 0.0
    if n % 2 == 0:
        p_mid = math.exp(table.log_zc[n // 2] + bc[n // 2] - total)
    return js, ls, logP, p_mid


@dataclass
class ContactStatistics:
    boundary: str
    marginals: np.ndarray
    expected_contacts: float
    expected_disorder_contacts: float
    count_law: np.ndarray | None = None
    last_law: np.ndarray | None = None
    hat_law: np.ndarray | None = None
    check_law: np.ndarray | None = None
    extras: dict = field(default_factory=dict)


def contact_statistics(table, boundary=FREE):
    """Exact Gibbs contact statistics.

    ``expected_contacts`` is E|tau ∩ [0,n]| (= d log Z / dh) and
    ``expected_disorder_contacts`` is E sum_i omega_i delta_i (= d log Z / d beta).
    ``count_law[c]`` is P(|tau ∩ [0,n]| = c) when the table has a count axis;
    the last entry aggregates all counts ``>= k_max + 1``.
    """
    _check_boundary(boundary)
    n = table.n
    marg = contact_marginals(table, boundary)
    omega = np.asarray(table.env.segment(0, n))
    stats = ContactStatistics(boundary, marg, float(marg.sum()), float(np.dot(omega, marg)))
    if boundary == FREE:
        total = free_log_partition(table)
        m = np.arange(n + 1)
        stats.last_law = np.exp(table.log_zc + table.kernel.log_tail[n - m] - total)
    else:
        total = float(table.log_zc[n])
        js, ls, logP, p_mid = straddle_log_matrix(table)
        hat = np.zeros(n // 2 + 1)
        chk = np.zeros(n + 1)
        if len(js) and len(ls):
            P = np.exp(logP)
            hat[js] = P.sum(axis=1)
            chk[ls] = P.sum(axis=0)
        if n % 2 == 0:
            hat[n // 2] += p_mid
            chk[n // 2] += p_mid
        stats.hat_law = hat
        stats.check_law = chk
    if table.log_zc_counts is not None:
        lc = table.log_zc_counts
        if boundary == FREE:
            m = np.arange(n + 1)
            per_k = lse_axis0(lc + table.kernel.log_tail[n - m][:, None])
        else:
            per_k = lc[n]
        law = np.zeros(table.k_max + 2)
        law[1:] = np.exp(per_k - total)  # bin k of [1,m] is count k+1 on [0,n]
        stats.count_law = law
    return stats


# --------------------------------------------------------------------------
# series

@dataclass(frozen=True)
class SeriesResult:
    """Log terms and log partial sums of a series of constrained partitions."""

    log_terms: np.ndarray
    log_partial: np.ndarray

    @property
    def partial(self):
        return np.exp(self.log_partial)

    def relative_increment(self, a, b):
        """(S_b - S_a) / S_a for partial-sum indices a < b."""
        return math.expm1(self.log_partial[b] - self.log_partial[a])


def constrained_series(env, params, kernel, n_max, budget=DEFAULT_BUDGET):
    """Partial sums of ``sum_{n=0}^{n_max} Z^c_n``."""
    t = build_partition_table(env, params, kernel, n_max, budget=budget)
    return SeriesResult(t.log_zc, log_cumsum(t.log_zc))


def reversed_series(env, params, kernel, anchor, depth, budget=DEFAULT_BUDGET):
    """Partial sums of ``sum_{d=0}^{depth} Z^c_{[anchor-d, anchor]}``.

    The window is extended leftward when it does not reach ``anchor - depth``
    (seeded environments only).
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    _check_horizon(kernel, depth)
    if budget is not None and depth * depth > budget:
        raise BudgetExceeded(f"DP work {depth * depth} exceeds budget {budget}")
    if not env.covers(anchor - depth, anchor):
        env = env.extended(lo=anchor - depth, hi=anchor)
    w = params.beta * np.asarray(env.segment(anchor - depth, anchor))[::-1] + params.h
    z = _forward_plain(w.copy(), kernel.log_mass)
    return SeriesResult(z, log_cumsum(z))

