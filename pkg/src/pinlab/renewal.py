"""Heavy-tailed recurrent renewal laws ``K(n) = c / n**(1 + alpha)`` for ``n >= r``.

The kernel is tabulated up to a horizon; everything beyond the table is
summarized by the tail ``K^+(horizon)``.  Free-renewal event probabilities are
computed exactly by dynamic programming over (position, contact count).
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import BudgetExceeded

__all__ = [
    "RenewalKernel",
    "RenewalTrajectory",
    "build_kernel",
    "kernel_mass",
    "tail_mass",
    "normalization_sum",
    "sample_free_renewal",
    "free_event_probability",
    "renewal_mass",
]

FAMILIES = ("power-law-constant-phi",)
NORMALIZATION_TOL = 1e-12
_BRACKET_WIDTH = 1e-13
DEFAULT_COUNT_BUDGET = 2**21


def _tail_integral(a, alpha):
    # int_a^inf x^{-(1+alpha)} dx
    return a ** (-alpha) / alpha


def _tail_bracket(N, alpha):
    """Certified bracket for sum_{n > N} n^{-(1+alpha)} (convexity of x^{-s})."""
    s = 1.0 + alpha
    lower = _tail_integral(N + 1.0, alpha) + 0.5 * (N + 1.0) ** (-s)
    upper = _tail_integral(N + 0.5, alpha)
    return lower, upper


def _tail_estimate(N, alpha):
    """Euler-Maclaurin value of sum_{n > N} n^{-(1+alpha)}, clipped into the bracket."""
    s = 1.0 + alpha
    a = N + 1.0
    est = (_tail_integral(a, alpha) + 0.5 * a ** (-s) + s * a ** (-s - 1.0) / 12.0
           - s * (s + 1.0) * (s + 2.0) * a ** (-s - 3.0) / 720.0)
    lo, hi = _tail_bracket(N, alpha)
    return min(max(est, lo), hi)


def normalization_sum(alpha, support_min=1, start=1024):
    """Return ``(S, N, width)`` with ``S = sum_{n >= r} n^{-(1+alpha)}``.

    ``S`` is the partial sum up to ``N`` plus an Euler-Maclaurin estimate of
    the remainder, kept inside an integral-comparison bracket whose width
    ``width`` is below 1e-13.
    """
    r = int(support_min)
    N = max(start, r)
    while True:
        lo, hi = _tail_bracket(N, alpha)
        if hi - lo < _BRACKET_WIDTH:
            break
        N *= 2
    n = np.arange(r, N + 1, dtype=float)
    partial = np.sum(n[::-1] ** (-(1.0 + alpha)))
    return partial + _tail_estimate(N, alpha), N, hi - lo


@dataclass(frozen=True, eq=False)
class RenewalKernel:
    """Tabulated renewal law.

    ``mass[n] = K(n)`` and ``tail[l] = K^+(l) = sum_{n > l} K(n)`` for
    ``0 <= n, l <= horizon``.  The log tables are computed directly rather than
    as logs of the probability tables.
    """

    alpha: float
    support_min: int
    horizon: int
    c: float
    mass: np.ndarray
    tail: np.ndarray
    log_mass: np.ndarray
    log_tail: np.ndarray
    family: str = "power-law-constant-phi"

    @property
    def r(self):
        return self.support_min

    def descriptor(self):
        return {
            "family": self.family,
            "alpha": self.alpha,
            "support_min": self.support_min,
            "horizon": self.horizon,
            "c": self.c,
        }

    def _check(self, n):
        if not 0 <= n <= self.horizon:
            raise IndexError(f"index {n} outside kernel table [0, {self.horizon}]")

    def K(self, n):
        self._check(n)
        return float(self.mass[n])

    def Kplus(self, l):
        self._check(l)
        return float(self.tail[l])

    def logK(self, n):
        self._check(n)
        return float(self.log_mass[n])

    def logKplus(self, l):
        self._check(l)
        return float(self.log_tail[l])

    def normalization_residual(self):
        """max_N |sum_{n<=N} K(n) + K^+(N) - 1| over the table."""
        return float(np.max(np.abs(np.cumsum(self.mass) + self.tail - 1.0)))


def build_kernel(alpha, family="power-law-constant-phi", horizon=4096, support_min=1):
    """Build the normalized kernel ``K(n) = c n^{-(1+alpha)}``, ``n >= support_min``."""
    if not alpha > 0 or not math.isfinite(alpha):
        raise ValueError(f"alpha must be a positive finite number, got {alpha!r}")
    if family not in FAMILIES:
        raise ValueError(f"unknown kernel family {family!r}; expected one of {FAMILIES}")
    support_min = int(support_min)
    horizon = int(horizon)
    if support_min < 1:
        raise ValueError("support_min must be >= 1")
    if horizon < support_min:
        raise ValueError(
            f"horizon {horizon} is smaller than support_min {support_min}: "
            "the table would hold no mass"
        )

    s = 1.0 + alpha
    S, N, _ = normalization_sum(alpha, support_min, start=max(1024, horizon))
    c = 1.0 / S

    idx = np.arange(horizon + 1, dtype=float)
    mass = np.zeros(horizon + 1)
    log_mass = np.full(horizon + 1, -np.inf)
    on = idx >= support_min
    log_mass[on] = math.log(c) - s * np.log(idx[on])
    mass[on] = c * idx[on] ** (-s)

    # remainder beyond the table: sum_{n > horizon} n^{-s} = S - sum_{n <= horizon}
    beyond_n = np.arange(horizon + 1, N + 1, dtype=float)
    beyond = np.sum(beyond_n[::-1] ** (-s)) + _tail_estimate(N, alpha)
    raw = np.zeros(horizon + 1)
    raw[on] = idx[on] ** (-s)
    # rcum[l] = sum_{l < n <= horizon} n^{-s}
    rcum = np.concatenate([np.cumsum(raw[::-1])[::-1][1:], [0.0]])
    tail_raw = rcum + beyond
    tail = c * tail_raw
    # K^+(l) = 1 exactly for l < r
    tail[:support_min] = 1.0
    log_tail = np.log(tail)

    for a in (mass, tail, log_mass, log_tail):
        a.flags.writeable = False
    k = RenewalKernel(alpha=float(alpha), support_min=support_min, horizon=horizon, c=c,
                      mass=mass, tail=tail, log_mass=log_mass, log_tail=log_tail, family=family)
    resid = k.normalization_residual()
    if resid > NORMALIZATION_TOL:
        raise ValueError(
            f"kernel mass accounting fails: residual {resid:.3e} exceeds {NORMALIZATION_TOL}"
        )
    return k


def kernel_mass(k, n):
    return k.K(n)


def tail_mass(k, l):
    return k.Kplus(l)


@dataclass(frozen=True)
class RenewalTrajectory:
    """Renewal epochs ``0 = tau_0 < tau_1 < ...`` inside ``[0, n]``."""

    epochs: tuple
    n: int

    def __post_init__(self):
        e = self.epochs
        if not e or e[0] != 0:
            raise ValueError("a trajectory starts with the epoch 0")
        if any(b <= a for a, b in zip(e, e[1:])):
            raise ValueError("epochs must be strictly increasing")
        if e[-1] > self.n:
            raise ValueError(f"epoch {e[-1]} beyond horizon {self.n}")

    @property
    def last(self):
        return self.epochs[-1]

    @property
    def gaps(self):
        return tuple(b - a for a, b in zip(self.epochs, self.epochs[1:]))

    @property
    def contacts(self):
        """|tau intersected with [0, n]|, the origin included."""
        return len(self.epochs)

    def indicator(self):
        d = np.zeros(self.n + 1, dtype=bool)
        d[list(self.epochs)] = True
        return d


def _draw_gap(k, v):
    # gap > l  iff  v <= K^+(l); returns horizon + 1 for an overshoot past the table
    return int(np.searchsorted(-k.tail, -v, side="right"))


def sample_free_renewal(k, n, rng):
    """Simulate the free renewal on ``[0, n]``; the overshooting gap is dropped."""
    if n > k.horizon:
        raise ValueError(f"n={n} exceeds kernel horizon {k.horizon}")
    epochs = [0]
    pos = 0
    while True:
        # 1 - U lies in (0, 1], so a gap of length >= 1 is always produced
        g = _draw_gap(k, 1.0 - rng.random())
        pos += g
        if pos > n:
            break
        epochs.append(pos)
    return RenewalTrajectory(tuple(epochs), n)


def renewal_mass(k, n_max):
    """u(m) = P(m in tau) for m = 0..n_max, from u(m) = sum_j K(j) u(m - j)."""
    if n_max > k.horizon:
        raise ValueError(f"n_max={n_max} exceeds kernel horizon {k.horizon}")
    u = np.zeros(n_max + 1)
    u[0] = 1.0
    K = k.mass
    for m in range(1, n_max + 1):
        u[m] = np.dot(K[m:0:-1], u[:m])
    return u


def free_event_probability(k, n, max_contacts=None, gap_cap=None,
                           require_final_gap_below=None, budget=DEFAULT_COUNT_BUDGET):
    """Exact free-renewal probability of an intersection of restrictions.

    The event is ``{|tau ∩ [0,n]| <= max_contacts}`` ∩ ``{every gap inside
    [0,n] is < gap_cap}`` ∩ ``{n - tau_last < require_final_gap_below}``; a
    ``None`` argument drops that restriction.  Contacts count the origin.
    """
    if n > k.horizon:
        raise ValueError(f"n={n} exceeds kernel horizon {k.horizon}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    if max_contacts is not None and max_contacts < 1:
        return 0.0
    cap = n + 1 if gap_cap is None else min(int(gap_cap), n + 1)
    final = n + 1 if require_final_gap_below is None else min(int(require_final_gap_below), n + 1)
    if cap < 1 or final < 1:
        return 0.0
    K = k.mass

    if max_contacts is None or max_contacts > n:
        u = np.zeros(n + 1)
        u[0] = 1.0
        for m in range(1, n + 1):
            lo = max(0, m - cap + 1)
            u[m] = np.dot(K[m - lo:0:-1], u[lo:m])
        reach = u
    else:
        C = int(max_contacts)
        if budget is not None and C * n > budget:
            raise BudgetExceeded(f"count DP needs max_contacts*n = {C * n} > budget {budget}")
        # u[m, c-1] = P(m in tau, exactly c contacts in [0, m], all gaps < cap)
        u = np.zeros((n + 1, C))
        u[0, 0] = 1.0
        for m in range(1, n + 1):
            lo = max(0, m - cap + 1)
            u[m, 1:] = K[m - lo:0:-1] @ u[lo:m, :-1]
        reach = u.sum(axis=1)

    first = n - final + 1
    m = np.arange(max(first, 0), n + 1)
    return float(np.dot(reach[m], k.tail[n - m]))
