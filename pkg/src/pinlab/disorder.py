"""Disorder laws, their cumulant calculus and realized environments.

Environments are generated block-wise from a keyed counter-based stream
(Philox keyed by seed and block index), so the value at a site depends only
on ``(seed, site)``.  Growing a window in either direction never changes
values already drawn, which is what the reversed series needs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from ._intpart import ceil_int
from .errors import ConvergenceError

__all__ = [
    "GaussianLaw",
    "TwoPointLaw",
    "law_from_descriptor",
    "Environment",
    "RichSegment",
    "log_mgf",
    "annealed_critical_point",
    "h_t",
    "rate_function",
    "tilt_level",
    "krcost_threshold",
    "sample_environment",
    "rich_segment_scan",
    "rich_segment_indices",
]

_BLOCK = 4096
_MASK64 = (1 << 64) - 1


class GaussianLaw:
    """Standard normal disorder, ``log M(b) = b**2 / 2``."""

    family = "standard-gaussian"
    mean_bound = math.inf

    def log_mgf(self, beta):
        return 0.5 * beta * beta

    def log_mgf_prime(self, beta):
        return beta

    def log_mgf_second(self, beta):
        return 1.0

    def draw(self, gen, size):
        return gen.standard_normal(size)

    def descriptor(self):
        return {"family": self.family}

    def __eq__(self, other):
        return isinstance(other, GaussianLaw)

    def __hash__(self):
        return hash(self.family)

    def __repr__(self):
        return "GaussianLaw()"


class TwoPointLaw:
    """Symmetric two-point law on ``{-a, +a}``; used for cross-checks only."""

    family = "bounded-symmetric-two-point"

    def __init__(self, a=1.0):
        if not a > 0:
            raise ValueError("two-point amplitude must be positive")
        self.a = float(a)

    @property
    def mean_bound(self):
        return self.a

    def log_mgf(self, beta):
        x = abs(self.a * beta)
        return x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)

    def log_mgf_prime(self, beta):
        return self.a * math.tanh(self.a * beta)

    def log_mgf_second(self, beta):
        t = math.tanh(self.a * beta)
        return self.a * self.a * (1.0 - t * t)

    def draw(self, gen, size):
        return np.where(gen.random(size) < 0.5, -self.a, self.a)

    def descriptor(self):
        return {"family": self.family, "a": self.a}

    def __eq__(self, other):
        return isinstance(other, TwoPointLaw) and other.a == self.a

    def __hash__(self):
        return hash((self.family, self.a))

    def __repr__(self):
        return f"TwoPointLaw(a={self.a})"


def law_from_descriptor(d):
    fam = d.get("family", "standard-gaussian")
    if fam in ("standard-gaussian", "gaussian"):
        return GaussianLaw()
    if fam in ("bounded-symmetric-two-point", "two-point"):
        return TwoPointLaw(float(d.get("a", 1.0)))
    raise ValueError(f"unknown disorder family {fam!r}")


def log_mgf(law, beta):
    return law.log_mgf(beta)


def annealed_critical_point(law, beta):
    return -law.log_mgf(beta)


def h_t(law, beta, t, alpha):
    """``-(1 + t*alpha) * log M(beta / (1 + t*alpha))``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    s = 1.0 + t * alpha
    return -s * law.log_mgf(beta / s)


def _solve_derivative(law, u, tol=1e-12, max_iter=200):
    """Find lam with (log M)'(lam) = u by Newton steps kept inside a bisection bracket."""
    f = lambda lam: law.log_mgf_prime(lam) - u  # noqa: E731
    lo, hi = -1.0, 1.0
    for _ in range(2000):
        if f(lo) < 0:
            break
        lo *= 2.0
    for _ in range(2000):
        if f(hi) > 0:
            break
        hi *= 2.0
    lam = 0.0 if lo < 0 < hi else 0.5 * (lo + hi)
    for _ in range(max_iter):
        g = f(lam)
        if abs(g) <= tol:
            return lam
        if g > 0:
            hi = lam
        else:
            lo = lam
        d = law.log_mgf_second(lam)
        step = lam - g / d if d > 0 else None
        lam = step if step is not None and lo < step < hi else 0.5 * (lo + hi)
        if hi - lo < 1e-15 * max(1.0, abs(lam)):
            return lam
    raise ConvergenceError(f"Legendre inner problem did not converge for u={u}")


def rate_function(law, u):
    """Legendre transform ``sup_lam (lam*u - log M(lam))``.

    Returns ``math.inf`` when ``u`` lies outside the open range of achievable
    means (for the two-point law, ``|u| >= a``).
    """
    if abs(u) >= law.mean_bound:
        return math.inf
    lam = _solve_derivative(law, u)
    return lam * u - law.log_mgf(lam)


def tilt_level(law, beta):
    """``u_beta = (log M)'(beta)``, the mean at which ``beta*u - Phi(u) = log M(beta)``."""
    if not beta > 0:
        raise ValueError("tilt_level needs beta > 0")
    return law.log_mgf_prime(beta)


def krcost_gap(law, beta, epsilon, alpha):
    """``log M(beta) - (1 + eps*alpha) log M(beta / (1 + eps*alpha))``."""
    s = 1.0 + epsilon * alpha
    return law.log_mgf(beta) - s * law.log_mgf(beta / s)


def krcost_threshold(law, epsilon, alpha, K_r, tol=1e-12, max_expand=200):
    """Smallest beta at which the energy gain beats the entropy cost ``log(1/K_r)``.

    The gap ``krcost_gap`` is nondecreasing in beta (convexity of log M), so
    bisection on it is well posed.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if not 0 < K_r <= 1:
        raise ValueError("K_r must lie in (0, 1]")
    target = -math.log(K_r)
    if target <= 0:
        return 0.0
    g = lambda b: krcost_gap(law, b, epsilon, alpha) - target  # noqa: E731
    lo, hi = 0.0, 1.0
    for _ in range(max_expand):
        if g(hi) > 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ConvergenceError("bracket expansion budget exceeded in krcost_threshold")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class Environment:
    """Realized disorder ``omega_i`` for ``lo <= i <= hi``.

    ``seed`` is None for hand-built or planted environments, which then
    cannot be extended.
    """

    law: object
    lo: int
    hi: int
    values: np.ndarray
    seed: int | None = None
    planted: tuple = field(default=())

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError("empty window")
        if len(self.values) != self.hi - self.lo + 1:
            raise ValueError("values do not match the window")
        self.values.flags.writeable = False

    def __getitem__(self, i):
        if not self.lo <= i <= self.hi:
            raise IndexError(f"site {i} outside window [{self.lo}, {self.hi}]")
        return float(self.values[i - self.lo])

    def covers(self, a, b):
        return self.lo <= a and b <= self.hi

    def segment(self, a, b):
        """Values at sites ``a..b`` inclusive."""
        if not self.covers(a, b):
            raise IndexError(f"[{a}, {b}] not inside window [{self.lo}, {self.hi}]")
        return self.values[a - self.lo:b - self.lo + 1]

    def extended(self, lo=None, hi=None):
        lo = self.lo if lo is None else min(lo, self.lo)
        hi = self.hi if hi is None else max(hi, self.hi)
        if (lo, hi) == (self.lo, self.hi):
            return self
        if self.seed is None:
            raise ValueError("only seeded environments can be extended")
        return sample_environment(self.law, (lo, hi), self.seed)

    def reflected(self, n):
        """Environment ``omega'(i) = omega(n - i)``."""
        return Environment(self.law, n - self.hi, n - self.lo, self.values[::-1].copy())

    def with_planted(self, sites, value):
        v = self.values.copy()
        sites = tuple(int(s) for s in sites)
        for s in sites:
            if not self.lo <= s <= self.hi:
                raise IndexError(f"planted site {s} outside window")
            v[s - self.lo] = value
        return Environment(self.law, self.lo, self.hi, v, None, self.planted + sites)

    @classmethod
    def from_values(cls, values, law=None, lo=0):
        values = np.array(values, dtype=float)
        return cls(law or GaussianLaw(), lo, lo + len(values) - 1, values)


def _block_values(law, seed, block):
    key = (int(seed) & _MASK64) | (((block + (1 << 63)) & _MASK64) << 64)
    gen = np.random.Generator(np.random.Philox(key=key))
    return law.draw(gen, _BLOCK)


def sample_environment(law, window, seed):
    """I.i.d. disorder on ``window = (lo, hi)``, a deterministic function of (seed, site)."""
    lo, hi = int(window[0]), int(window[1])
    if hi < lo:
        raise ValueError("window must be nonempty")
    b0, b1 = lo // _BLOCK, hi // _BLOCK
    vals = np.concatenate([_block_values(law, seed, b) for b in range(b0, b1 + 1)])
    off = lo - b0 * _BLOCK
    return Environment(law, lo, hi, vals[off:off + hi - lo + 1].copy(), int(seed))


@dataclass(frozen=True)
class RichSegment:
    indices: tuple
    average: float
    hit: bool


def rich_segment_indices(n, r, gamma):
    """``J_n = {n - i*r : 0 <= i < ceil(gamma * log n)}``, largest site first."""
    size = ceil_int(gamma * math.log(n)) if n > 1 else 0
    if size < 1:
        raise ValueError(f"gamma*log(n) = {gamma * math.log(max(n, 1)):.4g} gives an empty segment")
    return tuple(n - i * r for i in range(size))


def rich_segment_scan(env, n, r, gamma, u):
    J = rich_segment_indices(n, r, gamma)
    if not env.covers(J[-1], J[0]):
        raise ValueError(f"window [{env.lo}, {env.hi}] too small for segment [{J[-1]}, {J[0]}]")
    vals = [env[j] for j in J]
    # a constant segment averages to its value exactly
    avg = vals[0] if min(vals) == max(vals) else math.fsum(vals) / len(vals)
    return RichSegment(J, avg, avg >= u)
