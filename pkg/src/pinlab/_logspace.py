import numpy as np
from scipy.special import logsumexp

__all__ = ["logsumexp", "lse_axis0", "log_cumsum", "log_rcumsum", "log_sub"]


def lse_axis0(a):
    """Log-sum-exp over the first axis; columns that are all -inf stay -inf."""
    mx = a.max(axis=0)
    safe = np.where(np.isfinite(mx), mx, 0.0)
    with np.errstate(divide="ignore"):
        return safe + np.log(np.exp(a - safe).sum(axis=0))


def log_cumsum(a):
    return np.logaddexp.accumulate(a)


def log_rcumsum(a):
    """out[i] = log sum_{j >= i} exp(a[j])."""
    return np.logaddexp.accumulate(a[::-1])[::-1]


def log_sub(a, b):
    """log(exp(a) - exp(b)) for a >= b; -inf when equal."""
    if b == -np.inf:
        return a
    d = b - a
    if d >= 0:
        return -np.inf
    return a + np.log(-np.expm1(d))
