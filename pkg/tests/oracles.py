"""Brute-force oracles: enumerate every renewal configuration on [0, n].

Nothing here calls the recursions under test.  Kernel values come from
``mpmath.zeta`` so that the normalization is checked independently too.
"""
import itertools
import math

import mpmath


def kernel_values(alpha, r, n):
    """K(0..n) and K^+(0..n) from the Hurwitz zeta function."""
    s = 1 + alpha
    Z = mpmath.zeta(s, r)
    K = [0.0] * (n + 1)
    for j in range(r, n + 1):
        K[j] = float(mpmath.mpf(j) ** (-s) / Z)
    Kp = [float(mpmath.zeta(s, max(l + 1, r)) / Z) for l in range(n + 1)]
    return K, Kp


def configurations(n, boundary):
    """All epoch tuples (0, ..., last) in [0, n]; constrained ones end at n."""
    inner = range(1, n) if boundary == "constrained" else range(1, n + 1)
    inner = list(inner)
    for size in range(len(inner) + 1):
        for sub in itertools.combinations(inner, size):
            ep = (0,) + sub
            if boundary == "constrained":
                if n == 0:
                    if sub:
                        continue
                else:
                    ep = ep + (n,)
            yield ep


def weight(ep, n, omega, beta, h, K, Kp, boundary):
    """Linear-space Gibbs weight of one configuration."""
    x = 1.0
    for i in ep:
        x *= math.exp(beta * omega[i] + h)
    for a, b in zip(ep, ep[1:]):
        x *= K[b - a]
    if boundary == "free":
        x *= Kp[n - ep[-1]]
    return x


def free_prob(ep, n, K, Kp):
    return weight(ep, n, [0.0] * (n + 1), 0.0, 0.0, K, Kp, "free")


def partition(n, omega, beta, h, K, Kp, boundary, event=lambda ep: True):
    return math.fsum(weight(ep, n, omega, beta, h, K, Kp, boundary)
                     for ep in configurations(n, boundary) if event(ep))


def gibbs_law(n, omega, beta, h, K, Kp, boundary):
    ws = {ep: weight(ep, n, omega, beta, h, K, Kp, boundary) for ep in configurations(n, boundary)}
    tot = math.fsum(ws.values())
    return {ep: v / tot for ep, v in ws.items()}


# event predicates mirroring EventSpec fields
def gaps(ep):
    return [b - a for a, b in zip(ep, ep[1:])]


def hat_last(ep, n):
    return max(j for j in ep if 2 * j <= n)


def check_last(ep, n):
    return min(j for j in ep if 2 * j >= n)
