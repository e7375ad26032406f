"""Parameter chain for log-scale return counts along rich disorder segments.

Given (law, kernel, epsilon, beta, h) the planner picks the tilt level u, the
slack delta, the segment density gamma, the margin kappa and the moment
order m, then lambda and nu.  Tie-breaks: delta is half the relative slack
of ``A = beta*u + h_eps - log(1/K(r))`` over ``Phi(u)``; ``1/gamma`` is the
midpoint of ``((1+delta)*Phi(u), A)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
import math

from .._intpart import ceil_int
from ..disorder import (h_t, krcost_gap, krcost_threshold, rate_function, rich_segment_indices,
                        tilt_level)

__all__ = ["Theorem2Plan", "theorem2_planner", "rich_subsequence", "TIE_BREAKS"]

TIE_BREAKS = {
    "delta": "half of (A/Phi(u) - 1)",
    "gamma": "1/gamma = midpoint of ((1+delta)Phi(u), A)",
    "m": "smallest integer > 4/kappa",
}


@dataclass(frozen=True)
class Theorem2Plan:
    epsilon: float
    beta: float
    h: float
    h_epsilon: float
    log_inv_Kr: float
    beta_threshold: float
    feasible: bool
    infeasibility_reason: str = ""
    u_beta: float = math.nan
    phi_u: float = math.nan
    A: float = math.nan
    delta: float = math.nan
    gamma: float = math.nan
    kappa: float = math.nan
    m: int = 0
    lambda_: float = math.nan
    nu: float = math.nan
    slacks: dict = field(default_factory=dict)

    def as_dict(self):
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        d["tie_breaks"] = dict(TIE_BREAKS)
        return d

    def verify(self):
        """Re-check every chain inequality; returns the slacks (all > 0 when feasible)."""
        if not self.feasible:
            return {}
        s = {
            "A_minus_phi": self.A - self.phi_u,
            "delta": self.delta,
            "upper_minus_inv_gamma": self.A - 1.0 / self.gamma,
            "inv_gamma_minus_lower": 1.0 / self.gamma - (1.0 + self.delta) * self.phi_u,
            "kappa": self.kappa,
            "m_minus_4_over_kappa": self.m - 4.0 / self.kappa,
            "lambda": self.lambda_,
            "nu": self.nu,
        }
        return s


def theorem2_planner(law, kernel, epsilon, beta, h):
    """Run the parameter chain; infeasible inputs give ``feasible=False`` with the threshold."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    alpha = kernel.alpha
    h_eps = h_t(law, beta, epsilon, alpha)
    if not h > h_eps:
        raise ValueError(f"planner needs h > h_epsilon(beta) = {h_eps!r}, got h = {h!r}")
    K_r = kernel.K(kernel.r)
    log_inv = -math.log(K_r)
    thr = krcost_threshold(law, epsilon, alpha, K_r)
    base = dict(epsilon=float(epsilon), beta=float(beta), h=float(h), h_epsilon=h_eps,
                log_inv_Kr=log_inv, beta_threshold=thr)
    if beta <= 0 or krcost_gap(law, beta, epsilon, alpha) <= log_inv:
        return Theorem2Plan(**base, feasible=False,
                            infeasibility_reason=(f"beta={beta} is below the entropy-cost "
                                                  f"threshold {thr:.10g}"))
    u = tilt_level(law, beta)
    phi = rate_function(law, u)
    A = beta * u + h_eps - log_inv
    delta = 0.5 * (A / phi - 1.0)
    inv_gamma = 0.5 * ((1.0 + delta) * phi + A)
    gamma = 1.0 / inv_gamma
    kappa = gamma * A - 1.0
    m = math.floor(4.0 / kappa) + 1
    lam = 2.0 * (law.log_mgf(m * beta) / m + h)
    nu = kappa / (2.0 * lam)
    plan = Theorem2Plan(**base, feasible=True, u_beta=u, phi_u=phi, A=A, delta=delta,
                        gamma=gamma, kappa=kappa, m=int(m), lambda_=lam, nu=nu)
    slacks = plan.verify()
    bad = [k for k, v in slacks.items() if not v > 0]
    if bad:
        return Theorem2Plan(**{**plan.__dict__, "feasible": False,
                               "infeasibility_reason": f"nonpositive slack in {bad}",
                               "slacks": slacks})
    return Theorem2Plan(**{**plan.__dict__, "slacks": slacks})


def rich_subsequence(n0, r, gamma, count):
    """``n_{j+1} = n_j + ceil(2 r gamma log n_j)``, with disjoint segments ``J_{n_j}``.

    Raises ``ValueError`` if ``n0`` is too small for the step or for the
    segments to be disjoint.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if n0 < 2 or 2 * r * gamma * math.log(n0) < 1:
        raise ValueError(f"n0={n0} too small: 2*r*gamma*log(n0) < 1")
    seq = [int(n0)]
    while len(seq) < count:
        n = seq[-1]
        seq.append(n + ceil_int(2 * r * gamma * math.log(n)))
    for a, b in zip(seq, seq[1:]):
        Jb = rich_segment_indices(b, r, gamma)
        if Jb[-1] <= a:
            raise ValueError(f"segments J_{a} and J_{b} overlap; increase n0")
    return seq
