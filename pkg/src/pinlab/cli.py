"""Command-line runner: ``pinlab <command> [--config PATH] [--key value ...]``.

Exit status: 0 on success, 2 on an invalid configuration (the message names
the field), 3 when a work budget would be exceeded.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np
from scipy import special

from . import __version__
from .config import COMMANDS, KEYS, load_config
from .disorder import (GaussianLaw, TwoPointLaw, annealed_critical_point, h_t,
                       sample_environment)
from .errors import BudgetExceeded, ConfigError
from .experiments import (DEFAULT_C1, ExperimentReport, TightnessGrid, constrained_tightness_scan,
                          decay_check, free_energy_estimate, log_returns_experiment,
                          replica_seed, series_event_report, series_plateau, series_symmetry,
                          smoke_check, theorem2_planner, tightness_scan)
from .polymer import (CONSTRAINED, DEFAULT_BUDGET, DEFAULT_COUNT_BUDGET, FREE, PolymerParams,
                      build_partition_table, contact_statistics, free_log_partitions)
from .renewal import build_kernel
from .sampling import sample_paths
from .svg import line_plot

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET = 0, 2, 3


# --------------------------------------------------------------------------
# shared builders

def _kernel(cfg):
    try:
        return build_kernel(cfg.get("alpha", 0.5), cfg.get("family", "power-law-constant-phi"),
                            cfg.get("horizon", 4096), cfg.get("support_min", 1))
    except ValueError as exc:
        raise ConfigError("alpha" if "alpha" in str(exc) else "family", str(exc)) from None


def _law(cfg):
    name = cfg.get("law", "gaussian")
    if name in ("two-point", "bounded-symmetric-two-point"):
        return TwoPointLaw(cfg.get("law_a", 1.0))
    return GaussianLaw()


def _params(cfg, law, default_h):
    beta = cfg.get("beta", 0.5)
    h = cfg.get("h")
    if h is None:
        h = default_h(beta)
        cfg.values["h"] = h
    cfg.values.setdefault("beta", beta)
    return PolymerParams(beta, h)


def _delocalized(law):
    return lambda beta: annealed_critical_point(law, beta) - 1.0


def _check_work(cfg, work, what="recursion"):
    budget = cfg.get("budget", DEFAULT_BUDGET)
    if work > budget:
        raise BudgetExceeded(f"{what} needs {work} operations, budget is {budget}")


def _check_count_work(cfg, work):
    budget = min(cfg.get("count_budget", DEFAULT_COUNT_BUDGET), cfg.get("budget", DEFAULT_BUDGET))
    if work > budget:
        raise BudgetExceeded(f"count-resolved recursion needs n*k_max = {work}, budget is {budget}")
    return budget


def _seed(cfg):
    return cfg.get("seed", 0)


# --------------------------------------------------------------------------
# commands; each returns (report, {svg_name: svg_text})

def cmd_kernel_check(cfg):
    k = _kernel(cfg)
    s = 1.0 + k.alpha
    zr = special.zeta(s, k.r)
    grid = cfg.get("n_values") or sorted({1, 2, 3, 5, 10, 100, 1000, k.horizon} & set(range(k.horizon + 1)))
    rows = []
    worst_k = worst_t = 0.0
    for n in grid:
        if n > k.horizon:
            raise ConfigError("n_values", f"{n} exceeds kernel horizon {k.horizon}")
        ko = n ** (-s) / zr if n >= k.r else 0.0
        to = special.zeta(s, max(n + 1, k.r)) / zr
        ek = abs(k.K(n) - ko) / ko if ko else abs(k.K(n))
        et = abs(k.Kplus(n) - to) / to
        worst_k, worst_t = max(worst_k, ek), max(worst_t, et)
        rows.append({"n": n, "K": k.K(n), "K_oracle": ko, "K_rel_err": ek,
                     "Kplus": k.Kplus(n), "Kplus_oracle": to, "Kplus_rel_err": et})
    resid = k.normalization_residual()
    smoke = smoke_check(GaussianLaw(), k, PolymerParams(1.0, -0.5), seed=_seed(cfg))
    footer = {"normalization_residual": resid, "max_rel_err_K": worst_k,
              "max_rel_err_Kplus": worst_t, "smoke_check_max_rel_err": smoke,
              "pass": bool(resid <= 1e-12 and worst_k <= 1e-10 and worst_t <= 1e-10)}
    header = {"command": "kernel-check", "kernel": k.descriptor()}
    return ExperimentReport("kernel-check", header, rows, footer), {}


def cmd_partition(cfg):
    k, law = _kernel(cfg), _law(cfg)
    p = _params(cfg, law, _delocalized(law))
    n = cfg.get("n", 100)
    _check_work(cfg, n * n)
    seed = replica_seed(_seed(cfg), "partition", 0)
    env = sample_environment(law, (0, n), seed)
    t = build_partition_table(env, p, k, n, budget=None)
    lz = free_log_partitions(t, range(n + 1))
    sf, sc = contact_statistics(t, FREE), contact_statistics(t, CONSTRAINED)
    rows = [{"m": m, "omega": env[m], "log_Zc": float(t.log_zc[m]), "log_Z": float(lz[m]),
             "P_contact_free": float(sf.marginals[m]),
             "P_contact_constrained": float(sc.marginals[m]),
             "P_last_free": float(sf.last_law[m])} for m in range(n + 1)]
    footer = {"log_Z": float(lz[n]), "log_Zc": float(t.log_zc[n]),
              "expected_contacts_free": sf.expected_contacts,
              "expected_contacts_constrained": sc.expected_contacts,
              "expected_disorder_contacts_free": sf.expected_disorder_contacts}
    header = {"command": "partition", "kernel": k.descriptor(), "law": law.descriptor(),
              "seed": seed, "beta": p.beta, "h": p.h, "n": n}
    return ExperimentReport("partition", header, rows, footer), {}


def cmd_sample_paths(cfg):
    k, law = _kernel(cfg), _law(cfg)
    p = _params(cfg, law, _delocalized(law))
    n = cfg.get("n", 50)
    boundary = cfg.get("boundary", FREE)
    size = cfg.get("samples", 100)
    _check_work(cfg, n * n)
    env_seed = replica_seed(_seed(cfg), "sample-paths", 0)
    rng_seed = replica_seed(_seed(cfg), "sample-paths:draws", 0)
    env = sample_environment(law, (0, n), env_seed)
    draws = sample_paths(env, p, k, n, boundary, np.random.default_rng(rng_seed), size)
    rows = [{"sample": i, "contacts": d.trajectory.contacts, "last": d.trajectory.last,
             "log_weight": d.log_weight, "epochs": " ".join(map(str, d.trajectory.epochs))}
            for i, d in enumerate(draws)]
    header = {"command": "sample-paths", "kernel": k.descriptor(), "law": law.descriptor(),
              "env_seed": env_seed, "rng_seed": rng_seed, "beta": p.beta, "h": p.h, "n": n,
              "boundary": boundary, "samples": size}
    footer = {"mean_contacts": float(np.mean([r["contacts"] for r in rows])),
              "all_contain_n": all(r["last"] == n for r in rows)}
    return ExperimentReport("sample-paths", header, rows, footer), {}


def _grid(cfg, constrained):
    k, law = _kernel(cfg), _law(cfg)
    p = _params(cfg, law, _delocalized(law))
    n_values = cfg.get("n_values", [500, 1000, 2000])
    N_values = cfg.get("N_values", [10, 50, 100, 200])
    _check_work(cfg, max(n_values) ** 2)
    return TightnessGrid(k, p, n_values, N_values, cfg.get("epsilon", 0.1),
                         cfg.get("replicas", 50), _seed(cfg), law,
                         cfg.get("M_values", N_values) if constrained else (),
                         cfg.get("threads", 1), budget=None)


def _tightness_plots(rep, key="N"):
    by_n, by_N = {}, {}
    for r in rep.rows:
        if "M" in r and r["M"] != r["N"]:
            continue
        by_n.setdefault(f"n={r['n']}", ([], []))
        by_n[f"n={r['n']}"][0].append(r[key])
        by_n[f"n={r['n']}"][1].append(r["frequency"])
        by_N.setdefault(f"N={r['N']}", ([], []))
        by_N[f"N={r['N']}"][0].append(r["n"])
        by_N[f"N={r['N']}"][1].append(r["frequency"])
    return {"vs_N": line_plot(by_n, "disorder frequency vs N", "N", "frequency"),
            "vs_n": line_plot(by_N, "disorder frequency vs n", "n", "frequency")}


def cmd_tightness(cfg):
    rep = tightness_scan(_grid(cfg, False))
    return rep, _tightness_plots(rep)


def cmd_tightness_constrained(cfg):
    rep = constrained_tightness_scan(_grid(cfg, True))
    return rep, _tightness_plots(rep)


def _planner_inputs(cfg):
    k, law = _kernel(cfg), _law(cfg)
    eps = cfg.get("epsilon", 0.5)
    cfg.values.setdefault("epsilon", eps)
    p = _params(cfg, law, lambda beta: h_t(law, beta, eps, k.alpha) + 0.1)
    if not 0 < eps < 1:
        raise ConfigError("epsilon", "must lie in (0, 1) for the planner")
    if not p.h > h_t(law, p.beta, eps, k.alpha):
        raise ConfigError("h", "must exceed h_epsilon(beta)")
    return k, law, eps, p


def cmd_plan_thm2(cfg):
    cfg.values.setdefault("beta", 3.5)
    k, law, eps, p = _planner_inputs(cfg)
    plan = theorem2_planner(law, k, eps, p.beta, p.h)
    d = plan.as_dict()
    row = {key: d[key] for key in ("epsilon", "beta", "h", "h_epsilon", "beta_threshold",
                                   "feasible", "u_beta", "phi_u", "A", "delta", "gamma",
                                   "kappa", "m", "lambda", "nu")}
    footer = {"feasible": plan.feasible, "infeasibility_reason": plan.infeasibility_reason,
              "slacks": plan.slacks,
              "all_slacks_positive": bool(plan.slacks) and all(v > 0 for v in plan.slacks.values())}
    header = {"command": "plan-thm2", "kernel": k.descriptor(), "law": law.descriptor(),
              "plan": d}
    return ExperimentReport("plan-thm2", header, [row], footer), {}


def cmd_log_returns(cfg):
    cfg.values.setdefault("beta", 3.5)
    k, law, eps, p = _planner_inputs(cfg)
    n_values = cfg.get("n_values", [500, 1000, 2000])
    nus = cfg.get("nu_values", [0.5, 1.0, 2.0])
    _check_work(cfg, max(n_values) ** 2)
    _check_count_work(cfg, max(n_values) * max(1, math.floor(max(nus) * math.log(max(n_values)))))
    u, gamma = cfg.get("u"), cfg.get("gamma")
    plan = None
    if u is None or gamma is None:
        plan = theorem2_planner(law, k, eps, p.beta, p.h)
        if not plan.feasible:
            raise ConfigError("beta", plan.infeasibility_reason)
    rep = log_returns_experiment(k, p, n_values, cfg.get("replicas", 20), _seed(cfg), law,
                                 plan=plan, u=u, gamma=gamma, nu_values=nus,
                                 planted=cfg.get("planted", False), workers=cfg.get("threads", 1),
                                 count_budget=_check_count_work(cfg, 0))
    return rep, {}


def cmd_decay_check(cfg):
    k = _kernel(cfg)
    n_values = cfg.get("n_values", [500, 1000, 2000, 4000])
    C1, b = cfg.get("C1", DEFAULT_C1), cfg.get("b", 0.05)
    budget = _check_count_work(cfg, max(n * max(1, math.floor(C1 * math.log(n)))
                                        for n in n_values))
    rep = decay_check(k, b, n_values, C1, budget)
    xs = [r["n"] for r in rep.rows]
    svg = line_plot({"probability": (xs, [r["probability"] for r in rep.rows]),
                     "bound": (xs, [r["bound"] for r in rep.rows])},
                    "few contacts and no long gap", "n", "probability", logx=True, logy=True)
    return rep, {"vs_n": svg}


def cmd_free_energy(cfg):
    k, law = _kernel(cfg), _law(cfg)
    p = _params(cfg, law, _delocalized(law))
    n_values = cfg.get("n_values", [1024, 2048, 4096])
    _check_work(cfg, max(n_values) ** 2)
    rep = free_energy_estimate(k, p, n_values, cfg.get("replicas", 10), _seed(cfg), law,
                               cfg.get("threads", 1))
    return rep, {}


def cmd_series(cfg):
    k, law = _kernel(cfg), _law(cfg)
    p = _params(cfg, law, _delocalized(law))
    mode = cfg.get("mode", "events")
    if mode == "plateau":
        n_max, n_small = cfg.get("n_max", 4000), cfg.get("n_small", 2000)
        if n_small >= n_max:
            raise ConfigError("n_small", "must be smaller than n_max")
        _check_work(cfg, n_max ** 2)
        return series_plateau(k, p, n_small, n_max, cfg.get("replicas", 100), _seed(cfg), law,
                              workers=cfg.get("threads", 1)), {}
    if mode == "symmetry":
        depth = cfg.get("depth", 1000)
        _check_work(cfg, depth ** 2)
        return series_symmetry(k, p, depth, cfg.get("replicas", 500), _seed(cfg), law,
                               workers=cfg.get("threads", 1)), {}
    n_max = cfg.get("n_max", 1000)
    N_values = cfg.get("N_values", [0, 1, 2, 5, 10])
    live = [N for N in N_values if 1 <= N <= n_max]
    _check_work(cfg, n_max ** 2)
    budget = _check_count_work(cfg, n_max * max(live) if live else 0)
    seed = replica_seed(_seed(cfg), "series", 0)
    env = sample_environment(law, (0, n_max), seed)
    rep = series_event_report(env, p, k, N_values, n_max, cfg.get("h_c"),
                              cfg.get("epsilon", 0.0), budget)
    return rep, {}


HELP = {
    "kernel-check": "kernel table against the Hurwitz zeta function",
    "partition": "free and constrained log partition functions up to n",
    "sample-paths": "exact Gibbs path samples",
    "tightness": "frequency of P(last contact > N) > epsilon over replicas",
    "tightness-constrained": "midpoint escape frequencies for the constrained endpoint",
    "log-returns": "log-many returns along rich disorder segments",
    "plan-thm2": "parameter chain for rich-segment returns",
    "decay-check": "few contacts and no long gap for the free renewal",
    "free-energy": "quenched free energy estimate against the annealed bound",
    "series": "summed constrained partition series (events, plateau, symmetry)",
}

HANDLERS = {
    "kernel-check": cmd_kernel_check,
    "partition": cmd_partition,
    "sample-paths": cmd_sample_paths,
    "tightness": cmd_tightness,
    "tightness-constrained": cmd_tightness_constrained,
    "log-returns": cmd_log_returns,
    "plan-thm2": cmd_plan_thm2,
    "decay-check": cmd_decay_check,
    "free-energy": cmd_free_energy,
    "series": cmd_series,
}


# --------------------------------------------------------------------------
# entry point

def build_parser():
    parser = argparse.ArgumentParser(prog="pinlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pinlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in COMMANDS:
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", metavar="PATH")
        for key, (_, help_) in KEYS.items():
            flags = [f"--{key}"]
            if "_" in key:
                flags.append(f"--{key.replace('_', '-')}")
            sp.add_argument(*flags, dest=key, default=None, metavar="VALUE", help=help_)
    return parser


def run(command, cfg):
    """Execute one command and write its report; returns the written paths."""
    out = Path(cfg.get("out", "pinlab-out"))
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".pinlab-write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError("out", f"output directory {out} is not writable: {exc.strerror}") from None
    rep, plots = HANDLERS[command](cfg)
    rep.header["config"] = cfg.resolved()
    stem = command
    paths = rep.write(out, stem)
    if cfg.get("plot", False):
        for suffix, text in plots.items():
            pth = out / f"{stem}_{suffix}.svg"
            pth.write_text(text, encoding="utf-8")
            paths.append(pth)
    return rep, paths


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in KEYS}
    try:
        cfg = load_config(args.command, args.config, overrides)
        rep, paths = run(args.command, cfg)
    except ConfigError as exc:
        print(f"pinlab: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceeded as exc:
        print(f"pinlab: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    for pth in paths:
        print(pth)
    if rep.footer:
        for key, val in rep.footer.items():
            if not isinstance(val, (dict, list)):
                print(f"{key}: {val}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
