"""Flat ``key = value`` run configuration with typed, field-level validation.

Lines are ``key = value``; ``#`` starts a comment; lists are comma separated.
Command-line flags override file values.  Missing optional values are
resolved per command (e.g. ``h`` defaults to ``h_c^ann(beta) - 1`` for the
tightness scans) and the resolved values are embedded in every report.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math
from pathlib import Path

from .errors import ConfigError

__all__ = ["RunConfig", "KEYS", "parse_config_text", "load_config", "COMMANDS"]

COMMANDS = ("kernel-check", "partition", "sample-paths", "tightness", "tightness-constrained",
            "log-returns", "plan-thm2", "decay-check", "free-energy", "series")

_U64 = (1 << 64) - 1


def _bool(s):
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _ints(s):
    if isinstance(s, (list, tuple)):
        return [int(x) for x in s]
    return [int(x) for x in str(s).replace(";", ",").split(",") if x.strip()]


def _floats(s):
    if isinstance(s, (list, tuple)):
        return [float(x) for x in s]
    return [float(x) for x in str(s).replace(";", ",").split(",") if x.strip()]


def _u64(s):
    v = int(str(s), 0)
    if not 0 <= v <= _U64:
        raise ValueError("must be an unsigned 64-bit integer")
    return v


# key -> (parser, help)
KEYS = {
    "alpha": (float, "renewal tail exponent"),
    "support_min": (int, "smallest gap r"),
    "horizon": (int, "kernel table length"),
    "family": (str, "kernel family"),
    "law": (str, "disorder law: gaussian or two-point"),
    "law_a": (float, "two-point amplitude"),
    "beta": (float, "inverse temperature"),
    "h": (float, "pinning strength (default depends on the command)"),
    "n": (int, "system size"),
    "n_values": (_ints, "grid of system sizes"),
    "N_values": (_ints, "grid of last-contact / contact-count thresholds"),
    "M_values": (_ints, "grid of right-margin thresholds"),
    "epsilon": (float, "probability threshold (tightness) or epsilon (plan-thm2, series)"),
    "replicas": (int, "disorder replicas"),
    "b": (float, "long-gap fraction"),
    "C1": (float, "contact-count constant"),
    "gamma": (float, "rich-segment density"),
    "u": (float, "rich-segment level"),
    "nu_values": (_floats, "return-count constants"),
    "planted": (_bool, "plant a synthetic rich segment"),
    "boundary": (str, "free or constrained"),
    "samples": (int, "number of sampled paths"),
    "n_max": (int, "series length"),
    "n_small": (int, "series plateau comparison point"),
    "depth": (int, "reversed series depth"),
    "mode": (str, "series mode: events, plateau or symmetry"),
    "h_c": (float, "critical-point surrogate for the series envelope"),
    "plot": (_bool, "emit SVG line plots"),
    "seed": (_u64, "master seed"),
    "out": (str, "output directory"),
    "threads": (int, "worker processes"),
    "budget": (int, "work budget for O(n^2) recursions"),
    "count_budget": (int, "work budget n*k_max for count-resolved recursions"),
}

# keys that do not influence results and are left out of report headers
NON_RESULT_KEYS = ("out", "threads", "plot")


@dataclass
class RunConfig:
    command: str
    values: dict = field(default_factory=dict)

    def get(self, key, default=None):
        v = self.values.get(key)
        return default if v is None else v

    def resolved(self):
        return {k: v for k, v in sorted(self.values.items()) if k not in NON_RESULT_KEYS}


def _coerce(key, raw):
    if key not in KEYS:
        raise ConfigError(key, "unknown configuration key")
    parser = KEYS[key][0]
    try:
        return parser(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, f"cannot parse {raw!r}: {exc}") from None


def parse_config_text(text):
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k] = _coerce(k, v)
    return out


def load_config(command, path=None, overrides=None):
    """Merge file values and overrides, then validate."""
    if command not in COMMANDS:
        raise ConfigError("command", f"unknown command {command!r}")
    values = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
        values.update(parse_config_text(text))
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = _coerce(k, v)
    cfg = RunConfig(command, values)
    validate(cfg)
    return cfg


def _positive(cfg, key):
    v = cfg.values.get(key)
    if v is None:
        return
    if not (math.isfinite(v) and v > 0):
        raise ConfigError(key, f"must be positive, got {v!r}")


def validate(cfg):
    v = cfg.values
    for key in ("alpha", "horizon", "support_min", "replicas", "samples", "threads",
                "budget", "count_budget", "b", "C1", "gamma", "depth", "n_max", "n_small"):
        _positive(cfg, key)
    for key in ("beta", "h", "u", "law_a", "h_c"):
        if key in v and not math.isfinite(v[key]):
            raise ConfigError(key, "must be finite")
    if v.get("beta", 0.0) < 0:
        raise ConfigError("beta", "must be nonnegative")
    if "epsilon" in v and not 0 <= v["epsilon"] < 1:
        raise ConfigError("epsilon", "must lie in [0, 1)")
    if "n" in v and v["n"] < 0:
        raise ConfigError("n", "must be nonnegative")
    for key in ("n_values",):
        if key in v and (not v[key] or min(v[key]) < 1):
            raise ConfigError(key, "must be a nonempty list of positive integers")
    for key in ("N_values", "M_values"):
        if key in v and (not v[key] or min(v[key]) < 0):
            raise ConfigError(key, "must be a nonempty list of nonnegative integers")
    if "nu_values" in v and (not v["nu_values"] or min(v["nu_values"]) <= 0):
        raise ConfigError("nu_values", "must be a nonempty list of positive numbers")
    if "law" in v and v["law"] not in ("gaussian", "standard-gaussian", "two-point",
                                       "bounded-symmetric-two-point"):
        raise ConfigError("law", f"unknown disorder law {v['law']!r}")
    if "boundary" in v and v["boundary"] not in ("free", "constrained"):
        raise ConfigError("boundary", "must be 'free' or 'constrained'")
    if "mode" in v and v["mode"] not in ("events", "plateau", "symmetry"):
        raise ConfigError("mode", "must be one of events, plateau, symmetry")
    horizon = v.get("horizon", 4096)
    if v.get("support_min", 1) > horizon:
        raise ConfigError("horizon", "must be at least support_min")
    for key in ("n", "n_max", "depth"):
        if key in v and v[key] > horizon:
            raise ConfigError(key, f"exceeds kernel horizon {horizon}")
    if "n_values" in v and max(v["n_values"]) > horizon:
        raise ConfigError("n_values", f"exceeds kernel horizon {horizon}")
    return cfg
