"""Experiment reports, replica seeding and the replica work pool."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from .. import __version__

__all__ = ["ExperimentReport", "replica_seed", "run_tasks", "binomial_se", "loglog_slope"]


def replica_seed(master_seed, command, k):
    """64-bit seed of replica ``k``: BLAKE2b of ``"<master>:<command>:<k>"``.

    Stable across versions and independent of worker scheduling.
    """
    msg = f"{int(master_seed)}:{command}:{int(k)}".encode()
    return int.from_bytes(hashlib.blake2b(msg, digest_size=8).digest(), "little")


def run_tasks(func, tasks, workers=1):
    """``[func(t) for t in tasks]``, optionally on a process pool; order preserved."""
    tasks = list(tasks)
    if workers is None or workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, tasks))


def binomial_se(p, n):
    return math.sqrt(max(p * (1.0 - p), 0.0) / n) if n > 0 else math.nan


def loglog_slope(x, y):
    """Least-squares slope of log y against log x over entries with y > 0."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    ok = y > 0
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return v


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if v is None:
        return ""
    return str(v)


@dataclass
class ExperimentReport:
    """Header (descriptors, seeds, version), aggregated rows, footer verdicts.

    ``replica_rows`` holds one row per (grid point, replica) for Monte Carlo
    experiments.
    """

    name: str
    header: dict
    rows: list
    footer: dict = field(default_factory=dict)
    replica_rows: list | None = None

    def __post_init__(self):
        self.header.setdefault("experiment", self.name)
        self.header.setdefault("version", __version__)

    def to_dict(self):
        return {"header": _plain(self.header), "rows": _plain(self.rows),
                "footer": _plain(self.footer)}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @staticmethod
    def _csv(rows):
        buf = io.StringIO()
        if rows:
            cols = list(rows[0].keys())
            wr = csv.writer(buf, lineterminator="\n")
            wr.writerow(cols)
            for r in rows:
                wr.writerow([_cell(r.get(c)) for c in cols])
        return buf.getvalue()

    def to_csv(self):
        return self._csv(self.rows)

    def write(self, out_dir, stem=None):
        """Write ``<stem>.json``, ``<stem>.csv`` and, if present, ``<stem>_replicas.csv``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = stem or self.name
        paths = [out / f"{stem}.json", out / f"{stem}.csv"]
        paths[0].write_text(self.to_json() + "\n", encoding="utf-8")
        paths[1].write_text(self.to_csv(), encoding="utf-8")
        if self.replica_rows is not None:
            p = out / f"{stem}_replicas.csv"
            p.write_text(self._csv(self.replica_rows), encoding="utf-8")
            paths.append(p)
        return paths
