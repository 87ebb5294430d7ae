"""Sweep rows, decay-exponent fits, frequency grids, seeds, and emission.

Every experiment in the package reports its measurements as SweepResult
rows sharing one CSV / JSON-lines schema, so outputs from different
subcommands can be concatenated and post-processed uniformly.  Rows are
self-describing: the parameter columns carry everything needed to re-run
the row.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


@dataclass
class SweepResult:
    """One measured row of an experiment sweep."""

    experiment: str
    quantity: str
    value: float
    params: dict = field(default_factory=dict)
    reference: float | None = None
    ratio: float | None = None
    exponent: float | None = None
    wall_ms: float = 0.0
    seed: int | None = None
    borderline_count: int | None = None

    FIXED_FIELDS = ("experiment", "quantity", "value", "reference", "ratio",
                    "exponent", "wall_ms", "seed", "borderline_count")

    def as_flat_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.FIXED_FIELDS}
        d.update(self.params)
        return d


def splitmix64(state: int) -> int:
    """One output of the splitmix64 mixing function (public domain design)."""
    z = (state + _GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(master: int, index: int) -> int:
    """Per-task seed: mix the master seed with the task index.

    Published scheme so runs can be reproduced row by row: the task at
    position k uses splitmix64(master + (k+1) * golden_gamma).
    """
    return splitmix64((master + (index + 1) * _GOLDEN_GAMMA) & _MASK64)


def golden_xis(k: int) -> np.ndarray:
    """First k fractional parts of n*(sqrt(5)-1)/2, a low-discrepancy grid."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    return np.modf(np.arange(1, k + 1) * g)[0]


def xi_grid(rule: str, seed: int = 0) -> np.ndarray:
    """Frequency grids: 'golden:k' (with 0 and 1/2 pinned), 'random:k',
    or an explicit comma-separated list."""
    if rule.startswith("golden:"):
        k = int(rule.split(":", 1)[1])
        return np.concatenate([[0.0, 0.5], golden_xis(k)])
    if rule.startswith("random:"):
        k = int(rule.split(":", 1)[1])
        rng = np.random.default_rng(seed)
        return np.concatenate([[0.0, 0.5], rng.random(k)])
    return np.array([float(v) for v in rule.split(",") if v.strip() != ""])


def fit_loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x.

    Nonpositive or non-finite y values are dropped; with fewer than two
    usable points the slope is not defined and NaN is returned.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    keep = np.isfinite(y) & (y > 0) & np.isfinite(x) & (x > 0)
    if keep.sum() < 2:
        return math.nan
    lx, ly = np.log(x[keep]), np.log(y[keep])
    return float(np.polyfit(lx, ly, 1)[0])


class StopWatch:
    def __enter__(self):
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = (time.perf_counter() - self._t0) * 1e3
        return False


# ------------------------------------------------------------- emission


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, np.floating):
        v = float(v)
    elif isinstance(v, np.integer):
        v = int(v)
    elif isinstance(v, np.bool_):
        v = bool(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def result_columns(results) -> list[str]:
    keys: set[str] = set()
    for r in results:
        keys.update(r.params.keys())
    return list(SweepResult.FIXED_FIELDS) + sorted(keys)


def write_csv(path, results, config_echo: dict | None = None):
    """CSV with '#'-prefixed metadata lines echoing the resolved config.

    Comma-separated with a header row and '.' decimals; fields that carry
    embedded commas (e.g. function descriptions) are quoted.
    """
    import csv as _csv

    cols = result_columns(results)
    with open(path, "w", newline="") as fh:
        for k, v in (config_echo or {}).items():
            fh.write(f"# {k} = {v}\n")
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for r in results:
            d = r.as_flat_dict()
            writer.writerow([_fmt(d.get(c)) for c in cols])


def _json_safe(v):
    if isinstance(v, np.floating):
        v = float(v)
    elif isinstance(v, np.integer):
        v = int(v)
    elif isinstance(v, np.bool_):
        v = bool(v)
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def write_jsonl(path, results, config_echo: dict | None = None):
    """JSON-lines mirror of the CSV; first record carries the config."""
    with open(path, "w") as fh:
        if config_echo is not None:
            fh.write(json.dumps({"config": config_echo}, sort_keys=True) + "\n")
        for r in results:
            d = {k: _json_safe(v) for k, v in r.as_flat_dict().items()}
            fh.write(json.dumps(d, sort_keys=True) + "\n")
