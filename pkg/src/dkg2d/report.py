"""Result records shared by the scans and the verification harness."""
from dataclasses import dataclass, field
import json
import math

import numpy as np


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def summary_stats(values):
    """min, max, median and 95th percentile of the finite entries."""
    v = np.asarray(values, dtype=float).ravel()
    v = v[np.isfinite(v)]
    if v.size == 0:
        return {"min": float("nan"), "max": float("nan"),
                "median": float("nan"), "p95": float("nan")}
    return {"min": float(v.min()), "max": float(v.max()),
            "median": float(np.median(v)), "p95": float(np.percentile(v, 95))}


@dataclass
class LemmaReport:
    """Outcome of one sampled check.

    Attributes
    ----------
    lemma : str
        Short identifier of the checked inequality.
    params : dict
    seed : int or None
    n : int
        Number of samples behind ``ratios``.
    ratios : ndarray
        Per-sample ratios LHS / RHS (or residuals, depending on the check).
    constant : float
        Empirical constant, usually ``max(ratios)``.
    passed : bool
    details : dict
        Check-specific tables (slopes, per-level values, ...).
    runtime_s : float
    """
    lemma: str
    params: dict
    seed: object
    n: int
    ratios: np.ndarray
    constant: float
    passed: bool
    details: dict = field(default_factory=dict)
    runtime_s: float = 0.0

    @property
    def stats(self):
        return summary_stats(self.ratios)

    def to_dict(self, include_runtime=True):
        d = {"lemma": self.lemma, "params": self.params, "seed": self.seed,
             "n": int(self.n), "stats": self.stats, "constant": self.constant,
             "pass": bool(self.passed), "details": self.details}
        if include_runtime:
            d["runtime_s"] = self.runtime_s
        return _jsonable(d)

    def to_json(self, include_runtime=False):
        """Deterministic JSON; runtime is left out unless asked for."""
        return json.dumps(self.to_dict(include_runtime), sort_keys=True, indent=1)

    def __str__(self):
        s = self.stats
        return (f"{self.lemma}: {'PASS' if self.passed else 'FAIL'} n={self.n} "
                f"C={self.constant:.4g} min={s['min']:.3g} max={s['max']:.3g}")


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(x, y, 1)[0])
