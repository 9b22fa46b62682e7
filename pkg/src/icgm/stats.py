"""Distributional test utilities with fixed pass thresholds."""
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class EmpiricalSample:
    """Sorted finite values plus a count of +inf observations."""

    values: np.ndarray
    infinite: int = 0

    @classmethod
    def of(cls, data):
        arr = np.asarray(data, dtype=float).ravel()
        if np.any(np.isnan(arr)) or np.any(arr == -np.inf):
            raise ValueError("sample contains NaN or -inf")
        finite = arr[np.isfinite(arr)]
        return cls(np.sort(finite), int(arr.size - finite.size))

    @property
    def count(self):
        return int(self.values.size)


def _sample(sample):
    return sample if isinstance(sample, EmpiricalSample) else EmpiricalSample.of(sample)


def ks_distance(sample, cdf):
    """sup |F_n - F| evaluated at the sample points (both one-sided limits)."""
    s = _sample(sample)
    n = s.count
    if n == 0:
        raise ValueError("empty sample")
    f = np.asarray(cdf(s.values), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return float(max(upper.max(), lower.max(), 0.0))


def exp_cdf(rate):
    if rate == 0:
        return lambda t: np.zeros_like(np.asarray(t, dtype=float))
    return lambda t: -np.expm1(-rate * np.maximum(np.asarray(t, dtype=float), 0.0))


def exp_rate_fit(sample):
    """Maximum-likelihood exponential rate and its standard error."""
    vals = np.asarray(sample.values if isinstance(sample, EmpiricalSample) else sample,
                      dtype=float)
    if vals.size == 0 or np.any(vals <= 0):
        raise ValueError("exp_rate_fit needs positive values")
    rate = 1.0 / vals.mean()
    return float(rate), float(rate / math.sqrt(vals.size))


@dataclass
class TestReport:
    statistic: str
    value: float
    threshold: float = None
    passed: bool = None
    n: int = 0
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    __test__ = False

    def __post_init__(self):
        if self.threshold is not None and self.passed is None:
            self.passed = bool(self.value <= self.threshold)

    def to_dict(self):
        return _jsonable(asdict(self))

    def to_json(self):
        return dumps(self.to_dict())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def dumps(obj):
    """Deterministic JSON: sorted keys, infinities as the string "inf"."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2)


def atom_chisq(counts, pmf, threshold=None, min_expected=5.0):
    """Pearson chi-square of observed atom counts against a pmf.

    Cells with expected count below ``min_expected`` are merged (smallest
    first) into their neighbour in sorted key order.
    """
    total = sum(counts.values())
    notes = []
    missing = [k for k, c in counts.items() if c > 0 and pmf.get(k, 0.0) == 0.0]
    if missing:
        notes.append(f"observed mass on atoms absent from pmf: {sorted(map(str, missing))}")
        return TestReport("chi2", math.inf, threshold, False, total, notes)
    keys = sorted(pmf, key=lambda k: (math.inf if k == "inf" or k == math.inf else k))
    cells = [[pmf[k] * total, counts.get(k, 0)] for k in keys]
    while len(cells) > 1:
        small = min(range(len(cells)), key=lambda c: cells[c][0])
        if cells[small][0] >= min_expected:
            break
        other = small + 1 if small + 1 < len(cells) else small - 1
        cells[other][0] += cells[small][0]
        cells[other][1] += cells[small][1]
        del cells[small]
    stat = math.fsum((o - e) ** 2 / e for e, o in cells if e > 0)
    report = TestReport("chi2", stat, threshold, None, total, notes)
    report.extra["dof"] = len(cells) - 1
    return report


def pairwise_corr(samples):
    """Pearson correlation matrix of replica-aligned samples."""
    arrs = [np.asarray(s.values if isinstance(s, EmpiricalSample) else s, dtype=float)
            for s in samples]
    n = {a.size for a in arrs}
    if len(n) != 1:
        raise ValueError("samples must have equal counts")
    return np.corrcoef(np.vstack(arrs))


def ks_two_sample(x, y):
    """Two-sample KS distance."""
    x = np.sort(np.asarray(x, dtype=float))
    y = np.sort(np.asarray(y, dtype=float))
    pts = np.concatenate([x, y])
    fx = np.searchsorted(x, pts, side="right") / x.size
    fy = np.searchsorted(y, pts, side="right") / y.size
    return float(np.abs(fx - fy).max())
