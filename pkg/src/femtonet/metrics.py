"""Per-user capacity, network totals, Jain's index and cross-run summaries."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np
from scipy import stats

__all__ = [
    "MetricsRecord",
    "RunSummary",
    "user_capacity",
    "per_user_capacity",
    "total_capacity",
    "jain_index",
    "summarize_runs",
    "SUMMARY_METRICS",
]


def user_capacity(eta, n_served, bandwidth: float):
    """Shannon capacity of one user, ``(B / N_i) * log2(1 / (1 - eta))``."""
    e = np.asarray(eta, dtype=float)
    n = np.asarray(n_served)
    if np.any((e <= 0) | (e >= 1)):
        raise ValueError("eta must lie in (0, 1)")
    if np.any(n < 1):
        raise ValueError("n_served must be >= 1")
    c = bandwidth / n * (-np.log1p(-e) / np.log(2.0))
    return float(c) if c.ndim == 0 else c


def per_user_capacity(assignment, snapshot, bandwidth: float) -> np.ndarray:
    """Capacity of every user in bits/s; unserved users get 0."""
    eta = np.asarray(getattr(snapshot, "eta", snapshot), dtype=float)
    cap = np.zeros(assignment.n_users)
    served = np.flatnonzero(assignment.serving >= 0)
    if served.size:
        st = assignment.serving[served]
        cap[served] = user_capacity(eta[st, served], assignment.counts[st], bandwidth)
    return cap


def total_capacity(assignment, snapshot, bandwidth: float) -> float:
    return float(per_user_capacity(assignment, snapshot, bandwidth).sum())


def jain_index(capacities) -> float:
    """Jain's fairness index ``(sum C)^2 / (N sum C^2)``.

    An all-zero vector is treated as perfectly fair and yields 1.0.
    """
    c = np.asarray(capacities, dtype=float)
    if c.size == 0:
        raise ValueError("need at least one capacity")
    sq = np.sum(c * c)
    if sq == 0:
        return 1.0
    return float(c.sum() ** 2 / (c.size * sq))


@dataclass
class MetricsRecord:
    total_capacity: float
    jain_index: float
    served_count: int
    handover_count: int
    drop_count: int
    admission_count: int = 0
    n_users: int = 0
    per_user_capacity: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)
    jain_degenerate: bool = False

    @property
    def handovers_per_user(self) -> float:
        return self.handover_count / self.n_users if self.n_users else 0.0

    def __eq__(self, other):
        if not isinstance(other, MetricsRecord):
            return NotImplemented
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            if f.name == "per_user_capacity":
                if not np.array_equal(a, b):
                    return False
            elif a != b:
                return False
        return True


# metrics carried by RunSummary, in output order
SUMMARY_METRICS = (
    "total_capacity",
    "jain_index",
    "served_count",
    "handover_count",
    "handovers_per_user",
    "drop_count",
    "admission_count",
)


@dataclass(frozen=True)
class RunSummary:
    mean: dict
    ci95_half_width: dict
    runs: int

    def interval(self, metric: str) -> tuple[float, float]:
        m, h = self.mean[metric], self.ci95_half_width[metric]
        return m - h, m + h


def summarize_runs(records, metrics=SUMMARY_METRICS) -> RunSummary:
    """Sample mean and Student-t 95% half-width of each metric over runs."""
    records = list(records)
    n = len(records)
    if n < 2:
        raise ValueError("summarize_runs needs at least 2 runs")
    tq = stats.t.ppf(0.975, n - 1)
    mean, half = {}, {}
    for name in metrics:
        x = np.array([getattr(r, name) for r in records], dtype=float)
        mean[name] = float(x.mean())
        half[name] = float(tq * x.std(ddof=1) / np.sqrt(n))
    return RunSummary(mean, half, n)
