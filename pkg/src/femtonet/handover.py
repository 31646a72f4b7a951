"""SINR sample windows, the Bayesian coverage posterior and per-user decisions.

A user's window holds ``T`` SINR vectors (one entry per station). From it we
derive the per-station mean SINR and the inferiority counts ``n_i``: how many
times station ``i`` was strictly beaten by another station over the window.
Under the coverage model, a user located in station ``i``'s dominance region
sees each of the ``M*T`` comparisons go against ``i`` independently with
probability ``epsilon_i``, which gives the posterior

    Q_i  proportional to  eps_i**n_i * (1 - eps_i)**(M*T - n_i) * pi_i.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .radio import mean_rx_power

__all__ = [
    "CoverageModel",
    "SinrWindow",
    "WindowBank",
    "Action",
    "Decision",
    "inferior_counts",
    "window_push",
    "posterior",
    "handover_step",
    "admission_step",
    "heuristic_handover_step",
    "CalibrationResult",
    "calibrate_epsilon",
    "dominance_priors",
    "EPS_CLAMP",
    "EPS_FALLBACK",
]

log = logging.getLogger(__name__)

EPS_CLAMP = 1e-4
EPS_FALLBACK = 0.3


@dataclass(frozen=True)
class CoverageModel:
    priors: tuple
    epsilon: tuple
    gamma: float = 0.5
    window_len: int = 10

    def __post_init__(self):
        pi = np.asarray(self.priors, dtype=float)
        eps = np.asarray(self.epsilon, dtype=float)
        object.__setattr__(self, "priors", tuple(pi.tolist()))
        object.__setattr__(self, "epsilon", tuple(eps.tolist()))
        if pi.shape != eps.shape or pi.ndim != 1:
            raise ValueError("priors and epsilon must be vectors of equal length")
        if np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-9:
            raise ValueError("priors must be non-negative and sum to 1")
        if np.any((eps <= 0) | (eps >= 1)):
            raise ValueError("epsilon values must lie strictly inside (0, 1)")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.window_len < 1:
            raise ValueError("window_len must be >= 1")

    @property
    def n_stations(self) -> int:
        return len(self.priors)


def inferior_counts(samples) -> np.ndarray:
    """Per-station count of strict losses against the other stations.

    ``samples`` has shape (T, n_stations) or (T, n_stations, n_users); the
    result drops the leading axis.
    """
    s = np.asarray(samples, dtype=float)
    # beaten[t, i, k] is True where station k beats station i
    beaten = s[:, None, :] > s[:, :, None]
    return beaten.sum(axis=(0, 2))


class SinrWindow:
    """Rolling buffer of the last ``window_len`` SINR vectors for one user."""

    def __init__(self, n_stations: int, window_len: int):
        if window_len < 1:
            raise ValueError("window_len must be >= 1")
        self.n_stations = int(n_stations)
        self.window_len = int(window_len)
        self.samples = np.zeros((0, self.n_stations))
        self.inferior_counts = np.zeros(self.n_stations, dtype=np.int64)

    @classmethod
    def from_samples(cls, samples, window_len=None) -> "SinrWindow":
        s = np.atleast_2d(np.asarray(samples, dtype=float))
        w = cls(s.shape[1], window_len or s.shape[0])
        for row in s:
            w.push(row)
        return w

    @property
    def length(self) -> int:
        return self.samples.shape[0]

    @property
    def full(self) -> bool:
        return self.length == self.window_len

    @property
    def means(self) -> np.ndarray:
        if self.length == 0:
            return np.full(self.n_stations, np.nan)
        return self.samples.mean(axis=0)

    def push(self, sample) -> "SinrWindow":
        x = np.asarray(sample, dtype=float)
        if x.shape != (self.n_stations,):
            raise ValueError(f"sample must have length {self.n_stations}, got shape {x.shape}")
        if self.full:
            self.inferior_counts -= inferior_counts(self.samples[:1])
            self.samples = self.samples[1:]
        self.samples = np.vstack([self.samples, x])
        self.inferior_counts += inferior_counts(x[None, :])
        return self

    def clear(self) -> None:
        self.samples = np.zeros((0, self.n_stations))
        self.inferior_counts[:] = 0


def window_push(window: SinrWindow, sample) -> SinrWindow:
    return window.push(sample)


@dataclass
class _WindowView:
    """Read-only summary of one user's full window, as produced by WindowBank."""

    means: np.ndarray
    inferior_counts: np.ndarray
    length: int
    window_len: int
    full: bool = True
    n_stations: int = field(init=False)

    def __post_init__(self):
        self.n_stations = self.means.size


class WindowBank:
    """Block windows for all users at once; cleared after every decision epoch."""

    def __init__(self, n_stations: int, n_users: int, window_len: int):
        self.window_len = int(window_len)
        self.buf = np.zeros((self.window_len, n_stations, n_users))
        self.length = 0

    @property
    def full(self) -> bool:
        return self.length == self.window_len

    def push(self, eta: np.ndarray) -> None:
        if self.full:
            raise RuntimeError("window bank is full; clear it after deciding")
        self.buf[self.length] = eta
        self.length += 1

    def summarize(self):
        """Mean SINRs and inferiority counts, each shape (n_stations, n_users)."""
        data = self.buf[: self.length]
        return data.mean(axis=0), inferior_counts(data)

    def views(self):
        means, counts = self.summarize()
        return [
            _WindowView(means[:, j], counts[:, j], self.length, self.window_len)
            for j in range(means.shape[1])
        ]

    def clear(self) -> None:
        self.length = 0


def posterior(window, model: CoverageModel) -> np.ndarray:
    """Posterior probability that the user sits in each station's dominance region.

    Evaluated in log space and normalised, so long windows do not underflow.
    """
    if not window.full:
        raise ValueError("posterior needs a full window")
    n = np.asarray(window.inferior_counts, dtype=float)
    eps = np.asarray(model.epsilon)
    pi = np.asarray(model.priors)
    if n.shape != eps.shape:
        raise ValueError("window and model disagree on the number of stations")
    trials = (n.size - 1) * window.length
    with np.errstate(divide="ignore"):
        logw = n * np.log(eps) + (trials - n) * np.log1p(-eps) + np.log(pi)
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


class Action(enum.Enum):
    STAY = "stay"
    DROP = "drop"
    HANDOVER = "handover"
    IDLE = "idle"
    CONNECT = "connect"


class Decision(NamedTuple):
    action: Action
    station: int | None = None


STAY = Decision(Action.STAY)
DROP = Decision(Action.DROP)
IDLE = Decision(Action.IDLE)


def _candidates(window, model, thr, assignment, exclude=None):
    q = posterior(window, model)
    means = np.asarray(window.means)
    ok = (assignment.counts < thr.n_max) & (q >= model.gamma) & (means >= np.asarray(thr.lambda2))
    if exclude is not None:
        ok[exclude] = False
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        return None
    return int(idx[np.argmax(q[idx])])


def handover_step(user, serving, window, model, thr, assignment) -> Decision:
    """Bayesian handover decision for a served user.

    Drops the link when the mean SINR from the serving station is below
    ``lambda1``; when it is only below that station's ``lambda2``, moves to the
    station with the largest posterior among those with room, posterior at
    least ``gamma`` and mean SINR clearing their own ``lambda2``.
    """
    means = window.means
    if means[serving] < thr.lambda1:
        return DROP
    if means[serving] >= thr.lambda2[serving]:
        return STAY
    target = _candidates(window, model, thr, assignment, exclude=serving)
    return STAY if target is None else Decision(Action.HANDOVER, target)


def admission_step(user, window, model, thr, assignment) -> Decision:
    target = _candidates(window, model, thr, assignment)
    return IDLE if target is None else Decision(Action.CONNECT, target)


def heuristic_handover_step(user, serving, window, thr, assignment) -> Decision:
    """Baseline: on a weak serving link, jump to the best other station with room."""
    means = np.asarray(window.means)
    if means[serving] < thr.lambda1:
        return DROP
    if means[serving] >= thr.lambda2[serving]:
        return STAY
    room = assignment.counts < thr.n_max
    room[serving] = False
    idx = np.flatnonzero(room)
    if idx.size == 0:
        return STAY
    best = int(idx[np.argmax(means[idx])])
    if means[best] >= thr.lambda2[best]:
        return Decision(Action.HANDOVER, best)
    return STAY


def _sample_disc(rng, n, region):
    r = region.radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    th = rng.uniform(0.0, 2 * np.pi, n)
    return np.column_stack([region.center[0] + r * np.cos(th), region.center[1] + r * np.sin(th)])


def dominance_priors(stations, station_xy, region, n_samples: int = 200_000, seed=0) -> np.ndarray:
    """Area fraction of the disc in which each station has the strongest mean power."""
    rng = np.random.default_rng(seed)
    pts = _sample_disc(rng, n_samples, region)
    best = np.argmax(mean_rx_power(stations, station_xy, pts), axis=0)
    return np.bincount(best, minlength=len(stations)) / n_samples


@dataclass(frozen=True)
class CalibrationResult:
    epsilon: np.ndarray
    samples: np.ndarray
    warnings: tuple = ()


def calibrate_epsilon(
    stations,
    station_xy,
    region,
    samples_per_cell: int = 10_000,
    seed=0,
    chunk: int = 1 << 18,
    max_draws: int | None = None,
) -> CalibrationResult:
    """Monte-Carlo estimate of each station's comparison-loss probability.

    User positions are drawn uniformly over the disc and kept for the station
    whose mean received power dominates there, until every region holds
    ``samples_per_cell`` points (or the draw budget runs out). Each kept point
    gets one shadowed realisation; ``epsilon_i`` is the fraction of the
    ``M`` comparisons per point in which another station was received
    stronger. Regions that never get a point fall back to 0.3.
    """
    if samples_per_cell < 100:
        raise ValueError("samples_per_cell must be >= 100")
    rng = np.random.default_rng(seed)
    n_s = len(stations)
    shadow_std = np.array([s.shadow_stddev for s in stations])
    if max_draws is None:
        max_draws = max(2_000 * samples_per_cell, 4 * chunk)
    losses = np.zeros(n_s)
    got = np.zeros(n_s, dtype=np.int64)
    drawn = 0
    while drawn < max_draws and np.any(got < samples_per_cell):
        pts = _sample_disc(rng, chunk, region)
        drawn += chunk
        mean_rx = mean_rx_power(stations, station_xy, pts)
        owner = np.argmax(mean_rx, axis=0)
        need = samples_per_cell - got
        # keep at most `need` points per region, in draw order
        order = np.argsort(owner, kind="stable")
        sorted_owner = owner[order]
        starts = np.searchsorted(sorted_owner, np.arange(n_s))
        rank = np.arange(chunk) - starts[sorted_owner]
        keep = order[rank < need[sorted_owner]]
        if keep.size == 0:
            continue
        rx = mean_rx[:, keep] * 10.0 ** (-rng.standard_normal((n_s, keep.size)) * shadow_std[:, None] / 10.0)
        own = owner[keep]
        own_rx = rx[own, np.arange(keep.size)]
        lost = (rx > own_rx[None, :]).sum(axis=0)
        np.add.at(losses, own, lost)
        np.add.at(got, own, 1)

    eps = np.full(n_s, EPS_FALLBACK)
    warnings = []
    for i in range(n_s):
        if got[i] == 0:
            msg = f"station {i}: empty dominance region, epsilon falls back to {EPS_FALLBACK}"
            log.warning(msg)
            warnings.append(msg)
        else:
            eps[i] = losses[i] / (got[i] * max(n_s - 1, 1))
    eps = np.clip(eps, EPS_CLAMP, 1 - EPS_CLAMP)
    return CalibrationResult(eps, got, tuple(warnings))
