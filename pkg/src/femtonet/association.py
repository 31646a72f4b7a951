"""Station/user association: the threshold-adaptive algorithm and two baselines.

All three association routines take either a :class:`~femtonet.radio.RadioSnapshot`
or a bare ``(n_stations, n_users)`` array of fractional SINRs, and return an
:class:`Assignment`. Ties are always broken towards the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Assignment",
    "Thresholds",
    "LevelTable",
    "classify",
    "level_table",
    "associate_proposed",
    "associate_scheme1",
    "associate_scheme2",
    "grouped_capacity",
]

UNSERVED = -1


def _eta_matrix(snapshot) -> np.ndarray:
    eta = np.asarray(getattr(snapshot, "eta", snapshot), dtype=float)
    if eta.ndim != 2:
        raise ValueError("eta must be a 2-D (stations x users) array")
    return eta


class Assignment:
    """Mutable association state.

    ``serving[j]`` is the station serving user ``j`` or ``-1``; ``counts[i]``
    is the number of users at station ``i``. Every mutation goes through
    :meth:`assign`, :meth:`release` or :meth:`move`, which enforce the
    per-station cap.
    """

    def __init__(self, n_stations: int, n_users: int, n_max: int):
        if n_max < 1:
            raise ValueError("n_max must be >= 1")
        self.n_max = int(n_max)
        self.serving = np.full(n_users, UNSERVED, dtype=np.int64)
        self.counts = np.zeros(n_stations, dtype=np.int64)

    @property
    def n_stations(self) -> int:
        return self.counts.size

    @property
    def n_users(self) -> int:
        return self.serving.size

    @property
    def served_sets(self) -> list[list[int]]:
        sets = [[] for _ in range(self.n_stations)]
        for j in np.flatnonzero(self.serving >= 0):
            sets[self.serving[j]].append(int(j))
        return sets

    @property
    def served_count(self) -> int:
        return int(np.count_nonzero(self.serving >= 0))

    def station_of(self, user: int):
        i = int(self.serving[user])
        return None if i == UNSERVED else i

    def has_room(self, station: int) -> bool:
        return self.counts[station] < self.n_max

    def assign(self, user: int, station: int) -> None:
        if self.serving[user] != UNSERVED:
            raise ValueError(f"user {user} is already served by station {self.serving[user]}")
        if not self.has_room(station):
            raise ValueError(f"station {station} is full")
        self.serving[user] = station
        self.counts[station] += 1

    def release(self, user: int) -> int:
        i = int(self.serving[user])
        if i == UNSERVED:
            raise ValueError(f"user {user} is not served")
        self.serving[user] = UNSERVED
        self.counts[i] -= 1
        return i

    def move(self, user: int, station: int) -> None:
        if self.serving[user] == station:
            raise ValueError(f"user {user} already served by station {station}")
        if not self.has_room(station):
            raise ValueError(f"station {station} is full")
        self.release(user)
        self.assign(user, station)

    def copy(self) -> "Assignment":
        other = Assignment(self.n_stations, self.n_users, self.n_max)
        other.serving = self.serving.copy()
        other.counts = self.counts.copy()
        return other

    def check(self) -> None:
        """Raise ``AssertionError`` if the two views disagree or a cap is exceeded."""
        served = self.serving[self.serving >= 0]
        assert np.all(self.serving >= UNSERVED) and np.all(served < self.n_stations)
        recount = np.bincount(served, minlength=self.n_stations)
        assert np.array_equal(recount, self.counts), "counts out of sync with serving"
        assert np.all(self.counts <= self.n_max), "station over capacity"

    def __eq__(self, other):
        return (
            isinstance(other, Assignment)
            and self.n_max == other.n_max
            and np.array_equal(self.serving, other.serving)
            and np.array_equal(self.counts, other.counts)
        )

    def __repr__(self):
        return f"Assignment(served={self.served_count}/{self.n_users}, counts={self.counts.tolist()})"


@dataclass(frozen=True)
class Thresholds:
    lambda1: float
    lambda2: tuple
    delta: float
    n_max: int

    def __post_init__(self):
        lam2 = tuple(float(x) for x in np.atleast_1d(self.lambda2))
        object.__setattr__(self, "lambda2", lam2)
        if not 0 < self.lambda1 < 1:
            raise ValueError("lambda1 must lie in (0, 1)")
        if any(not (self.lambda1 <= x < 1) for x in lam2):
            raise ValueError("every lambda2 must satisfy lambda1 <= lambda2 < 1")
        if not self.delta > 0:
            raise ValueError("delta must be > 0")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @classmethod
    def uniform(cls, n_stations, lambda1, lambda2, delta, n_max) -> "Thresholds":
        return cls(lambda1, (lambda2,) * n_stations, delta, n_max)

    def with_lambda2(self, lambda2) -> "Thresholds":
        return Thresholds(self.lambda1, tuple(lambda2), self.delta, self.n_max)


def _check_ascending(thresholds) -> np.ndarray:
    t = np.asarray(thresholds, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise ValueError("need at least one threshold")
    if np.any(np.diff(t) <= 0) or t[0] <= 0 or t[-1] >= 1:
        raise ValueError("thresholds must be strictly ascending inside (0, 1)")
    return t


def classify(eta: float, thresholds) -> int:
    """SINR level: 0 below the first threshold, ``l`` on ``[t_l, t_{l+1})``, ``q`` at or above the last."""
    t = _check_ascending(thresholds)
    if not 0 < eta < 1:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    return int(np.searchsorted(t, eta, side="right"))


@dataclass(frozen=True)
class LevelTable:
    levels: np.ndarray
    q: int
    thresholds: tuple = field(default=())


def level_table(eta, thresholds) -> LevelTable:
    """Vectorised :func:`classify` over a whole SINR matrix."""
    t = _check_ascending(thresholds)
    e = _eta_matrix(eta)
    if np.any((e <= 0) | (e >= 1)):
        raise ValueError("eta must lie in (0, 1)")
    levels = np.searchsorted(t, e, side="right")
    return LevelTable(levels, t.size, tuple(t))


def associate_proposed(snapshot, thr: Thresholds, return_thresholds: bool = False):
    """Threshold-adaptive cell association.

    Users below ``lambda1`` everywhere are discarded up front. Each pass
    collects, for every station with spare capacity, the pending users whose
    SINR clears that station's ``lambda2``; those users (ascending index) join
    their best candidate station. Stations that fill up leave the pool; the
    others lower ``lambda2`` by ``|n_max - N_i| * delta``, floored at
    ``lambda1``. The loop ends when no station or no user is left, or when a
    pass finds no candidate at all.

    With ``return_thresholds=True`` the final per-station thresholds are
    returned alongside the assignment.
    """
    eta = _eta_matrix(snapshot)
    n_s, n_u = eta.shape
    if len(thr.lambda2) != n_s:
        raise ValueError(f"{len(thr.lambda2)} lambda2 values for {n_s} stations")
    lam2 = np.array(thr.lambda2, dtype=float)
    assignment = Assignment(n_s, n_u, thr.n_max)
    free = np.ones(n_s, dtype=bool)
    pending = (eta >= thr.lambda1).any(axis=0)

    while free.any() and pending.any():
        # V_i restricted to available stations; column j is then W_j
        cand = (eta >= lam2[:, None]) & free[:, None] & pending[None, :]
        users = np.flatnonzero(cand.any(axis=0))
        if users.size == 0:
            break
        for j in users:
            w = np.flatnonzero(cand[:, j] & free)
            if w.size == 0:
                continue
            i = int(w[np.argmax(eta[w, j])])
            assignment.assign(j, i)
            pending[j] = False
            if assignment.counts[i] == thr.n_max:
                free[i] = False
        gap = np.abs(thr.n_max - assignment.counts[free])
        lam2[free] = np.maximum(lam2[free] - gap * thr.delta, thr.lambda1)

    if return_thresholds:
        return assignment, thr.with_lambda2(lam2)
    return assignment


def associate_scheme1(snapshot, n_max: int = 1) -> Assignment:
    """Capacity-greedy baseline: every station takes its single best user.

    When several stations want the same user, the user keeps the one that
    gives it the highest SINR; the losers retry on the best user nobody has
    claimed yet. ``n_max`` only sets the cap recorded on the result (used if
    the assignment is later handed to the handover procedures).
    """
    eta = _eta_matrix(snapshot)
    n_s, n_u = eta.shape
    assignment = Assignment(n_s, n_u, max(n_max, 1))
    claimed = np.zeros(n_u, dtype=bool)
    open_ = np.ones(n_s, dtype=bool)
    while open_.any() and not claimed.all():
        masked = np.where(claimed[None, :], -np.inf, eta)
        claims: dict[int, list[int]] = {}
        for i in np.flatnonzero(open_):
            claims.setdefault(int(np.argmax(masked[i])), []).append(int(i))
        for j in sorted(claims):
            stations = np.array(claims[j])
            winner = int(stations[np.argmax(eta[stations, j])])
            assignment.assign(j, winner)
            claimed[j] = True
            open_[winner] = False
    return assignment


def associate_scheme2(snapshot, lambda1: float, n_max: int) -> Assignment:
    """Fairness baseline: users in index order join their best station with room.

    A user is skipped when its best SINR over all stations is below ``lambda1``
    or when every station is full.
    """
    eta = _eta_matrix(snapshot)
    n_s, n_u = eta.shape
    assignment = Assignment(n_s, n_u, n_max)
    for j in range(n_u):
        if eta[:, j].max() < lambda1:
            continue
        room = np.flatnonzero(assignment.counts < n_max)
        if room.size == 0:
            break
        assignment.assign(j, int(room[np.argmax(eta[room, j])]))
    return assignment


def grouped_capacity(assignment: Assignment, snapshot, levels: LevelTable, bandwidth: float, per_station=False):
    """Capacity with each SINR level group replaced by its mean SINR.

    Returns ``sum_i B * sum_l (N_il / N_i) * log2(1 / (1 - mean_eta_il))``,
    or the per-station terms as an array when ``per_station`` is true.
    """
    eta = _eta_matrix(snapshot)
    users = np.flatnonzero(assignment.serving >= 0)
    st = assignment.serving[users]
    width = levels.q + 1
    key = st * width + levels.levels[st, users]
    n_keys = assignment.n_stations * width
    size = np.bincount(key, minlength=n_keys)
    total = np.bincount(key, weights=eta[st, users], minlength=n_keys)
    occupied = size > 0
    mean = total[occupied] / size[occupied]
    share = size[occupied] / assignment.counts[np.flatnonzero(occupied) // width]
    terms = bandwidth * share * (-np.log1p(-mean) / np.log(2.0))
    out = np.bincount(np.flatnonzero(occupied) // width, weights=terms, minlength=assignment.n_stations)
    return out if per_station else float(out.sum())
