"""Path loss, shadowed channel gains and the fractional SINR matrix.

Power is handled in linear watts internally; dB and dBm only appear at the
edges (station parameters, shadowing samples, noise configuration).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "D_MIN",
    "StationKind",
    "StationParams",
    "RadioGlobals",
    "RadioSnapshot",
    "macro_station",
    "femto_station",
    "dbm_to_watts",
    "watts_to_dbm",
    "path_loss_db",
    "channel_gain_db",
    "distances",
    "mean_rx_power",
    "build_snapshot",
]

D_MIN = 1.0  # metres; near-field floor for the log-distance model


class StationKind(enum.Enum):
    MACRO = "macro"
    FEMTO = "femto"


@dataclass(frozen=True)
class StationParams:
    kind: StationKind
    transmit_power: float  # dBm
    pathloss_intercept: float  # dB
    pathloss_slope: float  # dB per decade
    shadow_stddev: float = 6.0  # dB

    def __post_init__(self):
        for name in ("transmit_power", "pathloss_intercept", "pathloss_slope", "shadow_stddev"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.shadow_stddev < 0:
            raise ValueError("shadow_stddev must be >= 0")


def macro_station(transmit_power=43.0, intercept=28.0, slope=35.0, shadow=6.0) -> StationParams:
    return StationParams(StationKind.MACRO, transmit_power, intercept, slope, shadow)


def femto_station(transmit_power=31.5, intercept=38.5, slope=20.0, shadow=6.0) -> StationParams:
    return StationParams(StationKind.FEMTO, transmit_power, intercept, slope, shadow)


@dataclass(frozen=True)
class RadioGlobals:
    bandwidth: float = 10e6  # Hz
    noise_power: float = 10 ** ((-104.0 - 30.0) / 10.0)  # watts, kTB over 10 MHz

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be > 0")
        if not self.noise_power > 0:
            raise ValueError("noise_power must be > 0")


@dataclass(frozen=True)
class RadioSnapshot:
    """Received powers and fractional SINRs for every (station, user) link.

    Attributes
    ----------
    rx_power : ndarray, shape (n_stations, n_users)
        Received power in watts, ``|h_ij|^2 P_i``.
    total_rx : ndarray, shape (n_users,)
        Sum of received power over all stations for each user.
    eta : ndarray, shape (n_stations, n_users)
        ``rx_power / (noise + total_rx)``; strictly inside (0, 1).
    """

    rx_power: np.ndarray
    total_rx: np.ndarray
    eta: np.ndarray
    noise_power: float

    @property
    def n_stations(self) -> int:
        return self.eta.shape[0]

    @property
    def n_users(self) -> int:
        return self.eta.shape[1]

    @classmethod
    def from_rx_power(cls, rx_power, noise_power: float) -> "RadioSnapshot":
        rx = np.asarray(rx_power, dtype=float)
        if rx.ndim != 2:
            raise ValueError("rx_power must be a 2-D (stations x users) array")
        if not noise_power > 0:
            raise ValueError("noise_power must be > 0")
        if np.any(~np.isfinite(rx)) or np.any(rx <= 0):
            raise ValueError("received powers must be finite and positive")
        total = rx.sum(axis=0)
        eta = rx / (noise_power + total)
        return cls(rx, total, eta, float(noise_power))


def dbm_to_watts(p):
    """Convert dBm to watts; works elementwise on arrays."""
    w = 10.0 ** ((np.asarray(p, dtype=float) - 30.0) / 10.0)
    return float(w) if w.ndim == 0 else w


def watts_to_dbm(w):
    return 10.0 * np.log10(w) + 30.0


def path_loss_db(station: StationParams, distance):
    """Log-distance path loss ``intercept + slope * log10(d)`` in dB.

    Distances below :data:`D_MIN` are clamped to it.
    """
    d = np.asarray(distance, dtype=float)
    if not np.all(np.isfinite(d)):
        raise ValueError("distance must be finite")
    d = np.maximum(d, D_MIN)
    pl = station.pathloss_intercept + station.pathloss_slope * np.log10(d)
    return float(pl) if pl.ndim == 0 else pl


def channel_gain_db(station: StationParams, distance, shadow_db=0.0):
    """``10 log10 |h|^2``: negated path loss minus a shadowing sample."""
    g = -np.asarray(path_loss_db(station, distance)) - np.asarray(shadow_db, dtype=float)
    return float(g) if g.ndim == 0 else g


def distances(station_xy, user_xy) -> np.ndarray:
    """Euclidean distance matrix, shape (n_stations, n_users)."""
    s = np.asarray(station_xy, dtype=float).reshape(-1, 2)
    u = np.asarray(user_xy, dtype=float).reshape(-1, 2)
    return np.hypot(s[:, None, 0] - u[None, :, 0], s[:, None, 1] - u[None, :, 1])


def _station_arrays(stations):
    p = np.array([s.transmit_power for s in stations], dtype=float)
    a = np.array([s.pathloss_intercept for s in stations], dtype=float)
    b = np.array([s.pathloss_slope for s in stations], dtype=float)
    return p, a, b


def mean_rx_power(stations, station_xy, user_xy) -> np.ndarray:
    """Received power in watts without shadowing, shape (n_stations, n_users)."""
    p, a, b = _station_arrays(stations)
    d = np.maximum(distances(station_xy, user_xy), D_MIN)
    gain_db = -(a[:, None] + b[:, None] * np.log10(d))
    return 10.0 ** ((p[:, None] - 30.0 + gain_db) / 10.0)


def build_snapshot(stations, station_xy, user_xy, shadows_db, globals_: RadioGlobals) -> RadioSnapshot:
    """Assemble the per-tick :class:`RadioSnapshot`.

    Parameters
    ----------
    stations : sequence of StationParams
        Index 0 must be the macro station.
    station_xy : array_like, shape (n_stations, 2)
    user_xy : array_like, shape (n_users, 2)
    shadows_db : array_like, shape (n_stations, n_users)
        Shadowing samples in dB, already scaled by each station's stddev.
    globals_ : RadioGlobals
    """
    station_xy = np.asarray(station_xy, dtype=float).reshape(-1, 2)
    user_xy = np.asarray(user_xy, dtype=float).reshape(-1, 2)
    shadows = np.asarray(shadows_db, dtype=float)
    n_s, n_u = len(stations), user_xy.shape[0]
    if station_xy.shape[0] != n_s:
        raise ValueError(f"{n_s} stations but {station_xy.shape[0]} station positions")
    if shadows.shape != (n_s, n_u):
        raise ValueError(f"shadows must have shape {(n_s, n_u)}, got {shadows.shape}")
    if not np.all(np.isfinite(user_xy)):
        raise ValueError("user positions must be finite")
    rx = mean_rx_power(stations, station_xy, user_xy) * 10.0 ** (-shadows / 10.0)
    return RadioSnapshot.from_rx_power(rx, globals_.noise_power)
