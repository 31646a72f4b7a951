"""Memoryless random-walk mobility inside a circular macrocell."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["MAX_SPEED", "Disc", "MobilityState", "move", "walk_step", "draw_velocity", "place_initial"]

MAX_SPEED = 8.3  # m/s


@dataclass(frozen=True)
class Disc:
    center: tuple = (0.0, 0.0)
    radius: float = 500.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be > 0")

    def contains(self, xy, tol=1e-9) -> np.ndarray:
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        r = np.hypot(xy[:, 0] - self.center[0], xy[:, 1] - self.center[1])
        return r <= self.radius * (1 + tol)


@dataclass(frozen=True)
class MobilityState:
    position: tuple
    speed: float = 0.0
    heading: float = 0.0

    def __post_init__(self):
        if not 0 <= self.speed <= MAX_SPEED:
            raise ValueError(f"speed must lie in [0, {MAX_SPEED}]")
        if not 0 <= self.heading < 2 * np.pi:
            raise ValueError("heading must lie in [0, 2*pi)")


def move(position, speed, heading, dt: float, region: Disc):
    """Displace points by ``speed * dt`` along ``heading``, bouncing off the rim.

    A move that leaves the disc is reflected once about the tangent at the
    crossing point. Works on a single point or on arrays of shape (n, 2).

    Returns
    -------
    position : ndarray
    heading : ndarray
        Heading after reflection, in [0, 2*pi).
    """
    p0 = np.asarray(position, dtype=float)
    single = p0.ndim == 1
    p0 = p0.reshape(-1, 2)
    speed = np.broadcast_to(np.asarray(speed, dtype=float), p0.shape[:1])
    heading = np.broadcast_to(np.asarray(heading, dtype=float), p0.shape[:1]).copy()
    c = np.asarray(region.center, dtype=float)
    R = region.radius

    step = (speed * dt)[:, None] * np.column_stack([np.cos(heading), np.sin(heading)])
    p1 = p0 + step
    out = np.hypot(*(p1 - c).T) > R
    if out.any():
        d = step[out]
        f = p0[out] - c
        a = np.einsum("ij,ij->i", d, d)
        b = 2 * np.einsum("ij,ij->i", f, d)
        cc = np.einsum("ij,ij->i", f, f) - R * R
        t = (-b + np.sqrt(np.maximum(b * b - 4 * a * cc, 0.0))) / (2 * a)
        t = np.clip(t, 0.0, 1.0)
        hit = p0[out] + t[:, None] * d
        n = (hit - c) / R
        rest = (1 - t)[:, None] * d
        refl = rest - 2 * np.einsum("ij,ij->i", rest, n)[:, None] * n
        new = hit + refl
        # steps longer than a chord would need a second bounce; pull them back in
        r = np.hypot(*(new - c).T)
        far = r > R
        if far.any():
            new[far] = c + (new[far] - c) * (R * (1 - 1e-12) / r[far])[:, None]
        p1[out] = new
        dirn = d - 2 * np.einsum("ij,ij->i", d, n)[:, None] * n
        heading[out] = np.arctan2(dirn[:, 1], dirn[:, 0])
    heading = np.mod(heading, 2 * np.pi)
    heading[heading >= 2 * np.pi] = 0.0
    if single:
        return p1[0], float(heading[0])
    return p1, heading


def draw_velocity(rng: np.random.Generator, size=None, max_speed: float = MAX_SPEED):
    """Fresh speed ~ U[0, max_speed] and heading ~ U[0, 2*pi)."""
    speed = rng.uniform(0.0, max_speed, size)
    heading = rng.uniform(0.0, 2 * np.pi, size)
    return speed, heading


def walk_step(state: MobilityState, dt: float, region: Disc, rng: np.random.Generator) -> MobilityState:
    if not dt > 0:
        raise ValueError("dt must be > 0")
    speed, heading = draw_velocity(rng)
    pos, heading = move(state.position, speed, heading, dt, region)
    return MobilityState(tuple(pos), float(speed), heading)


def place_initial(n_users: int, region: Disc, rng: np.random.Generator) -> np.ndarray:
    """Area-uniform positions inside ``region``, shape (n_users, 2)."""
    if n_users < 0:
        raise ValueError("n_users must be >= 0")
    r = region.radius * np.sqrt(rng.uniform(0.0, 1.0, n_users))
    theta = rng.uniform(0.0, 2 * np.pi, n_users)
    return np.column_stack([region.center[0] + r * np.cos(theta), region.center[1] + r * np.sin(theta)])
