"""Scenario configuration, the tick loop, sweeps and random-stream management."""

from __future__ import annotations

import enum
import functools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import association as assoc
from . import handover as ho
from .metrics import MetricsRecord, jain_index, per_user_capacity, summarize_runs
from .mobility import Disc, move, place_initial
from .radio import RadioGlobals, build_snapshot, dbm_to_watts, femto_station, macro_station

__all__ = [
    "ConfigError",
    "AssociationScheme",
    "HandoverScheme",
    "FemtoLayout",
    "ScenarioConfig",
    "SweepSpec",
    "SweepResult",
    "seed_stream",
    "station_layout",
    "coverage_model",
    "run_once",
    "run_sweep",
    "AuditError",
]

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class AuditError(AssertionError):
    pass


class AssociationScheme(str, enum.Enum):
    PROPOSED = "proposed"
    SCHEME1 = "scheme1"
    SCHEME2 = "scheme2"


class HandoverScheme(str, enum.Enum):
    PROPOSED = "proposed"
    HEURISTIC = "heuristic"
    NONE = "none"


class FemtoLayout(str, enum.Enum):
    GRID3X3 = "grid3x3"
    UNIFORM = "uniform"
    EXPLICIT = "explicit"


# stream purposes for seed_stream labels
_LAYOUT, _PLACE, _WALK, _SHADOW = 1, 2, 3, 4


@dataclass(frozen=True)
class ScenarioConfig:
    m_femto: int = 9
    n_users: int = 100
    bandwidth: float = 10e6
    macro_power_dbm: float = 43.0
    femto_power_dbm: float = 31.5
    macro_pl_intercept: float = 28.0
    macro_pl_slope: float = 35.0
    femto_pl_intercept: float = 38.5
    femto_pl_slope: float = 20.0
    macro_shadow_db: float = 6.0
    femto_shadow_db: float = 6.0
    noise_power_dbm: float = -104.0
    macro_radius: float = 500.0
    femto_layout: FemtoLayout = FemtoLayout.GRID3X3
    grid_spacing: float = 250.0
    femto_positions: tuple = ()
    n_max: int = 10
    lambda1: float = 0.02
    lambda2_init: float = 0.5
    delta: float = 0.003  # small steps keep lambda2 high for longer, see README
    gamma: float = 1.0  # act only when the posterior rounds to 1 in double precision
    window_len: int = 10
    tick_seconds: float = 1.0
    ticks: int = 600
    max_speed: float = 8.3
    runs: int = 10
    seed: int = 0
    association_scheme: AssociationScheme = AssociationScheme.PROPOSED
    handover_scheme: HandoverScheme = HandoverScheme.PROPOSED
    epsilon: tuple = ()
    priors: tuple = ()
    epsilon_samples: int = 5000
    prior_samples: int = 200_000
    handovers_per_user: bool = True
    audit: bool = False

    def __post_init__(self):
        for name, enum_cls in (
            ("femto_layout", FemtoLayout),
            ("association_scheme", AssociationScheme),
            ("handover_scheme", HandoverScheme),
        ):
            try:
                object.__setattr__(self, name, enum_cls(getattr(self, name)))
            except ValueError:
                choices = ", ".join(e.value for e in enum_cls)
                raise ConfigError(name, f"must be one of {choices}") from None
        object.__setattr__(self, "femto_positions", tuple(tuple(map(float, p)) for p in self.femto_positions))
        object.__setattr__(self, "epsilon", tuple(map(float, self.epsilon)))
        object.__setattr__(self, "priors", tuple(map(float, self.priors)))
        self.validate()

    def validate(self) -> None:
        def need(ok, name, msg):
            if not ok:
                raise ConfigError(name, msg)

        need(self.m_femto >= 0, "m_femto", "must be >= 0")
        need(self.n_users >= 1, "n_users", "must be >= 1")
        need(np.isfinite(self.bandwidth) and self.bandwidth > 0, "bandwidth", "must be > 0")
        for name in ("macro_power_dbm", "femto_power_dbm", "macro_pl_intercept", "macro_pl_slope",
                     "femto_pl_intercept", "femto_pl_slope", "noise_power_dbm"):
            need(np.isfinite(getattr(self, name)), name, "must be finite")
        need(self.macro_shadow_db >= 0, "macro_shadow_db", "must be >= 0")
        need(self.femto_shadow_db >= 0, "femto_shadow_db", "must be >= 0")
        need(self.macro_radius > 0, "macro_radius", "must be > 0")
        need(self.grid_spacing > 0, "grid_spacing", "must be > 0")
        if self.femto_layout is FemtoLayout.GRID3X3:
            need(self.m_femto == 9, "femto_layout", "grid3x3 needs m_femto = 9")
        if self.femto_layout is FemtoLayout.EXPLICIT:
            need(len(self.femto_positions) == self.m_femto, "femto_positions",
                 f"expected {self.m_femto} positions, got {len(self.femto_positions)}")
        need(self.n_max >= 1, "n_max", "must be >= 1")
        need(0 < self.lambda1 < 1, "lambda1", "must lie in (0, 1)")
        need(self.lambda1 <= self.lambda2_init < 1, "lambda2_init", "must lie in [lambda1, 1)")
        need(self.delta > 0, "delta", "must be > 0")
        need(0 < self.gamma <= 1, "gamma", "must lie in (0, 1]")
        need(self.window_len >= 1, "window_len", "must be >= 1")
        need(self.tick_seconds > 0, "tick_seconds", "must be > 0")
        need(self.ticks >= 0, "ticks", "must be >= 0")
        need(0 <= self.max_speed, "max_speed", "must be >= 0")
        need(self.runs >= 1, "runs", "must be >= 1")
        need(0 <= self.seed < 2**64, "seed", "must be an unsigned 64-bit integer")
        n_s = self.m_femto + 1
        if self.epsilon:
            need(len(self.epsilon) == n_s, "epsilon", f"expected {n_s} values")
            need(all(0 < e < 1 for e in self.epsilon), "epsilon", "values must lie in (0, 1)")
        if self.priors:
            need(len(self.priors) == n_s, "priors", f"expected {n_s} values")
            need(all(p >= 0 for p in self.priors) and abs(sum(self.priors) - 1) < 1e-9,
                 "priors", "must be non-negative and sum to 1")
        need(self.epsilon_samples >= 100, "epsilon_samples", "must be >= 100")
        need(self.prior_samples >= 1, "prior_samples", "must be >= 1")

    @property
    def n_stations(self) -> int:
        return self.m_femto + 1

    @property
    def region(self) -> Disc:
        return Disc((0.0, 0.0), self.macro_radius)

    @property
    def stations(self) -> tuple:
        macro = macro_station(self.macro_power_dbm, self.macro_pl_intercept, self.macro_pl_slope, self.macro_shadow_db)
        femto = femto_station(self.femto_power_dbm, self.femto_pl_intercept, self.femto_pl_slope, self.femto_shadow_db)
        return (macro,) + (femto,) * self.m_femto

    @property
    def radio_globals(self) -> RadioGlobals:
        return RadioGlobals(self.bandwidth, dbm_to_watts(self.noise_power_dbm))

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, enum.Enum):
                d[k] = v.value
        return d


def seed_stream(master_seed: int, labels=()) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by a master seed and integer labels.

    Equal ``(master_seed, labels)`` give identical streams; distinct labels
    give statistically independent ones.
    """
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(x) for x in labels))
    return np.random.Generator(np.random.Philox(ss))


def station_layout(config: ScenarioConfig, master_seed: int | None = None) -> np.ndarray:
    """Station coordinates, macro first at the origin; shape (M+1, 2)."""
    if config.femto_layout is FemtoLayout.GRID3X3:
        g = (np.arange(3) - 1) * config.grid_spacing
        xx, yy = np.meshgrid(g, g, indexing="xy")
        femtos = np.column_stack([xx.ravel(), yy.ravel()])
    elif config.femto_layout is FemtoLayout.EXPLICIT:
        femtos = np.array(config.femto_positions, dtype=float).reshape(-1, 2)
    else:
        rng = seed_stream(config.seed if master_seed is None else master_seed, (_LAYOUT,))
        femtos = place_initial(config.m_femto, config.region, rng)
    return np.vstack([[0.0, 0.0], femtos])


@functools.lru_cache(maxsize=64)
def _coverage_cached(stations, xy_key, radius, eps_samples, prior_samples, seed):
    xy = np.array(xy_key, dtype=float)
    region = Disc((0.0, 0.0), radius)
    cal = ho.calibrate_epsilon(stations, xy, region, eps_samples, seed=seed_stream(seed, (5, 1)))
    pri = ho.dominance_priors(stations, xy, region, prior_samples, seed=seed_stream(seed, (5, 2)))
    return tuple(cal.epsilon.tolist()), tuple(pri.tolist())


def coverage_model(config: ScenarioConfig, station_xy=None) -> ho.CoverageModel:
    """Coverage model for the handover procedures.

    Explicit ``epsilon`` / ``priors`` in the config win; otherwise both are
    estimated by Monte Carlo on the station layout (cached per geometry).
    """
    if station_xy is None:
        station_xy = station_layout(config)
    eps, pri = config.epsilon, config.priors
    if not (eps and pri):
        key = tuple(map(tuple, np.round(np.asarray(station_xy, dtype=float), 9)))
        est_eps, est_pri = _coverage_cached(
            config.stations, key, config.macro_radius, config.epsilon_samples, config.prior_samples, config.seed
        )
        eps = eps or est_eps
        pri = pri or est_pri
    return ho.CoverageModel(pri, eps, config.gamma, config.window_len)


def _initial_association(config, snapshot):
    n_s = config.n_stations
    thr = assoc.Thresholds.uniform(n_s, config.lambda1, config.lambda2_init, config.delta, config.n_max)
    scheme = config.association_scheme
    if scheme is AssociationScheme.PROPOSED:
        return assoc.associate_proposed(snapshot, thr, return_thresholds=True)
    if scheme is AssociationScheme.SCHEME1:
        return assoc.associate_scheme1(snapshot, n_max=config.n_max), thr
    return assoc.associate_scheme2(snapshot, config.lambda1, config.n_max), thr


def _audit(assignment, snapshot, positions, region, tick):
    try:
        assignment.check()
    except AssertionError as exc:
        raise AuditError(f"tick {tick}: {exc}") from None
    eta = snapshot.eta
    if not (np.all(eta > 0) and np.all(eta < 1)):
        raise AuditError(f"tick {tick}: eta outside (0, 1)")
    if not np.all(region.contains(positions)):
        raise AuditError(f"tick {tick}: user left the region")


def run_once(config: ScenarioConfig, run_index: int = 0) -> MetricsRecord:
    """One simulation run: place, associate, then move/sample/decide for ``ticks`` ticks.

    Every random draw comes from per-user sub-streams keyed by
    ``(config.seed + run_index, purpose, user)``, so mobility and shadowing are
    identical across schemes for the same run index.
    """
    master = config.seed + run_index
    n_s, n_u, ticks = config.n_stations, config.n_users, config.ticks
    region = config.region
    stations = config.stations
    radio = config.radio_globals
    station_xy = station_layout(config, master)
    shadow_std = np.array([s.shadow_stddev for s in stations])

    pos = np.empty((n_u, 2))
    speed = np.empty((ticks, n_u))
    heading = np.empty((ticks, n_u))
    shadows = np.empty((ticks + 1, n_s, n_u))
    for j in range(n_u):
        pos[j] = place_initial(1, region, seed_stream(master, (_PLACE, j)))[0]
        walk = seed_stream(master, (_WALK, j))
        speed[:, j] = walk.uniform(0.0, config.max_speed, ticks)
        heading[:, j] = walk.uniform(0.0, 2 * np.pi, ticks)
        shadows[:, :, j] = seed_stream(master, (_SHADOW, j)).standard_normal((ticks + 1, n_s))
    shadows *= shadow_std[None, :, None]

    snapshot = build_snapshot(stations, station_xy, pos, shadows[0], radio)
    assignment, thr = _initial_association(config, snapshot)
    if config.audit:
        _audit(assignment, snapshot, pos, region, 0)

    handovers = drops = admissions = 0
    scheme = config.handover_scheme
    deciding = scheme is not HandoverScheme.NONE and ticks >= config.window_len
    model = coverage_model(config, station_xy) if deciding else None
    bank = ho.WindowBank(n_s, n_u, config.window_len)
    hd = 0.0

    for t in range(1, ticks + 1):
        pos, hd = move(pos, speed[t - 1], heading[t - 1], config.tick_seconds, region)
        snapshot = build_snapshot(stations, station_xy, pos, shadows[t], radio)
        if scheme is not HandoverScheme.NONE:
            bank.push(snapshot.eta)
            if bank.full:
                views = bank.views()
                dropped = set()
                for j in np.flatnonzero(assignment.serving >= 0):
                    i = int(assignment.serving[j])
                    if scheme is HandoverScheme.PROPOSED:
                        d = ho.handover_step(j, i, views[j], model, thr, assignment)
                    else:
                        d = ho.heuristic_handover_step(j, i, views[j], thr, assignment)
                    if d.action is ho.Action.DROP:
                        assignment.release(j)
                        dropped.add(int(j))
                        drops += 1
                    elif d.action is ho.Action.HANDOVER:
                        assignment.move(j, d.station)
                        handovers += 1
                for j in np.flatnonzero(assignment.serving < 0):
                    if int(j) in dropped:
                        continue
                    d = ho.admission_step(j, views[j], model, thr, assignment)
                    if d.action is ho.Action.CONNECT:
                        assignment.assign(j, d.station)
                        admissions += 1
                bank.clear()
        if config.audit:
            _audit(assignment, snapshot, pos, region, t)

    caps = per_user_capacity(assignment, snapshot, config.bandwidth)
    return MetricsRecord(
        total_capacity=float(caps.sum()),
        jain_index=jain_index(caps),
        served_count=assignment.served_count,
        handover_count=handovers,
        drop_count=drops,
        admission_count=admissions,
        n_users=n_u,
        per_user_capacity=caps,
        jain_degenerate=not np.any(caps > 0),
    )


@dataclass(frozen=True)
class SweepSpec:
    """Sweep of one config field across values, for several schemes.

    ``scheme_axis`` names the config field the schemes vary
    (``association_scheme`` or ``handover_scheme``).
    """

    variable: str
    values: tuple
    base: ScenarioConfig
    schemes: tuple = ("proposed",)
    scheme_axis: str = "association_scheme"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        if self.variable not in ("n_users", "n_max"):
            raise ConfigError("variable", "must be n_users or n_max")
        if not self.values or list(self.values) != sorted(set(self.values)):
            raise ConfigError("values", "must be non-empty and strictly ascending")
        if self.scheme_axis not in ("association_scheme", "handover_scheme"):
            raise ConfigError("scheme_axis", "must be association_scheme or handover_scheme")
        if not self.schemes:
            raise ConfigError("schemes", "must be non-empty")

    def cells(self):
        """``(value, scheme, config)`` triples in output order."""
        out = []
        for v in self.values:
            for s in sorted(self.schemes):
                try:
                    cfg = self.base.with_(**{self.variable: v, self.scheme_axis: s})
                except ConfigError as exc:
                    raise ConfigError(f"sweep[{self.variable}={v}, scheme={s}].{exc.field}", str(exc)) from None
                out.append((v, s, cfg))
        return out


@dataclass
class SweepResult:
    spec: SweepSpec
    records: dict = field(default_factory=dict)
    summaries: dict = field(default_factory=dict)


def _run_cell(args):
    cfg, run_index = args
    return run_once(cfg, run_index)


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Run ``base.runs`` runs per (value, scheme) cell and summarise them.

    With ``workers > 1`` runs go to a process pool; results are identical to a
    serial sweep because each run depends only on its config and run index.
    """
    cells = spec.cells()
    jobs = [(cfg, r) for _, _, cfg in cells for r in range(cfg.runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(_run_cell, jobs, chunksize=1))
    else:
        flat = []
        for cfg, r in jobs:
            try:
                flat.append(run_once(cfg, r))
            except Exception as exc:
                raise RuntimeError(
                    f"run failed at {spec.variable}={getattr(cfg, spec.variable)}, "
                    f"{spec.scheme_axis}={getattr(cfg, spec.scheme_axis).value}, run {r}: {exc}"
                ) from exc
    result = SweepResult(spec)
    pos = 0
    for v, s, cfg in cells:
        recs = flat[pos:pos + cfg.runs]
        pos += cfg.runs
        result.records[(v, s)] = recs
        if len(recs) >= 2:
            result.summaries[(v, s)] = summarize_runs(recs)
    return result
