"""Command-line front end: figure sweeps, single scenarios and epsilon calibration.

Usage::

    femtonet figure fig2 --seed 42 --out fig2.csv
    femtonet run --config scenario.cfg --set n_users=60
    femtonet calibrate --samples 10000 --out eps.csv
"""

from __future__ import annotations

import argparse
import csv
import enum
import os
import sys
import tempfile
import typing
from dataclasses import dataclass, fields

from .handover import calibrate_epsilon
from .harness import ConfigError, ScenarioConfig, SweepSpec, run_once, run_sweep, seed_stream, station_layout

__all__ = [
    "FIGURES",
    "FigureDef",
    "OutputTable",
    "parse_config",
    "figure_table",
    "cmd_figure",
    "cmd_calibrate",
    "cmd_run",
    "read_table",
    "write_table",
    "main",
]

TABLE_HEADER = ("swept_value", "scheme", "metric", "mean", "ci95_half_width", "runs")


@dataclass(frozen=True)
class FigureDef:
    variable: str
    values: tuple
    scheme_axis: str
    schemes: tuple
    metric: str
    overrides: tuple = ()


_N_SWEEP = (20, 40, 60, 80, 100)
_ASSOC = ("proposed", "scheme1", "scheme2")
_HANDOVER = ("heuristic", "proposed")
_STATIC = (("ticks", 0), ("handover_scheme", "none"))
_MOBILE = (("association_scheme", "proposed"),)

FIGURES = {
    "fig2": FigureDef("n_users", _N_SWEEP, "association_scheme", _ASSOC, "total_capacity", _STATIC),
    "fig3": FigureDef("n_users", _N_SWEEP, "association_scheme", _ASSOC, "jain_index", _STATIC),
    "fig4": FigureDef("n_users", _N_SWEEP, "handover_scheme", _HANDOVER, "handovers", _MOBILE),
    "fig5": FigureDef("n_max", (2, 4, 6, 8, 10), "handover_scheme", _HANDOVER, "handovers", _MOBILE),
}


@dataclass
class OutputTable:
    header: tuple
    rows: list

    def __eq__(self, other):
        return isinstance(other, OutputTable) and tuple(self.header) == tuple(other.header) and [
            tuple(map(str, r)) for r in self.rows
        ] == [tuple(map(str, r)) for r in other.rows]


# --- config parsing -------------------------------------------------------

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _field_types():
    hints = typing.get_type_hints(ScenarioConfig)
    return {f.name: hints[f.name] for f in fields(ScenarioConfig)}


def _parse_value(key: str, raw: str, typ):
    raw = raw.strip()
    if typ is bool:
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if typ is int:
        return int(raw)
    if typ is float:
        return float(raw)
    if isinstance(typ, type) and issubclass(typ, enum.Enum):
        try:
            return typ(raw.lower())
        except ValueError:
            raise ValueError(f"expected one of {', '.join(e.value for e in typ)}, got {raw!r}") from None
    if key == "femto_positions":
        if not raw:
            return ()
        pairs = []
        for item in raw.split(","):
            x, y = item.split(":")
            pairs.append((float(x), float(y)))
        return tuple(pairs)
    # remaining tuple fields are float vectors
    return tuple(float(x) for x in raw.split(",") if x.strip())


def parse_config(path=None, overrides=()) -> ScenarioConfig:
    """Read a flat ``key = value`` file, then apply ``key=value`` overrides.

    Omitted keys keep their defaults. Raises :class:`ConfigError` naming the
    offending key (and the line, for file entries).
    """
    types = _field_types()
    values: dict = {}
    origin: dict = {}

    def take(key, raw, where):
        key = key.strip()
        if key not in types:
            raise ConfigError(key, f"unknown key ({where})")
        try:
            values[key] = _parse_value(key, raw, types[key])
        except ValueError as exc:
            raise ConfigError(key, f"{exc} ({where})") from None
        origin[key] = where

    if path is not None:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                text = line.split("#", 1)[0].strip()
                if not text:
                    continue
                if "=" not in text:
                    raise ConfigError("<syntax>", f"expected 'key = value' ({path}:{lineno})")
                k, v = text.split("=", 1)
                take(k, v, f"{path}:{lineno}")
    for item in overrides:
        if "=" not in item:
            raise ConfigError("<override>", f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        take(k, v, f"override {item!r}")
    try:
        return ScenarioConfig(**values)
    except ConfigError as exc:
        where = origin.get(exc.field)
        if where:
            raise ConfigError(exc.field, f"{str(exc).split(': ', 1)[1]} ({where})") from None
        raise


# --- tables ---------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_table(table: OutputTable, out_path) -> None:
    """Write CSV atomically: a temp file in the target directory, then rename."""
    out_path = os.fspath(out_path)
    directory = os.path.dirname(os.path.abspath(out_path))
    fd, tmp = tempfile.mkstemp(prefix=".femtonet-", suffix=".csv", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(table.header)
            for row in table.rows:
                w.writerow([_fmt(x) for x in row])
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_table(path) -> OutputTable:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return OutputTable(tuple(rows[0]), [tuple(r) for r in rows[1:]])


# --- commands -------------------------------------------------------------

def figure_spec(figure_id: str, config: ScenarioConfig) -> tuple[SweepSpec, str]:
    if figure_id not in FIGURES:
        raise ConfigError("figure", f"must be one of {', '.join(FIGURES)}")
    fd = FIGURES[figure_id]
    base = config.with_(**dict(fd.overrides))
    metric = fd.metric
    if metric == "handovers":
        metric = "handovers_per_user" if config.handovers_per_user else "handover_count"
    return SweepSpec(fd.variable, fd.values, base, fd.schemes, fd.scheme_axis), metric


def figure_table(figure_id: str, config: ScenarioConfig, workers: int = 1) -> OutputTable:
    if config.runs < 2:
        raise ConfigError("runs", "figure sweeps need at least 2 runs for confidence intervals")
    spec, metric = figure_spec(figure_id, config)
    result = run_sweep(spec, workers=workers)
    rows = []
    for value, scheme, _ in spec.cells():
        s = result.summaries[(value, scheme)]
        rows.append((value, scheme, metric, s.mean[metric], s.ci95_half_width[metric], s.runs))
    return OutputTable(TABLE_HEADER, rows)


def cmd_figure(figure_id: str, config: ScenarioConfig, out_path, workers: int = 1) -> OutputTable:
    table = figure_table(figure_id, config, workers)
    write_table(table, out_path)
    return table


RUN_HEADER = ("run", "total_capacity", "jain_index", "served_count", "handover_count",
              "handovers_per_user", "drop_count", "admission_count")


def cmd_run(config: ScenarioConfig, out_path) -> OutputTable:
    rows = []
    for r in range(config.runs):
        rec = run_once(config, r)
        rows.append((r, rec.total_capacity, rec.jain_index, rec.served_count, rec.handover_count,
                     rec.handovers_per_user, rec.drop_count, rec.admission_count))
    table = OutputTable(RUN_HEADER, rows)
    write_table(table, out_path)
    return table


def cmd_calibrate(config: ScenarioConfig, samples_per_cell: int, out_path) -> OutputTable:
    if samples_per_cell < 100:
        raise ConfigError("samples", "samples_per_cell must be >= 100")
    cal = calibrate_epsilon(
        config.stations, station_layout(config), config.region, samples_per_cell,
        seed=seed_stream(config.seed, (5, 1)),
    )
    for msg in cal.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    rows = [(i, float(e), int(n)) for i, (e, n) in enumerate(zip(cal.epsilon, cal.samples))]
    table = OutputTable(("index", "epsilon", "samples"), rows)
    write_table(table, out_path)
    return table


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value scenario file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
    common.add_argument("--seed", type=int, help="master seed (u64)")
    common.add_argument("--runs", type=int, help="independent runs per point")
    common.add_argument("--out", required=True, help="output CSV path")

    p = argparse.ArgumentParser(prog="femtonet", description="Femtocell association/handover simulator")
    sub = p.add_subparsers(dest="command", required=True)
    f = sub.add_parser("figure", parents=[common], help="sweep data for one figure")
    f.add_argument("figure_id", choices=sorted(FIGURES))
    f.add_argument("--workers", type=int, default=1, help="process-pool size")
    sub.add_parser("run", parents=[common], help="run a single scenario")
    c = sub.add_parser("calibrate", parents=[common], help="estimate per-station epsilon")
    c.add_argument("--samples", type=int, default=10_000, help="samples per dominance region")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        overrides = list(args.set)
        if args.seed is not None:
            overrides.append(f"seed={args.seed}")
        if args.runs is not None:
            overrides.append(f"runs={args.runs}")
        config = parse_config(args.config, overrides)
        if args.command == "figure":
            cmd_figure(args.figure_id, config, args.out, workers=args.workers)
        elif args.command == "run":
            cmd_run(config, args.out)
        else:
            cmd_calibrate(config, args.samples, args.out)
    except (ConfigError, OSError) as exc:
        print(f"femtonet: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
