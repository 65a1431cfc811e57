"""Command-line entry point: ``eelink-sim``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from eelink import sim
from eelink.config import (
    ConfigError,
    Scenario,
    SweepConfig,
    _scenario,
    load_config,
    load_lut,
    parse_schemes,
    parse_snr,
)

log = logging.getLogger("eelink")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="eelink-sim",
        description="Monte-Carlo sweep of energy-aware rate adaptation over an 802.11n-style MIMO link.")
    p.add_argument("--config", type=Path, help="INI file with [sweep] [channel] [ra] [oracle] [lut] [phy]")
    p.add_argument("--snr", help="comma list or start:step:stop (dB)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--scenario", choices=["fixed", "agg"])
    p.add_argument("--l-max", type=int, dest="l_max", help="maximum aggregate size in 1.5 kB frames")
    p.add_argument("--ra", help="gg, eg, gaeg, base, gg_dvfs, eg_4rx or all (comma separated)")
    p.add_argument("--k", type=float, help="GAEG energy bound factor (> 1)")
    p.add_argument("--lut", type=Path, help="energy LUT file (flat key = value)")
    p.add_argument("--out", type=Path, help="trial CSV path (default: stdout)")
    p.add_argument("--summary", choices=["none", "modes", "surface", "curves"])
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> SweepConfig:
    cfg = load_config(args.config) if args.config else SweepConfig()
    kw = {}
    if args.snr is not None:
        kw["snr_grid"] = parse_snr(args.snr)
    if args.trials is not None:
        kw["trials"] = args.trials
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.scenario is not None:
        kw["scenario"] = _scenario(args.scenario)
    if args.l_max is not None:
        kw["l_max_frames"] = args.l_max
    elif kw.get("scenario") is Scenario.AGGREGATION and cfg.scenario is not Scenario.AGGREGATION:
        kw["l_max_frames"] = 16
    if args.ra is not None:
        kw["schemes"] = parse_schemes(args.ra)
    if args.k is not None:
        kw["k"] = args.k
    if args.lut is not None:
        kw["lut"] = load_lut(args.lut)
    if args.out is not None:
        kw["output_path"] = args.out
    if args.summary is not None:
        kw["summary"] = args.summary
    try:
        return replace(cfg, **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _write_main(cfg: SweepConfig, records) -> int:
    if cfg.output_path is None:
        return sim.write_records(records, sys.stdout)
    with open(cfg.output_path, "w", newline="") as fh:
        return sim.write_records(records, fh)


def _summary_target(cfg: SweepConfig, suffix: str):
    if cfg.output_path is None:
        return None
    return sim.summary_path(cfg.output_path, suffix)


def _emit_table(cfg: SweepConfig, suffix: str, writer) -> None:
    target = _summary_target(cfg, suffix)
    if target is None:
        sys.stderr.write(f"# {suffix}\n")
        writer(sys.stderr)
        return
    with open(target, "w", newline="") as fh:
        writer(fh)
    log.info("wrote %s", target)


def run(cfg: SweepConfig) -> None:
    if cfg.summary == "surface":
        if cfg.scenario is not Scenario.AGGREGATION:
            raise ConfigError("the efficiency surface needs the aggregation scenario")
        needed = [s for s in ("EG", "BASE") if s not in cfg.schemes]
        if needed:
            raise ConfigError(f"the efficiency surface needs schemes {needed}")
        grid = list(range(1, cfg.l_max_frames + 1))
        by_lmax = sim.run_surface(cfg, grid)
        n = _write_main(cfg, by_lmax[cfg.l_max_frames])
        points = sim.efficiency_surface(by_lmax)
        _emit_table(cfg, "surface", lambda fh: sim.write_table(points, fh))
    else:
        records = sim.run_sweep(cfg)
        n = _write_main(cfg, records)
        if cfg.summary == "modes":
            _emit_table(cfg, "modes", lambda fh: sim.write_mode_tables(records, fh))
        elif cfg.summary == "curves":
            _emit_table(cfg, "curves", lambda fh: sim.write_table(sim.scheme_curves(records), fh))
    log.info("%d records", n)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        run(cfg)
    except ConfigError as exc:
        print(f"eelink-sim: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
