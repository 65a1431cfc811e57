"""Sweep configuration and the INI-style config/LUT file readers."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields, replace
from enum import Enum
from pathlib import Path

import numpy as np

from eelink.detection import DEFAULT_GAPS, SnrGaps
from eelink.energy import DEFAULT_LUT, EnergyLut
from eelink.mode_space import DEFAULT_PHY, PhyConstants
from eelink.rate_adaptation import MAX_AGGREGATE


class Scenario(str, Enum):
    FIXED = "fixed_length"
    AGGREGATION = "aggregation"


class ConfigError(ValueError):
    pass


# Policy label -> (selection rule, mode subset). BASE is the reference
# receiver: four chains, nominal voltage, MMSE only.
POLICIES = ("GG", "EG", "GAEG", "BASE", "GG_DVFS", "EG_4RX")
_RA_ALIASES = {"all": list(POLICIES)}

SCENARIO_ALIASES = {"fixed": Scenario.FIXED, "fixed_length": Scenario.FIXED,
                    "agg": Scenario.AGGREGATION, "aggregation": Scenario.AGGREGATION}


@dataclass(frozen=True)
class SweepConfig:
    snr_grid: tuple[float, ...] = (15.0,)
    trials: int = 1000
    seed: int = 1
    scenario: Scenario = Scenario.FIXED
    l_max_frames: int = 1
    schemes: tuple[str, ...] = ("GG", "EG", "GAEG", "BASE")
    k: float = 1.05
    lut: EnergyLut = DEFAULT_LUT
    gaps: SnrGaps = DEFAULT_GAPS
    phy: PhyConstants = DEFAULT_PHY
    channel_model: str = "auto"  # auto: flat for fixed length, selective for aggregation
    rms_delay_ns: float = 30.0
    base_frame_bits: int = 12000
    output_path: Path | None = None
    summary: str = "none"

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not self.snr_grid:
            raise ConfigError("SNR grid is empty")
        if not all(np.isfinite(s) for s in self.snr_grid):
            raise ConfigError("SNR values must be finite")
        if not 1 <= self.l_max_frames <= MAX_AGGREGATE:
            raise ConfigError(f"l_max_frames must lie in 1..{MAX_AGGREGATE}")
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        if self.scenario is Scenario.FIXED and self.l_max_frames != 1:
            raise ConfigError("fixed-length scenario uses single frames (l_max_frames = 1)")
        bad = [s for s in self.schemes if s not in POLICIES]
        if bad or not self.schemes:
            raise ConfigError(f"unknown or missing schemes {bad}; choose from {POLICIES}")
        if len(set(self.schemes)) != len(self.schemes):
            raise ConfigError("duplicate scheme")
        if not self.k > 1:
            raise ConfigError("k must exceed 1")
        if self.channel_model not in ("auto", "flat", "selective"):
            raise ConfigError(f"unknown channel model {self.channel_model!r}")
        if not self.rms_delay_ns > 0:
            raise ConfigError("rms_delay_ns must be positive")
        if self.base_frame_bits < 1:
            raise ConfigError("base frame must hold at least one bit")
        if self.summary not in ("none", "modes", "surface", "curves"):
            raise ConfigError(f"unknown summary {self.summary!r}")

    @property
    def resolved_channel(self) -> str:
        if self.channel_model != "auto":
            return self.channel_model
        return "selective" if self.scenario is Scenario.AGGREGATION else "flat"


def parse_snr(text: str) -> tuple[float, ...]:
    """``"0,5,10"`` or inclusive ``"start:step:stop"``."""
    text = text.strip()
    try:
        if ":" in text:
            start, step, stop = (float(p) for p in text.split(":"))
            if step <= 0 or stop < start:
                raise ConfigError(f"bad SNR range {text!r}")
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return tuple(float(round(start + i * step, 9)) for i in range(n))
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot parse SNR grid {text!r}") from None


def parse_schemes(text: str) -> tuple[str, ...]:
    out: list[str] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        names = _RA_ALIASES.get(part.lower(), [part.upper()])
        out.extend(n for n in names if n not in out)
    return tuple(out)


def load_lut(path: str | Path) -> EnergyLut:
    """Flat ``key = value`` file; ``#`` comments. Unknown keys are errors."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read LUT file {path}: {exc}") from None
    parser = _parser()
    try:
        parser.read_string("[lut]\n" + text, source=str(path))
        return EnergyLut.from_mapping(dict(parser["lut"]))
    except (configparser.Error, KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _parser() -> configparser.ConfigParser:
    p = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    p.optionxform = str
    return p


_SECTIONS = {
    "sweep": {"snr", "trials", "seed", "scenario", "l_max", "out", "summary", "base_frame_bits"},
    "channel": {"model", "rms_delay_ns"},
    "ra": {"schemes", "k"},
    "oracle": {"gap_mmse", "gap_lrald"},
    "lut": None,  # validated by EnergyLut.from_mapping
    "phy": {f.name for f in fields(PhyConstants)},
}


def load_config(path: str | Path) -> SweepConfig:
    path = Path(path)
    parser = _parser()
    try:
        with path.open() as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_sections({s: dict(parser[s]) for s in parser.sections()}, base_dir=path.parent)


def config_from_sections(sections: dict[str, dict[str, str]], base_dir: Path | None = None,
                         base: SweepConfig | None = None) -> SweepConfig:
    for name, items in sections.items():
        if name not in _SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
        allowed = _SECTIONS[name]
        if allowed is not None:
            unknown = set(items) - allowed
            if unknown:
                raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
    cfg = base or SweepConfig()
    kw: dict = {}
    try:
        sweep = sections.get("sweep", {})
        if "snr" in sweep:
            kw["snr_grid"] = parse_snr(sweep["snr"])
        if "trials" in sweep:
            kw["trials"] = int(sweep["trials"])
        if "seed" in sweep:
            kw["seed"] = int(sweep["seed"])
        if "scenario" in sweep:
            kw["scenario"] = _scenario(sweep["scenario"])
        if "l_max" in sweep:
            kw["l_max_frames"] = int(sweep["l_max"])
        if "base_frame_bits" in sweep:
            kw["base_frame_bits"] = int(sweep["base_frame_bits"])
        if "out" in sweep:
            kw["output_path"] = _resolve(sweep["out"], base_dir)
        if "summary" in sweep:
            kw["summary"] = sweep["summary"].strip()
        ch = sections.get("channel", {})
        if "model" in ch:
            kw["channel_model"] = ch["model"].strip()
        if "rms_delay_ns" in ch:
            kw["rms_delay_ns"] = float(ch["rms_delay_ns"])
        ra = sections.get("ra", {})
        if "schemes" in ra:
            kw["schemes"] = parse_schemes(ra["schemes"])
        if "k" in ra:
            kw["k"] = float(ra["k"])
        oracle = sections.get("oracle", {})
        if oracle:
            kw["gaps"] = SnrGaps(float(oracle.get("gap_mmse", cfg.gaps.mmse)),
                                 float(oracle.get("gap_lrald", cfg.gaps.lrald)))
        if "lut" in sections:
            lut_items = dict(sections["lut"])
            lut_file = lut_items.pop("file", None)
            lut = load_lut(_resolve(lut_file, base_dir)) if lut_file else cfg.lut
            if lut_items:
                merged = lut.to_mapping()
                merged.update(lut_items)
                lut = EnergyLut.from_mapping(merged)
            kw["lut"] = lut
        if "phy" in sections:
            kw["phy"] = replace(cfg.phy, **{
                key: (int(v) if isinstance(getattr(cfg.phy, key), int) else float(v))
                for key, v in sections["phy"].items()})
        return replace(cfg, **kw)
    except ConfigError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def _scenario(text: str) -> Scenario:
    try:
        return SCENARIO_ALIASES[text.strip().lower()]
    except KeyError:
        raise ConfigError(f"unknown scenario {text!r}") from None


def _resolve(p: str, base_dir: Path | None) -> Path:
    path = Path(p.strip())
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    return path
