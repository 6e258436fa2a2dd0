"""Flat ``key = value`` experiment configuration with paper-default hyperparameters."""
import csv
import math
from dataclasses import dataclass, fields
from pathlib import Path

from smrls.pendulum import TRAINERS, TrajectorySpec

EXPERIMENTS = ("case_a", "case_b", "case_c", "global_rbf", "custom")


class ConfigError(Exception):
    pass


class MissingFile(ConfigError, FileNotFoundError):
    pass


class ConfigParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


@dataclass
class ExperimentConfig:
    experiment: str = "custom"
    trainer: str = "smrls"
    neurons_per_dim: int = 3
    dimension: int = 2
    width: float = 1.0
    partitions_per_dim: int = 100
    eta: float = 0.02
    lam: float = 0.999
    p0_scale: float = 10.0
    w0: float = 0.0
    guard: float = 1e-10
    g: float = 9.8
    m_c: float = 0.1
    m: float = 0.02
    l: float = 0.2
    l_after: float = 0.3
    perturb_time: float = math.inf
    trajectory: str = "spiral"
    duration: float = 100.0
    period: float = 0.01
    seed: int = 0
    control_points: int = 16
    loop_period: float = 300.0
    x1_min: float = -1.0
    x1_max: float = 1.0
    x2_min: float = -1.0
    x2_max: float = 1.0
    snapshots: tuple = ()
    windows: tuple = ()
    lk_windows: tuple = ()
    ergodic_eval: bool = False
    segments: int = 10
    output: str = ""

    @property
    def lower_bounds(self):
        return (self.x1_min, self.x2_min)

    @property
    def upper_bounds(self):
        return (self.x1_max, self.x2_max)

    def trajectory_spec(self):
        return TrajectorySpec(
            kind=self.trajectory, duration=self.duration, period=self.period,
            l_before=self.l, l_after=self.l_after, switch_time=self.perturb_time,
            seed=self.seed, n_control=self.control_points, loop_period=self.loop_period,
        )

    def resolved_items(self):
        """``(key, text)`` pairs in file-key spelling, round-trippable by the parser."""
        for f in fields(self):
            key = _FILE_KEY.get(f.name, f.name)
            yield key, _format_value(getattr(self, f.name))


# file keys that differ from attribute names
_FILE_KEY = {"lam": "lambda"}
_ATTR = {v: k for k, v in _FILE_KEY.items()}

EXPERIMENT_DEFAULTS = {
    "case_a": dict(trajectory="repetitive_perturbed", duration=100.0, perturb_time=50.0,
                   snapshots=(52.0, 60.0, 75.0, 100.0), windows=((0.0, 50.0), (55.0, 100.0))),
    "case_b": dict(trajectory="spiral", duration=100.0, snapshots=(50.0, 100.0),
                   windows=((0.0, 90.0),), lk_windows=((0.0, 90.0),)),
    "case_c": dict(trajectory="random_nurbs_like", duration=300.0, snapshots=(100.0, 200.0, 300.0),
                   ergodic_eval=True),
    "global_rbf": dict(trajectory="spiral", duration=100.0, width=2.0, snapshots=(50.0, 100.0),
                       windows=((0.0, 90.0),), lk_windows=((0.0, 90.0),)),
    "custom": dict(),
}


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, tuple):
        if v and isinstance(v[0], tuple):
            return ",".join(f"{_format_value(a)}:{_format_value(b)}" for a, b in v)
        return ",".join(_format_value(x) for x in v)
    return str(v)


def _parse_bool(text):
    low = text.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float(text):
    if text.lower() in ("none", "inf", "never"):
        return math.inf
    return float(text)


def _parse_floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _parse_windows(text):
    out = []
    for part in text.split(","):
        if not part.strip():
            continue
        a, b = part.split(":")
        out.append((float(a), float(b)))
    return tuple(out)


_PARSERS = {
    "experiment": str, "trainer": str, "trajectory": str, "output": str,
    "neurons_per_dim": int, "dimension": int, "partitions_per_dim": int, "seed": int,
    "control_points": int, "segments": int,
    "perturb_time": _parse_float,
    "snapshots": _parse_floats,
    "windows": _parse_windows, "lk_windows": _parse_windows,
    "ergodic_eval": _parse_bool,
}


def _parse_value(attr, text):
    return _PARSERS.get(attr, float)(text)


def _read_pairs(path):
    """Yield ``(line_number, key, value_text)`` from a ``.conf`` or resolved ``.csv``."""
    if path.suffix == ".csv":
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0] != ["key", "value"]:
            raise ConfigParseError(f"{path}:1: expected header 'key,value'")
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != 2:
                raise ConfigParseError(f"{path}:{lineno}: expected two columns")
            yield lineno, row[0], row[1]
        return
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigParseError(f"{path}:{lineno}: empty key")
        yield lineno, key, value


def parse_config(path, overrides=None):
    """Read and validate a configuration file, filling experiment and paper defaults."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"config file not found: {path}")
    values = {}
    valid = {f.name for f in fields(ExperimentConfig)}
    for lineno, key, text in _read_pairs(path):
        attr = _ATTR.get(key, key)
        if attr not in valid or key in _FILE_KEY:
            raise ValidationError(key, f"unknown key (line {lineno})")
        if attr in values:
            raise ConfigParseError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            values[attr] = _parse_value(attr, text)
        except ValueError as exc:
            raise ConfigParseError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
    values.update(overrides or {})
    return build_config(values)


def build_config(values):
    """Config from explicit ``values`` layered over experiment defaults."""
    values = dict(values)
    experiment = values.get("experiment", "custom")
    if experiment not in EXPERIMENTS:
        raise ValidationError("experiment", f"must be one of {', '.join(EXPERIMENTS)}")
    merged = dict(EXPERIMENT_DEFAULTS[experiment])
    merged.update(values)
    if merged.get("trainer") == "rls":
        if "lam" in values and values["lam"] != 1.0:
            raise ValidationError("lambda", "trainer rls is ordinary RLS; lambda must be 1")
        merged["lam"] = 1.0
    cfg = ExperimentConfig(**merged)
    if not cfg.output:
        cfg.output = f"results/{cfg.experiment}_{cfg.trainer}"
    validate(cfg)
    return cfg


def validate(cfg):
    def bad(key, msg):
        raise ValidationError(_FILE_KEY.get(key, key), msg)

    if cfg.trainer not in TRAINERS:
        bad("trainer", f"must be one of {', '.join(TRAINERS)}")
    if not 0.0 < cfg.lam <= 1.0:
        bad("lam", f"must lie in (0, 1], got {cfg.lam}")
    if cfg.eta <= 0:
        bad("eta", "must be positive")
    if cfg.p0_scale <= 0:
        bad("p0_scale", "must be positive")
    if cfg.neurons_per_dim < 1:
        bad("neurons_per_dim", "must be at least 1")
    if cfg.dimension != 2:
        bad("dimension", "the pendulum plant has a two-dimensional state")
    if cfg.width <= 0:
        bad("width", "must be positive")
    if cfg.partitions_per_dim < 1:
        bad("partitions_per_dim", "must be at least 1")
    if cfg.guard <= 0:
        bad("guard", "must be positive")
    for key in ("g", "m_c", "m", "l", "l_after"):
        if getattr(cfg, key) <= 0:
            bad(key, "must be positive")
    if cfg.x1_max <= cfg.x1_min:
        bad("x1_max", "must exceed x1_min")
    if cfg.x2_max <= cfg.x2_min:
        bad("x2_max", "must exceed x2_min")
    if cfg.segments < 1:
        bad("segments", "must be at least 1")
    if cfg.control_points < 3:
        bad("control_points", "need at least 3 control points")
    if cfg.loop_period <= 0:
        bad("loop_period", "must be positive")
    try:
        spec = cfg.trajectory_spec()
    except ValueError as exc:
        bad("trajectory", str(exc))
    for t in cfg.snapshots:
        if not 0 <= t <= cfg.duration:
            bad("snapshots", f"time {t:g} outside [0, {cfg.duration:g}]")
    for key in ("windows", "lk_windows"):
        for a, b in getattr(cfg, key):
            if not 0 <= a < b:
                bad(key, f"window {a:g}:{b:g} must satisfy 0 <= start < stop")
    return spec
