"""Flat ``section.key = value`` experiment configs."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..hypotheses import parse_hypothesis
from ..learners import LEARNERS, LearnerConfig
from .distributions import DistributionError, SyntheticDistribution, finite_distribution, labeled_support, mixture, uniform_box

SECTIONS = ("experiment", "learner", "dist")


class ConfigError(ValueError):
    """A malformed or inconsistent config; the message names the location."""


@dataclass
class Entry:
    value: str
    line: int


class RawConfig:
    def __init__(self, entries: dict[str, Entry], source: str):
        self.entries = entries
        self.source = source
        self.used: set[str] = set()

    def where(self, key: str) -> str:
        e = self.entries.get(key)
        return f"{self.source}:{e.line}" if e else self.source

    def error(self, key: str, msg: str) -> ConfigError:
        return ConfigError(f"{self.where(key)}: {key}: {msg}")

    def has(self, key: str) -> bool:
        return key in self.entries

    def get(self, key: str, conv=str, default=None, required: bool = False):
        if key not in self.entries:
            if required:
                raise ConfigError(f"{self.source}: missing required key {key}")
            return default
        self.used.add(key)
        raw = self.entries[key].value
        try:
            return conv(raw)
        except (ValueError, DistributionError) as exc:
            raise self.error(key, f"cannot parse {raw!r}: {exc}") from None

    def unused(self) -> list[str]:
        return sorted(set(self.entries) - self.used)


def parse_config_text(text: str, source: str = "<config>") -> RawConfig:
    entries: dict[str, Entry] = {}
    for no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{no}: expected 'section.key = value', got {line.strip()!r}")
        key, value = (part.strip() for part in body.split("=", 1))
        section, dot, name = key.partition(".")
        if not dot or not name or section not in SECTIONS:
            raise ConfigError(f"{source}:{no}: key {key!r} must be one of {', '.join(s + '.<key>' for s in SECTIONS)}")
        if key in entries:
            raise ConfigError(f"{source}:{no}: duplicate key {key} (first set on line {entries[key].line})")
        entries[key] = Entry(value, no)
    return RawConfig(entries, source)


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.replace(",", " ").split()]


def _point(s: str) -> np.ndarray:
    vals = [float(v) for v in s.split()]
    if not vals:
        raise ValueError("empty point")
    return np.array(vals)


def _atoms(s: str) -> list[tuple]:
    out = []
    for item in s.split(","):
        parts = item.split(":")
        if len(parts) != 3:
            raise ValueError(f"atom {item.strip()!r} is not 'x:y:weight'")
        out.append((_point(parts[0]), int(parts[1]), float(parts[2])))
    return out


def _sweep(s: str) -> list[tuple[int, int]]:
    out = []
    for item in s.split(","):
        m, _, n = item.strip().partition(":")
        out.append((int(m), int(n) if n else 0))
    if not out or any(m < 1 or n < 0 for m, n in out):
        raise ValueError("sweep points need m >= 1 and n_unlabeled >= 0")
    return out


def _target(s: str):
    return parse_hypothesis(s)


def make_distribution(raw: RawConfig) -> SyntheticDistribution:
    kind = raw.get("dist.kind", str, required=True)
    noise = raw.get("dist.noise", float, 0.0)
    try:
        if kind == "finite":
            return finite_distribution(raw.get("dist.atoms", _atoms, required=True), noise)
        if kind == "labeled-support":
            pts = raw.get("dist.points", _floats, required=True)
            target = raw.get("dist.target", _target, required=True)
            weights = raw.get("dist.weights", _floats)
            if weights is not None and len(weights) != len(pts):
                raise raw.error("dist.weights", f"{len(weights)} weights for {len(pts)} points")
            return labeled_support(np.array(pts)[:, None], target, weights, noise)
        if kind == "uniform-box":
            lo = raw.get("dist.lo", _point, required=True)
            hi = raw.get("dist.hi", _point, required=True)
            return uniform_box(lo, hi, raw.get("dist.target", _target, required=True), noise)
        if kind == "mixture":
            target = raw.get("dist.target", _target, required=True)
            comps, ws = [], []
            for item in raw.get("dist.boxes", str, required=True).split(","):
                parts = item.split(":")
                if len(parts) != 3:
                    raise raw.error("dist.boxes", f"box {item.strip()!r} is not 'weight:lo:hi'")
                ws.append(float(parts[0]))
                comps.append(uniform_box(_point(parts[1]), _point(parts[2]), target, noise))
            return mixture(comps, ws)
    except DistributionError as exc:
        raise ConfigError(f"{raw.where('dist.kind')}: dist: {exc}") from None
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{raw.where('dist.kind')}: dist: {exc}") from None
    raise raw.error("dist.kind", f"unknown distribution kind {kind!r}")


@dataclass
class ExperimentConfig:
    learner: str
    learner_cfg: LearnerConfig
    dist: SyntheticDistribution
    sweep: list
    trials: int = 20
    epsilon: float = 0.1
    delta: float = 0.1
    seed: int = 0
    out: str | None = None
    workers: int = 1
    timing: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("experiment.trials must be >= 1")
        if not (0 < self.epsilon < 1) or not (0 < self.delta < 1):
            raise ConfigError("epsilon and delta must lie in (0, 1)")
        if self.learner not in LEARNERS:
            raise ConfigError(f"unknown learner {self.learner!r}; expected one of {sorted(LEARNERS)}")
        if self.workers < 1:
            raise ConfigError("experiment.workers must be >= 1")


def load_config(text: str, source: str = "<config>") -> ExperimentConfig:
    raw = parse_config_text(text, source)
    seed = raw.get("experiment.seed", int, 0)
    try:
        lcfg = LearnerConfig(
            r=raw.get("learner.r", float, required=True),
            gamma=raw.get("learner.gamma", float, required=True),
            d=raw.get("learner.d", int, 1),
            p=raw.get("learner.p", float, 2.0),
            hclass=raw.get("learner.class", str, "thresholds"),
            mc_samples=raw.get("learner.mc_samples", int, 101),
            smoothing=raw.get("learner.smoothing", str, "auto"),
            seed=seed,
            labeling_cap=raw.get("learner.labeling_cap", int, 1 << 22),
            eta=raw.get("learner.eta", float),
            net_c=raw.get("learner.net_c", float, 3.0),
            labeling_loop=raw.get("learner.labeling_loop", str, "literal"),
            pseudocode_reference_rerm=raw.get("learner.pseudocode_reference_rerm", _bool, False),
            cover_offset=raw.get("learner.cover_offset", float),
        )
        lcfg.make_class()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{source}: learner: {exc}") from None
    dist = make_distribution(raw)
    if dist.dim != lcfg.d:
        raise raw.error("learner.d", f"learner dimension {lcfg.d} differs from the distribution's {dist.dim}")
    cfg = ExperimentConfig(
        learner=raw.get("experiment.learner", str, required=True),
        learner_cfg=lcfg,
        dist=dist,
        sweep=raw.get("experiment.sweep", _sweep, required=True),
        trials=raw.get("experiment.trials", int, 20),
        epsilon=raw.get("experiment.epsilon", float, 0.1),
        delta=raw.get("experiment.delta", float, 0.1),
        seed=seed,
        out=raw.get("experiment.out", str),
        workers=raw.get("experiment.workers", int, 1),
        timing=raw.get("experiment.timing", _bool, False),
    )
    left = raw.unused()
    if left:
        raise raw.error(left[0], "unknown key")
    return cfg


def read_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return load_config(text, path)
