"""JSON scenario files for the command-line runner.

One file describes one run.  Top-level keys:

``mode``        optional; must match the subcommand when present
``seed``        unsigned 64-bit integer (default 0)
``instance``    one system: ``arrival_rates``, ``cost_rates``, and either
                ``service_rate`` or ``load``; optional ``alpha`` and ``priorities``
``instances``   list of such systems
``sampling``    random instances: ``num_classes``, ``c0``, ``lam0``, ``alpha``,
                ``load``, ``sample_count``
``sweep``       axis name -> list of values; axes are the ``sampling`` keys
                except ``sample_count``
``sweep_mode``  ``one-at-a-time`` (default) or ``product``
``solver``      overrides for :class:`~dpsgame.equilibrium.SolverConfig`
``sim``         overrides for :class:`~dpsgame.sim.SimConfig` (seed excluded)
``tagged``      list of priorities at which to estimate the tagged sojourn
``network``     ``service_rates``, ``arrival_rates``, ``cost_rates``, ``routes``
``limiting``    ``cost`` and ``arrival`` distributions, ``service_rate``,
                ``alpha``, ``class_counts``, ``cost_grid``
``divergence``  ``ratios``, ``load``, ``alpha``
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields
from pathlib import Path

from .distributions import PointMasses, uniform
from .equilibrium import SolverConfig
from .params import SystemParams
from .sim import SimConfig

MODES = ("compare", "metrics", "simulate", "hte", "exact-ne", "class-ne", "class-hte",
         "limiting", "network", "divergence-probe")
SWEEP_AXES = ("num_classes", "c0", "lam0", "alpha", "load")
SAMPLING_DEFAULTS = dict(num_classes=10, c0=1.0, lam0=1.0, alpha=1.0, load=0.9, sample_count=100)
TOP_KEYS = {"mode", "seed", "instance", "instances", "sampling", "sweep", "sweep_mode", "solver",
            "sim", "tagged", "network", "limiting", "divergence", "description"}


class ConfigError(ValueError):
    """The scenario file is malformed or inconsistent."""


@dataclass(frozen=True)
class ScenarioConfig:
    mode: str
    raw: dict
    seed: int = 0

    @property
    def digest(self) -> str:
        """SHA-256 of the canonical JSON form, seed included."""
        doc = dict(self.raw, seed=self.seed, mode=self.mode)
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def section(self, key: str, default=None):
        return self.raw.get(key, default)

    def solver(self) -> SolverConfig:
        return _build(SolverConfig, self.raw.get("solver", {}), "solver", tuples=("bracket",))

    def sim(self) -> SimConfig:
        d = dict(self.raw.get("sim", {}))
        if "rng_seed" in d:
            raise ConfigError("set the simulation seed with the top-level 'seed' key")
        d["rng_seed"] = self.seed
        return _build(SimConfig, d, "sim")

    def sampling(self) -> dict:
        s = dict(SAMPLING_DEFAULTS)
        extra = set(self.raw.get("sampling", {})) - set(s)
        if extra:
            raise ConfigError(f"unknown sampling keys: {sorted(extra)}")
        s.update(self.raw.get("sampling", {}))
        if int(s["sample_count"]) < 0:
            raise ConfigError("sample_count must be non-negative")
        return s

    def sweep_points(self) -> list[dict]:
        """Sampling settings for each sweep point, in output order."""
        base = self.sampling()
        sweep = self.raw.get("sweep", {})
        bad = set(sweep) - set(SWEEP_AXES)
        if bad:
            raise ConfigError(f"unknown sweep axes: {sorted(bad)}")
        for k, v in sweep.items():
            if not isinstance(v, list) or not v:
                raise ConfigError(f"sweep axis {k!r} must be a nonempty list")
        if not sweep:
            return [dict(base, axis="baseline")]
        mode = self.raw.get("sweep_mode", "one-at-a-time")
        if mode == "one-at-a-time":
            return [dict(base, **{k: v}, axis=k) for k, vals in sweep.items() for v in vals]
        if mode == "product":
            pts = [dict(base, axis="product")]
            for k, vals in sweep.items():
                pts = [dict(p, **{k: v}) for p in pts for v in vals]
            return pts
        raise ConfigError(f"unknown sweep_mode {mode!r}")

    def instances(self) -> list[tuple[SystemParams, object]]:
        """Explicit instances as ``(params, priorities or None)``."""
        docs = list(self.raw.get("instances", []))
        if "instance" in self.raw:
            docs.insert(0, self.raw["instance"])
        return [parse_instance(d) for d in docs]


def _build(cls, d: dict, name: str, tuples=()):
    known = {f.name for f in fields(cls)}
    extra = set(d) - known
    if extra:
        raise ConfigError(f"unknown {name} keys: {sorted(extra)}")
    d = {k: (tuple(v) if k in tuples else v) for k, v in d.items()}
    try:
        return cls(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {name} settings: {exc}") from exc


def parse_instance(d: dict) -> tuple[SystemParams, object]:
    try:
        lam, c = d["arrival_rates"], d["cost_rates"]
    except KeyError as exc:
        raise ConfigError(f"instance is missing {exc}") from exc
    if ("service_rate" in d) == ("load" in d):
        raise ConfigError("give exactly one of service_rate and load")
    try:
        params = SystemParams.from_rates(lam, c, d.get("service_rate"), d.get("alpha", 1.0),
                                         load=d.get("load"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad instance: {exc}") from exc
    pri = d.get("priorities")
    if pri is not None:
        if len(pri) != len(lam):
            raise ConfigError("priorities need one entry per class")
        # follow the canonical (descending-cost, ties merged) order
        order = list(params.class_index)
        merged = {}
        for raw_i, k in enumerate(order):
            if merged.setdefault(k, pri[raw_i]) != pri[raw_i]:
                raise ConfigError("classes with equal cost need equal priorities")
        pri = [merged[k] for k in range(params.num_classes)]
    return params, pri


def parse_distribution(d: dict):
    kind = d.get("type")
    if kind == "uniform":
        return uniform(float(d["lo"]), float(d["hi"]))
    if kind == "point_masses":
        return PointMasses(d["values"], d.get("weights", [1.0] * len(d["values"])))
    raise ConfigError(f"unknown distribution type {kind!r}")


def load_config(path: str | Path, mode: str, seed: int | None = None) -> ScenarioConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw, mode, seed)


def config_from_dict(raw: dict, mode: str, seed: int | None = None) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("the scenario must be a JSON object")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    extra = set(raw) - TOP_KEYS
    if extra:
        raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
    if raw.get("mode", mode) != mode:
        raise ConfigError(f"file is for mode {raw['mode']!r}, not {mode!r}")
    s = raw.get("seed", 0) if seed is None else seed
    if not isinstance(s, int) or isinstance(s, bool) or not 0 <= s < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return ScenarioConfig(mode=mode, raw={k: v for k, v in raw.items() if k not in ("mode", "seed")}, seed=s)
