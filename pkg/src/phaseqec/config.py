"""Experiment configuration: an INI file with named sections.

Example (every key optional; defaults depend on ``[experiment] kind``)::

    [experiment]
    kind = tce               ; alanine | tce | custom
    circuit = encoder.txt    ; custom only: encoder network, decoder is its inverse

    [model]
    kind = independent       ; correlated | independent
    tau = 1.0                ; correlated time constant, s
    t2 = 1.1, 0.6, 3.0       ; per-spin T2, s (spin 1 carries the data)

    [delays]
    start = 0.006
    stop = 1.2
    count = 9
    spacing = log            ; linear | log

    [run]
    mode = both              ; decode | correct | both
    term_by_term = false
    slope_window = 4
    workers = 1

    [montecarlo]
    enabled = false
    samples = 100000
    seed = 12345

    [output]
    directory = out
"""

from __future__ import annotations

import configparser
import dataclasses
import io
from dataclasses import dataclass, field

import numpy as np

from .channels import Correlated, Independent

EXPERIMENTS = ("alanine", "tce", "custom")
MODES = ("decode", "correct", "both")

TCE_T2 = (1.1, 0.6, 3.0)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DelayGrid:
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError(f"delay count must be >= 1, got {self.count}")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"delay spacing must be linear or log, got {self.spacing!r}")
        if self.start < 0 or self.stop < 0:
            raise ConfigError("delays must be nonnegative")
        if self.count > 1 and not self.stop > self.start:
            raise ConfigError(f"delay stop ({self.stop}) must exceed start ({self.start})")
        if self.spacing == "log" and self.start <= 0:
            raise ConfigError("log-spaced delays need start > 0")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "tce"
    model: str = "independent"
    tau: float = 1.0
    t2: tuple[float, float, float] = TCE_T2
    delays: DelayGrid = field(default_factory=lambda: default_grid("tce", TCE_T2, 1.0))
    mode: str = "both"
    term_by_term: bool = False
    slope_window: int = 4
    workers: int = 1
    mc_enabled: bool = False
    mc_samples: int = 100_000
    mc_seed: int = 12345
    output: str = "out"
    circuit: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.model not in ("correlated", "independent"):
            raise ConfigError(f"model kind must be correlated or independent, got {self.model!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.output:
            raise ConfigError("output directory must be a non-empty path")
        if self.slope_window < 3:
            raise ConfigError(f"slope window must be >= 3, got {self.slope_window}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.mc_samples < 1:
            raise ConfigError(f"Monte Carlo samples must be >= 1, got {self.mc_samples}")
        try:
            self.dephasing_model()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def dephasing_model(self):
        if self.model == "correlated":
            return Correlated(self.tau)
        return Independent(tuple(self.t2))

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    # --- serialization ----------------------------------------------------

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp["experiment"] = {"kind": self.experiment}
        if self.circuit is not None:
            cp["experiment"]["circuit"] = self.circuit
        cp["model"] = {
            "kind": self.model,
            "tau": repr(float(self.tau)),
            "t2": ", ".join(repr(float(x)) for x in self.t2),
        }
        cp["delays"] = {
            "start": repr(float(self.delays.start)),
            "stop": repr(float(self.delays.stop)),
            "count": str(self.delays.count),
            "spacing": self.delays.spacing,
        }
        cp["run"] = {
            "mode": self.mode,
            "term_by_term": str(self.term_by_term).lower(),
            "slope_window": str(self.slope_window),
            "workers": str(self.workers),
        }
        cp["montecarlo"] = {
            "enabled": str(self.mc_enabled).lower(),
            "samples": str(self.mc_samples),
            "seed": str(self.mc_seed),
        }
        cp["output"] = {"directory": self.output}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(
        cls, text: str, source: str = "<config>", experiment: str | None = None
    ) -> "ExperimentConfig":
        """Parse INI text.  ``experiment`` is the kind expected by the caller:
        it fills in a missing ``[experiment] kind`` and a conflicting one is
        an error."""
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        try:
            cp.read_string(text, source=source)
        except configparser.Error as exc:
            raise ConfigError(f"{source}: {exc}") from None
        known = {"experiment", "model", "delays", "run", "montecarlo", "output"}
        unknown = set(cp.sections()) - known
        if unknown:
            raise ConfigError(f"{source}: unknown section(s) {sorted(unknown)}")
        try:
            return _from_parser(cp, experiment)
        except ConfigError as exc:
            raise ConfigError(f"{source}: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"{source}: {exc}") from None

    @classmethod
    def from_file(cls, path, experiment: str | None = None) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as f:
                text = f.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        return cls.from_ini(text, str(path), experiment)


def default_grid(experiment: str, t2, tau: float, model: str | None = None) -> DelayGrid:
    """Default delays.

    TCE and custom: 9 log-spaced points over ``[0.01, 2] * min(T2)`` (or tau
    for the correlated model).  Alanine: 41 linear points over ``[0, 2 tau]``.
    """
    if experiment == "alanine":
        return DelayGrid(0.0, 2.0 * tau, 41, "linear")
    scale = tau if model == "correlated" else min(t2)
    return DelayGrid(0.01 * scale, 2.0 * scale, 9, "log")


def defaults_for(experiment: str) -> ExperimentConfig:
    if experiment == "alanine":
        return ExperimentConfig(
            experiment="alanine",
            model="correlated",
            delays=default_grid("alanine", TCE_T2, 1.0),
        )
    return ExperimentConfig(experiment=experiment)


def _getbool(section, key, default):
    if key not in section:
        return default
    try:
        return section.getboolean(key)
    except ValueError:
        raise ConfigError(f"[{section.name}] {key} must be a boolean, got {section[key]!r}") from None


def _get(section, key, conv, default):
    if key not in section:
        return default
    raw = section[key]
    try:
        return conv(raw)
    except ValueError:
        raise ConfigError(f"[{section.name}] {key}: cannot parse {raw!r}") from None


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(x) for x in raw.replace(",", " ").split())


def _from_parser(cp: configparser.ConfigParser, expected: str | None) -> ExperimentConfig:
    sec = lambda name: cp[name] if cp.has_section(name) else cp[cp.default_section]  # noqa: E731
    exp = sec("experiment").get("kind", expected or "tce").strip().lower()
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {exp!r}")
    if expected is not None and exp != expected:
        raise ConfigError(f"config is for experiment {exp!r}, not {expected!r}")
    base = defaults_for(exp)

    m = sec("model")
    model = m.get("kind", base.model).strip().lower()
    tau = _get(m, "tau", float, base.tau)
    t2 = _get(m, "t2", _floats, base.t2)
    try:
        Correlated(tau) if model == "correlated" else Independent(t2)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    grid_default = default_grid(exp, t2, tau, model)
    d = sec("delays")
    spacing = d.get("spacing", grid_default.spacing).strip().lower()
    grid = DelayGrid(
        _get(d, "start", float, grid_default.start),
        _get(d, "stop", float, grid_default.stop),
        _get(d, "count", int, grid_default.count),
        spacing,
    )

    r = sec("run")
    mc = sec("montecarlo")
    return ExperimentConfig(
        experiment=exp,
        model=model,
        tau=tau,
        t2=t2,
        delays=grid,
        mode=r.get("mode", base.mode).strip().lower(),
        term_by_term=_getbool(r, "term_by_term", base.term_by_term),
        slope_window=_get(r, "slope_window", int, base.slope_window),
        workers=_get(r, "workers", int, base.workers),
        mc_enabled=_getbool(mc, "enabled", base.mc_enabled),
        mc_samples=_get(mc, "samples", int, base.mc_samples),
        mc_seed=_get(mc, "seed", int, base.mc_seed),
        output=sec("output").get("directory", base.output),
        circuit=sec("experiment").get("circuit", None),
    )
