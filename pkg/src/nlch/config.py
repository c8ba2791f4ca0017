"""Experiment files: flat ``key = value`` INI text.

Sections and keys::

    [domain]     eta, L, n
    [kernel]     c_J                     (required)
    [potential]  name (quartic), c0, c1
    [sim]        eps, lambda, T, dt, scheme, initial_condition, ic_center,
                 ic_width, ic_amplitude, seed, snapshot_stride,
                 fast_convolution, probes
    [sweep]      eps_grid, lambda_grid, reference, threads

Unknown sections or keys are errors, so a typo cannot silently fall back to
a default.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .dynamics import SimConfig
from .errors import ConfigurationError

__all__ = ["ExperimentConfig", "load_config", "parse_config", "parse_grid"]


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text: str):
    return None if text.strip().lower() in ("", "none") else float(text)


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse ``"v1,v2,..."``; the values must be positive and strictly decreasing."""
    try:
        values = tuple(float(v) for v in text.replace(" ", "").split(",") if v != "")
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse grid {text!r}: {exc}") from None
    if not values:
        raise ConfigurationError("empty grid")
    if any(not v > 0 for v in values):
        raise ConfigurationError(f"grid values must be positive: {text!r}")
    if any(b >= a for a, b in zip(values, values[1:])):
        raise ConfigurationError(f"grid must be strictly decreasing: {text!r}")
    return values


# section -> key -> (SimConfig field or None, converter)
_SCHEMA = {
    "domain": {"eta": ("eta", float), "L": ("L", float), "n": ("n", int)},
    "kernel": {"c_J": ("c_J", float)},
    "potential": {"name": (None, str), "c0": ("c0", float), "c1": ("c1", float)},
    "sim": {
        "eps": ("eps", float), "lambda": ("lam", _optional_float), "T": ("T", float),
        "dt": ("dt", float), "scheme": ("scheme", str),
        "initial_condition": ("initial_condition", str),
        "ic_center": ("ic_center", _optional_float), "ic_width": ("ic_width", float),
        "ic_amplitude": ("ic_amplitude", float), "seed": ("seed", int),
        "snapshot_stride": ("snapshot_stride", int),
        "fast_convolution": ("fast_convolution", _bool), "probes": (None, int),
    },
    "sweep": {"eps_grid": (None, parse_grid), "lambda_grid": (None, parse_grid),
              "reference": (None, str), "threads": (None, int)},
}


@dataclass(frozen=True)
class ExperimentConfig:
    sim: SimConfig
    eps_grid: tuple[float, ...] = ()
    lambda_grid: tuple[float, ...] = ()
    reference: str = "direct_P"
    threads: int = 1
    probes: int = 5
    potential: str = "quartic"
    echo: dict = field(default_factory=dict)


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys like ``L`` and ``c_J`` are case sensitive
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigurationError(f"{source}: {exc}") from None

    sim_kw: dict = {}
    extra: dict = {}
    echo: dict = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigurationError(f"{source}: unknown section [{section}]")
        echo[section] = dict(parser[section])
        for key, raw in parser[section].items():
            if key not in _SCHEMA[section]:
                raise ConfigurationError(f"{source}: unknown key {key!r} in [{section}]")
            target, conv = _SCHEMA[section][key]
            try:
                value = conv(raw)
            except ConfigurationError:
                raise
            except ValueError as exc:
                raise ConfigurationError(f"{source}: bad value for {section}.{key}: {exc}") from None
            if target is None:
                extra[key] = value
            else:
                sim_kw[target] = value

    if "c_J" not in sim_kw:
        raise ConfigurationError(f"{source}: missing kernel amplitude c_J in [kernel]")
    potential = extra.get("name", "quartic")
    if potential != "quartic":
        raise ConfigurationError(f"{source}: unsupported potential {potential!r}")
    reference = extra.get("reference", "direct_P")
    if reference not in ("direct_P", "smallest_eps"):
        raise ConfigurationError(f"{source}: reference must be direct_P or smallest_eps")
    threads = extra.get("threads", 1)
    probes = extra.get("probes", 5)
    if threads < 1 or probes < 1:
        raise ConfigurationError(f"{source}: threads and probes must be positive")
    sim = SimConfig(**sim_kw)
    return ExperimentConfig(sim=sim, eps_grid=extra.get("eps_grid", ()),
                            lambda_grid=extra.get("lambda_grid", ()), reference=reference,
                            threads=threads, probes=probes, potential=potential, echo=echo)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path))
