"""Flat ``key=value`` run configuration and system descriptors.

One assignment per line; ``#`` starts a comment. Keys are dotted names
such as ``system``, ``param.K``, ``orbit.n``, ``cloud.M`` or ``seed``.
"""

from __future__ import annotations

from pathlib import Path

from . import dynamics
from .dynamics import DynamicalSystem


class ConfigError(ValueError):
    pass


class RunConfig(dict):
    """Config dict that remembers every value a pipeline looked up,
    defaults included, in ``resolved``."""

    def __init__(self, *args, **kw):
        super().__init__(*args, **kw)
        self.resolved = {}


def note(cfg, key, value):
    if isinstance(cfg, RunConfig):
        cfg.resolved[key] = list(value) if isinstance(value, tuple) else value
    return value


def parse_config(text: str) -> dict[str, str]:
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        if key in cfg:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        cfg[key] = value
    return cfg


def load_config(path) -> dict[str, str]:
    if path is None:
        return {}
    return parse_config(Path(path).read_text())


def format_config(cfg: dict) -> str:
    return "".join(f"{k}={cfg[k]}\n" for k in sorted(cfg))


def get_int(cfg, key, default):
    if key not in cfg:
        return note(cfg, key, default)
    try:
        return note(cfg, key, int(cfg[key]))
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {cfg[key]!r}") from None


def get_float(cfg, key, default):
    if key not in cfg:
        return note(cfg, key, default)
    try:
        return note(cfg, key, float(cfg[key]))
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {cfg[key]!r}") from None


def get_floats(cfg, key, default) -> tuple:
    if key not in cfg:
        return note(cfg, key, tuple(default))
    try:
        return note(cfg, key, tuple(float(s) for s in cfg[key].split(",") if s.strip()))
    except ValueError:
        raise ConfigError(f"{key} must be a comma-separated list of numbers, got {cfg[key]!r}") from None


def get_ints(cfg, key, default) -> tuple:
    if key not in cfg:
        return note(cfg, key, tuple(default))
    text = cfg[key]
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return note(cfg, key, tuple(range(int(lo), int(hi) + 1)))
        return note(cfg, key, tuple(int(s) for s in text.split(",") if s.strip()))
    except ValueError:
        raise ConfigError(f"{key} must be integers 'a,b,c' or a range 'a..b', got {text!r}") from None


def get_str(cfg, key, default):
    return note(cfg, key, cfg.get(key, default))


def system_from_name(name: str, params: dict | None = None) -> DynamicalSystem:
    """Build a catalog system from a short name.

    ``mul_3`` style names carry the multiplier; parameters (``k``, ``a``,
    ``alpha``, ``K``, ``components``) override the constructor defaults.
    """
    params = dict(params or {})
    name = name.strip()
    if name.startswith("mul_") and name[4:].isdigit():
        params.setdefault("k", name[4:])
        name = "mul_k"
    try:
        if name == "identity":
            return dynamics.identity(params.get("space", "unit_interval"))
        if name == "mul_k":
            return dynamics.mul_k(int(params.get("k", 2)))
        if name == "rotation":
            return dynamics.rotation(float(params["alpha"])) if "alpha" in params else dynamics.rotation()
        if name == "tent":
            return dynamics.tent()
        if name == "logistic":
            return dynamics.logistic(float(params.get("a", 4.0)))
        if name == "cat_map":
            return dynamics.cat_map()
        if name == "standard_map":
            return dynamics.standard_map(float(params.get("K", 1.2)))
        if name == "product":
            parts = params.get("components", "mul_2,rotation").split(",")
            if len(parts) != 2:
                raise ConfigError("param.components needs exactly two system names")
            return dynamics.product(system_from_name(parts[0]), system_from_name(parts[1]))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad parameters for {name}: {exc}") from None
    raise ConfigError(f"unknown system {name!r}")


def system_from_config(cfg: dict, default: str = "mul_2") -> DynamicalSystem:
    params = {k[len("param."):]: v for k, v in cfg.items() if k.startswith("param.")}
    sys = system_from_name(get_str(cfg, "system", default), params)
    note(cfg, "system", sys.name)
    return sys
