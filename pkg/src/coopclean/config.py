"""Run and bound configuration files.

The format is TOML restricted to scalars, read with ``tomli``.  Keys may be
written at top level, under ``[section]`` headers, as dotted keys or as inline
tables; all of these flatten to the same dotted names.  A file with a
``shape`` key describes a simulation, one with a ``delta`` key a bound.
"""

from __future__ import annotations

import re

import tomli
import tomli_w

from .bounds import BoundDomainError, BoundParams
from .montecarlo import ConfigError, RunConfig
from .spreading import SpreadError, SpreadPolicy

RUN_DEFAULTS = {
    "cutoff": 3000,
    "replications": 1000,
    "seed": 0,
    "cleaner": "sweep",
    "trajectory_every": 0,
    "agents.start": "boundary-first",
}

RUN_KEYS = {"shape", "s0", "cutoff", "replications", "seed", "cleaner",
            "trajectory_every", "agents.k", "agents.start",
            "spread.kind", "spread.p", "spread.d"}
BOUND_KEYS = {"s0", "agents.k", "spread.p", "delta", "s_hat"}
# short spellings accepted at top level
ALIASES = {"k": "agents.k", "p": "spread.p", "d": "spread.d"}


class ConfigParseError(ConfigError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


def _flatten(table: dict, prefix: str = "") -> dict:
    out = {}
    for key, value in table.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, name + "."))
        elif isinstance(value, list):
            raise ConfigParseError(f"key {name!r}: arrays are not supported")
        else:
            out[name] = value
    return out


def _locate(text: str, key: str) -> tuple[int | None, int | None]:
    leaf = key.rsplit(".", 1)[-1]
    pat = re.compile(rf"(^|[\s{{,.]){re.escape(leaf)}\s*=")
    for i, line in enumerate(text.splitlines(), 1):
        m = pat.search(line.split("#", 1)[0])
        if m:
            return i, m.start() + len(m.group(1)) + 1
    return None, None


def read_table(text: str) -> dict:
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        msg = re.sub(r"\s*\(at line \d+, column \d+\)", "", str(exc))
        if m:
            raise ConfigParseError(msg, int(m.group(1)), int(m.group(2))) from None
        raise ConfigParseError(msg) from None
    flat = {}
    for key, value in _flatten(raw).items():
        name = ALIASES.get(key, key)
        if name in flat:
            line, col = _locate(text, key)
            raise ConfigParseError(f"duplicate key {name!r}", line, col)
        flat[name] = value
    return flat


def _check_keys(text: str, flat: dict, allowed: set) -> None:
    for key in flat:
        if key not in allowed:
            line, col = _locate(text, key)
            raise ConfigParseError(f"unknown key {key!r}", line, col)


def _typed(text, flat, key, kind):
    value = flat[key]
    ok = isinstance(value, kind) and not (kind is not bool and isinstance(value, bool))
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if not ok:
        line, col = _locate(text, key)
        raise ConfigParseError(f"{key} must be {kind.__name__}, got {value!r}", line, col)
    return value


def _validation(text, key, exc):
    line, _ = _locate(text, key)
    where = f" (line {line})" if line else ""
    return ConfigError(f"invalid {key}: {exc}{where}")


def parse_config(text: str):
    """Parses ``text`` into a :class:`RunConfig` or a :class:`BoundParams`."""
    flat = read_table(text)
    if "shape" in flat:
        return _run_config(text, flat)
    if "delta" in flat:
        return _bound_params(text, flat)
    raise ConfigError("config needs a 'shape' key (simulation) or a 'delta' key (bound)")


def _policy(text, flat) -> SpreadPolicy:
    kind = flat.get("spread.kind")
    if kind is None:
        if "spread.p" in flat and "spread.d" in flat:
            raise ConfigError("give either spread.p or spread.d, not both")
        kind = "deterministic" if "spread.d" in flat else "uniform"
    if kind not in ("uniform", "deterministic"):
        raise _validation(text, "spread.kind", f"unknown spread kind {kind!r}")
    try:
        if kind == "uniform":
            if "spread.p" not in flat:
                raise ConfigError("uniform spread needs spread.p")
            if "spread.d" in flat:
                raise ConfigError("uniform spread takes no period d")
            return SpreadPolicy.uniform(_typed(text, flat, "spread.p", float))
        if "spread.d" not in flat:
            raise ConfigError("deterministic spread needs spread.d")
        if "spread.p" in flat:
            raise ConfigError("deterministic spread takes no probability p")
        return SpreadPolicy.deterministic(_typed(text, flat, "spread.d", int))
    except SpreadError as exc:
        key = "spread.p" if kind == "uniform" else "spread.d"
        raise _validation(text, key, exc) from None


def _run_config(text, flat) -> RunConfig:
    _check_keys(text, flat, RUN_KEYS)
    for key in ("s0", "agents.k"):
        if key not in flat:
            raise ConfigError(f"missing required key {key!r}")
    merged = {**RUN_DEFAULTS, **flat}
    if merged["agents.start"] != "boundary-first":
        raise _validation(text, "agents.start", "only 'boundary-first' is supported")
    policy = _policy(text, flat)
    try:
        return RunConfig(
            shape=_typed(text, merged, "shape", str),
            s0=_typed(text, merged, "s0", int),
            k=_typed(text, merged, "agents.k", int),
            policy=policy,
            cleaner=_typed(text, merged, "cleaner", str),
            cutoff=_typed(text, merged, "cutoff", int),
            seed=_typed(text, merged, "seed", int),
            replications=_typed(text, merged, "replications", int),
            trajectory_every=_typed(text, merged, "trajectory_every", int),
        )
    except ConfigParseError:
        raise
    except ConfigError as exc:
        raise ConfigError(f"invalid run config: {exc}") from None


def _bound_params(text, flat) -> BoundParams:
    _check_keys(text, flat, BOUND_KEYS)
    for key in ("s0", "agents.k", "spread.p", "delta"):
        if key not in flat:
            raise ConfigError(f"missing required key {key!r}")
    try:
        params = BoundParams(
            s0=_typed(text, flat, "s0", int),
            k=_typed(text, flat, "agents.k", int),
            p=_typed(text, flat, "spread.p", float),
            delta=_typed(text, flat, "delta", float),
            s_hat=_typed(text, flat, "s_hat", int) if "s_hat" in flat else 0,
        )
    except ConfigParseError:
        raise
    except BoundDomainError as exc:
        raise ConfigError(f"invalid bound config: {exc}") from None
    if params.k < 1:
        raise _validation(text, "agents.k", "k must be >= 1")
    return params


def config_table(config) -> dict:
    """Nested table with every value spelled out, defaults included."""
    if isinstance(config, RunConfig):
        spread = config.policy.as_dict()
        return {
            "shape": config.shape,
            "s0": config.s0,
            "cleaner": config.cleaner,
            "cutoff": config.cutoff,
            "replications": config.replications,
            "seed": config.seed,
            "trajectory_every": config.trajectory_every,
            "agents": {"k": config.k, "start": "boundary-first"},
            "spread": spread,
        }
    if isinstance(config, BoundParams):
        return {
            "s0": config.s0,
            "delta": config.delta,
            "s_hat": config.s_hat,
            "agents": {"k": config.k},
            "spread": {"p": config.p},
        }
    raise TypeError(f"cannot serialise {type(config).__name__}")


def emit_config(config) -> str:
    return tomli_w.dumps(config_table(config))
