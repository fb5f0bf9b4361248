"""Sectioned ``key = value`` run configuration."""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field, fields
from pathlib import Path

from .coupling import SimConfig
from .errors import ConfigError
from .grid import PhaseGrid
from .initial import InitialConfig


@dataclass(frozen=True)
class GridConfig:
    dim: int = 1
    nx: int = 64
    nv: int = 64
    length: float = 2 * math.pi
    v_max: float = 10.0

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ConfigError("dim must be 1, 2 or 3", key="dim")
        for name in ("nx", "nv"):
            n = getattr(self, name)
            if n < 2 or n & (n - 1):
                raise ConfigError(f"{name} must be a power of two >= 2", key=name)
        if not self.length > 0:
            raise ConfigError("length must be positive", key="length")
        if not self.v_max > 0:
            raise ConfigError("v_max must be positive", key="v_max")

    def build(self) -> PhaseGrid:
        return PhaseGrid.build(self.dim, self.nx, self.nv, self.v_max, self.length)


@dataclass(frozen=True)
class RunManifest:
    config: SimConfig = field(default_factory=SimConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    output_dir: Path | None = None
    emit_fields_every: int = 0


# section -> key -> (target, field name)
SCHEMA = {
    "grid": {k: ("grid", k) for k in ("dim", "nx", "nv", "length", "v_max")},
    "physics": {
        "epsilon": ("config", "epsilon"),
        "mu": ("config", "mu"),
        "drag_enabled": ("config", "drag_enabled"),
        "bgk_enabled": ("config", "bgk_enabled"),
        "regularized_operators": ("config", "regularized_operators"),
    },
    "numerics": {
        k: ("config", k)
        for k in (
            "dt", "t_final", "picard_tol", "picard_max", "mode", "q",
            "interpolation", "box_margin", "seed", "max_retries",
        )
    },
    "output": {"output_dir": ("manifest", "output_dir"), "emit_fields_every": ("manifest", "emit_fields_every")},
    "initial": {
        k: ("initial", k)
        for k in ("kind", "density_amplitude", "bulk_amplitude", "temperature", "flow", "shift", "regularize")
    },
}

_TYPES = {}
for _cls, _target in ((SimConfig, "config"), (GridConfig, "grid"), (InitialConfig, "initial")):
    for _f in fields(_cls):
        _TYPES[(_target, _f.name)] = _f.default
_TYPES[("manifest", "output_dir")] = ""
_TYPES[("manifest", "emit_fields_every")] = 0

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def _arith(node):
    if isinstance(node, ast.Expression):
        return _arith(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_arith(node.left), _arith(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_arith(node.operand))
    raise ValueError("not an arithmetic expression")


def _convert(raw: str, default):
    if isinstance(default, bool):
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(default, int):
        value = _arith(ast.parse(raw, mode="eval"))
        if float(value) != int(value):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(value)
    if isinstance(default, float):
        return float(_arith(ast.parse(raw, mode="eval")))
    return raw


def parse_config(text: str) -> RunManifest:
    """Parse and validate a run configuration; every error names its key and line."""
    values = {"config": {}, "grid": {}, "initial": {}, "manifest": {}}
    where = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        if section is None:
            raise ConfigError("key appears before any section", key=key, line=lineno)
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key in [{section}]", key=key, line=lineno)
        target, name = SCHEMA[section][key]
        try:
            values[target][name] = _convert(raw, _TYPES[(target, name)])
        except (ValueError, SyntaxError, ZeroDivisionError) as exc:
            raise ConfigError(f"cannot parse value {raw!r}: {exc}", key=key, line=lineno) from None
        where[key] = lineno
    try:
        config = SimConfig(**values["config"])
        grid = GridConfig(**values["grid"])
        initial = InitialConfig(**values["initial"])
        every = values["manifest"].get("emit_fields_every", 0)
        if every < 0:
            raise ConfigError("emit_fields_every must be >= 0", key="emit_fields_every")
    except ConfigError as exc:
        raise ConfigError(str(exc).split(": ", 1)[-1], key=exc.key, line=where.get(exc.key)) from None
    out = values["manifest"].get("output_dir") or None
    return RunManifest(config, grid, initial, Path(out) if out else None, every)


def load_config(path) -> RunManifest:
    return parse_config(Path(path).read_text(encoding="utf-8"))
