"""Run configuration: key=value files, grid syntax and config hashing."""
import ast
import hashlib
import json
import math
import operator
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .families import FAMILY_NAMES
from .operators import Bipartition, all_bipartitions

SEED_ENV = "DEPHASE_LAB_SEED"
GRID_TOL = 1e-12
OUTPUT_NAMES = ("negativity", "purity", "entropy", "qfi", "coherence", "fringes", "variance")
COMMANDS = ("sweep", "fringes", "variance", "qfi", "coherence", "compare")
COMMAND_OUTPUTS = {
    "sweep": ("negativity", "purity", "entropy", "qfi", "coherence"),
    "compare": ("negativity", "purity", "entropy", "qfi"),
    "fringes": ("fringes",),
    "variance": ("variance",),
    "qfi": ("qfi",),
    "coherence": ("coherence",),
}


class ConfigError(ValueError):
    pass


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv}


def parse_number(text: str) -> float:
    """Evaluate a numeric literal that may use ``pi`` and ``+ - * /``."""
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise ConfigError(f"cannot parse number {text!r}")
    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse number {text!r}") from exc


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` (stop included within 1e-12), a comma list, or one value."""
    text = str(text).strip()
    if not text:
        raise ConfigError("empty grid")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid {text!r} must be start:stop:step")
        start, stop, step = (parse_number(x) for x in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"grid {text!r} needs step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step))
        if start + (count + 1) * step <= stop + GRID_TOL:
            count += 1
        values = start + step * np.arange(count + 1)
        return np.round(values, 12)
    return np.array([parse_number(x) for x in text.split(",")])


def parse_int_range(text: str) -> tuple:
    """``a:b`` or ``a:b:step`` inclusive, comma list, or a single integer."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            a, b, s = parts
            if s <= 0 or b < a:
                raise ConfigError(f"bad integer range {text!r}")
            return tuple(range(a, b + 1, s))
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


def _split(text) -> tuple:
    return tuple(x.strip() for x in str(text).split(",") if x.strip())


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation. Grids and lists keep their textual form; see the ``*_values`` helpers."""

    command: str = "sweep"
    family: str = "ghz"
    n: str = "4"
    mask: Optional[str] = None
    graph: Optional[str] = None
    p: str = "0:1:0.05"
    phi: str = "0:pi:0.01"
    shots: int = 1000
    resamples: int = 10000
    seed: int = 0
    out: str = ""
    partitions: str = "all"
    k: str = "1"
    out_dir: str = "."
    threads: int = 0

    # fields that cannot change any output value
    _NON_SEMANTIC = ("out_dir", "threads")

    def p_values(self) -> np.ndarray:
        return parse_grid(self.p)

    def phi_values(self) -> np.ndarray:
        return parse_grid(self.phi)

    def n_values(self) -> tuple:
        return parse_int_range(self.n)

    def k_values(self) -> tuple:
        return parse_int_range(self.k)

    def outputs(self) -> tuple:
        return _split(self.out)

    def bipartitions(self, n: int) -> list:
        if self.partitions.strip() == "all":
            return all_bipartitions(n)
        try:
            return [Bipartition.parse(lbl, n) for lbl in _split(self.partitions)]
        except ValueError as exc:
            raise ConfigError(f"invalid partition for {n} qubits: {exc}") from exc

    def worker_count(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.family not in FAMILY_NAMES:
            raise ConfigError(f"unknown family {self.family!r}; choose from {', '.join(FAMILY_NAMES)}")
        if self.family.startswith("graph") and not self.graph:
            raise ConfigError("graph family needs --graph FILE")
        p = self.p_values()
        if np.any(p < 0) or np.any(p > 1):
            raise ConfigError("noise strengths must lie in [0, 1]")
        self.phi_values()
        ns = self.n_values()
        if not ns or min(ns) < 2 or max(ns) > 10:
            raise ConfigError("qubit counts must lie in 2..10")
        # graph families take their size from the graph file, checked when it is loaded
        sized = not self.family.startswith("graph")
        if self.mask is not None:
            if set(self.mask) - {"0", "1"} or not self.mask:
                raise ConfigError(f"mask must be a bitstring, got {self.mask!r}")
            if sized and any(len(self.mask) != n for n in ns):
                raise ConfigError("mask length must equal the number of qubits")
        if sized:
            for n in ns:
                self.bipartitions(n)
        unknown = set(self.outputs()) - set(OUTPUT_NAMES)
        if unknown:
            raise ConfigError(f"unknown outputs {sorted(unknown)}")
        misplaced = set(self.outputs()) - set(COMMAND_OUTPUTS[self.command])
        if misplaced:
            raise ConfigError(f"{self.command} cannot produce {sorted(misplaced)}")
        if self.shots < 1:
            raise ConfigError("shots must be positive")
        if self.resamples < 1000:
            raise ConfigError("at least 1000 Monte-Carlo resamples are required for 3-sigma intervals")
        if any(k < 1 for k in self.k_values()):
            raise ConfigError("coherence level k must be >= 1")
        return self

    def semantic_dict(self) -> dict:
        d = asdict(self)
        for key in self._NON_SEMANTIC:
            d.pop(key)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.semantic_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def coerce(key: str, value):
    key = key.replace("-", "_")
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    if value is None:
        return key, None
    if key in ("shots", "resamples", "seed", "threads"):
        try:
            return key, int(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key} must be an integer, got {value!r}") from exc
    return key, str(value)


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        k, v = coerce(key, value)
        out[k] = v
    return out


def build_config(command: str, file_values: dict, overrides: dict) -> RunConfig:
    """Defaults, then config file, then CLI flags; seed falls back to the environment."""
    values = {}
    if os.environ.get(SEED_ENV):
        values.update(dict([coerce("seed", os.environ[SEED_ENV])]))
    values.update(file_values)
    values.update({k: v for k, v in overrides.items() if v is not None})
    values["command"] = command
    if not values.get("out"):
        values["out"] = _default_outputs(command)
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def _default_outputs(command: str) -> str:
    return {
        "sweep": "negativity,purity,entropy,qfi",
        "compare": "negativity,purity,entropy,qfi",
        "fringes": "fringes",
        "variance": "variance",
        "qfi": "qfi",
        "coherence": "coherence",
    }[command]


def config_from_dict(d: dict) -> RunConfig:
    try:
        return replace(RunConfig(), **d).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
