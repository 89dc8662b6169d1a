"""Reading and validating variety specification files (JSON)."""

from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path
from typing import Any

from .linalg import StructuralError
from .torus import EndRing, FactorBlock, VarietyConfig


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _int(value: Any, field: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(field, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(field, f"must be >= {minimum}, got {value}")
    return value


def _ring(obj: Any, field: str) -> EndRing:
    if not isinstance(obj, dict):
        raise ConfigError(field, "expected an object")
    kind = obj.get("kind")
    if kind == "Z":
        extra = set(obj) - {"kind"}
        if extra:
            raise ConfigError(f"{field}.{sorted(extra)[0]}", "unexpected key for ring Z")
        return EndRing.integers()
    if kind == "order":
        s = _int(obj.get("s"), f"{field}.s")
        p = _int(obj.get("p"), f"{field}.p", 1)
        if s * s - 4 * p >= 0:
            raise ConfigError(field, f"discriminant s^2 - 4p = {s * s - 4 * p} must be negative")
        return EndRing.order(s, p)
    raise ConfigError(f"{field}.kind", f"expected 'Z' or 'order', got {kind!r}")


def parse_config(data: Any) -> VarietyConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected an object")
    blocks = data.get("blocks")
    if not isinstance(blocks, list) or not blocks:
        raise ConfigError("blocks", "expected a nonempty list")
    out = []
    for i, b in enumerate(blocks):
        where = f"blocks[{i}]"
        if not isinstance(b, dict):
            raise ConfigError(where, "expected an object")
        name = b.get("name", f"B{i + 1}")
        if not isinstance(name, str):
            raise ConfigError(f"{where}.name", "expected a string")
        if "ring" not in b:
            raise ConfigError(f"{where}.ring", "missing")
        ring = _ring(b["ring"], f"{where}.ring")
        k = _int(b.get("multiplicity"), f"{where}.multiplicity", 1)
        degrees = b.get("degrees")
        if not isinstance(degrees, list):
            raise ConfigError(f"{where}.degrees", "expected a list")
        degrees = [_int(d, f"{where}.degrees[{j}]", 1) for j, d in enumerate(degrees)]
        if len(degrees) != k:
            raise ConfigError(f"{where}.degrees", f"length {len(degrees)} != multiplicity {k}")
        out.append(FactorBlock(name, ring, tuple(degrees)))
    rings = [blk.ring for blk in out]
    for i, r in enumerate(rings):
        if r in rings[:i]:
            raise ConfigError(f"blocks[{i}].ring", "duplicates the ring of an earlier block")
    try:
        return VarietyConfig(tuple(out))
    except StructuralError as exc:
        raise ConfigError("blocks", str(exc)) from exc


def load_config(path: str | Path) -> VarietyConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", str(exc)) from exc
    return parse_config(data)


REFERENCE_CONFIGS = ("ExE_Z_principal", "ExE_gaussian_principal", "two_block")


def reference_config_path(name: str) -> Path:
    return Path(str(resources.files("avsub") / "reference_configs" / f"{name}.json"))


def reference_config(name: str) -> VarietyConfig:
    return load_config(reference_config_path(name))


def config_digest(v: VarietyConfig) -> str:
    blob = json.dumps(v.to_json(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
